"""Bot detection from the known human's language style and accommodation."""

__version__ = "0.1.0"
