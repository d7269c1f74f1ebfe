from __future__ import annotations

import json
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping

from . import __version__
from .config import sha256_file


def now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def build_manifest(command: str, argv: list[str], inputs: Mapping[str, str], seeds: Mapping[str, int],
                   started: str, details: Mapping[str, Any] | None = None,
                   config_path: str | None = None) -> dict:
    """Everything needed to rerun a command: inputs with hashes, seeds, config."""
    files = {}
    for key, path in sorted(inputs.items()):
        p = Path(path)
        files[key] = {"path": str(p), "sha256": sha256_file(p) if p.is_file() else None}
    return {
        "tool": "botalign",
        "tool_version": __version__,
        "python": platform.python_version(),
        "command": command,
        "argv": list(argv),
        "config_path": config_path,
        "config_sha256": sha256_file(config_path) if config_path else None,
        "inputs": files,
        "seeds": dict(seeds),
        "started_at": started,
        "finished_at": now(),
        **({"details": dict(details)} if details else {}),
    }


def write_manifest(manifest: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def default_argv() -> list[str]:
    return list(sys.argv)
