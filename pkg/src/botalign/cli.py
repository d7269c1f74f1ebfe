"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data or I/O error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

from . import __version__
from .accommodation import AccommodationError, alignment_report, report_csv
from .config import (
    ConfigError, build_datasets, load_experiment, load_experiment_embeddings, read_config,
)
from .corpus import (
    ADAPTER_FORMATS, CorpusError, Label, dump_canonical, import_adapter, load_canonical, prepare,
    stats,
)
from .evaluation import (
    ExperimentError, config_dict, cross_markdown, cross_matrix, in_domain_markdown,
    reports_csv, reports_json, train_pipeline,
)
from .features import FeatureError, FeatureFamily, Featurizer, Variant
from .lexicon import WORKING_CATEGORIES, LexiconError, resolve_lexicon
from .manifest import build_manifest, now, write_manifest
from .models import feature_importance, model_to_dict
from .synth import (
    SynthConfig, SynthError, benchmark_configs, category_words, generate,
    lexicon_fillers, make_detection_benchmark,
)

log = logging.getLogger("botalign")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

DATA_ERRORS = (AccommodationError, ConfigError, CorpusError, ExperimentError, FeatureError,
               LexiconError, SynthError, OSError, json.JSONDecodeError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def _emit(args, text_by_format: dict[str, str]) -> None:
    sys.stdout.write(text_by_format[args.format])


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# -- subcommands ------------------------------------------------------------

def cmd_import(args) -> None:
    started = now()
    corpus = import_adapter(args.adapter, args.input, Label(args.label), args.source)
    out = Path(args.out)
    _write(out, dump_canonical(corpus))
    write_manifest(build_manifest("import", args.argv, {"input": args.input}, {}, started,
                                  {"adapter": args.adapter, "label": args.label,
                                   "source": args.source, "n_dialogues": len(corpus)}),
                   out.with_name(out.name + ".manifest.json"))
    log.info("wrote %d dialogues to %s", len(corpus), out)


def cmd_stats(args) -> None:
    corpus = load_canonical(args.corpus)
    s = stats(corpus)
    text = json.dumps(s.as_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        _write(Path(args.out), text)
    sys.stdout.write(text)


def cmd_align(args) -> None:
    started = now()
    lex = resolve_lexicon(args.lexicon)
    corpus, dropped = prepare(load_canonical(args.corpus))
    rows = alignment_report(corpus, lex, _categories(args, lex))
    text = report_csv(rows)
    out = Path(args.out) if args.out else None
    if out:
        _write(out, text)
        inputs = {"corpus": args.corpus, **({"lexicon": args.lexicon} if args.lexicon else {})}
        write_manifest(build_manifest("align", args.argv, inputs, {}, started,
                                      {"dropped_dialogues": dropped}),
                       out.with_name(out.name + ".manifest.json"))
    else:
        sys.stdout.write(text)


def _categories(args, lex):
    if getattr(args, "all_categories", False):
        return lex.names
    lex.require(WORKING_CATEGORIES)
    return list(WORKING_CATEGORIES)


def cmd_synth(args) -> None:
    started = now()
    raw = read_config(args.config)
    lex = resolve_lexicon(args.lexicon or raw.get("lexicon"))
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    if "benchmark" in raw:
        b = dict(raw["benchmark"])
        hh, hb = benchmark_configs(
            lex, n_per_class=int(b.get("n_per_class", 500)),
            n_utterances=int(b.get("n_utterances", 20)), q=float(b.get("q", 0.5)),
            human_human=tuple(b.get("human_human", (0.8, 0.2))),
            human_bot=tuple(b.get("human_bot", (0.5, 0.5))), seed=seed)
        corpus = make_detection_benchmark(hh, hb, name=b.get("name", "synth-benchmark"))
        details = {"human_human": hh.to_dict(), "human_bot": hb.to_dict()}
    else:
        cfg_raw = {k: v for k, v in raw.items() if k not in ("lexicon", "rates")}
        cfg_raw["seed"] = seed
        if "categories" not in cfg_raw:
            rates = raw.get("rates", {"q": 0.5, "p1": 0.8, "p0": 0.2})
            cfg_raw["categories"] = {c: {"word": w, **rates} for c, w in category_words(lex).items()}
            cfg_raw.setdefault("filler_vocab", list(lexicon_fillers(lex)))
        cfg = SynthConfig.from_dict(cfg_raw)
        corpus = generate(cfg)
        details = {"config": cfg.to_dict()}
    out = Path(args.out)
    _write(out, dump_canonical(corpus))
    write_manifest(build_manifest("synth", args.argv, {}, {"seed": seed}, started, details,
                                  config_path=args.config),
                   out.with_name(out.name + ".manifest.json"))
    log.info("wrote %d synthetic dialogues to %s", len(corpus), out)


def cmd_features(args) -> None:
    lex = resolve_lexicon(args.lexicon)
    corpus, _ = prepare(load_canonical(args.corpus))
    feats = Featurizer(FeatureFamily(args.family), Variant(args.variant), lexicon=lex).fit(corpus)
    text = feats.transform(corpus).to_csv()
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)


def _experiment(args):
    exp = load_experiment(args.config, n_trees=args.n_trees, seed=args.seed)
    if args.lexicon:
        exp.lexicon_path = Path(args.lexicon)
    lex = resolve_lexicon(exp.lexicon_path)
    datasets = build_datasets(exp)
    embeddings = load_experiment_embeddings(exp, datasets)
    return exp, lex, datasets, embeddings


def _run_matrix(args, command: str, in_domain: bool) -> None:
    started = now()
    exp, lex, datasets, embeddings = _experiment(args)
    if in_domain:
        pairs = [(g, g) for g in datasets]
    else:
        if len(datasets) < 2 and exp.pairs is None:
            log.warning("only one dataset: the cross table holds the diagonal only")
        pairs = exp.pairs
    result = cross_matrix(datasets, exp.specs, pairs, lex, embeddings, exp.seed, args.threads)
    out = Path(args.out)
    stem = "in_domain" if in_domain else "cross"
    md = in_domain_markdown(result.cells) if in_domain else cross_markdown(result)
    texts = {"json": reports_json(result.cells, None if in_domain else result.averages),
             "csv": reports_csv(result.cells), "md": md}
    for fmt, text in texts.items():
        _write(out / f"{stem}.{fmt}", text)
    chosen = {f"{c.pipeline} | {c.source}": c.chosen_config for c in result.cells}
    write_manifest(build_manifest(command, args.argv, exp.input_files(), {"experiment": exp.seed},
                                  started, {"pipelines": [s.to_dict() for s in exp.specs],
                                            "pairs": result.pairs, "chosen_configs": chosen},
                                  config_path=args.config),
                   out / "manifest.json")
    _emit(args, texts)


def cmd_eval(args) -> None:
    _run_matrix(args, "eval", in_domain=True)


def cmd_cross(args) -> None:
    _run_matrix(args, "cross", in_domain=False)


def cmd_train(args) -> None:
    started = now()
    exp, lex, datasets, embeddings = _experiment(args)
    out = Path(args.out)
    summary = []
    for g, splits in datasets.items():
        for spec in exp.specs:
            trained = train_pipeline(splits, spec, lex, embeddings, exp.seed, args.threads)
            names = trained.featurizer.feature_names if trained.featurizer else []
            path = out / "models" / f"{_slug(g)}__{_slug(spec.name)}.json"
            obj = model_to_dict(trained.model, names)
            obj["pipeline"] = spec.to_dict()
            obj["featurizer"] = trained.featurizer.state() if trained.featurizer else None
            obj["chosen_config"] = config_dict(trained.chosen)
            _write(path, json.dumps(obj, sort_keys=True) + "\n")
            entry = {"dataset": g, "pipeline": spec.name, "model_file": str(path.relative_to(out)),
                     "chosen_config": config_dict(trained.chosen),
                     "grid_scores": trained.grid_scores, "digest": trained.digest()}
            if trained.model.kind == "forest":
                entry["top_features"] = [[n, v] for n, v in feature_importance(trained.model, names)[:10]]
            summary.append(entry)
    text = json.dumps({"models": summary}, indent=2, sort_keys=True) + "\n"
    _write(out / "train.json", text)
    write_manifest(build_manifest("train", args.argv, exp.input_files(), {"experiment": exp.seed},
                                  started, {"pipelines": [s.to_dict() for s in exp.specs]},
                                  config_path=args.config),
                   out / "manifest.json")
    sys.stdout.write(text)


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--lexicon", help="LIWC-style .dic file (default: bundled fallback)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--threads", type=int, default=1, help="worker count (results do not depend on it)")
    common.add_argument("--format", choices=("json", "csv", "md"), default="md",
                        help="format printed to stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="botalign", description="Bot detection from human language style and accommodation.")
    p.add_argument("--version", action="version", version=f"botalign {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("import", parents=[common], help="convert a raw dataset to canonical JSONL")
    s.add_argument("adapter", choices=ADAPTER_FORMATS)
    s.add_argument("input")
    s.add_argument("--label", required=True, choices=[lab.value for lab in Label])
    s.add_argument("--source", required=True, help="dataset tag stored on every dialogue")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_import)

    s = sub.add_parser("stats", parents=[common], help="corpus summary statistics")
    s.add_argument("corpus")
    s.add_argument("--out")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("align", parents=[common], help="group alignment report (CSV)")
    s.add_argument("corpus")
    s.add_argument("--out")
    s.add_argument("--all-categories", action="store_true",
                   help="report every lexicon category, not only the 17 working ones")
    s.set_defaults(func=cmd_align)

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    s.add_argument("config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("features", parents=[common], help="export a feature matrix (CSV)")
    s.add_argument("corpus")
    s.add_argument("--family", required=True, choices=[f.value for f in FeatureFamily
                                                        if f is not FeatureFamily.EMBEDDING])
    s.add_argument("--variant", default="human", choices=[v.value for v in Variant])
    s.add_argument("--out")
    s.set_defaults(func=cmd_features)

    for name, func, text in (("train", cmd_train, "grid-search and save models"),
                             ("eval", cmd_eval, "in-domain (source -> source) table"),
                             ("cross", cmd_cross, "cross-dataset table")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("config")
        s.add_argument("--out", required=True, help="output directory")
        s.add_argument("--n-trees", type=int, help="override forest size for every pipeline")
        s.set_defaults(func=func)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = ["botalign", *(sys.argv[1:] if argv is None else argv)]
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except DATA_ERRORS as exc:
        print(f"botalign {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"botalign {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
