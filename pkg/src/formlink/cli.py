"""Command-line surface: validate, pairs, train-baseline, link,
evaluate, candidate-recall.

Exit codes: 0 success, 1 data error, 2 usage error. Every output
artifact embeds the run configuration and tool version, so reruns with
identical configuration and a deterministic scorer are byte-identical.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

from . import __version__
from .errors import FormlinkError
from .fixtures import fixture_split
from .funsd import Form, load_corpus, validate_corpus
from .geometry import DistanceMode, candidate_recall
from .linking import decode_corpus, read_predictions, write_predictions
from .metrics import evaluate, report_table
from .pairs import NegativePolicy, build_pairs, read_pairs, write_pairs
from .scoring import (BaselineModel, ConstantScorer, ExternalScorerSession,
                      OracleScorer, train_baseline)


def _positive_int_or_inf(value: str) -> int | None:
    if value.lower() in ("inf", "none", "unbounded"):
        return None
    k = int(value)
    if k < 1:
        raise argparse.ArgumentTypeError("k must be >= 1 (or 'inf')")
    return k


def _radius(value: str) -> float | None:
    if value.lower() in ("inf", "none", "unbounded"):
        return None
    r = float(value)
    if r < 0:
        raise argparse.ArgumentTypeError("radius must be >= 0 (or 'inf')")
    return r


def _unit_interval(value: str) -> float:
    t = float(value)
    if not 0.0 <= t <= 1.0:
        raise argparse.ArgumentTypeError("must be in [0,1]")
    return t


def _add_geometry_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=_positive_int_or_inf, default=10,
                   help="candidates per answer; 'inf' for all questions")
    p.add_argument("--radius", type=_radius, default=None,
                   help="candidate distance cutoff in pixels; default unbounded")
    p.add_argument("--mode", choices=[m.value for m in DistanceMode],
                   default=DistanceMode.CENTER_EUCLIDEAN.value,
                   help="box distance: center or edge")


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--data", help="directory of annotation JSON files")
    group.add_argument("--fixtures", choices=["train", "test"],
                       help="use the bundled synthetic corpus split")


def _load_forms(args) -> list[Form]:
    if args.fixtures:
        train, test = fixture_split()
        return train if args.fixtures == "train" else test
    return load_corpus(args.data)


def _config_echo(args, keys: list[str]) -> dict:
    echo = {k: getattr(args, k) for k in keys}
    return {"tool": "formlink", "version": __version__, "config": echo}


def _make_scorer(spec: str, forms: list[Form], batch_size: int, timeout: float):
    if spec == "oracle":
        return OracleScorer.from_forms(forms)
    if spec.startswith("constant:"):
        return ConstantScorer(float(spec.split(":", 1)[1]))
    if spec.startswith("baseline:"):
        return BaselineModel.load(spec.split(":", 1)[1])
    if spec.startswith("external:"):
        return ExternalScorerSession(command=spec.split(":", 1)[1],
                                     batch_size=batch_size, timeout=timeout)
    if spec.startswith("tcp:"):
        return ExternalScorerSession(address=spec.split(":", 1)[1],
                                     batch_size=batch_size, timeout=timeout)
    raise argparse.ArgumentTypeError(
        f"unknown scorer {spec!r}; expected oracle, constant:V, baseline:PATH, "
        "external:CMD, or tcp:HOST:PORT")


def cmd_validate(args) -> int:
    stats = validate_corpus(args.directory)
    if args.json:
        print(json.dumps(stats.to_dict(), ensure_ascii=False, sort_keys=True,
                         indent=2))
    else:
        d = stats.to_dict()
        print(f"files {d['files']}  entities {d['entities']}  words {d['words']}")
        print(f"gold question→answer links {d['gold_links']}  "
              f"discarded link pairs {d['discarded_links']}")
        print("entities by label: " + ", ".join(
            f"{k}={v}" for k, v in d["label_counts"].items()))
        print("answers by gold multiplicity: " + ", ".join(
            f"m={k}: {v}" for k, v in d["answers_by_multiplicity"].items()))
        for w in stats.warnings:
            print(f"warning: {w}", file=sys.stderr)
        for f, msg in stats.errors:
            print(f"error: {f}: {msg}", file=sys.stderr)
    return 1 if stats.errors else 0


def cmd_pairs(args) -> int:
    forms = _load_forms(args)
    policy = (NegativePolicy.all() if args.negatives == "all"
              else NegativePolicy.balanced(int(args.negatives)))
    mode = DistanceMode(args.mode)
    examples = []
    missed = 0
    for form in forms:
        result = build_pairs(form, k=args.k, radius=args.radius, mode=mode,
                             policy=policy)
        examples.extend(result.examples)
        missed += result.gold_missed_by_candidates
    meta = _config_echo(args, ["data", "fixtures", "k", "radius", "mode",
                               "negatives"])
    meta["gold_missed_by_candidates"] = missed
    buf = io.StringIO()
    write_pairs(examples, buf, meta=meta)
    Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    print(f"wrote {len(examples)} pairs to {args.out} "
          f"({missed} gold links outside candidate sets)")
    return 0


def cmd_train_baseline(args) -> int:
    examples = read_pairs(args.pairs)
    model = train_baseline(examples, epochs=args.epochs,
                           learning_rate=args.learning_rate, seed=args.seed)
    model.save(args.out)
    losses = ", ".join(f"{x:.4f}" for x in model.epoch_losses)
    print(f"trained on {len(examples)} pairs; per-epoch log-loss: {losses}")
    print(f"model written to {args.out}")
    return 0


def cmd_link(args) -> int:
    forms = _load_forms(args)
    mode = DistanceMode(args.mode)
    scorer = _make_scorer(args.scorer, forms, args.batch_size, args.timeout)
    try:
        predictions, failures = decode_corpus(
            forms, scorer, k=args.k, radius=args.radius, mode=mode,
            threshold=args.threshold, max_links=args.max_links,
            keep_going=args.keep_going,
            jobs=args.jobs if not args.scorer.startswith(("external:", "tcp:")) else 1)
    finally:
        if isinstance(scorer, ExternalScorerSession):
            scorer.close()
    meta = _config_echo(args, ["data", "fixtures", "k", "radius", "mode",
                               "scorer", "threshold", "max_links"])
    buf = io.StringIO()
    write_predictions(predictions, buf, meta=meta)
    Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    for name, msg in failures:
        print(f"error: {name}: {msg}", file=sys.stderr)
    print(f"wrote predictions for {len(predictions)} forms to {args.out}")
    return 1 if failures else 0


def cmd_evaluate(args) -> int:
    forms = _load_forms(args)
    predictions = read_predictions(args.pred)
    report = evaluate(predictions, forms)
    meta = _config_echo(args, ["data", "fixtures", "pred"])
    if args.out:
        Path(args.out).write_text(report.to_json(meta=meta) + "\n",
                                  encoding="utf-8")
    if args.json:
        print(report.to_json(meta=meta))
    else:
        print(report_table(report))
    return 0


def cmd_candidate_recall(args) -> int:
    forms = _load_forms(args)
    mode = DistanceMode(args.mode)
    recall = candidate_recall(forms, k=args.k, radius=args.radius, mode=mode)
    print(f"candidate recall at k={'inf' if args.k is None else args.k}, "
          f"radius={'inf' if args.radius is None else args.radius}, "
          f"mode={mode.value}: {recall:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formlink",
        description="Form entity linking toolkit: candidate generation, "
                    "pair scoring, link decoding, and ranking metrics.")
    parser.add_argument("--version", action="version",
                        version=f"formlink {__version__}")
    parser.add_argument("--error-json", action="store_true",
                        help="report failures as machine-readable JSON on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and summarize an annotation directory")
    p.add_argument("directory")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("pairs", help="build the labeled pair-classification file")
    _add_data_flags(p)
    _add_geometry_flags(p)
    p.add_argument("--negatives", default="all", metavar="all|R",
                   help="negative policy: 'all' or max negatives per positive")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("train-baseline", help="train the hashed n-gram logistic scorer")
    p.add_argument("--pairs", required=True)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("link", help="run the full linking pipeline")
    _add_data_flags(p)
    _add_geometry_flags(p)
    p.add_argument("--scorer", required=True,
                   help="oracle | constant:V | baseline:PATH | external:CMD | tcp:HOST:PORT")
    p.add_argument("--threshold", type=_unit_interval, default=0.5)
    p.add_argument("--max-links", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=64,
                   help="external scorer requests per flush")
    p.add_argument("--timeout", type=float, default=60.0,
                   help="external scorer per-batch timeout in seconds")
    p.add_argument("--keep-going", action="store_true",
                   help="continue past per-form failures")
    p.add_argument("--jobs", type=int, default=1,
                   help="forms decoded in parallel (deterministic merge order)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("evaluate", help="score a predictions file against gold")
    _add_data_flags(p)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--json", action="store_true", help="print the JSON report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("candidate-recall",
                       help="fraction of gold links reachable at the given k/radius")
    _add_data_flags(p)
    _add_geometry_flags(p)
    p.set_defaults(func=cmd_candidate_recall)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "max_links", 1) < 1:
        parser.error("--max-links must be >= 1")
    try:
        return args.func(args)
    except FormlinkError as exc:
        if args.error_json:
            print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
                  file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
