"""Command-line entry point: ``masses evaluate | analyze | compare``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from masses.answers import NormalizationConfig
from masses.errors import MassesError
from masses.report import (
    RunConfig,
    analyze,
    compare_records,
    evaluate,
    read_jsonl,
    write_compare,
)

log = logging.getLogger("masses")

EXIT_OK = 0


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _modes(text):
    modes = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in modes if m not in ("acm", "mcm")]
    if bad or not modes:
        raise argparse.ArgumentTypeError(f"WUPS modes must be drawn from acm,mcm; got {text!r}")
    return modes


def _add_data_args(p):
    p.add_argument("--annotations", required=True, help="annotation file")
    p.add_argument("--format", dest="annotation_format", default="vqa-json", choices=["vqa-json", "simple-jsonl"])
    sim = p.add_mutually_exclusive_group()
    sim.add_argument("--embeddings", help="word-vector text file used for SeS")
    sim.add_argument("--fixture-backend", help="JSON answer->vector or answer->label map used for SeS")
    p.add_argument("--ses-thresholds", type=_floats, default=[0.7, 0.9], help="comma-separated, default 0.7,0.9")
    p.add_argument("--bins", type=int, default=10, help="histogram bin count")
    p.add_argument("--include-degenerate", action="store_true",
                   help="count single-annotation samples in S/SeS/MaS/MaSSeS means (S taken as 1)")
    p.add_argument("--histogram-csv", action="store_true", help="also write one CSV per histogram")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--round", type=int, default=None, metavar="K", help="round the printed summary to K decimals")
    p.add_argument("--out", required=True, help="output directory")

    norm = p.add_argument_group("normalization")
    norm.add_argument("--no-normalize", action="store_true", help="compare answers verbatim")
    norm.add_argument("--no-lowercase", action="store_true")
    norm.add_argument("--no-punctuation", action="store_true")
    norm.add_argument("--no-word-numbers", action="store_true")
    norm.add_argument("--no-articles", action="store_true")
    norm.add_argument("--no-contractions", action="store_true")
    norm.add_argument("--no-collapse-whitespace", action="store_true")
    norm.add_argument("--normalization-tables", help="JSON file replacing the contraction/number/article/punctuation tables")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="masses", description="MaSSeS evaluation for open-ended VQA.")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="score predictions against annotations")
    _add_data_args(ev)
    ev.add_argument("--predictions", required=True, help="JSON array of {question_id, answer}")
    ev.add_argument("--taxonomy", help="taxonomy file enabling WUPS")
    ev.add_argument("--wups-threshold", type=float, default=0.9)
    ev.add_argument("--wups-mode", type=_modes, default=["acm", "mcm"], help="acm, mcm or acm,mcm")
    ev.add_argument("--wups-hard-cut", action="store_true", help="score 0 (instead of 0.1x) below the WUPS threshold")
    ev.add_argument("--unmatched-tolerance", type=float, default=0.0,
                    help="fraction of unresolved ids tolerated before aborting (default 0)")

    an = sub.add_parser("analyze", help="dataset reliability analysis without predictions")
    _add_data_args(an)

    cmp_ = sub.add_parser("compare", help="compare two runs, or two metrics within one run")
    cmp_.add_argument("--left", help="per-sample JSONL of the first run")
    cmp_.add_argument("--right", help="per-sample JSONL of the second run")
    cmp_.add_argument("--run", help="per-sample JSONL of a single run")
    cmp_.add_argument("--metrics", default=None,
                      help="metric pair A,B for --run (default vqa3plus,masses_0.9); single metric or pair for --left/--right")
    cmp_.add_argument("--ses-threshold", type=float, default=0.9, help="SeS threshold for the accuracy-by-SeS bins")
    cmp_.add_argument("--bins", type=int, default=10)
    cmp_.add_argument("--out", required=True)
    return parser


def _normalization(args) -> NormalizationConfig:
    if args.no_normalize:
        cfg = NormalizationConfig.disabled()
    else:
        cfg = NormalizationConfig(
            lowercase=not args.no_lowercase,
            punctuation_rules=not args.no_punctuation,
            word_numbers_to_digits=not args.no_word_numbers,
            strip_articles=not args.no_articles,
            expand_contractions=not args.no_contractions,
            collapse_whitespace=not args.no_collapse_whitespace,
        )
    if args.normalization_tables:
        cfg = cfg.with_tables(args.normalization_tables)
    return cfg


def _run_config(args) -> RunConfig:
    kwargs = dict(
        annotations=args.annotations,
        annotation_format=args.annotation_format,
        embeddings=args.embeddings,
        fixture_backend=args.fixture_backend,
        ses_thresholds=args.ses_thresholds,
        bins=args.bins,
        include_degenerate=args.include_degenerate,
        histogram_csv=args.histogram_csv,
        workers=args.workers,
        normalization=_normalization(args),
        out_dir=args.out,
    )
    if args.command == "evaluate":
        kwargs.update(
            predictions=args.predictions,
            taxonomy=args.taxonomy,
            wups_threshold=args.wups_threshold,
            wups_modes=args.wups_mode,
            wups_hard_cut=args.wups_hard_cut,
            unmatched_tolerance=args.unmatched_tolerance,
        )
    try:
        return RunConfig(**kwargs)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _fmt(v, digits):
    if v is None:
        return "-"
    return f"{v:.{digits}f}" if digits is not None else repr(v)


def print_summary(summary, digits=None, stream=None):
    stream = stream or sys.stdout
    counts = summary["counts"]
    print("  ".join(f"{k}={counts[k]}" for k in sorted(counts)), file=stream)
    width = max((len(k) for k in summary["means"]), default=0)
    for key, value in summary["means"].items():
        print(f"{key:<{width}}  {_fmt(value, digits)}", file=stream)


def _compare(args):
    if args.run and (args.left or args.right):
        raise argparse.ArgumentTypeError("use either --run or --left/--right")
    if args.run:
        metrics = (args.metrics or "vqa3plus,masses_0.9").split(",")
        if len(metrics) != 2:
            raise argparse.ArgumentTypeError("--metrics needs exactly two names with --run")
        records = read_jsonl(args.run)
        left, right = records, records
    elif args.left and args.right:
        metrics = (args.metrics or "masses_0.9").split(",")
        if len(metrics) == 1:
            metrics = metrics * 2
        if len(metrics) != 2:
            raise argparse.ArgumentTypeError("--metrics takes one or two names")
        left, right = read_jsonl(args.left), read_jsonl(args.right)
    else:
        raise argparse.ArgumentTypeError("compare needs --run or both --left and --right")
    result = compare_records(left, right, metrics[0].strip(), metrics[1].strip(), args.bins, args.ses_threshold)
    write_compare(result, args.out)
    print(f"compared={result['compared']} skipped={result['skipped']} "
          f"mean_delta={_fmt(result['mean_delta'], 4)} mean_abs_delta={_fmt(result['mean_abs_delta'], 4)}")
    return result


def _setup_logging():
    level = os.environ.get("MASSES_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "compare":
            _compare(args)
        else:
            config = _run_config(args)
            result = evaluate(config) if args.command == "evaluate" else analyze(config)
            print_summary(result.summary, args.round)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except MassesError as exc:
        print(f"masses: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
