"""Command-line front end: detect, plan, gen, calibrate, bench.

Exit codes: 0 success, 1 fatal error, 2 success with warnings.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import warnings
from pathlib import Path

from . import curve as curves
from .curve import CurveError, ParametricCurve, SearchConfig, apply_upper_bounds, format_curve, read_curve
from .engine import BlockSet
from .harness import (
    DEFAULT_ST_GRID,
    CalibrationError,
    GenSpec,
    NoFeasibleLTLT,
    calibrate_curve,
    generate_corpus,
    read_labeled_pairs,
    write_ground_truth,
)
from .orchestrator import (
    MODES,
    overlap_stats,
    report_dict,
    run_curve,
    write_json_report,
    write_pairs_csv,
    write_scatter,
)
from .tokenizer import load_corpus, write_blocks

log = logging.getLogger("clonecurve")

JOBS_ENV = "CLONECURVE_JOBS"

EXIT_OK, EXIT_FATAL, EXIT_WARN = 0, 1, 2


class CommandError(Exception):
    pass


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def _parse_single(text: str) -> ParametricCurve:
    try:
        st, ltlt = (int(x) for x in text.split(","))
    except ValueError:
        raise CommandError(f"--single expects ST,LTLT in permille and tokens, got {text!r}") from None
    return ParametricCurve([SearchConfig(st, ltlt)])


def _curve_from(args) -> ParametricCurve:
    if args.preset:
        return curves.preset(args.preset)
    if args.curve:
        return read_curve(args.curve)
    if args.single:
        return _parse_single(args.single)
    raise CommandError("one of --preset, --curve or --single is required")


def _add_curve_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--preset", choices=sorted(curves.PRESETS), help="shipped curve")
    g.add_argument("--curve", metavar="FILE", help="curve file, one st_permille,ltlt[,utlt] per line")
    g.add_argument("--single", metavar="ST,LTLT", help="one configuration, e.g. 750,19")


def _load(args):
    t0 = time.perf_counter()
    blocks, problems = load_corpus(args.corpus, args.granularity)
    return blocks, problems, time.perf_counter() - t0


def cmd_detect(args) -> int:
    curve = _curve_from(args)
    if args.auto_bound and not curve.is_bounded:
        curve = apply_upper_bounds(curve)
    mode = args.mode or ("single" if args.single else "curve-optimized")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    blocks, problems, tokenize_time = _load(args)
    report = run_curve(blocks, curve, mode, parallelism=args.jobs)

    write_pairs_csv(report, blocks, out / "pairs.csv")
    write_scatter(report, out / "scatter.csv")
    write_json_report(report, out / "report.json", tokenize_time=tokenize_time, warnings=len(problems))
    warn_file = out / "warnings.txt"
    if problems:
        warn_file.write_text("".join(f"{w}\n" for w in problems), encoding="utf-8")
    elif warn_file.exists():
        warn_file.unlink()

    redundant, ratio = overlap_stats(report)
    print(
        f"{len(blocks)} blocks, {len(report.pairs)} pairs, mode {mode}, "
        f"{len(report.per_instance)} instances, redundancy {float(ratio):.3f}; "
        f"tokenize {tokenize_time:.3f}s, detect {report.detect_time:.3f}s -> {out}"
    )
    if problems:
        print(f"{len(problems)} warnings, see {warn_file}", file=sys.stderr)
        return EXIT_WARN
    return EXIT_OK


def cmd_plan(args) -> int:
    curve = _curve_from(args)
    if args.preset:
        curve = curve.unbounded()
    sys.stdout.write(format_curve(apply_upper_bounds(curve)))
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = GenSpec(
        seed=args.seed,
        n_blocks=args.n,
        size_range=(args.min_size, args.max_size),
        vocab_size=args.vocab,
        clone_fraction=args.clone_fraction,
        mutation_range=(args.mutation_min, args.mutation_max),
    )
    blocks, truth = generate_corpus(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_blocks(blocks, out / "corpus.txt")
    write_ground_truth(truth, out / "ground_truth.csv")
    print(f"{len(blocks)} blocks, {len(truth)} injected pairs -> {out}")
    return EXIT_OK


def _parse_grid(text: str | None) -> tuple[int, ...]:
    if not text:
        return DEFAULT_ST_GRID
    if ":" in text:
        hi, lo, step = (int(x) for x in text.split(":"))
        return tuple(range(hi, lo - 1, -abs(step)))
    return tuple(int(x) for x in text.split(","))


def cmd_calibrate(args) -> int:
    pairs = read_labeled_pairs(args.labels)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NoFeasibleLTLT)
        curve = calibrate_curve(pairs, _parse_grid(args.grid), args.target, args.min_ltlt)
    text = format_curve(curve)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    skipped = [w.message for w in caught if issubclass(w.category, NoFeasibleLTLT)]
    for w in skipped:
        print(f"warning: {w}: threshold skipped", file=sys.stderr)
    return EXIT_WARN if skipped else EXIT_OK


def cmd_bench(args) -> int:
    curve = _curve_from(args) if (args.preset or args.curve or args.single) else curves.preset("sourcerercc-java")
    blocks, problems, tokenize_time = _load(args)
    t0 = time.perf_counter()
    prepared = BlockSet(blocks)
    prepare_time = time.perf_counter() - t0

    reports = {mode: run_curve(prepared, curve, mode, parallelism=args.jobs) for mode in MODES}
    raw, opt, single = reports["curve-raw"], reports["curve-optimized"], reports["single"]
    lossless = set(raw.pairs) == set(opt.pairs)

    print(f"corpus: {len(blocks)} blocks; tokenize {tokenize_time:.3f}s, index prep {prepare_time:.3f}s")
    print(f"{'mode':<16} {'instances':>9} {'pairs':>8} {'detect_s':>9} {'redundant':>9} {'ratio':>7}")
    for mode in MODES:
        r = reports[mode]
        redundant, ratio = overlap_stats(r)
        print(f"{mode:<16} {len(r.per_instance):>9} {len(r.pairs):>8} {r.detect_time:>9.3f} {redundant:>9} {float(ratio):>7.3f}")
    if raw.detect_time > 0:
        saving = 1 - opt.detect_time / raw.detect_time
        print(f"optimized vs raw detection time: {saving:+.1%} saved")
    if single.pairs:
        print(f"curve vs single pairs: {len(opt.pairs) / len(single.pairs) - 1:+.1%}")
    print(f"optimized == raw pair set: {'yes' if lossless else 'NO'}")
    print(f"curve pairs >= single pairs: {'yes' if len(opt.pairs) >= len(single.pairs) else 'NO'}")

    if args.out:
        data = {mode: report_dict(r) for mode, r in reports.items()}
        for d in data.values():
            d.pop("pairs")
        data["lossless"] = lossless
        data["tokenize_time"] = tokenize_time
        Path(args.out).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    if not lossless or len(opt.pairs) < len(single.pairs):
        return EXIT_FATAL
    return EXIT_WARN if problems else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clonecurve", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def corpus_args(p):
        p.add_argument("corpus", help="source directory, source file, or pre-tokenized block file")
        p.add_argument("--granularity", choices=["method", "braced-block"], default="method")
        p.add_argument("-j", "--jobs", type=int, default=_default_jobs(), help=f"parallel instances (env {JOBS_ENV})")

    p = sub.add_parser("detect", help="run clone detection over a corpus")
    corpus_args(p)
    _add_curve_source(p)
    p.add_argument("--mode", choices=MODES, help="default: single for --single, else curve-optimized")
    p.add_argument("--auto-bound", action="store_true", help="compute upper bounds for a curve file without them")
    p.add_argument("-o", "--out", default="clonecurve-out", help="output directory")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("plan", help="print a curve with its upper length thresholds")
    _add_curve_source(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("gen", help="write a synthetic pre-tokenized corpus with ground truth")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--n", type=int, default=200, help="number of blocks")
    p.add_argument("--min-size", type=int, default=19)
    p.add_argument("--max-size", type=int, default=500)
    p.add_argument("--vocab", type=int, default=GenSpec.vocab_size)
    p.add_argument("--clone-fraction", type=float, default=GenSpec.clone_fraction)
    p.add_argument("--mutation-min", type=float, default=GenSpec.mutation_range[0])
    p.add_argument("--mutation-max", type=float, default=GenSpec.mutation_range[1])
    p.add_argument("-o", "--out", default="clonecurve-gen", help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("calibrate", help="derive a curve from labeled pairs")
    p.add_argument("labels", help="CSV of min_size,similarity_permille,label")
    p.add_argument("--grid", help="HI:LO:STEP or comma list of permille thresholds (default 800:500:10)")
    p.add_argument("--target", type=float, default=0.9, help="target precision")
    p.add_argument("--min-ltlt", type=int, default=19)
    p.add_argument("-o", "--out", help="curve file to write (default: stdout)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("bench", help="compare single, raw curve and optimized curve on one corpus")
    corpus_args(p)
    _add_curve_source(p, required=False)
    p.add_argument("-o", "--out", help="write the comparison as JSON")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except (CurveError, CalibrationError, CommandError, ValueError, OSError) as exc:
        print(f"clonecurve: error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
