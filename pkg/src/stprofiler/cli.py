"""Command-line entry point: profile, score, capacity, split, benchmark.

Data goes to files and standard output; diagnostics go to standard error
with a nonzero exit code. Every artifact embeds the seed, tool version and
effective configuration, and contains no timestamps, so identical inputs
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .capacity import CapacityReport, DatasetDims
from .errors import StprofilerError, UnsupportedTaskError
from .forest import RFConfig
from .benchmark import run_benchmark
from .profile import capacity_from_dataset, profile_dataset, summary_lines
from .scores import ScoreConfig, concat_sources, io_score, outlier_score, simb_score, stood_score
from .split import SplitSpec, assign_splits, verify_ood
from .storage import open_dataset

SCORE_KINDS = ("simb", "stood", "io", "outlier", "all")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("STPROFILER_THREADS", "1")))
    except ValueError:
        return 1


def _add_common(parser):
    parser.add_argument("--manifest", required=True, help="dataset manifest path")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=_default_threads(),
                        help="parallelism degree (default from STPROFILER_THREADS)")
    parser.add_argument("--out", default=None, help="output directory for artifacts")


def _score_config(args) -> ScoreConfig:
    return ScoreConfig(
        bins=args.bins,
        sample_cap=args.sample_cap,
        pair_cap=args.pair_cap,
        memory_budget=args.memory_budget,
        seed=args.seed,
    )


def _add_score_flags(parser):
    parser.add_argument("--bins", type=int, default=10_000)
    parser.add_argument("--sample-cap", type=int, default=100_000, dest="sample_cap")
    parser.add_argument("--pair-cap", type=int, default=10_000, dest="pair_cap")
    parser.add_argument("--memory-budget", type=int, default=1_000_000, dest="memory_budget")


def _write_json(out_dir, name, payload) -> Path:
    out_dir = Path(out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stprofiler",
        description="Profile spatio-temporal ML datasets: property scores, "
        "capacity thresholds, ood splits and forest baselines.",
    )
    parser.add_argument("--version", action="version", version=f"stprofiler {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="all scores on all applicable splits plus capacity")
    _add_common(p)
    _add_score_flags(p)

    p = sub.add_parser("score", help="one score kind on selected splits")
    _add_common(p)
    _add_score_flags(p)
    p.add_argument("--score", choices=SCORE_KINDS, default="all")
    p.add_argument("--splits", default="train,val",
                   help="comma-separated; one split for simb/outlier, two for stood")
    p.add_argument("--target", choices=("features", "labels"), default="features")

    p = sub.add_parser("capacity", help="interpolation and smooth-function thresholds")
    p.add_argument("--manifest", default=None)
    p.add_argument("--n", type=int, default=None, help="data point count (overrides row scan)")
    p.add_argument("--shares", default=None, help="s_tr,s_va,s_te")
    p.add_argument("--dx", default=None, help="feature dimension, fixed or min:max")
    p.add_argument("--dy", default=None, help="label dimension, fixed or min:max")
    p.add_argument("--effective-dx", type=int, default=None, dest="effective_dx")
    p.add_argument("--effective-dy", type=int, default=None, dest="effective_dy")
    p.add_argument("--name", default="dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("split", help="generate an out-of-distribution split assignment")
    _add_common(p)
    p.add_argument("--splits", default=None,
                   help="comma-separated source splits to scan (default: all declared)")
    p.add_argument("--spatial-frac", type=float, default=0.0, dest="spatial_frac")
    p.add_argument("--temporal-frac", type=float, default=0.0, dest="temporal_frac")
    p.add_argument("--mode", choices=("union", "intersection"), default="union")
    p.add_argument("--temporal-rule", choices=("any", "all"), default="any", dest="temporal_rule")
    p.add_argument("--val-ratio", type=float, default=0.5, dest="val_ratio")
    p.add_argument("--block", type=int, default=None, help="temporal block size")

    p = sub.add_parser("benchmark", help="random-forest baseline on train/test")
    _add_common(p)
    p.add_argument("--sample-ratio", type=float, default=1.0, dest="sample_ratio")
    p.add_argument("--max-depth", type=int, default=20, dest="max_depth")
    p.add_argument("--trees", type=int, default=128)
    p.add_argument("--task", choices=("regression", "classification"), default="regression")
    p.add_argument("--featurizer", choices=("numeric", "bag-of-words", "molecule"),
                   default="numeric")
    return parser


def cmd_profile(args) -> int:
    dataset = open_dataset(args.manifest)
    report = profile_dataset(dataset, _score_config(args))
    path = _write_json(args.out, "profile.json", report)
    for line in summary_lines(report):
        print(line)
    print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_score(args) -> int:
    dataset = open_dataset(args.manifest)
    config = _score_config(args)
    splits = [s.strip() for s in args.splits.split(",") if s.strip()]
    labels = args.target == "labels"
    cols = dataset.schema.numeric_columns(labels=labels)
    kinds = [k for k in ("simb", "stood", "io", "outlier") if args.score in (k, "all")]
    for kind in kinds:
        if kind == "simb":
            report = simb_score(dataset.column_source(splits[0], cols), cols, config,
                                split=splits[0])
        elif kind == "stood":
            if len(splits) < 2:
                raise StprofilerError("stood needs two splits, e.g. --splits train,val")
            report = stood_score(
                dataset.column_source(splits[0], cols),
                dataset.column_source(splits[1], cols),
                cols, config, splits=(splits[0], splits[1]),
            )
        elif kind == "io":
            f_cols = dataset.schema.numeric_columns(labels=False)
            l_cols = dataset.schema.numeric_columns(labels=True)
            source = concat_sources(
                *[dataset.column_source(s, f_cols + l_cols) for s in splits]
            )
            report = io_score(source, f_cols, l_cols, config, splits=tuple(splits))
        else:
            report = outlier_score(dataset.column_source(splits[0], cols), cols, config,
                                   split=splits[0])
        payload = report.to_dict()
        payload["tool"] = {"name": "stprofiler", "version": __version__}
        name = f"score_{kind}_{'_'.join(report.splits)}.json"
        path = _write_json(args.out, name, payload)
        print(f"{kind:8s} {'/'.join(report.splits):12s} {report.overall:.6f}")
        print(f"wrote {path}", file=sys.stderr)
    return 0


def _parse_dim(text: str):
    if ":" in text:
        lo, hi = text.split(":", 1)
        return (int(lo), int(hi))
    return int(text)


def cmd_capacity(args) -> int:
    if args.manifest:
        dataset = open_dataset(args.manifest)
        report = capacity_from_dataset(dataset, n=args.n)
        name = dataset.schema.name
    else:
        if not (args.n and args.shares and args.dx and args.dy):
            raise StprofilerError("capacity needs --manifest or all of --n --shares --dx --dy")
        s_tr, s_va, s_te = (float(x) for x in args.shares.split(","))
        dims = DatasetDims(n=args.n, s_tr=s_tr, s_va=s_va, s_te=s_te,
                           d_x=_parse_dim(args.dx), d_y=_parse_dim(args.dy))
        report = CapacityReport.from_dims(dims, args.effective_dx, args.effective_dy)
        name = args.name
    payload = report.to_dict()
    payload["tool"] = {"name": "stprofiler", "version": __version__}
    d = payload
    print(
        f"{name}\tn={d['n']}\t{d['shares']['train']:.0%}/{d['shares']['val']:.0%}/"
        f"{d['shares']['test']:.0%}\tdx={d['d_x']}\tdy={d['d_y']}\t"
        f"ipt={d['ipt_display']}\tsft={d['sft_display']}"
    )
    if args.out:
        path = _write_json(args.out, "capacity.json", payload)
        print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_split(args) -> int:
    dataset = open_dataset(args.manifest)
    schema = dataset.schema
    splits = (
        [s.strip() for s in args.splits.split(",") if s.strip()]
        if args.splits
        else dataset.splits
    )
    coord_cols = list(schema.coordinates.time) + list(schema.coordinates.space)
    source = dataset.concat_column_source(splits, coord_cols)
    spec = SplitSpec(
        spatial_fraction=args.spatial_frac,
        temporal_fraction=args.temporal_frac,
        combination=args.mode,
        temporal_rule=args.temporal_rule,
        val_ratio=args.val_ratio,
        seed=args.seed,
        temporal_block=args.block,
    )
    assignment = assign_splits(
        source, schema.coordinates.time, schema.coordinates.space, spec, threads=args.threads
    )
    verify_ood(assignment, source)
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    assignment.save(out_dir / "assignment.csv", out_dir / "assignment_meta.json")
    shares = assignment.shares
    print(
        f"train {shares['train']:.4f}  val {shares['val']:.4f}  test {shares['test']:.4f}"
        f"  (n={len(assignment.labels)})"
    )
    print(f"wrote {out_dir / 'assignment.csv'}", file=sys.stderr)
    return 0


def cmd_benchmark(args) -> int:
    dataset = open_dataset(args.manifest)
    config = RFConfig(
        trees=args.trees,
        max_depth=args.max_depth,
        sample_ratio=args.sample_ratio,
        task=args.task,
        seed=args.seed,
        threads=args.threads,
    )
    result = run_benchmark(dataset, config, featurizer=args.featurizer)
    payload = result.to_dict()
    payload["tool"] = {"name": "stprofiler", "version": __version__}
    print(result.table_row(dataset.schema.name))
    if args.out:
        path = _write_json(args.out, "benchmark.json", payload)
        print(f"wrote {path}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "profile": cmd_profile,
        "score": cmd_score,
        "capacity": cmd_capacity,
        "split": cmd_split,
        "benchmark": cmd_benchmark,
    }
    try:
        return handlers[args.command](args)
    except UnsupportedTaskError as exc:
        print(f"error: UnsupportedTaskError: {exc}", file=sys.stderr)
        print("usage hint: this task cannot be benchmarked with the forest baseline "
              "(unsupported-task)", file=sys.stderr)
        return 1
    except (StprofilerError, FileNotFoundError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
