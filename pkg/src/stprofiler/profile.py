"""Full dataset profile: every score on its applicable split combinations.

Mirrors the layout of a per-dataset analysis table: sample-imbalance per
split for features and labels, split-shift for (train, val) and
(train, test), one input-output sensitivity value over the whole dataset,
outlier presence per split and overall, plus the capacity thresholds.
"""

from __future__ import annotations

from . import __version__
from .capacity import CapacityReport, DatasetDims
from .scores import (
    ScoreConfig,
    concat_sources,
    io_score,
    outlier_score,
    simb_score,
    stood_score,
)
from .storage import Dataset


def capacity_from_dataset(dataset: Dataset, n: int | None = None) -> CapacityReport:
    """Capacity thresholds from the schema's declared shares and dimensions."""
    schema = dataset.schema
    if n is None:
        n = sum(dataset.row_count(s) for s in dataset.splits)
    shares = schema.split_shares
    dims = DatasetDims(
        n=max(1, n),
        s_tr=shares.get("train", 0.0),
        s_va=shares.get("val", 0.0),
        s_te=shares.get("test", 0.0),
        d_x=schema.dimension(labels=False),
        d_y=schema.dimension(labels=True) if schema.label_components else 1,
    )
    return CapacityReport.from_dims(dims)


def profile_dataset(dataset: Dataset, config: ScoreConfig | None = None,
                    batch_size: int = 8192) -> dict:
    """Compute the full report; sections keyed like the analysis tables."""
    config = config or ScoreConfig()
    schema = dataset.schema
    splits = [s for s in ("train", "val", "test") if s in dataset.splits]
    feature_cols = schema.numeric_columns(labels=False)
    label_cols = schema.numeric_columns(labels=True)

    def src(split, cols):
        return dataset.column_source(split, cols, batch_size)

    report: dict = {
        "tool": {"name": "stprofiler", "version": __version__},
        "dataset": {"name": schema.name, "splits": splits},
        "config": config.echo(),
        "scores": {},
    }

    simb: dict = {"features": {}, "labels": {}}
    for split in splits:
        simb["features"][split] = simb_score(
            src(split, feature_cols), feature_cols, config, split=split
        ).to_dict()
        if label_cols:
            simb["labels"][split] = simb_score(
                src(split, label_cols), label_cols, config, split=split
            ).to_dict()
    report["scores"]["simb"] = simb

    stood: dict = {"features": {}, "labels": {}}
    if "train" in splits:
        for other in ("val", "test"):
            if other not in splits:
                continue
            stood["features"][other] = stood_score(
                src("train", feature_cols), src(other, feature_cols),
                feature_cols, config, splits=("train", other),
            ).to_dict()
            if label_cols:
                stood["labels"][other] = stood_score(
                    src("train", label_cols), src(other, label_cols),
                    label_cols, config, splits=("train", other),
                ).to_dict()
    report["scores"]["stood"] = stood

    if feature_cols and label_cols:
        everything = concat_sources(*[src(s, feature_cols + label_cols) for s in splits])
        report["scores"]["io"] = io_score(
            everything, feature_cols, label_cols, config, splits=tuple(splits)
        ).to_dict()

    outlier: dict = {}
    for split in splits:
        outlier[split] = outlier_score(
            src(split, feature_cols), feature_cols, config, split=split
        ).to_dict()
    if len(splits) > 1:
        outlier["overall"] = outlier_score(
            concat_sources(*[src(s, feature_cols) for s in splits]),
            feature_cols, config, split="overall",
        ).to_dict()
    report["scores"]["outlier"] = outlier

    n_total = sum(dataset.row_count(s) for s in splits)
    report["dataset"]["row_counts"] = {s: dataset.row_count(s) for s in splits}
    report["capacity"] = capacity_from_dataset(dataset, n=n_total).to_dict()
    return report


def summary_lines(report: dict) -> list[str]:
    """Flat text rendering of a profile report for the console."""
    lines = [f"dataset {report['dataset']['name']}"]
    scores = report.get("scores", {})
    for side in ("features", "labels"):
        entries = scores.get("simb", {}).get(side, {})
        for split, sub in entries.items():
            lines.append(f"simb {side:8s} {split:8s} {sub['overall']:.4f}")
    for side in ("features", "labels"):
        entries = scores.get("stood", {}).get(side, {})
        for split, sub in entries.items():
            lines.append(f"stood {side:8s} train/{split:5s} {sub['overall']:.4f}")
    if "io" in scores:
        lines.append(f"io score            {scores['io']['overall']:.4f}")
    for split, sub in scores.get("outlier", {}).items():
        lines.append(f"outlier  {split:8s}    {sub['overall']:.4f}")
    cap = report.get("capacity")
    if cap:
        lines.append(
            f"capacity n={cap['n']} ipt={cap['ipt']} ({cap['ipt_display']}) "
            f"sft={cap['sft']} ({cap['sft_display']})"
        )
    return lines
