"""Walkthrough: the four dataset property scores.

All four live on [0, 1] and average per-column sub-scores:

* sample imbalance   -- JSD of each feature's histogram vs uniform
* split shift        -- JSD between two splits' histograms per feature
* input-output       -- arctan-normalized |dlabel/dfeature| along sorted features
* outlier presence   -- piecewise per-point score from Tukey's fences
"""

import numpy as np

from stprofiler import (
    ScoreConfig,
    array_source,
    io_score,
    outlier_score,
    simb_score,
    stood_score,
)

rng = np.random.default_rng(7)
cfg = ScoreConfig(bins=2000)

# Imbalance: a uniform column scores near 0, a spiky one much higher.
flat = rng.uniform(0, 1, 50_000)
spiky = np.concatenate([rng.normal(0, 0.01, 45_000), rng.uniform(-3, 3, 5_000)])
rep = simb_score(array_source({"flat": flat, "spiky": spiky}), ["flat", "spiky"], cfg)
print("sample imbalance:", {k: round(v, 3) for k, v in rep.sub_scores.items()})

# Split shift: shifting the validation distribution raises the score.
train = {"wind": rng.normal(8, 2, 30_000)}
val_near = {"wind": rng.normal(8, 2, 6_000)}
val_far = {"wind": rng.normal(13, 2, 6_000)}
near = stood_score(array_source(train), array_source(val_near), ["wind"], cfg)
far = stood_score(array_source(train), array_source(val_far), ["wind"], cfg)
print(f"split shift: near {near.overall:.3f}  far {far.overall:.3f}")

# Input-output sensitivity: noise drives the incremental ratios up.
f = rng.uniform(0, 10, 20_000)
clean = {"f": f, "l": np.sin(f)}
noisy = {"f": f, "l": np.sin(f) + rng.normal(0, 2, f.size)}
print(
    "io sensitivity: clean",
    round(io_score(array_source(clean), ["f"], ["l"], cfg).overall, 3),
    " noisy",
    round(io_score(array_source(noisy), ["f"], ["l"], cfg).overall, 3),
)

# Outlier presence: a heavy tail pushes points past the fences.
tame = rng.normal(0, 1, 20_000)
heavy = rng.standard_cauchy(20_000)
rep = outlier_score(array_source({"tame": tame, "heavy": heavy}), ["tame", "heavy"], cfg)
print("outlier presence:", {k: round(v, 3) for k, v in rep.sub_scores.items()})

# Reports carry provenance: configuration, row counts, approximation flag.
print("report config:", rep.config["bins"], "bins, seed", rep.config["seed"],
      "approximate:", rep.approximate)
