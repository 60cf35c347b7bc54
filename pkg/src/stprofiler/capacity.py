"""Over-parameterization thresholds from dataset dimensions.

The interpolation threshold is the parameter count at which a model can fit
its training data to zero loss: training share times data point count times
label dimension. The smooth function threshold multiplies that by the
feature dimension, the count associated with learning smooth/robust
functions. For variable-length features or labels the largest dimension is
used; effective-dimension overrides are available since published tables for
variable-length tasks do not always follow the max rule.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError

SHARE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DatasetDims:
    """Point count, split shares and feature/label dimensions of a dataset."""

    n: int
    s_tr: float
    s_va: float
    s_te: float
    d_x: int | tuple[int, int]
    d_y: int | tuple[int, int]

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"n must be >= 1, got {self.n}")
        total = self.s_tr + self.s_va + self.s_te
        if abs(total - 1.0) > SHARE_TOLERANCE:
            raise ConfigurationError(f"split shares sum to {total:g}")
        for name, d in (("d_x", self.d_x), ("d_y", self.d_y)):
            lo, hi = (d, d) if isinstance(d, int) else d
            if lo < 1 or hi < lo:
                raise ConfigurationError(f"{name} bounds must be positive with min <= max")

    @property
    def d_x_max(self) -> int:
        return self.d_x[1] if isinstance(self.d_x, tuple) else self.d_x

    @property
    def d_y_max(self) -> int:
        return self.d_y[1] if isinstance(self.d_y, tuple) else self.d_y


def interpolation_threshold(dims: DatasetDims, effective_d_y: int | None = None) -> int:
    """round(s_tr * n * D_y), using the largest label dimension when ranged."""
    d_y = dims.d_y_max if effective_d_y is None else effective_d_y
    return round(dims.s_tr * dims.n * d_y)


def smooth_function_threshold(dims: DatasetDims, effective_d_x: int | None = None,
                              effective_d_y: int | None = None) -> int:
    """ipt * D_x, using the largest feature dimension when ranged."""
    d_x = dims.d_x_max if effective_d_x is None else effective_d_x
    return interpolation_threshold(dims, effective_d_y) * d_x


def format_magnitude(count: int) -> str:
    """Render a parameter count in M/B/T units, table style.

    Mantissas at or above 100 print as integers; smaller ones keep one
    decimal unless they sit within 0.5% of an integer; sub-unit values get
    two decimals down to 0.1 and one significant digit below that. Counts
    under 1000 print as-is.
    """
    if count < 0:
        raise ConfigurationError("count must be >= 0")
    if count < 1000:
        return str(int(count))
    for unit, suffix in ((1e12, "T"), (1e9, "B"), (1e6, "M")):
        if count >= unit:
            break
    else:
        unit, suffix = 1e6, "M"
    m = count / unit
    if m >= 100:
        text = f"{m:.0f}"
    elif m >= 1:
        nearest = round(m)
        if nearest > 0 and abs(nearest - m) / m <= 0.005:
            text = str(int(nearest))
        else:
            text = f"{m:.1f}"
            if text.endswith(".0"):
                text = text[:-2]
    elif m >= 0.1:
        text = f"{m:.2f}"
    else:
        text = f"{m:.1g}"
    # promote 1000M -> 1B, 1000B -> 1T
    if text == "1000" and suffix != "T":
        return "1" + ("B" if suffix == "M" else "T")
    return text + suffix


@dataclass(frozen=True)
class CapacityReport:
    """Interpolation and smooth-function thresholds with display forms."""

    ipt: int
    sft: int
    dims: DatasetDims

    @property
    def ipt_display(self) -> str:
        return format_magnitude(self.ipt)

    @property
    def sft_display(self) -> str:
        return format_magnitude(self.sft)

    @classmethod
    def from_dims(cls, dims: DatasetDims, effective_d_x: int | None = None,
                  effective_d_y: int | None = None) -> "CapacityReport":
        ipt = interpolation_threshold(dims, effective_d_y)
        sft = smooth_function_threshold(dims, effective_d_x, effective_d_y)
        return cls(ipt=ipt, sft=sft, dims=dims)

    def to_dict(self) -> dict:
        d_x, d_y = self.dims.d_x, self.dims.d_y
        return {
            "n": self.dims.n,
            "shares": {"train": self.dims.s_tr, "val": self.dims.s_va, "test": self.dims.s_te},
            "d_x": list(d_x) if isinstance(d_x, tuple) else d_x,
            "d_y": list(d_y) if isinstance(d_y, tuple) else d_y,
            "ipt": self.ipt,
            "sft": self.sft,
            "ipt_display": self.ipt_display,
            "sft_display": self.sft_display,
        }
