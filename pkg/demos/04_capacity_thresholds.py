"""Walkthrough: over-parameterization thresholds from dataset dimensions.

The interpolation threshold (training share x points x label dimension) is
the parameter count where zero-loss training becomes possible; multiplying
by the feature dimension gives the smooth-function threshold associated
with robust fits. Rendered in M/B/T units like the published table.
"""

from stprofiler import CapacityReport, DatasetDims

ROWS = [
    ("buildings-92", 3_206_016, (0.56, 0.09, 0.35), 521, 96),
    ("buildings-451", 15_716_448, (0.56, 0.09, 0.35), 521, 96),
    ("days-245", 3_517_359, (0.35, 0.13, 0.52), 4_610, 288),
    ("days-177", 2_583_966, (0.34, 0.13, 0.53), 4_610, 288),
    ("cities-10", 1_037_785_339, (0.23, 0.17, 0.60), 11, 4),
    ("cities-20", 3_266_646_911, (0.35, 0.14, 0.51), 11, 4),
    ("cities-43", 7_351_030_412, (0.34, 0.14, 0.52), 11, 4),
    ("pristine-sky", 11_452_416, (0.51, 0.12, 0.37), 970, 298),
    ("clear-sky", 11_485_184, (0.51, 0.11, 0.38), 2_487, 298),
]

print(f"{'dataset':14s} {'n':>13s}  shares        {'dx':>5s} {'dy':>4s} {'ipt':>12s} {'sft':>14s}")
for name, n, (s_tr, s_va, s_te), d_x, d_y in ROWS:
    dims = DatasetDims(n=n, s_tr=s_tr, s_va=s_va, s_te=s_te, d_x=d_x, d_y=d_y)
    rep = CapacityReport.from_dims(dims)
    shares = f"{s_tr:.0%}/{s_va:.0%}/{s_te:.0%}"
    print(f"{name:14s} {n:13,d}  {shares:12s} {d_x:5d} {d_y:4d} "
          f"{rep.ipt:>12,d} {rep.sft:>14,d}   ({rep.ipt_display}/{rep.sft_display})")

# Variable-length tasks use the largest dimension; effective overrides are
# available when a different aggregate is wanted.
var = DatasetDims(n=51_294, s_tr=0.42, s_va=0.19, s_te=0.39, d_x=(595, 8225), d_y=1)
rep = CapacityReport.from_dims(var)
print("\nvariable-length features, max rule:  ", rep.ipt_display, "/", rep.sft_display)
rep = CapacityReport.from_dims(var, effective_d_x=1600)
print("variable-length, effective dx = 1600:", rep.ipt_display, "/", rep.sft_display)
