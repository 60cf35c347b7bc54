"""Geographic helpers: polygon centroids and the unit-sphere transform.

City zones arrive as lat/long polygons with wildly different vertex counts;
replacing each polygon by its shoelace centroid and lifting lat/long onto a
3-d unit sphere turns them into fixed-size spatial coordinates. Angles are
accepted in degrees and converted to radians internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoordinateRangeError, DegenerateGeometryError

# Relative tolerance below which the shoelace area counts as zero.
_AREA_EPS = 1e-12


def _ring(vertices) -> np.ndarray:
    arr = np.asarray(vertices, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise DegenerateGeometryError("polygon needs at least 3 (lat, long) vertices")
    if not np.isfinite(arr).all():
        raise DegenerateGeometryError("polygon vertices must be finite")
    # auto-close: drop an explicitly repeated final vertex
    if np.array_equal(arr[0], arr[-1]):
        arr = arr[:-1]
        if arr.shape[0] < 3:
            raise DegenerateGeometryError("polygon needs at least 3 distinct vertices")
    return arr


def polygon_area(vertices) -> float:
    """Signed shoelace area on the raw (lat, long) plane."""
    ring = _ring(vertices)
    lat, lon = ring[:, 0], ring[:, 1]
    lat_next, lon_next = np.roll(lat, -1), np.roll(lon, -1)
    return 0.5 * float(np.sum(lat * lon_next - lat_next * lon))


def polygon_centroid(vertices) -> tuple[float, float]:
    """Centroid (lat_c, long_c) of a closed lat/long ring.

    Uses the planar shoelace formula; invariant under cyclic rotation and
    orientation reversal of the vertex list. Raises DegenerateGeometryError
    when the enclosed area is zero (e.g. collinear vertices).
    """
    if isinstance(vertices, Polygon):
        vertices = vertices.vertices
    ring = _ring(vertices)
    lat, lon = ring[:, 0], ring[:, 1]
    lat_next, lon_next = np.roll(lat, -1), np.roll(lon, -1)
    cross = lat * lon_next - lat_next * lon
    area = 0.5 * float(np.sum(cross))
    scale = float(np.abs(ring).max()) or 1.0
    if abs(area) <= _AREA_EPS * scale * scale:
        raise DegenerateGeometryError("polygon has zero area; centroid undefined")
    lat_c = float(np.sum((lat + lat_next) * cross)) / (6.0 * area)
    long_c = float(np.sum((lon + lon_next) * cross)) / (6.0 * area)
    return lat_c, long_c


@dataclass(frozen=True)
class Polygon:
    """An ordered lat/long ring; validated to enclose a nonzero area."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "vertices", tuple((float(a), float(b)) for a, b in self.vertices)
        )
        polygon_centroid(self.vertices)  # raises if degenerate

    @property
    def centroid(self) -> tuple[float, float]:
        return polygon_centroid(self.vertices)

    @property
    def area(self) -> float:
        return polygon_area(self.vertices)


def to_unit_sphere(lat, long):
    """Map degrees (lat in [-90, 90], long in [-180, 180]) onto the unit sphere.

    Returns (x, y, z) with x = cos(lat)cos(long), y = cos(lat)sin(long),
    z = sin(lat); works elementwise on arrays.
    """
    lat_arr = np.asarray(lat, dtype=np.float64)
    long_arr = np.asarray(long, dtype=np.float64)
    if np.any(np.abs(lat_arr) > 90.0) or np.any(np.abs(long_arr) > 180.0):
        raise CoordinateRangeError(
            f"lat/long out of range: lat={lat}, long={long}"
        )
    lat_r = np.deg2rad(lat_arr)
    long_r = np.deg2rad(long_arr)
    x = np.cos(lat_r) * np.cos(long_r)
    y = np.cos(lat_r) * np.sin(long_r)
    z = np.sin(lat_r)
    if lat_arr.ndim == 0:
        return float(x), float(y), float(z)
    return x, y, z
