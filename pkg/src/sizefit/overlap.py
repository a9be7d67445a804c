"""Keep the gap between arm-separated clothing components after scaling.

When an arm crosses the garment, the clothing splits into two components.
Scaling each about its own centroid changes the gap between them.  The
smaller component is translated so the minimum distance between the two
returns to its pre-scale value, while the larger one and every other label
stay where they are.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ComponentCountMismatch, OverlappingRegions
from .resize import round_half_away
from .segmap import Region, SegMap, clip_points, composite_clothing

DEFAULT_TOLERANCE = 1.5
_CHUNK = 512


@dataclass(frozen=True)
class ClosestPair:
    point_a: tuple[int, int]
    point_b: tuple[int, int]
    distance: float

    @property
    def vector(self) -> tuple[int, int]:
        """``point_b - point_a``."""
        return (self.point_b[0] - self.point_a[0], self.point_b[1] - self.point_a[1])

    def to_json(self) -> dict:
        return {"point_a": list(self.point_a), "point_b": list(self.point_b),
                "distance": self.distance}


def _encode(points: np.ndarray) -> np.ndarray:
    return (points[:, 1].astype(np.int64) << 32) + (points[:, 0].astype(np.int64) & 0xFFFFFFFF)


def regions_overlap(a: Region, b: Region) -> bool:
    x0, y0, x1, y1 = a.bbox
    u0, v0, u1, v1 = b.bbox
    if x1 < u0 or u1 < x0 or y1 < v0 or v1 < y0:
        return False
    return bool(np.intersect1d(_encode(a.pixels), _encode(b.pixels), assume_unique=True).size)


def closest_pair(a: Region, b: Region) -> ClosestPair:
    """Closest pixel pair between two disjoint regions.

    Only contour pixels are scanned; for disjoint pixel sets every minimizing
    pair lies on the contours.  Among equal distances the pair with the
    smallest ``(a.y, a.x, b.y, b.x)`` wins.
    """
    if regions_overlap(a, b):
        raise OverlappingRegions("regions share pixels")
    ca, cb = a.contour, b.contour
    best = None
    for start in range(0, len(ca), _CHUNK):
        chunk = ca[start:start + _CHUNK]
        dx = chunk[:, None, 0] - cb[None, :, 0]
        dy = chunk[:, None, 1] - cb[None, :, 1]
        d2 = dx * dx + dy * dy
        flat = int(np.argmin(d2))  # first minimum in raster order of (a, b)
        i, j = divmod(flat, len(cb))
        m = int(d2[i, j])
        if best is None or m < best[0]:
            best = (m, start + i, j)
    m, i, j = best
    pa = (int(ca[i, 0]), int(ca[i, 1]))
    pb = (int(cb[j, 0]), int(cb[j, 1]))
    return ClosestPair(pa, pb, math.sqrt(m))


@dataclass
class OverlapResult:
    """Outcome of :func:`correct_overlap`.

    ``regions`` holds the corrected components in the order they were given.
    ``scaled_distance`` is None when the scaled components overlapped.
    """

    segmap: SegMap
    regions: tuple[Region, Region]
    moved: int
    translation: tuple[int, int]
    before_distance: float
    scaled_distance: float | None
    corrected_distance: float
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "skipped": False,
            "moved_component": self.moved,
            "translation": list(self.translation),
            "before_distance": self.before_distance,
            "scaled_distance": self.scaled_distance,
            "corrected_distance": self.corrected_distance,
        }


def smaller_index(a: Region, b: Region) -> int:
    """Index (0 or 1) of the component that moves: fewer pixels, then leftmost, then topmost."""
    ka = (a.size, a.bbox[0], a.bbox[1])
    kb = (b.size, b.bbox[0], b.bbox[1])
    return 0 if ka <= kb else 1


def _projection_gap(fixed: Region, moving: Region, u: np.ndarray) -> float:
    return float((moving.pixels @ u).min() - (fixed.pixels @ u).max())


def _step(vec) -> tuple[int, int]:
    dx, dy = round_half_away(vec)
    return int(dx), int(dy)


def _shift(region: Region, t) -> Region:
    return region if t == (0, 0) else region.translated(*t)


def find_translation(fixed: Region, moving: Region, before_vector, before_distance: float,
                     max_iter: int = 8) -> tuple[int, int]:
    """Integer shift of ``moving`` restoring ``before_distance`` to ``fixed``.

    ``before_vector`` points from the fixed component's closest point to the
    moving one's, measured before scaling.  The first guess re-attaches the
    moving component's closest point at that offset from the fixed
    component's current closest point; it is then refined along the current
    closest-pair direction.
    """
    v = np.asarray(before_vector, dtype=float)
    u = v / before_distance

    if regions_overlap(fixed, moving):
        t = _step(u * (before_distance - _projection_gap(fixed, moving, u)))
    else:
        cp = closest_pair(fixed, moving)
        t = _step(np.asarray(cp.point_a) + v - np.asarray(cp.point_b))

    best_t, best_err = None, math.inf
    for _ in range(max_iter):
        shifted = _shift(moving, t)
        if regions_overlap(fixed, shifted):
            push = before_distance - _projection_gap(fixed, shifted, u)
            dt = _step(u * max(push, 1.0))
        else:
            cp = closest_pair(fixed, shifted)
            err = before_distance - cp.distance
            if abs(err) < best_err:
                best_t, best_err = t, abs(err)
            if abs(err) <= 0.5:
                break
            direction = np.asarray(cp.vector, dtype=float) / cp.distance if cp.distance else u
            dt = _step(direction * err)
        if dt == (0, 0):
            break
        t = (t[0] + dt[0], t[1] + dt[1])
    if best_t is None:
        # never separated; fall back to the last (overlapping) candidate
        best_t = t
    return best_t


def correct_overlap(segmap: SegMap, before: ClosestPair, regions_after,
                    tolerance: float = DEFAULT_TOLERANCE) -> OverlapResult:
    """Translate the smaller scaled component so the pre-scale gap returns.

    ``before`` is the closest pair of the pre-scale components, with
    ``point_a`` on the component that ``regions_after[0]`` was scaled from.
    The larger component and all non-clothing labels are left in place.
    """
    regions_after = tuple(regions_after)
    if len(regions_after) != 2:
        raise ComponentCountMismatch(
            f"overlap correction needs exactly 2 clothing components, got {len(regions_after)}")
    a, b = regions_after
    scaled_distance = None if regions_overlap(a, b) else closest_pair(a, b).distance

    mi = smaller_index(a, b)
    fixed, moving = (b, a) if mi == 0 else (a, b)
    vec = before.vector if mi == 1 else (-before.vector[0], -before.vector[1])
    warnings = []

    t = find_translation(fixed, moving, vec, before.distance)
    moved = _shift(moving, t)
    inside = clip_points(moved.pixels, segmap.shape)
    if len(inside) < moved.size:
        warnings.append(f"overlap correction clipped {moved.size - len(inside)} pixels at the map edge")
        moved = Region.from_pixels(moved.label, inside)

    vacate = moving.mask(segmap.shape) & (segmap.labels == segmap.palette.clothing) & ~fixed.mask(segmap.shape)
    out = composite_clothing(segmap, [moved], vacate=vacate)

    corrected = closest_pair(fixed, moved).distance if not regions_overlap(fixed, moved) else 0.0
    if abs(corrected - before.distance) > tolerance:
        warnings.append(f"corrected gap {corrected:.3f}px differs from {before.distance:.3f}px "
                        f"by more than {tolerance}px")
    pair = (moved, fixed) if mi == 0 else (fixed, moved)
    return OverlapResult(out, pair, mi, t, before.distance, scaled_distance, corrected, warnings)
