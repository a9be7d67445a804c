"""Collar-gap removal by erosion confined to a neck-centred rectangle."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import EmptyClothing, InvalidSpec
from .geometry import NECK, Pose, VirtualSize
from .segmap import SegMap, fill_removed

DEFAULT_ITERATIONS = 2
DEFAULT_SX_FRAC = 0.75
DEFAULT_SY_FRAC = 0.75


@dataclass(frozen=True)
class CollarRect:
    """Axis-aligned box centred on the neck keypoint; ``s_x``/``s_y`` are full extents."""

    center: tuple[float, float]
    s_x: float
    s_y: float

    def __post_init__(self):
        if not (self.s_x > 0 and self.s_y > 0):
            raise InvalidSpec(f"collar rectangle extents must be positive, got ({self.s_x}, {self.s_y})")

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """``(x_min, y_min, x_max, y_max)`` before clipping; edges are inclusive."""
        cx, cy = self.center
        return (cx - self.s_x / 2, cy - self.s_y / 2, cx + self.s_x / 2, cy + self.s_y / 2)

    def pixel_bounds(self, shape) -> tuple[int, int, int, int] | None:
        """Inclusive integer bounds clipped to ``shape``, or None when nothing is left."""
        h, w = shape
        x_min, y_min, x_max, y_max = self.bounds
        x0, y0 = max(math.ceil(x_min), 0), max(math.ceil(y_min), 0)
        x1, y1 = min(math.floor(x_max), w - 1), min(math.floor(y_max), h - 1)
        if x0 > x1 or y0 > y1:
            return None
        return x0, y0, x1, y1

    def mask(self, shape) -> np.ndarray:
        out = np.zeros(shape, dtype=bool)
        b = self.pixel_bounds(shape)
        if b is not None:
            x0, y0, x1, y1 = b
            out[y0:y1 + 1, x0:x1 + 1] = True
        return out


def collar_rect(pose: Pose, vs: VirtualSize, sx_frac: float = DEFAULT_SX_FRAC,
                sy_frac: float = DEFAULT_SY_FRAC) -> CollarRect:
    return CollarRect(pose.point(NECK), sx_frac * vs.w_tilde, sy_frac * vs.h_tilde)


def erode(mask: np.ndarray, eligible: np.ndarray | None = None, iterations: int = 1) -> np.ndarray:
    """Binary erosion with a 3x3 square, repeated ``iterations`` times.

    Only pixels in ``eligible`` may be cleared.  Pixels beyond the raster edge
    count as unset.
    """
    out = np.asarray(mask, dtype=bool).copy()
    if eligible is None:
        eligible = np.ones_like(out)
    h, w = out.shape
    for _ in range(iterations):
        padded = np.pad(out, 1, constant_values=False)
        keep = np.ones_like(out)
        for dy in (0, 1, 2):
            for dx in (0, 1, 2):
                keep &= padded[dy:dy + h, dx:dx + w]
        out &= keep | ~eligible
    return out


def erode_collar(segmap: SegMap, rect: CollarRect, iterations: int = DEFAULT_ITERATIONS) -> SegMap:
    """Erode clothing inside ``rect`` only.

    Cleared pixels become skin/neck when they touch skin/neck, otherwise
    background.  Nothing outside the rectangle changes.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    clothing = segmap.labels == segmap.palette.clothing
    if not clothing.any():
        raise EmptyClothing("no clothing pixels to erode")
    inside = rect.mask(segmap.shape)
    if not (clothing & inside).any():
        return segmap
    removed = clothing & ~erode(clothing, inside, iterations)
    labels = fill_removed(segmap.labels.copy(), removed, segmap.palette)
    return SegMap(labels, segmap.palette, check=False)
