"""Scale clothing components to the garment's pixel size."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .exceptions import DegenerateRegion, EmptyClothing, NonPositiveScale
from .geometry import Pose, VirtualSize
from .segmap import Region, SegMap, clip_points, extract_regions

H_RULES = ("alpha", "shoulder")


@dataclass(frozen=True)
class ScalePlan:
    """Shared horizontal/vertical factors and one anchor per clothing component.

    ``anchors`` follows the order of ``extract_regions(map, "clothing")``.
    """

    s_h: float
    s_v: float
    anchors: tuple[tuple[float, float], ...]
    h_rule: str = "alpha"
    current_height: int = 0

    def __post_init__(self):
        for name in ("s_h", "s_v"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise NonPositiveScale(f"{name} must be finite and positive, got {value!r}")


def horizontal_factor(pose: Pose, vs: VirtualSize, h_rule: str = "alpha") -> float:
    """Horizontal scale factor.

    ``"alpha"`` maps the current shoulder-plus-upper-arms span onto one whose
    shoulder part is the garment width: ``(w + d23 + d56) / alpha``.
    ``"shoulder"`` is the plain ratio ``w / d25``.
    """
    if h_rule == "alpha":
        sleeves = geo.delta(pose, geo.R_SHOULDER, geo.R_ELBOW) + geo.delta(pose, geo.L_SHOULDER, geo.L_ELBOW)
        return (vs.w_tilde + sleeves) / vs.alpha
    if h_rule == "shoulder":
        span = geo.delta(pose, geo.R_SHOULDER, geo.L_SHOULDER)
        if span <= 0:
            raise NonPositiveScale("shoulder keypoints coincide")
        return vs.w_tilde / span
    raise ValueError(f"unknown h_rule {h_rule!r}; expected one of {H_RULES}")


def clothing_extent(regions) -> tuple[int, int]:
    """Width and height (in pixels, inclusive) of the union bbox of ``regions``."""
    x0 = min(r.bbox[0] for r in regions)
    y0 = min(r.bbox[1] for r in regions)
    x1 = max(r.bbox[2] for r in regions)
    y1 = max(r.bbox[3] for r in regions)
    return x1 - x0 + 1, y1 - y0 + 1


def plan_scale(segmap: SegMap, pose: Pose, vs: VirtualSize, h_rule: str = "alpha",
               regions: list[Region] | None = None) -> ScalePlan:
    if regions is None:
        regions = extract_regions(segmap, "clothing")
    if not regions:
        raise EmptyClothing("segmentation map has no clothing pixels")
    _, height = clothing_extent(regions)
    if height <= 0:
        raise DegenerateRegion("clothing has zero vertical extent")
    s_v = vs.h_tilde / height
    s_h = horizontal_factor(pose, vs, h_rule)
    return ScalePlan(s_h, s_v, tuple(r.centroid for r in regions), h_rule, height)


def round_half_away(values):
    values = np.asarray(values, dtype=float)
    return np.where(values >= 0, np.floor(values + 0.5), -np.floor(-values + 0.5)).astype(np.int64)


def _preimage_index(out_coords, anchor, factor, lo, size):
    """Source index (relative to ``lo``) for each output coordinate, or -1."""
    src = round_half_away(anchor + (out_coords - anchor) / factor) - lo
    src[(src < 0) | (src >= size)] = -1
    return src


def scale_region(region: Region, s_h: float, s_v: float, anchor=None, shape=None) -> Region:
    """Scale ``region`` about ``anchor`` (its centroid by default).

    Inverse nearest-neighbor mapping: an output pixel belongs to the result
    when its preimage, rounded half away from zero, lies in the source.
    Single-pixel holes are then closed.  With ``shape`` the result is clipped
    to the map bounds.
    """
    if not (s_h > 0 and s_v > 0 and math.isfinite(s_h) and math.isfinite(s_v)):
        raise NonPositiveScale(f"scale factors must be positive, got ({s_h}, {s_v})")
    ax, ay = region.centroid if anchor is None else anchor
    x0, y0, x1, y1 = region.bbox
    src = np.zeros((y1 - y0 + 1, x1 - x0 + 1), dtype=bool)
    src[region.pixels[:, 1] - y0, region.pixels[:, 0] - x0] = True

    ux0 = math.floor(ax + s_h * (x0 - 0.5 - ax)) - 1
    ux1 = math.ceil(ax + s_h * (x1 + 0.5 - ax)) + 1
    vy0 = math.floor(ay + s_v * (y0 - 0.5 - ay)) - 1
    vy1 = math.ceil(ay + s_v * (y1 + 0.5 - ay)) + 1
    us = np.arange(ux0, ux1 + 1)
    vs = np.arange(vy0, vy1 + 1)
    ix = _preimage_index(us, ax, s_h, x0, src.shape[1])
    iy = _preimage_index(vs, ay, s_v, y0, src.shape[0])

    # the mapping is separable, so the output raster is an outer gather
    out = src[np.ix_(np.maximum(iy, 0), np.maximum(ix, 0))]
    out &= (iy >= 0)[:, None] & (ix >= 0)[None, :]
    out = close_pinholes(out)

    ys, xs = np.nonzero(out)
    pts = np.column_stack((xs + ux0, ys + vy0))
    if shape is not None:
        pts = clip_points(pts, shape)
    if len(pts) == 0:
        raise DegenerateRegion("scaled region is empty")
    return Region.from_pixels(region.label, pts)


def close_pinholes(mask: np.ndarray) -> np.ndarray:
    """Fill unset pixels whose four neighbors are all set."""
    if mask.shape[0] < 3 or mask.shape[1] < 3:
        return mask
    inner = mask[1:-1, 1:-1]
    surrounded = mask[:-2, 1:-1] & mask[2:, 1:-1] & mask[1:-1, :-2] & mask[1:-1, 2:]
    out = mask.copy()
    out[1:-1, 1:-1] = inner | surrounded
    return out


def scale_regions(regions, plan: ScalePlan, shape=None) -> list[Region]:
    if len(regions) != len(plan.anchors):
        raise ValueError("plan anchors do not match the region list")
    return [scale_region(r, plan.s_h, plan.s_v, a, shape) for r, a in zip(regions, plan.anchors)]
