"""scikit-learn style front end.

:class:`ClothingResizer` learns the sizing plan from a segmentation map and a
pose in :meth:`~ClothingResizer.fit` and applies it in
:meth:`~ClothingResizer.transform`::

    resizer = ClothingResizer(person_height_cm=66, person_shoulder_cm=47,
                              cloth_height_cm=73, cloth_shoulder_cm=51)
    out = resizer.fit_transform(segmap, pose=pose)
    resizer.report_.to_json()
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import collar as _collar
from ._validation import check_pose, check_segmap, check_size_spec
from .exceptions import ComponentCountMismatch, SizefitError
from .geometry import DEFAULT_CONFIDENCE_THRESHOLD, REQUIRED_KEYPOINTS, virtual_size
from .overlap import DEFAULT_TOLERANCE, closest_pair, correct_overlap
from .resize import H_RULES, clothing_extent, plan_scale, scale_regions
from .segmap import SegMap, composite_clothing, extract_regions

STAGES = ("geometry", "plan_scale", "scale", "composite", "overlap", "collar")


class _stage:
    """Tag any package error raised inside the block with the stage name."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if isinstance(exc, SizefitError) and exc.stage is None:
            exc.with_stage(self.name)
        return False


def _bbox(mask: np.ndarray):
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        return None
    return [int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())]


@dataclass
class RunReport:
    """What one resize job did.  Serializes deterministically."""

    virtual_size: dict
    scale: dict
    collar: dict
    overlap: dict
    clothing: dict
    stages: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_json(self) -> dict:
        data = {
            "virtual_size": self.virtual_size,
            "scale": self.scale,
            "collar": self.collar,
            "overlap": self.overlap,
            "clothing": self.clothing,
            "stages": list(self.stages),
            "warnings": list(self.warnings),
        }
        _check_finite(data)
        return data

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def _check_finite(obj, path="report"):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ValueError(f"{path} is not finite")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")


class ClothingResizer(TransformerMixin, BaseEstimator):
    """Resize the clothing of a segmentation map to a garment's real size.

    Parameters
    ----------
    person_height_cm, person_shoulder_cm : float
        Length of the person's clothing region and shoulder width.
    cloth_height_cm, cloth_shoulder_cm : float
        Length and shoulder width of the garment to fit.
    h_rule : {"alpha", "shoulder"}
        Horizontal scale rule, see :func:`sizefit.resize.horizontal_factor`.
    collar_iterations : int
        Erosion passes inside the collar rectangle.
    collar_sx_frac, collar_sy_frac : float
        Collar rectangle extents as fractions of the garment's pixel width
        and height.
    confidence_threshold : float
        Keypoints at or below this confidence are treated as undetected.
    skip_collar, skip_overlap : bool
        Disable the collar or the overlap correction.
    overlap_tolerance : float
        Allowed deviation (px) of the corrected gap; larger deviations are
        reported as warnings.
    palette : Palette, optional
        Needed only when ``X`` is a raw label array rather than a SegMap.

    Attributes
    ----------
    size_spec_ : SizeSpec
    virtual_size_ : VirtualSize
    plan_ : ScalePlan
    collar_rect_ : CollarRect
    before_pair_ : ClosestPair or None
        Closest pair of the two pre-scale components, when there are two.
    n_components_ : int
    report_ : RunReport
        Set by :meth:`transform`.
    """

    def __init__(self, person_height_cm=None, person_shoulder_cm=None,
                 cloth_height_cm=None, cloth_shoulder_cm=None, *, h_rule="alpha",
                 collar_iterations=_collar.DEFAULT_ITERATIONS,
                 collar_sx_frac=_collar.DEFAULT_SX_FRAC, collar_sy_frac=_collar.DEFAULT_SY_FRAC,
                 confidence_threshold=DEFAULT_CONFIDENCE_THRESHOLD,
                 skip_collar=False, skip_overlap=False,
                 overlap_tolerance=DEFAULT_TOLERANCE, palette=None):
        self.person_height_cm = person_height_cm
        self.person_shoulder_cm = person_shoulder_cm
        self.cloth_height_cm = cloth_height_cm
        self.cloth_shoulder_cm = cloth_shoulder_cm
        self.h_rule = h_rule
        self.collar_iterations = collar_iterations
        self.collar_sx_frac = collar_sx_frac
        self.collar_sy_frac = collar_sy_frac
        self.confidence_threshold = confidence_threshold
        self.skip_collar = skip_collar
        self.skip_overlap = skip_overlap
        self.overlap_tolerance = overlap_tolerance
        self.palette = palette

    def _check_params(self):
        if self.h_rule not in H_RULES:
            raise ValueError(f"h_rule must be one of {H_RULES}, got {self.h_rule!r}")
        if int(self.collar_iterations) != self.collar_iterations or self.collar_iterations < 1:
            raise ValueError("collar_iterations must be a positive integer")
        if not 0 <= self.confidence_threshold < 1:
            raise ValueError("confidence_threshold must lie in [0, 1)")

    def fit(self, X, y=None, pose=None):
        self._check_params()
        segmap = check_segmap(X, self.palette)
        with _stage("geometry"):
            pose = check_pose(pose, self.confidence_threshold)
            self.size_spec_ = check_size_spec(self.person_height_cm, self.person_shoulder_cm,
                                              self.cloth_height_cm, self.cloth_shoulder_cm)
            pose.require(REQUIRED_KEYPOINTS)
            self.virtual_size_ = virtual_size(self.size_spec_, pose)
        with _stage("plan_scale"):
            regions = extract_regions(segmap, "clothing")
            self.plan_ = plan_scale(segmap, pose, self.virtual_size_, self.h_rule, regions)
        with _stage("collar"):
            self.collar_rect_ = _collar.collar_rect(pose, self.virtual_size_,
                                                    self.collar_sx_frac, self.collar_sy_frac)
        self.n_components_ = len(regions)
        self.before_pair_ = closest_pair(regions[0], regions[1]) if len(regions) == 2 else None
        self.pose_ = pose
        self.shape_ = segmap.shape
        return self

    def transform(self, X) -> SegMap:
        check_is_fitted(self, "plan_")
        segmap = check_segmap(X, self.palette)
        if segmap.shape != self.shape_:
            raise ValueError(f"map shape {segmap.shape} differs from fitted shape {self.shape_}")
        regions = extract_regions(segmap, "clothing")
        if len(regions) != self.n_components_:
            raise ValueError("clothing components differ from the map seen in fit()")

        plan, vs = self.plan_, self.virtual_size_
        stages, warnings = ["geometry", "plan_scale"], []
        in_clothing = segmap.labels == segmap.palette.clothing

        with _stage("scale"):
            scaled = scale_regions(regions, plan, segmap.shape)
        stages.append("scale")
        with _stage("composite"):
            out = composite_clothing(segmap, scaled)
        stages.append("composite")

        overlap = {"skipped": True, "reason": None}
        with _stage("overlap"):
            if self.skip_overlap:
                overlap["reason"] = "disabled"
            elif len(scaled) == 1:
                overlap["reason"] = "single clothing component"
            elif len(scaled) == 2:
                result = correct_overlap(out, self.before_pair_, scaled, self.overlap_tolerance)
                out = result.segmap
                overlap = result.to_json()
                overlap["before_pair"] = self.before_pair_.to_json()
                warnings.extend(result.warnings)
                stages.append("overlap")
            else:
                raise ComponentCountMismatch(
                    f"overlap correction needs 2 clothing components, found {len(scaled)}")
        if overlap.get("reason"):
            warnings.append(f"overlap correction skipped: {overlap['reason']}")

        rect = self.collar_rect_
        collar = {"skipped": bool(self.skip_collar), "iterations": int(self.collar_iterations),
                  "rect": {"center": list(rect.center), "s_x": rect.s_x, "s_y": rect.s_y,
                           "pixel_bounds": rect.pixel_bounds(segmap.shape)},
                  "pixels_removed": 0}
        if collar["rect"]["pixel_bounds"] is not None:
            collar["rect"]["pixel_bounds"] = list(collar["rect"]["pixel_bounds"])
        if not self.skip_collar:
            with _stage("collar"):
                before = int((out.labels == out.palette.clothing).sum())
                out = _collar.erode_collar(out, rect, int(self.collar_iterations))
                collar["pixels_removed"] = before - int((out.labels == out.palette.clothing).sum())
            stages.append("collar")

        out_clothing = out.labels == out.palette.clothing
        _, h_in = clothing_extent(regions)
        bbox_out = _bbox(out_clothing)
        self.report_ = RunReport(
            virtual_size={"h_tilde": vs.h_tilde, "w_tilde": vs.w_tilde, "alpha": vs.alpha},
            scale={"s_h": plan.s_h, "s_v": plan.s_v, "h_rule": plan.h_rule,
                   "anchors": [list(a) for a in plan.anchors],
                   "current_height": plan.current_height},
            collar=collar,
            overlap=overlap,
            clothing={"components": len(regions),
                      "pixels_in": int(in_clothing.sum()), "pixels_out": int(out_clothing.sum()),
                      "bbox_in": _bbox(in_clothing), "bbox_out": bbox_out,
                      "height_in": h_in,
                      "height_out": None if bbox_out is None else bbox_out[3] - bbox_out[1] + 1},
            stages=stages,
            warnings=warnings,
        )
        return out
