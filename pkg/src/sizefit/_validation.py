"""Input coercion shared by the estimator and the pipeline."""
from __future__ import annotations

import numpy as np

from .exceptions import InvalidSpec, PoseFormatError
from .geometry import DEFAULT_CONFIDENCE_THRESHOLD, NUM_KEYPOINTS, Pose, SizeSpec, parse_openpose
from .segmap import Palette, SegMap


def check_segmap(X, palette: Palette | None = None) -> SegMap:
    """Accept a :class:`SegMap`, or a 2-D integer array together with a palette."""
    if isinstance(X, SegMap):
        if palette is not None and palette != X.palette:
            raise ValueError("segmap palette differs from the estimator's palette")
        return X
    if palette is None:
        raise TypeError("a raw label array needs a palette; pass a SegMap or set palette=")
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D label array, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.mod(arr, 1) == 0):
            raise ValueError("label array must hold integers")
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise ValueError("label ids must lie in 0..255")
    return SegMap(arr.astype(np.uint8), palette)


def check_pose(pose, threshold: float = DEFAULT_CONFIDENCE_THRESHOLD) -> Pose:
    """Accept a Pose, OpenPose JSON dict, flat 75-list or ``(25, 3)`` array."""
    if pose is None:
        raise TypeError("fit() needs pose=")
    if isinstance(pose, Pose):
        return pose if pose.threshold == threshold else Pose(pose.keypoints, threshold)
    if isinstance(pose, dict):
        return parse_openpose(pose, threshold)
    arr = np.asarray(pose, dtype=float)
    if arr.shape == (NUM_KEYPOINTS, 3):
        arr = arr.ravel()
    if arr.ndim != 1:
        raise PoseFormatError(f"cannot read a pose from an array of shape {arr.shape}")
    return Pose.from_flat(arr.tolist(), threshold)


def check_size_spec(person_height_cm, person_shoulder_cm, cloth_height_cm, cloth_shoulder_cm) -> SizeSpec:
    values = dict(person_height_cm=person_height_cm, person_shoulder_cm=person_shoulder_cm,
                  cloth_height_cm=cloth_height_cm, cloth_shoulder_cm=cloth_shoulder_cm)
    missing = [k for k, v in values.items() if v is None]
    if missing:
        raise InvalidSpec(f"missing measurements: {', '.join(missing)}")
    try:
        values = {k: float(v) for k, v in values.items()}
    except (TypeError, ValueError):
        raise InvalidSpec(f"measurements must be numbers: {values}") from None
    return SizeSpec(**values)
