"""Pose keypoints and the centimeter-to-pixel garment size conversion.

Garment measurements in centimeters are turned into image extents by scaling
keypoint distances with the garment/person measurement ratio::

    height = (cloth_height / person_height) * |neck - mid_hip|
    width  = (cloth_shoulder / person_shoulder) * |r_shoulder - l_shoulder|
    alpha  = |r_shoulder - l_shoulder| + |r_shoulder - r_elbow| + |l_shoulder - l_elbow|
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from os import PathLike
from typing import Sequence

from .exceptions import InvalidSpec, PoseFormatError, UndetectedKeypoint

DEFAULT_CONFIDENCE_THRESHOLD = 0.1

# OpenPose BODY_25 ordering.
BODY_25 = (
    "Nose", "Neck", "RShoulder", "RElbow", "RWrist",
    "LShoulder", "LElbow", "LWrist", "MidHip", "RHip",
    "RKnee", "RAnkle", "LHip", "LKnee", "LAnkle",
    "REye", "LEye", "REar", "LEar", "LBigToe",
    "LSmallToe", "LHeel", "RBigToe", "RSmallToe", "RHeel",
)
NUM_KEYPOINTS = len(BODY_25)

NECK = 1
R_SHOULDER = 2
R_ELBOW = 3
R_WRIST = 4
L_SHOULDER = 5
L_ELBOW = 6
L_WRIST = 7
MID_HIP = 8

#: Keypoints the resizing pipeline reads.
REQUIRED_KEYPOINTS = (NECK, R_SHOULDER, R_ELBOW, L_SHOULDER, L_ELBOW, MID_HIP)


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    confidence: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise PoseFormatError(f"keypoint confidence {self.confidence!r} outside [0, 1]")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise PoseFormatError("keypoint coordinates must be finite")


@dataclass(frozen=True)
class Pose:
    """Exactly 25 keypoints in BODY_25 order.

    ``threshold`` is the confidence a keypoint must exceed to count as
    detected.
    """

    keypoints: tuple[Keypoint, ...]
    threshold: float = DEFAULT_CONFIDENCE_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "keypoints", tuple(self.keypoints))
        if len(self.keypoints) != NUM_KEYPOINTS:
            raise PoseFormatError(
                f"pose must have exactly {NUM_KEYPOINTS} keypoints, got {len(self.keypoints)}"
            )

    @classmethod
    def from_flat(cls, values: Sequence[float], threshold: float = DEFAULT_CONFIDENCE_THRESHOLD) -> "Pose":
        """Build from OpenPose's flat ``[x0, y0, c0, x1, y1, c1, ...]`` layout."""
        values = [float(v) for v in values]
        if len(values) != 3 * NUM_KEYPOINTS:
            raise PoseFormatError(
                f"expected {3 * NUM_KEYPOINTS} numbers ({NUM_KEYPOINTS} keypoints), "
                f"got {len(values)}"
            )
        kps = [Keypoint(*values[i:i + 3]) for i in range(0, len(values), 3)]
        return cls(tuple(kps), threshold)

    @classmethod
    def from_points(cls, points: dict[int, tuple[float, float]],
                    threshold: float = DEFAULT_CONFIDENCE_THRESHOLD) -> "Pose":
        """Pose with the given ``{index: (x, y)}`` detected and all others undetected."""
        kps = []
        for i in range(NUM_KEYPOINTS):
            if i in points:
                x, y = points[i]
                kps.append(Keypoint(float(x), float(y), 1.0))
            else:
                kps.append(Keypoint(0.0, 0.0, 0.0))
        return cls(tuple(kps), threshold)

    def to_flat(self) -> list[float]:
        out = []
        for kp in self.keypoints:
            out.extend((kp.x, kp.y, kp.confidence))
        return out

    def is_detected(self, index: int) -> bool:
        return self.keypoints[index].confidence > self.threshold

    def point(self, index: int) -> tuple[float, float]:
        """Coordinates of a detected keypoint."""
        if not 0 <= index < NUM_KEYPOINTS:
            raise IndexError(f"keypoint index {index} outside 0..{NUM_KEYPOINTS - 1}")
        if not self.is_detected(index):
            raise UndetectedKeypoint(index, BODY_25[index])
        kp = self.keypoints[index]
        return kp.x, kp.y

    def require(self, indices: Sequence[int] = REQUIRED_KEYPOINTS) -> None:
        for i in indices:
            self.point(i)

    def translated(self, dx: float, dy: float) -> "Pose":
        kps = tuple(Keypoint(k.x + dx, k.y + dy, k.confidence) for k in self.keypoints)
        return Pose(kps, self.threshold)

    def scaled(self, k: float) -> "Pose":
        kps = tuple(Keypoint(kp.x * k, kp.y * k, kp.confidence) for kp in self.keypoints)
        return Pose(kps, self.threshold)


@dataclass(frozen=True)
class SizeSpec:
    """Real-world measurements in centimeters.

    ``person_height_cm`` is the vertical extent of the person's clothing
    region (e.g. torso length), not body height.
    """

    person_height_cm: float
    person_shoulder_cm: float
    cloth_height_cm: float
    cloth_shoulder_cm: float

    def __post_init__(self):
        for name in ("person_height_cm", "person_shoulder_cm",
                     "cloth_height_cm", "cloth_shoulder_cm"):
            value = getattr(self, name)
            try:
                ok = math.isfinite(value) and value > 0
            except TypeError:
                ok = False
            if not ok:
                raise InvalidSpec(f"{name} must be a finite positive number, got {value!r}")

    @property
    def height_ratio(self) -> float:
        return self.cloth_height_cm / self.person_height_cm

    @property
    def shoulder_ratio(self) -> float:
        return self.cloth_shoulder_cm / self.person_shoulder_cm


@dataclass(frozen=True)
class VirtualSize:
    """Garment extents in pixels."""

    h_tilde: float
    w_tilde: float
    alpha: float

    def __post_init__(self):
        for name in ("h_tilde", "w_tilde", "alpha"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidSpec(f"{name} must be finite and positive, got {value!r}")


def delta(pose: Pose, i: int, j: int) -> float:
    """Euclidean pixel distance between keypoints ``i`` and ``j``."""
    xi, yi = pose.point(i)
    xj, yj = pose.point(j)
    return math.hypot(xi - xj, yi - yj)


def virtual_height(spec: SizeSpec, pose: Pose) -> float:
    return spec.height_ratio * delta(pose, NECK, MID_HIP)


def virtual_width(spec: SizeSpec, pose: Pose) -> float:
    return spec.shoulder_ratio * delta(pose, R_SHOULDER, L_SHOULDER)


def lateral_extent_alpha(pose: Pose) -> float:
    """Shoulder span plus both upper-arm lengths."""
    return (delta(pose, R_SHOULDER, L_SHOULDER)
            + delta(pose, R_SHOULDER, R_ELBOW)
            + delta(pose, L_SHOULDER, L_ELBOW))


def virtual_size(spec: SizeSpec, pose: Pose) -> VirtualSize:
    return VirtualSize(virtual_height(spec, pose), virtual_width(spec, pose),
                       lateral_extent_alpha(pose))


def parse_openpose(data: dict, threshold: float = DEFAULT_CONFIDENCE_THRESHOLD) -> Pose:
    """Read ``people[0].pose_keypoints_2d`` from decoded OpenPose JSON."""
    try:
        people = data["people"]
    except (KeyError, TypeError):
        raise PoseFormatError("pose file has no 'people' array") from None
    if not isinstance(people, list) or not people:
        raise PoseFormatError("pose file lists no people")
    flat = people[0].get("pose_keypoints_2d") if isinstance(people[0], dict) else None
    if not isinstance(flat, list):
        raise PoseFormatError("people[0] has no 'pose_keypoints_2d' array")
    try:
        return Pose.from_flat(flat, threshold)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PoseFormatError):
            raise
        raise PoseFormatError(f"bad keypoint value: {exc}") from None


def load_pose(path: str | PathLike, threshold: float = DEFAULT_CONFIDENCE_THRESHOLD) -> Pose:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise PoseFormatError(f"{path}: not valid JSON ({exc})") from None
    return parse_openpose(data, threshold)


def dump_pose(pose: Pose) -> dict:
    return {"version": 1.3, "people": [{"pose_keypoints_2d": pose.to_flat()}]}


def save_pose(pose: Pose, path: str | PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(dump_pose(pose), fh, indent=2)
        fh.write("\n")
