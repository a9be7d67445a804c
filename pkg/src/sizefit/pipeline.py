"""File-level jobs and synthetic test people."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import collar as _collar
from .estimator import ClothingResizer, RunReport
from .exceptions import InconsistentDescriptor
from .geometry import (L_ELBOW, L_SHOULDER, L_WRIST, MID_HIP, NECK, R_ELBOW, R_SHOULDER, R_WRIST,
                       DEFAULT_CONFIDENCE_THRESHOLD, Pose, SizeSpec, load_pose, save_pose)
from .overlap import DEFAULT_TOLERANCE
from .segmap import Palette, SegMap, default_palette, load_segmap, save_segmap


@dataclass
class JobConfig:
    segmap_path: str
    palette_path: str
    pose_path: str
    spec: SizeSpec
    out_path: str
    report_path: str | None = None
    out_palette_path: str | None = None
    h_rule: str = "alpha"
    collar_iterations: int = _collar.DEFAULT_ITERATIONS
    collar_sx_frac: float = _collar.DEFAULT_SX_FRAC
    collar_sy_frac: float = _collar.DEFAULT_SY_FRAC
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD
    skip_collar: bool = False
    skip_overlap: bool = False
    overlap_tolerance: float = DEFAULT_TOLERANCE

    def resizer(self) -> ClothingResizer:
        return ClothingResizer(
            self.spec.person_height_cm, self.spec.person_shoulder_cm,
            self.spec.cloth_height_cm, self.spec.cloth_shoulder_cm,
            h_rule=self.h_rule, collar_iterations=self.collar_iterations,
            collar_sx_frac=self.collar_sx_frac, collar_sy_frac=self.collar_sy_frac,
            confidence_threshold=self.confidence_threshold,
            skip_collar=self.skip_collar, skip_overlap=self.skip_overlap,
            overlap_tolerance=self.overlap_tolerance,
        )


def resize_segmap(segmap: SegMap, pose: Pose, spec: SizeSpec, **params) -> tuple[SegMap, RunReport]:
    """In-memory run: returns the edited map and its report."""
    resizer = ClothingResizer(spec.person_height_cm, spec.person_shoulder_cm,
                              spec.cloth_height_cm, spec.cloth_shoulder_cm, **params)
    out = resizer.fit_transform(segmap, pose=pose)
    return out, resizer.report_


def run(config: JobConfig) -> tuple[SegMap, RunReport]:
    """Load inputs, resize, and write the PNG, palette sidecar and report."""
    segmap = load_segmap(config.segmap_path, config.palette_path)
    pose = load_pose(config.pose_path, config.confidence_threshold)
    resizer = config.resizer()
    out = resizer.fit_transform(segmap, pose=pose)
    report = resizer.report_

    out_palette = config.out_palette_path or default_sidecar(config.out_path)
    save_segmap(out, config.out_path, out_palette)
    if config.report_path:
        Path(config.report_path).write_text(report.dumps())
    return out, report


def default_sidecar(png_path) -> str:
    root, _ = os.path.splitext(str(png_path))
    return root + ".palette.json"


# --- synthetic people -------------------------------------------------------

@dataclass(frozen=True)
class FixtureDescriptor:
    """Geometry of a synthetic frontal person, in integer pixels.

    The clothing is the torso rectangle from the neck row down to (but not
    including) the mid-hip row, one shoulder width wide, so the neck/mid-hip
    keypoint distance equals the clothing height.  With ``crossing_arm`` the
    left forearm runs horizontally across the torso and splits the clothing
    into an upper and a lower component.  ``jitter`` scales the seeded random
    perturbation of the layout; 0 disables it.
    """

    width: int = 192
    height: int = 256
    neck_x: int = 96
    neck_y: int = 72
    torso_length: int = 110
    shoulder_width: int = 64
    elbow_dx: int = 10
    elbow_dy: int = 45
    forearm_dy: int = 45
    arm_width: int = 12
    crossing_arm: bool = False
    cross_fraction: float = 0.65
    jitter: float = 1.0
    person_height_cm: float = 66.0
    person_shoulder_cm: float = 47.0
    cloth_height_cm: float = 73.0
    cloth_shoulder_cm: float = 51.0

    def validate(self):
        if self.width < 16 or self.height < 16:
            raise InconsistentDescriptor("canvas too small")
        if self.torso_length <= 0 or self.shoulder_width <= 0 or self.arm_width <= 0:
            raise InconsistentDescriptor("torso, shoulder and arm sizes must be positive")
        if self.elbow_dy <= 0:
            raise InconsistentDescriptor("elbows must hang below the shoulders")
        x0 = self.neck_x - self.shoulder_width // 2
        if x0 - self.elbow_dx - self.arm_width < 0 or \
                x0 + self.shoulder_width + self.elbow_dx + self.arm_width >= self.width:
            raise InconsistentDescriptor("arms do not fit horizontally on the canvas")
        face_top = self.neck_y - 2 * self._face_radius - 8
        if face_top < 0:
            raise InconsistentDescriptor("head does not fit above the neck")
        if self.neck_y + self.torso_length + 8 > self.height:
            raise InconsistentDescriptor("hips fall outside the canvas")
        if self.crossing_arm:
            if not 0.2 <= self.cross_fraction <= 0.85:
                raise InconsistentDescriptor("crossing arm must lie within the torso")
            band = self.arm_width + 2
            y = self.cross_y
            if y - band < self.neck_y + 4 or y + band > self.neck_y + self.torso_length - 4:
                raise InconsistentDescriptor("crossing arm leaves no clothing on one side")

    @property
    def _face_radius(self) -> int:
        return max(self.shoulder_width // 4, 6)

    @property
    def cross_y(self) -> int:
        return self.neck_y + int(round(self.cross_fraction * self.torso_length))

    def jittered(self, seed) -> "FixtureDescriptor":
        if seed is None or self.jitter == 0:
            return self
        rng = np.random.default_rng(seed)
        j = self.jitter
        changes = dict(
            neck_x=self.neck_x + int(round(j * rng.integers(-4, 5))),
            neck_y=self.neck_y + int(round(j * rng.integers(-3, 4))),
            torso_length=self.torso_length + int(round(j * rng.integers(-10, 11))),
            shoulder_width=self.shoulder_width + 2 * int(round(j * rng.integers(-4, 5))),
            elbow_dx=max(self.elbow_dx + int(round(j * rng.integers(-3, 4))), 0),
            elbow_dy=max(self.elbow_dy + int(round(j * rng.integers(-5, 6))), 10),
            arm_width=max(self.arm_width + int(round(j * rng.integers(-2, 3))), 4),
        )
        if self.crossing_arm:
            changes["cross_fraction"] = float(np.clip(
                self.cross_fraction + j * rng.uniform(-0.1, 0.1), 0.45, 0.8))
        return replace(self, **changes)

    def size_spec(self) -> SizeSpec:
        return SizeSpec(self.person_height_cm, self.person_shoulder_cm,
                        self.cloth_height_cm, self.cloth_shoulder_cm)


PRESETS = {
    "default": FixtureDescriptor(),
    "crossing-arm": FixtureDescriptor(crossing_arm=True),
}


def _capsule(shape, p, q, width) -> np.ndarray:
    """Pixels within ``width / 2`` of segment ``pq``."""
    h, w = shape
    ys, xs = np.mgrid[0:h, 0:w]
    px, py = p
    qx, qy = q
    dx, dy = qx - px, qy - py
    length2 = dx * dx + dy * dy
    t = np.clip(((xs - px) * dx + (ys - py) * dy) / length2, 0.0, 1.0) if length2 else 0.0
    cx, cy = px + t * dx, py + t * dy
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= (width / 2) ** 2


def make_fixture(descriptor: FixtureDescriptor | str = "default", seed: int | None = 0,
                 palette: Palette | None = None) -> tuple[SegMap, Pose, SizeSpec]:
    """Draw a synthetic person and the matching pose.

    Keypoints sit exactly on the drawn geometry: neck on the top edge of the
    torso, mid-hip one row below its bottom edge, shoulders at its top
    corners.
    """
    if isinstance(descriptor, str):
        try:
            descriptor = PRESETS[descriptor]
        except KeyError:
            raise InconsistentDescriptor(f"unknown preset {descriptor!r}; choose from {sorted(PRESETS)}") from None
    d = descriptor.jittered(seed)
    d.validate()
    palette = palette or default_palette()
    lab = {role: palette.label_for(role) for role in
           ("background", "clothing", "left_arm", "right_arm", "skin_neck", "face", "hair", "lower_body")}
    shape = (d.height, d.width)
    labels = np.full(shape, lab["background"], dtype=np.uint8)

    x_r = d.neck_x - d.shoulder_width // 2      # image-left, the person's right
    x_l = x_r + d.shoulder_width
    y_n = d.neck_y
    y_h = d.neck_y + d.torso_length

    neck = (d.neck_x, y_n)
    hip = (d.neck_x, y_h)
    r_sh, l_sh = (x_r, y_n), (x_l, y_n)
    r_el = (x_r - d.elbow_dx, y_n + d.elbow_dy)
    r_wr = (r_el[0] - d.elbow_dx // 2, r_el[1] + d.forearm_dy)
    if d.crossing_arm:
        l_el = (x_l + d.elbow_dx, d.cross_y)
        l_wr = (x_r - d.elbow_dx - d.arm_width, d.cross_y)
    else:
        l_el = (x_l + d.elbow_dx, y_n + d.elbow_dy)
        l_wr = (l_el[0] + d.elbow_dx // 2, l_el[1] + d.forearm_dy)

    # lower body, then clothing, then arms/neck/face/hair: the compositing order
    labels[y_h:min(y_h + 70, d.height), x_r:x_l] = lab["lower_body"]
    labels[y_n:y_h, x_r:x_l] = lab["clothing"]
    for a, b, role in ((r_sh, r_el, "right_arm"), (r_el, r_wr, "right_arm"),
                       (l_sh, l_el, "left_arm"), (l_el, l_wr, "left_arm")):
        labels[_capsule(shape, a, b, d.arm_width)] = lab[role]
    radius = d._face_radius
    neck_half = max(radius // 2, 3)
    face_c = (d.neck_x, y_n - 6 - radius)
    labels[face_c[1] + radius - 2:y_n, d.neck_x - neck_half:d.neck_x + neck_half + 1] = lab["skin_neck"]
    ys, xs = np.mgrid[0:d.height, 0:d.width]
    head = (xs - face_c[0]) ** 2 + (ys - face_c[1]) ** 2
    labels[head <= (radius + 2) ** 2] = lab["hair"]
    labels[(head <= radius ** 2) & (ys >= face_c[1] - radius // 2)] = lab["face"]

    points = {NECK: neck, MID_HIP: hip, R_SHOULDER: r_sh, L_SHOULDER: l_sh,
              R_ELBOW: r_el, L_ELBOW: l_el, R_WRIST: r_wr, L_WRIST: l_wr, 0: face_c}
    pose = Pose.from_points(points)
    return SegMap(labels, palette), pose, d.size_spec()


def write_fixture(out_dir, preset: str = "default", seed: int | None = 0) -> dict:
    """Write ``segmap.png``, ``palette.json``, ``pose.json`` and ``sizes.json``."""
    segmap, pose, spec = make_fixture(preset, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"segmap": out / "segmap.png", "palette": out / "palette.json",
             "pose": out / "pose.json", "sizes": out / "sizes.json"}
    save_segmap(segmap, paths["segmap"], paths["palette"])
    save_pose(pose, paths["pose"])
    paths["sizes"].write_text(json.dumps(asdict(spec), indent=2, sort_keys=True) + "\n")
    return {k: str(v) for k, v in paths.items()}
