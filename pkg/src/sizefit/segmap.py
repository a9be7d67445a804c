"""Label rasters, palettes, connected regions and compositing.

A :class:`SegMap` is a 2-D ``uint8`` grid of label ids plus a :class:`Palette`
that gives each id a semantic role and a display color.  All logic keys on
roles and ids; colors only matter for the PNG file.

Pixel coordinates are ``(x, y)`` with ``x`` the column and ``y`` the row.
Point arrays have shape ``(n, 2)`` and are kept in raster order (by ``y``
then ``x``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from os import PathLike

import numpy as np
from PIL import Image
from scipy import ndimage

from .exceptions import PaletteError, UnknownLabel

ROLES = ("background", "clothing", "left_arm", "right_arm", "skin_neck",
         "face", "hair", "lower_body", "other")

# Compositing precedence; higher rank is drawn later and wins.
ROLE_RANK = {
    "background": 0,
    "other": 1,
    "lower_body": 1,
    "clothing": 2,
    "left_arm": 3,
    "right_arm": 3,
    "skin_neck": 4,
    "face": 5,
    "hair": 6,
}
ARM_ROLES = ("left_arm", "right_arm")

EIGHT = np.ones((3, 3), dtype=bool)
FOUR = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class PaletteEntry:
    role: str
    color: tuple[int, int, int]


class Palette:
    """Mapping ``label id -> (role, RGB)``.

    Exactly one id carries ``clothing`` and exactly one ``background``; ids
    and colors are unique.  Other roles may repeat.
    """

    def __init__(self, entries):
        items = {}
        for label, entry in dict(entries).items():
            label = int(label)
            if not 0 <= label <= 255:
                raise PaletteError(f"label id {label} outside 0..255")
            if not isinstance(entry, PaletteEntry):
                role, color = entry
                entry = PaletteEntry(str(role), tuple(int(c) for c in color))
            if entry.role not in ROLES:
                raise PaletteError(f"label {label}: unknown role {entry.role!r}")
            if len(entry.color) != 3 or not all(0 <= c <= 255 for c in entry.color):
                raise PaletteError(f"label {label}: color must be three values in 0..255")
            items[label] = entry
        self._entries = dict(sorted(items.items()))

        for role in ("clothing", "background"):
            n = sum(e.role == role for e in self._entries.values())
            if n != 1:
                raise PaletteError(f"palette needs exactly one {role!r} label, found {n}")
        colors = [e.color for e in self._entries.values()]
        if len(set(colors)) != len(colors):
            raise PaletteError("palette display colors must be unique")

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __contains__(self, label):
        return int(label) in self._entries

    def __getitem__(self, label) -> PaletteEntry:
        try:
            return self._entries[int(label)]
        except KeyError:
            raise UnknownLabel(f"label id {label} is not in the palette") from None

    def __eq__(self, other):
        return isinstance(other, Palette) and self._entries == other._entries

    def __repr__(self):
        return f"Palette({self._entries!r})"

    def items(self):
        return self._entries.items()

    def labels_for(self, role: str) -> list[int]:
        return [k for k, e in self._entries.items() if e.role == role]

    def label_for(self, role: str) -> int:
        """The single id for ``role``; the smallest one if the role repeats."""
        labels = self.labels_for(role)
        if not labels:
            raise UnknownLabel(f"no label with role {role!r} in the palette")
        return labels[0]

    @property
    def clothing(self) -> int:
        return self.label_for("clothing")

    @property
    def background(self) -> int:
        return self.label_for("background")

    def rank_table(self) -> np.ndarray:
        """Lookup array ``label id -> compositing rank`` (256 entries)."""
        table = np.zeros(256, dtype=np.int16)
        for label, entry in self._entries.items():
            table[label] = ROLE_RANK[entry.role]
        return table

    def to_json(self) -> dict:
        return {"labels": [{"id": k, "role": e.role, "color": list(e.color)}
                           for k, e in self._entries.items()]}

    @classmethod
    def from_json(cls, data) -> "Palette":
        try:
            rows = data["labels"]
            return cls({row["id"]: (row["role"], row["color"]) for row in rows})
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, PaletteError):
                raise
            raise PaletteError(f"malformed palette: {exc!r}") from None

    def with_colors(self, colors: dict[int, tuple[int, int, int]]) -> "Palette":
        return Palette({k: (e.role, colors.get(k, e.color)) for k, e in self._entries.items()})


def default_palette() -> Palette:
    """A small human-parsing label set used by the synthetic fixtures."""
    return Palette({
        0: ("background", (0, 0, 0)),
        1: ("hair", (254, 0, 0)),
        2: ("face", (0, 0, 254)),
        3: ("clothing", (254, 85, 0)),
        4: ("lower_body", (0, 85, 85)),
        5: ("left_arm", (51, 169, 220)),
        6: ("right_arm", (0, 254, 254)),
        7: ("skin_neck", (85, 51, 0)),
        8: ("other", (169, 254, 85)),
    })


class SegMap:
    """Label raster plus palette.  The label array is read-only."""

    def __init__(self, labels, palette: Palette, *, check: bool = True):
        labels = np.array(labels, dtype=np.uint8, copy=True)
        if labels.ndim != 2:
            raise ValueError(f"label grid must be 2-D, got shape {labels.shape}")
        if check:
            present = np.unique(labels)
            missing = [int(v) for v in present if int(v) not in palette]
            if missing:
                raise UnknownLabel(f"label ids {missing} appear in the raster but not in the palette")
        labels.flags.writeable = False
        self.labels = labels
        self.palette = palette

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def mask(self, role: str) -> np.ndarray:
        return np.isin(self.labels, self.palette.labels_for(role))

    def replace(self, labels) -> "SegMap":
        return SegMap(labels, self.palette)

    def __eq__(self, other):
        return (isinstance(other, SegMap) and self.palette == other.palette
                and np.array_equal(self.labels, other.labels))

    def __repr__(self):
        return f"SegMap({self.width}x{self.height}, {len(self.palette)} labels)"


def _sort_points(points: np.ndarray) -> np.ndarray:
    if len(points) == 0:
        return points.reshape(0, 2)
    order = np.lexsort((points[:, 0], points[:, 1]))
    return points[order]


def _local_mask(points: np.ndarray, pad: int = 0):
    """Boolean raster of ``points`` over their bbox plus ``pad``; returns (mask, x0, y0)."""
    x0 = int(points[:, 0].min()) - pad
    y0 = int(points[:, 1].min()) - pad
    w = int(points[:, 0].max()) - x0 + 1 + pad
    h = int(points[:, 1].max()) - y0 + 1 + pad
    mask = np.zeros((h, w), dtype=bool)
    mask[points[:, 1] - y0, points[:, 0] - x0] = True
    return mask, x0, y0


def _mask_points(mask: np.ndarray, x0: int = 0, y0: int = 0) -> np.ndarray:
    ys, xs = np.nonzero(mask)
    return np.column_stack((xs + x0, ys + y0)).astype(np.int64)


def contour_of(region_or_points) -> np.ndarray:
    """Pixels of the region that have a 4-neighbor outside it, in raster order."""
    points = region_or_points.pixels if isinstance(region_or_points, Region) else \
        np.asarray(region_or_points, dtype=np.int64).reshape(-1, 2)
    if len(points) == 0:
        return points.reshape(0, 2)
    mask, x0, y0 = _local_mask(points, pad=1)
    interior = ndimage.binary_erosion(mask, structure=FOUR, border_value=0)
    return _mask_points(mask & ~interior, x0, y0)


@dataclass(frozen=True, eq=False)
class Region:
    """A set of pixels carrying one label, with derived geometry."""

    label: int
    pixels: np.ndarray
    contour: np.ndarray = field(repr=False)
    centroid: tuple[float, float]
    bbox: tuple[int, int, int, int]

    @classmethod
    def from_pixels(cls, label: int, pixels) -> "Region":
        pts = np.asarray(pixels, dtype=np.int64).reshape(-1, 2)
        if len(pts) == 0:
            raise ValueError("a region needs at least one pixel")
        pts = _sort_points(np.unique(pts, axis=0))
        pts.flags.writeable = False
        contour = contour_of(pts)
        contour.flags.writeable = False
        cx, cy = pts.mean(axis=0)
        bbox = (int(pts[:, 0].min()), int(pts[:, 1].min()),
                int(pts[:, 0].max()), int(pts[:, 1].max()))
        return cls(int(label), pts, contour, (float(cx), float(cy)), bbox)

    def __len__(self):
        return len(self.pixels)

    @property
    def size(self) -> int:
        return len(self.pixels)

    def pixel_set(self) -> set[tuple[int, int]]:
        return {(int(x), int(y)) for x, y in self.pixels}

    def mask(self, shape) -> np.ndarray:
        """Boolean raster of ``shape``; out-of-bounds pixels are dropped."""
        out = np.zeros(shape, dtype=bool)
        pts = clip_points(self.pixels, shape)
        out[pts[:, 1], pts[:, 0]] = True
        return out

    def translated(self, dx: int, dy: int) -> "Region":
        return Region.from_pixels(self.label, self.pixels + np.array([dx, dy]))

    def clipped(self, shape) -> "Region | None":
        pts = clip_points(self.pixels, shape)
        if len(pts) == len(self.pixels):
            return self
        return Region.from_pixels(self.label, pts) if len(pts) else None


def clip_points(points, shape) -> np.ndarray:
    pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
    h, w = shape
    keep = (pts[:, 0] >= 0) & (pts[:, 0] < w) & (pts[:, 1] >= 0) & (pts[:, 1] < h)
    return pts[keep]


def label_components(mask: np.ndarray):
    """8-connected component labelling; thin wrapper over :func:`scipy.ndimage.label`."""
    return ndimage.label(mask, structure=EIGHT)


def regions_from_mask(mask: np.ndarray, label: int) -> list[Region]:
    comp, n = label_components(mask)
    regions = []
    for idx, sl in enumerate(ndimage.find_objects(comp), start=1):
        if sl is None:
            continue
        local = comp[sl] == idx
        regions.append(Region.from_pixels(label, _mask_points(local, sl[1].start, sl[0].start)))
    regions.sort(key=lambda r: (-r.size, r.bbox[1], r.bbox[0]))
    return regions


def extract_regions(segmap: SegMap, role: str) -> list[Region]:
    """All 8-connected components carrying ``role``, largest first.

    Ties in size go to the component whose bbox corner is topmost, then
    leftmost.  A role that repeats across several ids yields one list, with
    each component keeping its own id.
    """
    if role not in ROLES:
        raise ValueError(f"unknown role {role!r}")
    regions = []
    for label in segmap.palette.labels_for(role):
        regions.extend(regions_from_mask(segmap.labels == label, label))
    regions.sort(key=lambda r: (-r.size, r.bbox[1], r.bbox[0]))
    return regions


def write_region(segmap: SegMap, pixels, label: int) -> SegMap:
    """Overwrite ``pixels`` with ``label``; out-of-bounds pixels are ignored."""
    segmap.palette[label]
    pts = clip_points(pixels.pixels if isinstance(pixels, Region) else pixels, segmap.shape)
    labels = segmap.labels.copy()
    labels[pts[:, 1], pts[:, 0]] = label
    return SegMap(labels, segmap.palette, check=False)


def erase_region(segmap: SegMap, pixels, fill_label: int | None = None) -> SegMap:
    """Set ``pixels`` to ``fill_label`` (background by default)."""
    if fill_label is None:
        fill_label = segmap.palette.background
    return write_region(segmap, pixels, fill_label)


def fill_removed(labels: np.ndarray, removed: np.ndarray, palette: Palette) -> np.ndarray:
    """Relabel the pixels in ``removed`` in place and return ``labels``.

    Each 8-connected piece of ``removed`` becomes skin/neck when a skin/neck
    pixel is 8-adjacent to it, otherwise background.
    """
    if not removed.any():
        return labels
    skin_labels = palette.labels_for("skin_neck")
    background = palette.background
    if not skin_labels:
        labels[removed] = background
        return labels
    skin = np.isin(labels, skin_labels) & ~removed
    comp, n = label_components(removed)
    for idx, sl in enumerate(ndimage.find_objects(comp), start=1):
        # grow the slice by one pixel to see the neighbors
        y0, x0 = max(sl[0].start - 1, 0), max(sl[1].start - 1, 0)
        window = (slice(y0, sl[0].stop + 1), slice(x0, sl[1].stop + 1))
        piece = comp[window] == idx
        ring = ndimage.binary_dilation(piece, structure=EIGHT) & ~piece
        touching = labels[window][ring & skin[window]]
        fill = int(touching.min()) if touching.size else background
        labels[window][piece] = fill
    return labels


def paint_clothing(labels: np.ndarray, palette: Palette, points, holes: np.ndarray) -> np.ndarray:
    """Draw clothing ``points`` into ``labels`` in place, honoring precedence.

    A pixel takes the clothing label when it is a hole (vacated clothing) or
    its current label ranks at or below clothing.  Arms, skin, face and hair
    stay on top.
    """
    pts = clip_points(points, labels.shape)
    if len(pts) == 0:
        return labels
    rank = palette.rank_table()
    xs, ys = pts[:, 0], pts[:, 1]
    ok = holes[ys, xs] | (rank[labels[ys, xs]] <= ROLE_RANK["clothing"])
    labels[ys[ok], xs[ok]] = palette.clothing
    holes[ys[ok], xs[ok]] = False
    return labels


def composite_clothing(segmap: SegMap, regions, vacate=None) -> SegMap:
    """Replace clothing with ``regions`` under the compositing order.

    ``vacate`` is the boolean mask of clothing pixels to clear first (all
    clothing by default).  Vacated pixels not covered by the new regions are
    refilled with :func:`fill_removed`.
    """
    palette = segmap.palette
    labels = segmap.labels.copy()
    holes = segmap.labels == palette.clothing if vacate is None else vacate.copy()
    for region in regions:
        points = region.pixels if isinstance(region, Region) else region
        paint_clothing(labels, palette, points, holes)
    fill_removed(labels, holes, palette)
    return SegMap(labels, palette, check=False)


def load_palette(path: str | PathLike) -> Palette:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise PaletteError(f"{path}: not valid JSON ({exc})") from None
    return Palette.from_json(data)


def save_palette(palette: Palette, path: str | PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(palette.to_json(), fh, indent=2)
        fh.write("\n")


def to_image(segmap: SegMap) -> Image.Image:
    img = Image.frombytes("P", (segmap.width, segmap.height), np.ascontiguousarray(segmap.labels).tobytes())
    flat = [0] * 768
    for label, entry in segmap.palette.items():
        flat[3 * label:3 * label + 3] = entry.color
    img.putpalette(flat)
    return img


def save_segmap(segmap: SegMap, png_path: str | PathLike, palette_path: str | PathLike | None = None) -> None:
    """Write an indexed PNG (index = label id) and optionally the palette sidecar."""
    to_image(segmap).save(png_path, format="PNG", optimize=False)
    if palette_path is not None:
        save_palette(segmap.palette, palette_path)


def load_segmap(png_path: str | PathLike, palette: Palette | str | PathLike) -> SegMap:
    if not isinstance(palette, Palette):
        palette = load_palette(palette)
    with Image.open(png_path) as img:
        if img.mode not in ("P", "L"):
            raise PaletteError(f"{png_path}: expected an indexed (P) or grayscale PNG, got mode {img.mode}")
        labels = np.array(img, dtype=np.uint8)
    return SegMap(labels, palette)
