"""Resize the clothing region of a human-parsing segmentation map to a garment's real size."""
from .collar import CollarRect, collar_rect, erode_collar
from .estimator import ClothingResizer, RunReport
from .exceptions import (ComponentCountMismatch, DegenerateRegion, EmptyClothing,
                         InconsistentDescriptor, InputError, InvalidSpec, NonPositiveScale,
                         OverlappingRegions, PaletteError, PoseFormatError, ProcessingError,
                         SizefitError, UndetectedKeypoint, UnknownLabel)
from .geometry import (Keypoint, Pose, SizeSpec, VirtualSize, delta, lateral_extent_alpha,
                       load_pose, virtual_height, virtual_size, virtual_width)
from .overlap import ClosestPair, closest_pair, correct_overlap
from .pipeline import FixtureDescriptor, JobConfig, make_fixture, resize_segmap, run
from .resize import ScalePlan, plan_scale, scale_region
from .segmap import (Palette, Region, SegMap, contour_of, default_palette, erase_region,
                     extract_regions, load_segmap, save_segmap, write_region)

__version__ = "0.1.0"
