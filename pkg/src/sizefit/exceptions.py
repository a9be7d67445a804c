"""Exception hierarchy.

Every error raised by the package derives from :class:`SizefitError`.  The two
intermediate classes split failures the way the CLI reports them: bad inputs
(exit code 2) versus failures while editing the map (exit code 3).
"""


class SizefitError(Exception):
    """Base class. ``stage`` names the pipeline stage that raised, when known."""

    stage = None

    def with_stage(self, stage):
        self.stage = stage
        return self


class InputError(SizefitError, ValueError):
    pass


class ProcessingError(SizefitError, RuntimeError):
    pass


class UndetectedKeypoint(InputError):
    def __init__(self, index, name=None, message=None):
        self.index = index
        label = f"keypoint {index}" + (f" ({name})" if name else "")
        super().__init__(message or f"{label} is not detected")


class InvalidSpec(InputError):
    pass


class PoseFormatError(InputError):
    pass


class PaletteError(InputError):
    pass


class UnknownLabel(InputError):
    pass


class InconsistentDescriptor(InputError):
    pass


class EmptyClothing(InputError):
    pass


class DegenerateRegion(ProcessingError):
    pass


class NonPositiveScale(ProcessingError):
    pass


class OverlappingRegions(ProcessingError):
    pass


class ComponentCountMismatch(ProcessingError):
    pass
