"""Exception types shared across the toolkit."""


class GlintProbeError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(GlintProbeError, ValueError):
    """An argument or configuration value violates a precondition."""


class DegenerateInputError(GlintProbeError):
    """Input is valid in type but carries no usable signal (e.g. constant image)."""


class NoFaceError(GlintProbeError):
    """The landmark provider found no face in the frame."""


class NoIrisError(GlintProbeError):
    """Iris segmentation found no circle above the vote floor."""


class EmptyReflectionError(GlintProbeError):
    """The iris interior is constant; no reflection can be extracted."""


class GeometryTooSmallError(GlintProbeError):
    """The predicted reflection is too small to resolve at the given geometry."""
