"""Active video-call authentication from corneal reflections of screen probes.

Displays a known high-contrast pattern on the call screen, then verifies that
its reflection appears on the participant's cornea: face frame -> eye crops ->
iris segmentation (Sobel + circle Hough) -> Otsu reflection mask ->
multi-scale NCC match against the pattern -> verdict.
"""

from ._backend import kernel_backend
from .geometry import DEFAULT_GEOMETRY, ImagingGeometry
from .patterns import ProbingPattern, random_pattern

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_GEOMETRY",
    "ImagingGeometry",
    "ProbingPattern",
    "random_pattern",
    "kernel_backend",
    "__version__",
]
