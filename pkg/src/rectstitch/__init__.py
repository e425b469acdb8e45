"""rectstitch: merge two overlapping photographs into one rectangular image.

Coarse fusion overlays the aligned pair, a fast-marching fill turns the
irregular border into a weak prior, and a weighted-mask-guided reverse
process refines seam and fill regions in a single pass of a pluggable
denoiser backend.
"""

__version__ = "0.1.0"

from .errors import (
    BackendShapeMismatch,
    BackendUnavailable,
    CorruptFile,
    DegenerateHomography,
    InvalidConfig,
    NoOverlap,
    NonFiniteLatent,
    StitchError,
    TileTooSmall,
    UnsupportedFormat,
    ZeroVector,
)
from .model import (
    AblationFlags,
    BinaryMask,
    Homography,
    ImageBuffer,
    StitchConfig,
    WeightMask,
    build_config,
    validate_config,
)

__all__ = [
    "AblationFlags",
    "BackendShapeMismatch",
    "BackendUnavailable",
    "BinaryMask",
    "CorruptFile",
    "DegenerateHomography",
    "Homography",
    "ImageBuffer",
    "InvalidConfig",
    "NoOverlap",
    "NonFiniteLatent",
    "StitchConfig",
    "StitchError",
    "TileTooSmall",
    "UnsupportedFormat",
    "WeightMask",
    "ZeroVector",
    "build_config",
    "validate_config",
    "__version__",
]
