"""Exception taxonomy shared across the package."""


class StitchError(Exception):
    """Base class for every error raised by this package."""


class InvalidConfig(StitchError):
    """A configuration value violates its declared range.

    ``field`` carries the external (CLI/config-file) name of the offender.
    """

    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"invalid config field '{field}'" + (f": {message}" if message else ""))


class DegenerateHomography(StitchError):
    """Homography is singular or maps a corner to the plane at infinity."""


class NoOverlap(StitchError):
    """The warped coverage masks of the two inputs do not intersect."""


class BackendUnavailable(StitchError):
    """Inpainting backend cannot be reached or refused the session."""


class BackendShapeMismatch(StitchError):
    """Backend returned tensors inconsistent with its declared capabilities."""


class NonFiniteLatent(StitchError):
    """A latent tensor contains NaN or infinity."""


class TileTooSmall(StitchError):
    """Grid split would produce tiles below the minimum usable side."""


class ZeroVector(StitchError):
    """Cosine similarity is undefined for a zero-norm embedding."""


class UnsupportedFormat(StitchError):
    """Image file extension is not one of the supported formats."""


class CorruptFile(StitchError):
    """Image file exists but cannot be decoded."""
