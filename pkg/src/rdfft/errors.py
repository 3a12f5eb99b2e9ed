"""Exception types raised by the kernels and the bench harness."""


class RdfftError(Exception):
    """Base class for every error raised by this package."""


class SizeError(RdfftError, ValueError):
    """Length is not a power of two, or is below the supported minimum."""


class SizeMismatch(RdfftError, ValueError):
    """Buffers (or a buffer and a plan/layer) disagree on length or shape."""


class HermitianViolation(RdfftError, ValueError):
    """A complex spectrum handed to ``pack`` is not conjugate-symmetric."""


class NonFinite(RdfftError, FloatingPointError):
    """An input buffer holds NaN or infinity."""


class ConfigError(RdfftError, ValueError):
    """Invalid benchmark configuration."""


class ThresholdViolation(RdfftError):
    """A benchmark cell exceeded an accuracy or allocation threshold."""
