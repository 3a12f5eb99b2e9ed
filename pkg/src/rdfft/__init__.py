"""In-place real-domain radix-2 FFT with packed Hermitian spectra.

A length-``n`` real buffer is transformed into its spectrum inside the same
``n`` scalars (see :mod:`rdfft.packed` for the layout), and back. On top of
that sit packed-spectrum arithmetic and a block-circulant linear layer
with analytic gradients. After a :class:`Plan` or layer is built, none of
the transforms acquire memory.
"""

from .circulant import (
    CirculantLayer,
    GradientSet,
    apply_gradients,
    backward,
    forward,
    layer_create,
    layer_for_shape,
)
from .core import (
    Plan,
    StageView,
    bit_reverse_in_place,
    forward_in_place,
    forward_staged,
    inverse_in_place,
    plan_create,
)
from .errors import (
    ConfigError,
    HermitianViolation,
    NonFinite,
    RdfftError,
    SizeError,
    SizeMismatch,
    ThresholdViolation,
)
from .packed import axpy_in_place, conjugate_in_place, multiply_in_place, pack, unpack

__version__ = "0.1.0"

__all__ = [
    "Plan",
    "StageView",
    "plan_create",
    "bit_reverse_in_place",
    "forward_in_place",
    "inverse_in_place",
    "forward_staged",
    "pack",
    "unpack",
    "conjugate_in_place",
    "multiply_in_place",
    "axpy_in_place",
    "CirculantLayer",
    "GradientSet",
    "layer_create",
    "layer_for_shape",
    "forward",
    "backward",
    "apply_gradients",
    "RdfftError",
    "SizeError",
    "SizeMismatch",
    "HermitianViolation",
    "NonFinite",
    "ConfigError",
    "ThresholdViolation",
]
