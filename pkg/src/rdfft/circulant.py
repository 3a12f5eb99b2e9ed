"""Block-circulant linear layer computed with the in-place real FFT.

The weight matrix is a ``q_out x q_in`` grid of ``p x p`` circulant blocks,
block ``(i, j)`` defined by its first column ``c_ij`` so that
``C_ij[r, s] = c_ij[(r - s) mod p]``. Weights are transformed once at
creation and then live permanently as packed spectra; SGD updates are
applied in the frequency domain too.

Per block, with ``F`` the forward transform and ``F^-1`` its inverse::

    y_i        = F^-1( sum_j F(c_ij) * F(x_j) )
    dL/dx_j    = F^-1( sum_i conj(F(c_ij)) * F(g_i) )
    dL/dc_ij   = F^-1( conj(F(x_j)) * F(g_i) )

``forward``, ``backward`` and ``apply_gradients`` use no memory beyond the
buffers the caller passes in. Several of those buffers are overwritten;
see each function.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._jit import kernel
from ._validate import check_buffer, check_length, is_power_of_two, resolve_dtype
from .core import Plan, forward_kernel, inverse_kernel, plan_create
from .errors import NonFinite, SizeError, SizeMismatch
from .packed import axpy_slots, mul_acc_slots, mul_slots

__all__ = [
    "CirculantLayer",
    "GradientSet",
    "layer_create",
    "forward",
    "backward",
    "apply_gradients",
]


class CirculantLayer:
    """Block-circulant weight held as ``q_out * q_in`` packed spectra of length ``p``."""

    def __init__(self, plan: Plan, q_out: int, q_in: int, spectra: np.ndarray):
        if spectra.shape != (q_out, q_in, plan.n) or spectra.dtype != plan.dtype:
            raise SizeMismatch("spectra do not match the plan and block counts")
        self.plan = plan
        self.q_out = q_out
        self.q_in = q_in
        self._spectra = np.ascontiguousarray(spectra)
        self._flat = self._spectra.reshape(-1)

    @property
    def p(self) -> int:
        return self.plan.n

    @property
    def dtype(self) -> np.dtype:
        return self.plan.dtype

    @property
    def shape(self) -> tuple[int, int]:
        """``(m, n)``: output and input dimension."""
        return self.q_out * self.p, self.q_in * self.p

    @property
    def num_parameters(self) -> int:
        return self.q_out * self.q_in * self.p

    @property
    def weight_spectra(self) -> np.ndarray:
        """Read-only view of the packed weight spectra, shape ``(q_out, q_in, p)``."""
        view = self._spectra.view()
        view.flags.writeable = False
        return view

    def weights(self) -> np.ndarray:
        """Time-domain first columns ``c_ij`` (a fresh array)."""
        out = self._spectra.copy()
        flat = out.reshape(-1)
        for b in range(self.q_out * self.q_in):
            inverse_kernel(flat, b * self.p, self.plan.cos, self.plan.sin, self.plan.bitrev, self.plan.half)
        return out

    def __repr__(self) -> str:
        return (
            f"CirculantLayer(p={self.p}, q_out={self.q_out}, q_in={self.q_in}, "
            f"precision={self.plan.precision})"
        )


@dataclass
class GradientSet:
    """Caller-owned gradient storage; also the workspace for ``backward``."""

    grad_input: np.ndarray
    grad_weights: np.ndarray
    _gw_flat: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.grad_weights.ndim != 3 or not self.grad_weights.flags.c_contiguous:
            raise SizeMismatch("grad_weights must be a C-contiguous (q_out, q_in, p) array")
        self._gw_flat = self.grad_weights.reshape(-1)

    @classmethod
    def zeros(cls, layer: CirculantLayer) -> "GradientSet":
        m, n = layer.shape
        return cls(
            grad_input=np.zeros(n, dtype=layer.dtype),
            grad_weights=np.zeros((layer.q_out, layer.q_in, layer.p), dtype=layer.dtype),
        )


def layer_create(p: int, q_out: int, q_in: int, init_weights, precision=None) -> CirculantLayer:
    """Transform the time-domain first columns once and store their spectra.

    ``init_weights`` has shape ``(q_out, q_in, p)``; a plain length-``p``
    vector is accepted for a single block. Precision defaults to the dtype
    of ``init_weights`` when it is float32/float64, else float64.
    """
    try:
        p = check_length(p)
    except SizeError as exc:
        raise SizeError(f"block size: {exc}") from None
    for name, q in (("q_out", q_out), ("q_in", q_in)):
        if isinstance(q, bool) or not isinstance(q, (int, np.integer)) or q < 1:
            raise SizeError(f"{name} must be a positive integer, got {q!r}")
    q_out, q_in = int(q_out), int(q_in)

    w = np.asarray(init_weights)
    if precision is None:
        precision = w.dtype if w.dtype in (np.float32, np.float64) else np.float64
    dtype = resolve_dtype(precision)
    if w.ndim == 1 and q_out == q_in == 1:
        w = w[None, None, :]
    if w.shape != (q_out, q_in, p):
        raise SizeError(f"init_weights must have shape {(q_out, q_in, p)}, got {w.shape}")

    plan = plan_create(p, dtype)
    spectra = np.array(w, dtype=dtype, order="C")
    flat = spectra.reshape(-1)
    for b in range(q_out * q_in):
        forward_kernel(flat, b * p, plan.cos, plan.sin, plan.bitrev)
    return CirculantLayer(plan, q_out, q_in, spectra)


def layer_for_shape(m: int, n: int, p: int, init_weights, precision=None) -> CirculantLayer:
    """Like :func:`layer_create` but from the dense dimensions ``(m, n)``."""
    if not is_power_of_two(p) or p < 2 or m % p or n % p:
        raise SizeError(f"block size {p} must be a power of two dividing both {m} and {n}")
    return layer_create(p, m // p, n // p, init_weights, precision)


# -- kernels --


@kernel
def _all_finite(x):
    for k in range(x.shape[0]):
        v = x[k]
        if v - v != 0:
            return False
    return True


@kernel
def _copy(dst, do, src, so, count):
    for k in range(count):
        dst[do + k] = src[so + k]


@kernel
def _layer_forward(w, xs, y, p, q_out, q_in, cos, sin, bitrev, half):
    for j in range(q_in):
        forward_kernel(xs, j * p, cos, sin, bitrev)
    for i in range(q_out):
        yo = i * p
        for k in range(p):
            y[yo + k] = 0
        for j in range(q_in):
            mul_acc_slots(y, yo, w, (i * q_in + j) * p, xs, j * p, p, False)
        inverse_kernel(y, yo, cos, sin, bitrev, half)


@kernel
def _layer_backward(w, xs, g, gin, gw, p, q_out, q_in, cos, sin, bitrev, half):
    for i in range(q_out):
        forward_kernel(g, i * p, cos, sin, bitrev)
    # sum over output blocks in the frequency domain, one inverse per input block
    for j in range(q_in):
        jo = j * p
        for k in range(p):
            gin[jo + k] = 0
        for i in range(q_out):
            mul_acc_slots(gin, jo, w, (i * q_in + j) * p, g, i * p, p, True)
        inverse_kernel(gin, jo, cos, sin, bitrev, half)
    for i in range(q_out):
        for j in range(q_in):
            off = (i * q_in + j) * p
            _copy(gw, off, g, i * p, p)
            mul_slots(gw, off, xs, j * p, p, True)
            inverse_kernel(gw, off, cos, sin, bitrev, half)


@kernel
def _apply_sgd(w, gw, p, blocks, neg_lr, cos, sin, bitrev):
    for b in range(blocks):
        forward_kernel(gw, b * p, cos, sin, bitrev)
        axpy_slots(w, b * p, gw, b * p, p, neg_lr)


# -- public API --


def forward(layer: CirculantLayer, x: np.ndarray, y: np.ndarray, x_spec_cache: np.ndarray | None = None) -> None:
    """Compute ``y = C x`` into ``y``.

    Without ``x_spec_cache`` the input ``x`` is overwritten with the packed
    spectra of its blocks, which is exactly what :func:`backward` needs.
    With a cache buffer (length ``n``) ``x`` is preserved and the spectra
    land in the cache instead.
    """
    m, n = layer.shape
    plan = layer.plan
    check_buffer(x, n, plan.dtype, "x")
    check_buffer(y, m, plan.dtype, "y")
    if not _all_finite(x):
        raise NonFinite("x contains NaN or infinity")
    if x_spec_cache is None:
        xs = x
    else:
        check_buffer(x_spec_cache, n, plan.dtype, "x_spec_cache")
        _copy(x_spec_cache, 0, x, 0, n)
        xs = x_spec_cache
    _layer_forward(
        layer._flat, xs, y, layer.p, layer.q_out, layer.q_in,
        plan.cos, plan.sin, plan.bitrev, plan.half,
    )


def backward(layer: CirculantLayer, x_spec: np.ndarray, g: np.ndarray, grads: GradientSet) -> None:
    """Fill ``grads`` with the input and weight gradients for upstream gradient ``g``.

    ``x_spec`` holds the input spectra left by :func:`forward`. ``g`` is
    overwritten with its own packed spectra. ``grads`` is overwritten, not
    accumulated into; its buffers double as the workspace.
    """
    m, n = layer.shape
    plan = layer.plan
    check_buffer(x_spec, n, plan.dtype, "x_spec")
    check_buffer(g, m, plan.dtype, "g")
    check_buffer(grads.grad_input, n, plan.dtype, "grad_input")
    if grads.grad_weights.shape != (layer.q_out, layer.q_in, layer.p):
        raise SizeMismatch(
            f"grad_weights has shape {grads.grad_weights.shape}, "
            f"expected {(layer.q_out, layer.q_in, layer.p)}"
        )
    check_buffer(grads._gw_flat, layer.num_parameters, plan.dtype, "grad_weights")
    _layer_backward(
        layer._flat, x_spec, g, grads.grad_input, grads._gw_flat,
        layer.p, layer.q_out, layer.q_in, plan.cos, plan.sin, plan.bitrev, plan.half,
    )


def apply_gradients(layer: CirculantLayer, grad_weights: np.ndarray, learning_rate: float) -> None:
    """SGD step ``c_ij -= lr * grad_ij``, applied to the stored spectra.

    Each gradient block is forward-transformed in place (the caller's
    ``grad_weights`` ends up holding spectra) and scaled into the weights.
    """
    plan = layer.plan
    if not isinstance(grad_weights, np.ndarray) or grad_weights.shape != (layer.q_out, layer.q_in, layer.p):
        raise SizeMismatch(f"grad_weights must have shape {(layer.q_out, layer.q_in, layer.p)}")
    if not grad_weights.flags.c_contiguous:
        raise ValueError("grad_weights must be C-contiguous")
    flat = grad_weights.reshape(-1)
    check_buffer(flat, layer.num_parameters, plan.dtype, "grad_weights")
    _apply_sgd(
        layer._flat, flat, layer.p, layer.q_out * layer.q_in,
        -float(learning_rate), plan.cos, plan.sin, plan.bitrev,
    )
