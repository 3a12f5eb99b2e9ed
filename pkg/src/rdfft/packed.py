"""Packed (half-complex) storage of Hermitian spectra inside a real buffer.

For a length-``n`` buffer ``s`` the decoded spectrum ``y`` is::

    y[0]     = s[0]
    y[n/2]   = s[n/2]
    y[k]     = s[k] + 1j * s[n - k]        1 <= k < n/2
    y[n - k] = conj(y[k])

Every real buffer of power-of-two length is a valid packed spectrum and
every Hermitian spectrum has exactly one packing. ``pack``/``unpack`` are
boundary helpers and allocate; the ``*_in_place`` operations never do.
"""

from __future__ import annotations

import numpy as np

from ._jit import kernel
from ._validate import check_buffer, check_length, check_pair
from .errors import HermitianViolation, SizeError

__all__ = [
    "pack",
    "unpack",
    "conjugate_in_place",
    "multiply_in_place",
    "axpy_in_place",
    "hermitian_tolerance",
]

_REAL_FOR = {np.dtype(np.complex64): np.float32, np.dtype(np.complex128): np.float64}
_COMPLEX_FOR = {np.dtype(np.float32): np.complex64, np.dtype(np.float64): np.complex128}


# -- slot kernels (offset-addressed so circulant code can work on blocks) --


@kernel
def conj_slots(buf, lo, n):
    for k in range(n // 2 + 1, n):
        buf[lo + k] = -buf[lo + k]


@kernel
def mul_slots(acc, ao, other, oo, n, conj_other):
    h = n // 2
    acc[ao] = acc[ao] * other[oo]
    acc[ao + h] = acc[ao + h] * other[oo + h]
    for k in range(1, h):
        ar = acc[ao + k]
        ai = acc[ao + n - k]
        br = other[oo + k]
        bi = other[oo + n - k]
        if conj_other:
            bi = -bi
        acc[ao + k] = ar * br - ai * bi
        acc[ao + n - k] = ar * bi + ai * br


@kernel
def mul_acc_slots(acc, ao, a, a_o, b, b_o, n, conj_a):
    """acc += a * b per bin, with ``a`` conjugated when ``conj_a``."""
    h = n // 2
    acc[ao] += a[a_o] * b[b_o]
    acc[ao + h] += a[a_o + h] * b[b_o + h]
    for k in range(1, h):
        ar = a[a_o + k]
        ai = a[a_o + n - k]
        if conj_a:
            ai = -ai
        br = b[b_o + k]
        bi = b[b_o + n - k]
        acc[ao + k] += ar * br - ai * bi
        acc[ao + n - k] += ar * bi + ai * br


@kernel
def axpy_slots(acc, ao, other, oo, n, scale):
    s = acc.dtype.type(scale)
    for k in range(n):
        acc[ao + k] += s * other[oo + k]


# -- public API --


def hermitian_tolerance(spectrum: np.ndarray) -> float:
    """Default symmetry tolerance for ``pack``: relative to the peak magnitude."""
    rel = 1e-6 if spectrum.dtype == np.complex64 else 1e-12
    peak = float(np.max(np.abs(spectrum))) if spectrum.size else 0.0
    return rel * peak


def pack(spectrum, tol: float | None = None) -> np.ndarray:
    """Encode a Hermitian complex spectrum into a real buffer of the same length.

    Raises :class:`HermitianViolation` when ``spectrum[n-k]`` differs from
    ``conj(spectrum[k])`` by more than ``tol``, or when the DC or Nyquist bin
    carries an imaginary part larger than ``tol``. Complex64 input packs to
    float32, anything else to float64.
    """
    y = np.asarray(spectrum)
    if y.dtype not in _REAL_FOR:
        y = y.astype(np.complex128)
    if y.ndim != 1:
        raise SizeError(f"spectrum must be one-dimensional, got ndim={y.ndim}")
    n = check_length(y.shape[0])
    if tol is None:
        tol = hermitian_tolerance(y)
    h = n // 2

    if abs(y[0].imag) > tol or abs(y[h].imag) > tol:
        raise HermitianViolation("DC and Nyquist bins must be real")
    if h > 1:
        k = np.arange(1, h)
        gap = np.abs(y[n - k] - np.conj(y[k]))
        worst = int(np.argmax(gap))
        if gap[worst] > tol:
            raise HermitianViolation(
                f"bin {n - k[worst]} is not the conjugate of bin {k[worst]} "
                f"(gap {gap[worst]:.3g} > tol {tol:.3g})"
            )

    out = np.empty(n, dtype=_REAL_FOR[y.dtype])
    out[0] = y[0].real
    out[h] = y[h].real
    out[1:h] = y[1:h].real
    # slot n-k holds Im(y_k): reversed order of bins 1..h-1
    out[h + 1 :] = y[h - 1 : 0 : -1].imag
    return out


def unpack(packed) -> np.ndarray:
    """Decode a packed buffer into the full length-``n`` complex spectrum."""
    s = np.asarray(packed)
    if s.ndim != 1:
        raise SizeError(f"packed spectrum must be one-dimensional, got ndim={s.ndim}")
    n = check_length(s.shape[0])
    if s.dtype not in _COMPLEX_FOR:
        s = s.astype(np.float64)
    h = n // 2
    y = np.empty(n, dtype=_COMPLEX_FOR[s.dtype])
    y[0] = s[0]
    y[h] = s[h]
    y[1:h].real = s[1:h]
    y[1:h].imag = s[n - 1 : h : -1]
    y[h + 1 :] = np.conj(y[h - 1 : 0 : -1])
    return y


def conjugate_in_place(packed: np.ndarray) -> None:
    """Conjugate the encoded spectrum by negating slots ``n/2+1 .. n-1``."""
    check_buffer(packed, name="packed")
    n = check_length(packed.shape[0])
    conj_slots(packed, 0, n)


def multiply_in_place(acc: np.ndarray, other: np.ndarray, conjugate_other: bool = False) -> None:
    """Replace ``acc`` by the bin-wise product ``acc * other`` (or ``acc * conj(other)``).

    Only ``acc`` is written. The product of two packed spectra is again a
    valid packed spectrum, because conjugation distributes over products.
    """
    n = check_pair(acc, other)
    mul_slots(acc, 0, other, 0, n, bool(conjugate_other))


def axpy_in_place(acc: np.ndarray, other: np.ndarray, scale: float = 1.0) -> None:
    """``acc += scale * other`` slotwise (the packing is linear)."""
    n = check_pair(acc, other)
    axpy_slots(acc, 0, other, 0, n, float(scale))
