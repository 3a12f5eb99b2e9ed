"""In-place radix-2 real FFT over a single real buffer.

The forward transform turns ``n`` real samples into the packed Hermitian
spectrum described in :mod:`rdfft.packed`, inside the same buffer. It is a
decimation-in-time Cooley-Tukey transform: an up-front bit reversal,
then ``log2(n)`` merge stages. Each stage combines two adjacent packed
sub-spectra of size ``m`` into one of size ``2m``. Because the bins of a
real signal's sub-spectra come in conjugate pairs, the slots
``(k, m-k, m+k, 2m-k)`` of a merge block are read and written as a closed
group of four, so every butterfly lands in slots it just consumed.

The inverse runs the same graph backwards: each stage solves the forward
butterfly for its inputs (a factor 1/2 per stage gives the overall 1/n),
and a final bit reversal restores time order.

Forward convention: ``y[k] = sum_j x[j] exp(-2j*pi*k*j/n)``, unnormalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._jit import kernel
from ._validate import check_buffer, check_length, resolve_dtype

__all__ = [
    "Plan",
    "StageView",
    "plan_create",
    "bit_reverse_in_place",
    "forward_in_place",
    "inverse_in_place",
    "forward_staged",
]


@dataclass(frozen=True, eq=False)
class Plan:
    """Precomputed tables for one transform length and precision.

    ``cos[j-1], sin[j-1]`` hold ``cos(2*pi*j/n), sin(2*pi*j/n)`` for
    ``j = 1 .. n/2-1``; a merge into size ``r`` uses ``j = k*n/r``. All arrays
    are read-only.
    """

    n: int
    dtype: np.dtype
    cos: np.ndarray = field(repr=False)
    sin: np.ndarray = field(repr=False)
    bitrev: np.ndarray = field(repr=False)
    half: np.floating = field(repr=False)

    @property
    def stages(self) -> int:
        return self.n.bit_length() - 1

    @property
    def precision(self) -> str:
        return "f32" if self.dtype == np.float32 else "f64"


@dataclass
class StageView:
    """Snapshot of the buffer after one forward merge stage (testing aid)."""

    stage_index: int
    block_size: int
    buffer: np.ndarray


def _bitrev_table(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def plan_create(n: int, precision="f64") -> Plan:
    """Build the twiddle and bit-reversal tables for length ``n``.

    This is the only allocating step; transforms that use the plan acquire
    no memory.
    """
    n = check_length(n)
    dtype = resolve_dtype(precision)
    j = np.arange(1, n // 2, dtype=np.float64)
    angle = 2.0 * np.pi * j / n
    cos = np.cos(angle).astype(dtype)
    sin = np.sin(angle).astype(dtype)
    bitrev = _bitrev_table(n)
    for arr in (cos, sin, bitrev):
        arr.flags.writeable = False
    return Plan(n=n, dtype=dtype, cos=cos, sin=sin, bitrev=bitrev, half=dtype.type(0.5))


# -- kernels --


@kernel
def _bit_reverse(buf, lo, bitrev):
    for i in range(bitrev.shape[0]):
        j = bitrev[i]
        if i < j:
            t = buf[lo + i]
            buf[lo + i] = buf[lo + j]
            buf[lo + j] = t


@kernel
def _forward_stage(buf, lo, n, m, cos, sin):
    """Merge each pair of packed size-m sub-spectra into one of size 2m."""
    stride = n // (2 * m)
    h = m // 2
    for base in range(lo, lo + n, 2 * m):
        a = buf[base]
        b = buf[base + m]
        buf[base] = a + b
        buf[base + m] = a - b
        if m >= 2:
            # W^(m/2) = -i: y[m/2] = A[m/2] - i*B[m/2], both real
            buf[base + m + h] = -buf[base + m + h]
        for k in range(1, h):
            c = cos[k * stride - 1]
            s = sin[k * stride - 1]
            ar = buf[base + k]
            ai = buf[base + m - k]
            br = buf[base + m + k]
            bi = buf[base + 2 * m - k]
            # u = W*B with W = c - i*s
            ur = c * br + s * bi
            ui = c * bi - s * br
            buf[base + k] = ar + ur
            buf[base + 2 * m - k] = ai + ui
            buf[base + m - k] = ar - ur
            buf[base + m + k] = ui - ai


@kernel
def _inverse_stage(buf, lo, n, m, cos, sin, half):
    """Exact inverse of ``_forward_stage`` for the same ``m``."""
    stride = n // (2 * m)
    h = m // 2
    for base in range(lo, lo + n, 2 * m):
        y0 = buf[base]
        ym = buf[base + m]
        buf[base] = (y0 + ym) * half
        buf[base + m] = (y0 - ym) * half
        if m >= 2:
            buf[base + m + h] = -buf[base + m + h]
        for k in range(1, h):
            c = cos[k * stride - 1]
            s = sin[k * stride - 1]
            yr = buf[base + k]
            yi = buf[base + 2 * m - k]
            # y[m+k] = conj(y[m-k])
            zr = buf[base + m - k]
            zi = -buf[base + m + k]
            dr = (yr - zr) * half
            di = (yi - zi) * half
            buf[base + k] = (yr + zr) * half
            buf[base + m - k] = (yi + zi) * half
            # B = d / W = d * (c + i*s)
            buf[base + m + k] = c * dr - s * di
            buf[base + 2 * m - k] = c * di + s * dr


@kernel
def forward_kernel(buf, lo, cos, sin, bitrev):
    n = bitrev.shape[0]
    _bit_reverse(buf, lo, bitrev)
    m = 1
    while m < n:
        _forward_stage(buf, lo, n, m, cos, sin)
        m *= 2


@kernel
def inverse_kernel(buf, lo, cos, sin, bitrev, half):
    n = bitrev.shape[0]
    m = n // 2
    while m >= 1:
        _inverse_stage(buf, lo, n, m, cos, sin, half)
        m //= 2
    _bit_reverse(buf, lo, bitrev)


# -- public API --


def bit_reverse_in_place(plan: Plan, buf: np.ndarray) -> None:
    """Swap ``buf[i]`` with ``buf[bitrev[i]]``; applying it twice is the identity."""
    check_buffer(buf, plan.n, plan.dtype)
    _bit_reverse(buf, 0, plan.bitrev)


def forward_in_place(plan: Plan, buf: np.ndarray) -> None:
    """Replace the real signal in ``buf`` by its packed spectrum."""
    check_buffer(buf, plan.n, plan.dtype)
    forward_kernel(buf, 0, plan.cos, plan.sin, plan.bitrev)


def inverse_in_place(plan: Plan, buf: np.ndarray) -> None:
    """Replace the packed spectrum in ``buf`` by the real signal (1/n normalized)."""
    check_buffer(buf, plan.n, plan.dtype)
    inverse_kernel(buf, 0, plan.cos, plan.sin, plan.bitrev, plan.half)


def forward_staged(plan: Plan, buf: np.ndarray) -> list[StageView]:
    """Run :func:`forward_in_place` one stage at a time, snapshotting each stage.

    Stage ``s`` (1-based) leaves every aligned window of ``2**s`` slots
    holding the packed spectrum of the matching segment of the
    bit-reversed input. Allocates the snapshots; not for production use.
    """
    check_buffer(buf, plan.n, plan.dtype)
    _bit_reverse(buf, 0, plan.bitrev)
    views = []
    m = 1
    s = 1
    while m < plan.n:
        _forward_stage(buf, 0, plan.n, m, plan.cos, plan.sin)
        views.append(StageView(stage_index=s, block_size=2 * m, buffer=buf.copy()))
        m *= 2
        s += 1
    return views
