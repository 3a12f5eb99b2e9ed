"""Argument checks shared by the public wrappers.

Everything here touches only array metadata, never array data, so the
checks are safe to run inside allocation-audited regions.
"""

from __future__ import annotations

import numpy as np

from .errors import SizeError, SizeMismatch

PRECISIONS = {"f32": np.dtype(np.float32), "f64": np.dtype(np.float64)}
_SUPPORTED = (np.dtype(np.float32), np.dtype(np.float64))


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def check_length(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise SizeError(f"length must be an integer, got {n!r}")
    n = int(n)
    if n < 2 or not is_power_of_two(n):
        raise SizeError(f"length must be a power of two >= 2, got {n}")
    return n


def resolve_dtype(precision) -> np.dtype:
    """Map ``"f32"``/``"f64"`` or a numpy float dtype to a supported dtype."""
    if isinstance(precision, str) and precision in PRECISIONS:
        return PRECISIONS[precision]
    try:
        dt = np.dtype(precision)
    except TypeError:
        raise ValueError(f"unknown precision {precision!r}") from None
    if dt not in _SUPPORTED:
        raise ValueError(f"unsupported precision {dt}; use float32 or float64")
    return dt


def precision_tag(dtype) -> str:
    return "f32" if np.dtype(dtype) == np.float32 else "f64"


def check_buffer(buf, n: int | None = None, dtype=None, name: str = "buffer") -> None:
    if not isinstance(buf, np.ndarray):
        raise TypeError(f"{name} must be a numpy array")
    if buf.ndim != 1:
        raise SizeMismatch(f"{name} must be one-dimensional, got ndim={buf.ndim}")
    if buf.dtype not in _SUPPORTED:
        raise TypeError(f"{name} must be float32 or float64, got {buf.dtype}")
    if dtype is not None and buf.dtype != dtype:
        raise TypeError(f"{name} has dtype {buf.dtype}, expected {np.dtype(dtype)}")
    if not buf.flags.c_contiguous:
        raise ValueError(f"{name} must be C-contiguous")
    if not buf.flags.writeable:
        raise ValueError(f"{name} must be writeable")
    if n is not None and buf.shape[0] != n:
        raise SizeMismatch(f"{name} has length {buf.shape[0]}, expected {n}")


def check_pair(acc, other) -> int:
    check_buffer(acc, name="acc")
    if not isinstance(other, np.ndarray) or other.ndim != 1:
        raise SizeMismatch("other must be a one-dimensional numpy array")
    if other.shape[0] != acc.shape[0]:
        raise SizeMismatch(f"length mismatch: {acc.shape[0]} vs {other.shape[0]}")
    if other.dtype != acc.dtype:
        raise TypeError(f"dtype mismatch: {acc.dtype} vs {other.dtype}")
    if not other.flags.c_contiguous:
        raise ValueError("other must be C-contiguous")
    n = acc.shape[0]
    if n < 2 or not is_power_of_two(n):
        raise SizeError(f"length must be a power of two >= 2, got {n}")
    return n
