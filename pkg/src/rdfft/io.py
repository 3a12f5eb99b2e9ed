"""Binary formats.

Raw dump: little-endian IEEE-754 scalars, no header; the length follows
from the byte count and the precision. External FFT tools can read and
write it for differential checks.

Layer file: a 16-byte header of four little-endian uint32
``(p, q_out, q_in, bits)`` with ``bits`` 32 or 64, then the packed weight
spectra in the same scalar format, row-major over ``(i, j)``.
"""

from __future__ import annotations

import os
import struct
from typing import BinaryIO, Union

import numpy as np

from ._validate import check_length, resolve_dtype
from .circulant import CirculantLayer
from .core import plan_create
from .errors import SizeError

__all__ = ["write_raw", "read_raw", "save_layer", "load_layer"]

PathOrFile = Union[str, os.PathLike, BinaryIO]

_HEADER = struct.Struct("<4I")
_LE = {np.dtype(np.float32): np.dtype("<f4"), np.dtype(np.float64): np.dtype("<f8")}


def _write(dest: PathOrFile, payload: bytes) -> None:
    if hasattr(dest, "write"):
        dest.write(payload)
    else:
        with open(dest, "wb") as fh:
            fh.write(payload)


def _read(src: PathOrFile) -> bytes:
    if hasattr(src, "read"):
        return src.read()
    with open(src, "rb") as fh:
        return fh.read()


def write_raw(buf, dest: PathOrFile) -> None:
    arr = np.asarray(buf)
    dtype = resolve_dtype(arr.dtype)
    _write(dest, arr.astype(_LE[dtype], copy=False).tobytes())


def read_raw(src: PathOrFile, precision="f64") -> np.ndarray:
    dtype = resolve_dtype(precision)
    payload = _read(src)
    if len(payload) % dtype.itemsize:
        raise SizeError(f"{len(payload)} bytes is not a whole number of {dtype} scalars")
    return np.frombuffer(payload, dtype=_LE[dtype]).astype(dtype)


def save_layer(layer: CirculantLayer, dest: PathOrFile) -> None:
    bits = layer.dtype.itemsize * 8
    header = _HEADER.pack(layer.p, layer.q_out, layer.q_in, bits)
    body = layer.weight_spectra.astype(_LE[layer.dtype]).tobytes()
    _write(dest, header + body)


def load_layer(src: PathOrFile) -> CirculantLayer:
    payload = _read(src)
    if len(payload) < _HEADER.size:
        raise SizeError("layer file is shorter than its header")
    p, q_out, q_in, bits = _HEADER.unpack_from(payload)
    if bits not in (32, 64):
        raise ValueError(f"unknown precision tag {bits}")
    p = check_length(p)
    if q_out < 1 or q_in < 1:
        raise SizeError("block counts must be positive")
    dtype = resolve_dtype("f32" if bits == 32 else "f64")
    expected = q_out * q_in * p * dtype.itemsize
    body = payload[_HEADER.size :]
    if len(body) != expected:
        raise SizeError(f"layer body has {len(body)} bytes, expected {expected}")
    spectra = np.frombuffer(body, dtype=_LE[dtype]).astype(dtype).reshape(q_out, q_in, p)
    return CirculantLayer(plan_create(p, dtype), q_out, q_in, spectra)
