"""Slow reference implementations, always evaluated in float64.

Nothing here calls into the kernels: the DFT is direct O(N^2) summation,
circulant products go through explicitly materialized dense matrices, and
gradients come from central differences.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import SizeError, SizeMismatch

__all__ = [
    "naive_dft",
    "naive_idft",
    "circulant_matrix",
    "dense_block_circulant",
    "naive_circulant_matvec",
    "dense_circulant_grads",
    "finite_difference_grad",
]

_ROW_CHUNK = 256


def _direct_sum(x: np.ndarray, sign: float) -> np.ndarray:
    n = x.shape[-1]
    # exact integer reduction of k*j mod n keeps every twiddle on the unit circle table
    table = np.exp(sign * 2j * np.pi * np.arange(n) / n)
    j = np.arange(n)
    out = np.empty(x.shape, dtype=np.complex128)
    for k0 in range(0, n, _ROW_CHUNK):
        k = np.arange(k0, min(k0 + _ROW_CHUNK, n))
        w = table[np.outer(k, j) % n]
        out[..., k0 : k0 + k.size] = x @ w.T
    return out


def naive_dft(x) -> np.ndarray:
    """``y[k] = sum_j x[j] exp(-2j*pi*k*j/N)`` by direct summation over the last axis.

    Any length ``N >= 1`` is accepted. Leading axes are treated as a batch.
    """
    x = np.asarray(x)
    x = x.astype(np.complex128 if np.iscomplexobj(x) else np.float64)
    if x.ndim == 0 or x.shape[-1] < 1:
        raise SizeError("naive_dft needs at least one sample")
    return _direct_sum(x, -1.0)


def naive_idft(y) -> np.ndarray:
    """``x[j] = (1/N) sum_k y[k] exp(2j*pi*k*j/N)``; complex output."""
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim == 0 or y.shape[-1] < 1:
        raise SizeError("naive_idft needs at least one bin")
    return _direct_sum(y, 1.0) / y.shape[-1]


def circulant_matrix(c) -> np.ndarray:
    """Dense ``p x p`` circulant with first column ``c``: ``C[j, k] = c[(j - k) mod p]``."""
    c = np.asarray(c, dtype=np.float64)
    p = c.shape[0]
    idx = np.subtract.outer(np.arange(p), np.arange(p)) % p
    return c[idx]


def dense_block_circulant(c) -> np.ndarray:
    """Materialize the ``(q_out*p) x (q_in*p)`` matrix from first columns ``c[i, j]``."""
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 3:
        raise SizeMismatch(f"block first columns must have shape (q_out, q_in, p), got {c.shape}")
    q_out, q_in, p = c.shape
    dense = np.empty((q_out * p, q_in * p))
    for i in range(q_out):
        for j in range(q_in):
            dense[i * p : (i + 1) * p, j * p : (j + 1) * p] = circulant_matrix(c[i, j])
    return dense


def naive_circulant_matvec(c, x) -> np.ndarray:
    """``y = C x`` with ``C`` the dense block-circulant matrix built from ``c``.

    ``c`` is either one first column (shape ``(p,)``) or block columns of
    shape ``(q_out, q_in, p)``.
    """
    c = np.asarray(c, dtype=np.float64)
    if c.ndim == 1:
        c = c[None, None, :]
    dense = dense_block_circulant(c)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != dense.shape[1]:
        raise SizeMismatch(f"x has length {x.shape[-1]}, expected {dense.shape[1]}")
    return x @ dense.T


def dense_circulant_grads(c, x, g) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of ``<g, C x>`` w.r.t. ``x`` and the block columns ``c``.

    ``dL/dx = C^T g``. Since ``C_ij x_j`` equals ``circ(x_j) c_ij``, the block
    weight gradient is ``circ(x_j)^T g_i``. Both are dense products.
    """
    c = np.asarray(c, dtype=np.float64)
    if c.ndim == 1:
        c = c[None, None, :]
    q_out, q_in, p = c.shape
    x = np.asarray(x, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if x.shape != (q_in * p,) or g.shape != (q_out * p,):
        raise SizeMismatch("x/g lengths do not match the block layout")
    grad_x = dense_block_circulant(c).T @ g
    grad_c = np.empty_like(c)
    for j in range(q_in):
        xt = circulant_matrix(x[j * p : (j + 1) * p]).T
        for i in range(q_out):
            grad_c[i, j] = xt @ g[i * p : (i + 1) * p]
    return grad_x, grad_c


def finite_difference_grad(
    loss_fn: Callable[[np.ndarray], float], params, step: float
) -> np.ndarray:
    """Central-difference gradient ``(L(t+h) - L(t-h)) / 2h`` per coordinate.

    ``params`` is copied to float64; ``loss_fn`` receives the perturbed copy.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    theta = np.array(params, dtype=np.float64)
    grad = np.empty_like(theta)
    flat = theta.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up = loss_fn(theta)
        flat[i] = orig - step
        down = loss_fn(theta)
        flat[i] = orig
        gflat[i] = (up - down) / (2.0 * step)
    return grad
