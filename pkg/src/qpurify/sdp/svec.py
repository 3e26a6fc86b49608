"""Real vectorization of Hermitian (or real symmetric) matrices.

svec(X) = [diag X, sqrt2 * Re(upper X), sqrt2 * Im(upper X)] for complex
blocks and drops the imaginary part for real blocks, so that
<svec X, svec Y> = tr[X Y] for Hermitian X, Y.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

SQRT2 = np.sqrt(2.0)


@lru_cache(maxsize=None)
def _upper(n: int):
    return np.triu_indices(n, 1)


def svec_length(n: int, complex_block: bool = True) -> int:
    return n * n if complex_block else n * (n + 1) // 2


def svec(x: np.ndarray, complex_block: bool = True) -> np.ndarray:
    """Vectorize one matrix or a stack of matrices along the last two axes."""
    x = np.asarray(x)
    n = x.shape[-1]
    iu = _upper(n)
    diag = np.real(np.diagonal(x, axis1=-2, axis2=-1))
    up = x[..., iu[0], iu[1]]
    parts = [diag, SQRT2 * up.real]
    if complex_block:
        parts.append(SQRT2 * up.imag)
    return np.concatenate(parts, axis=-1)


def smat(v: np.ndarray, n: int, complex_block: bool = True) -> np.ndarray:
    """Inverse of ``svec``; accepts a stack of vectors along the leading axes."""
    v = np.asarray(v, dtype=float)
    iu = _upper(n)
    k = len(iu[0])
    lead = v.shape[:-1]
    dtype = complex if complex_block else float
    out = np.zeros(lead + (n, n), dtype=dtype)
    idx = np.arange(n)
    out[..., idx, idx] = v[..., :n]
    up = v[..., n:n + k] / SQRT2
    if complex_block:
        up = up + 1j * v[..., n + k:n + 2 * k] / SQRT2
    out[..., iu[0], iu[1]] = up
    out[..., iu[1], iu[0]] = np.conj(up)
    return out
