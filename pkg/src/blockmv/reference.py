"""Naive reference matrix-vector products used to verify the simulator.

These deliberately share nothing with the blocked kernel path: the full
matrix is materialized (mirroring the stored triangle where needed) and the
product computed in wide precision with plain numpy dot products.
"""

from __future__ import annotations

import numpy as np

from .core import HermitianView, MatrixView, Precision


def _wide(arr: np.ndarray) -> np.ndarray:
    return arr.astype(np.complex128 if np.iscomplexobj(arr) else np.float64)


def dense_from_triangle(hv: HermitianView, hermitian: bool) -> np.ndarray:
    """Full matrix reconstructed from one stored triangle.

    Hermitian reconstruction conjugates the mirror and forces the diagonal
    real, regardless of what the storage holds there.
    """
    a = _wide(hv.base.array())
    if hv.uplo == "l":
        tri = np.tril(a)
        mirror = np.tril(a, -1)
    else:
        tri = np.triu(a)
        mirror = np.triu(a, 1)
    full = tri + (mirror.conj().T if hermitian else mirror.T)
    if hermitian:
        idx = np.arange(full.shape[0])
        full[idx, idx] = full[idx, idx].real
    return full


def naive_gemv(trans: str, alpha, a: MatrixView, x, beta, y) -> np.ndarray:
    mat = _wide(a.array())
    trans = trans.lower()
    if trans == "t":
        mat = mat.T
    elif trans == "c":
        mat = mat.conj().T
    elif trans != "n":
        raise ValueError(f"trans must be 'n', 't' or 'c', got {trans!r}")
    xw, yw = _wide(np.asarray(x)), _wide(np.asarray(y))
    out = alpha * (mat @ xw) + (beta * yw if beta != 0 else 0.0)
    return out.astype(a.precision.dtype)


def naive_symv_hemv(alpha, hv: HermitianView, x, beta, y, hermitian: bool | None = None) -> np.ndarray:
    if hermitian is None:
        hermitian = hv.base.precision.is_complex
    full = dense_from_triangle(hv, hermitian)
    xw, yw = _wide(np.asarray(x)), _wide(np.asarray(y))
    out = alpha * (full @ xw) + (beta * yw if beta != 0 else 0.0)
    return out.astype(hv.base.precision.dtype)


def tolerance_bound(a_array: np.ndarray, x, prec: Precision, factor: float = 50.0) -> float:
    """Absolute error budget factor * eps * ||A||_inf * ||x||_inf."""
    norm_a = float(np.max(np.sum(np.abs(a_array), axis=1))) if a_array.size else 0.0
    norm_x = float(np.max(np.abs(np.asarray(x)))) if len(x) else 0.0
    return factor * prec.eps * norm_a * norm_x


def max_abs_error(got, want) -> float:
    return float(np.max(np.abs(np.asarray(got) - np.asarray(want))))
