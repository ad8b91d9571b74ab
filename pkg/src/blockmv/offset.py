"""Submatrix kernels that keep warp reads segment-aligned.

A standard kernel pointed at an arbitrary (row_off, col_off) window issues
misaligned warp reads whenever row_off * element_bytes is not a multiple of
the transaction segment. The offset kernels instead process an enclosing
frame that starts on a block boundary of the parent allocation: extra
elements are read but masked out of the computation, and every matrix read
stays aligned (given an aligned parent leading dimension).

The frame starts at the block boundary at or below the requested offset and
its dimensions are padded up to the next block multiple, so the padding per
dimension, measured from the aligned start, is less than one block.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import HermitianView, MatrixView
from .costmodel import ideal_segments
from .kernels import (
    SEGMENT_BYTES,
    ExecutionReport,
    _count_x_read,
    _diag_accumulate,
    _gemv_accumulate,
    _gemv_flops,
    _symv_offdiag_accumulate,
    run_scal,
)
from .partition import KernelConfig


@dataclass(frozen=True)
class OffsetRequest:
    """A submatrix operation described against the parent allocation."""

    parent: MatrixView
    row_off: int
    col_off: int
    sub_m: int
    sub_n: int

    def __post_init__(self):
        if self.row_off < 0 or self.col_off < 0 or self.sub_m <= 0 or self.sub_n <= 0:
            raise ValueError("offsets must be >= 0 and submatrix dimensions positive")
        if self.row_off + self.sub_m > self.parent.rows or self.col_off + self.sub_n > self.parent.cols:
            raise ValueError("submatrix exceeds the parent matrix")


def effective_dims(m: int, n: int, sub_m: int, sub_n: int, nb: int) -> tuple[int, int]:
    """Requested dimensions padded to the nearest block multiple, capped at
    the parent dimensions."""
    if sub_m > m or sub_n > n:
        raise ValueError("submatrix dimensions exceed the parent")
    if sub_m <= 0 or sub_n <= 0 or nb <= 0:
        raise ValueError("dimensions and nb must be positive")
    pad_m = min(m, -(-sub_m // nb) * nb)
    pad_n = min(n, -(-sub_n // nb) * nb)
    return pad_m, pad_n


def _frame_extent(parent_dim: int, off: int, sub: int, nb: int) -> tuple[int, int, int]:
    """(aligned_start, frame_len, mask_lead) for one dimension."""
    start = off - off % nb
    lead = off - start
    frame = min(parent_dim - start, -(-(lead + sub) // nb) * nb)
    return start, frame, lead


def _check_alignment(parent: MatrixView):
    if (parent.ld * parent.precision.element_bytes) % SEGMENT_BYTES != 0:
        warnings.warn(
            "parent leading dimension is not segment-aligned; offset kernel reads "
            "will still be counted against the unaligned addresses",
            stacklevel=3,
        )


def gemv_offset(
    trans: str,
    alpha: complex,
    req: OffsetRequest,
    x,
    beta: complex,
    y,
    config: KernelConfig,
) -> ExecutionReport:
    """General MV over a submatrix, reading aligned and masking the padding.

    Numerically identical (up to reassociation) to the standard kernel on the
    extracted submatrix; the transaction ledger shows the aligned count.
    """
    trans = trans.lower()
    if trans not in ("n", "t", "c"):
        raise ValueError(f"trans must be 'n', 't' or 'c', got {trans!r}")
    parent = req.parent
    prec = parent.precision
    if trans == "c" and not prec.is_complex:
        trans = "t"
    _check_alignment(parent)
    nb = config.block_size
    start_r, frame_h, lead_r = _frame_extent(parent.rows, req.row_off, req.sub_m, nb)
    start_c, frame_w, lead_c = _frame_extent(parent.cols, req.col_off, req.sub_n, nb)
    frame = parent.submatrix(start_r, start_c, frame_h, frame_w)
    F = np.array(frame.array(), copy=True)
    # padding rows/columns are read but never enter the computation
    F[: lead_r, :] = 0
    F[lead_r + req.sub_m :, :] = 0
    F[:, :lead_c] = 0
    F[:, lead_c + req.sub_n :] = 0

    x_len, y_len = (req.sub_n, req.sub_m) if trans == "n" else (req.sub_m, req.sub_n)
    x = np.asarray(x, dtype=prec.dtype)
    y = np.asarray(y, dtype=prec.dtype)
    if len(x) != x_len or len(y) != y_len:
        raise ValueError(f"expected x of length {x_len} and y of length {y_len}")
    if alpha == 0 and beta == 1:
        return ExecutionReport(y_out=y.copy())
    scal_rep = run_scal(y, beta, prec)
    scal_rep.scal_invocations = 1
    if alpha == 0:
        return scal_rep
    rep = ExecutionReport()
    _count_x_read(rep, x_len, prec.element_bytes)
    if trans == "n":
        x_f = np.zeros(frame_w, dtype=prec.dtype)
        x_f[lead_c : lead_c + req.sub_n] = x
        contrib = _gemv_accumulate(rep, F, frame, x_f, alpha, config, False, False)
        sub = contrib[lead_r : lead_r + req.sub_m]
    else:
        x_f = np.zeros(frame_h, dtype=prec.dtype)
        x_f[lead_r : lead_r + req.sub_m] = x
        contrib = _gemv_accumulate(rep, F, frame, x_f, alpha, config, True, trans == "c")
        sub = contrib[lead_c : lead_c + req.sub_n]
    _gemv_flops(rep, req.sub_m if trans == "n" else req.sub_n, req.sub_n if trans == "n" else req.sub_m, prec)
    rep.y_out = scal_rep.y_out + sub
    scal_rep.y_out = None
    rep.absorb(scal_rep)
    return rep


def symv_hemv_offset(
    uplo: str,
    alpha: complex,
    parent: HermitianView,
    offset: int,
    sub_d: int,
    x,
    beta: complex,
    y,
    config: KernelConfig,
    hermitian: bool | None = None,
) -> ExecutionReport:
    """Symmetric/Hermitian MV over a diagonal submatrix (equal row and
    column offsets, as produced by trailing-submatrix updates)."""
    uplo = uplo.lower()
    if uplo != parent.uplo:
        raise ValueError(f"uplo {uplo!r} does not match the stored triangle {parent.uplo!r}")
    prec = parent.base.precision
    if hermitian is None:
        hermitian = prec.is_complex
    if offset < 0 or sub_d <= 0 or offset + sub_d > parent.dim:
        raise ValueError("submatrix exceeds the parent matrix")
    _check_alignment(parent.base)
    nb = config.block_size
    start, frame_d, lead = _frame_extent(parent.dim, offset, sub_d, nb)
    frame_view = parent.base.submatrix(start, start, frame_d, frame_d)
    frame_hv = HermitianView(base=frame_view, uplo=uplo)
    F = np.array(frame_view.array(), copy=True)
    F[:lead, :] = 0
    F[lead + sub_d :, :] = 0
    F[:, :lead] = 0
    F[:, lead + sub_d :] = 0
    x = np.asarray(x, dtype=prec.dtype)
    y = np.asarray(y, dtype=prec.dtype)
    if len(x) != sub_d or len(y) != sub_d:
        raise ValueError(f"expected x and y of length {sub_d}")
    if alpha == 0 and beta == 1:
        return ExecutionReport(y_out=y.copy())
    rep = ExecutionReport()
    eb = prec.element_bytes
    dtype = prec.dtype
    x_f = np.zeros(frame_d, dtype=dtype)
    x_f[lead : lead + sub_d] = x
    _count_x_read(rep, sub_d, eb)
    contrib = _diag_accumulate(rep, F, frame_hv, frame_view, x_f, alpha, config, hermitian)
    if alpha != 0:
        contrib = contrib + _symv_offdiag_accumulate(
            rep, F, frame_hv, frame_view, x_f, alpha, config, hermitian
        )
    sub = contrib[lead : lead + sub_d]
    # beta applies to the true output range only, fused as in the diagonal kernel
    if beta == 0:
        y_out = sub.astype(dtype)
    else:
        y_out = dtype.type(beta) * y + sub
        rep.bytes_read += sub_d * eb
        rep.transactions += ideal_segments(sub_d * eb, SEGMENT_BYTES)
    # flops idealized to the true submatrix operation
    rep.flops = prec.flops_per_mul * (sub_d * sub_d + 2 * sub_d) + prec.flops_per_add * (sub_d * sub_d)
    rep.bytes_written += sub_d * eb
    rep.transactions += ideal_segments(sub_d * eb, SEGMENT_BYTES)
    rep.y_out = y_out
    return rep
