"""Deterministic functional simulation of the blocked matrix-vector kernels.

Five kernel families are modeled at thread-block granularity: non-transposed
and transposed general MV, the symmetric/Hermitian off-diagonal kernel, the
diagonal-block kernel, and the scale kernel. Each run produces numerically
correct results plus event counters (bytes, warp transactions, flops, atomic
adds, reductions).

Real hardware accumulates atomically in arbitrary order; the simulator
replaces that with a fixed sorted TB order, so identical requests give
bit-identical results and equivalence checks use a relative tolerance.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .core import HermitianView, MatrixView, Precision
from .costmodel import column_read_traffic, ideal_segments
from .partition import KernelConfig, tb_share

SEGMENT_BYTES = 128


class Op(enum.Enum):
    GEMV_N = "gemv-n"
    GEMV_T = "gemv-t"
    SYMV_LOWER = "symv-lower"
    SYMV_UPPER = "symv-upper"
    HEMV_LOWER = "hemv-lower"
    HEMV_UPPER = "hemv-upper"


@dataclass
class ExecutionReport:
    """Result vector plus cost counters for one simulated launch."""

    y_out: np.ndarray | None = None
    bytes_read: int = 0
    bytes_written: int = 0
    transactions: int = 0
    matrix_transactions: int = 0
    flops: int = 0
    atomic_adds: int = 0
    tb_count: int = 0
    reduction_events: int = 0
    scal_invocations: int = 0

    def absorb(self, other: "ExecutionReport"):
        """Fold another kernel's counters into this report (y_out untouched)."""
        self.bytes_read += other.bytes_read
        self.bytes_written += other.bytes_written
        self.transactions += other.transactions
        self.matrix_transactions += other.matrix_transactions
        self.flops += other.flops
        self.atomic_adds += other.atomic_adds
        self.tb_count += other.tb_count
        self.reduction_events += other.reduction_events
        self.scal_invocations += other.scal_invocations


@dataclass
class KernelRequest:
    op: Op
    a: MatrixView | HermitianView
    x: np.ndarray
    y: np.ndarray
    alpha: complex
    beta: complex
    config: KernelConfig

    def __post_init__(self):
        view = self.a.base if isinstance(self.a, HermitianView) else self.a
        m, n = view.rows, view.cols
        if self.op in (Op.GEMV_N, Op.GEMV_T):
            want_x, want_y = (n, m) if self.op is Op.GEMV_N else (m, n)
        else:
            if m != n:
                raise ValueError(f"symmetric ops need a square matrix, got {m}x{n}")
            if not isinstance(self.a, HermitianView):
                raise ValueError("symmetric/hermitian ops require a HermitianView")
            want_x = want_y = n
        if len(self.x) != want_x:
            raise ValueError(f"x has length {len(self.x)}, expected {want_x}")
        if len(self.y) != want_y:
            raise ValueError(f"y has length {len(self.y)}, expected {want_y}")

    @property
    def view(self) -> MatrixView:
        return self.a.base if isinstance(self.a, HermitianView) else self.a

    @property
    def precision(self) -> Precision:
        return self.view.precision


def _col_starts(view: MatrixView, r0: int, c0: int, ncols: int) -> np.ndarray:
    return view.linear_index(r0, c0) + np.arange(ncols, dtype=np.int64) * view.ld


def _atomic_traffic(rep: ExecutionReport, elements: int, eb: int):
    # an atomic segment add reads and writes its destination range once
    nbytes = elements * eb
    rep.bytes_read += nbytes
    rep.bytes_written += nbytes
    rep.transactions += 2 * ideal_segments(nbytes, SEGMENT_BYTES)


def _count_block_read(rep: ExecutionReport, view: MatrixView, r0: int, r1: int, c0: int, c1: int):
    segs, elems = column_read_traffic(
        _col_starts(view, r0, c0, c1 - c0), r1 - r0, view.precision.element_bytes, SEGMENT_BYTES
    )
    rep.transactions += segs
    rep.matrix_transactions += segs
    rep.bytes_read += elems * view.precision.element_bytes


def _count_x_read(rep: ExecutionReport, length: int, eb: int):
    # input vector counted ideally: read once per kernel launch
    rep.bytes_read += length * eb
    rep.transactions += ideal_segments(length * eb, SEGMENT_BYTES)


def run_scal(y: np.ndarray, beta: complex, prec: Precision) -> ExecutionReport:
    """y <- beta * y as a standalone kernel.

    beta = 0 writes zeros without multiplying, so garbage (NaN/Inf) in y
    cannot propagate.
    """
    rep = ExecutionReport()
    n = len(y)
    eb = prec.element_bytes
    if beta == 0:
        rep.y_out = np.zeros_like(y)
    else:
        rep.y_out = (np.asarray(y) * prec.dtype.type(beta)).astype(prec.dtype)
        rep.bytes_read += n * eb
        rep.transactions += ideal_segments(n * eb, SEGMENT_BYTES)
    rep.flops += prec.flops_per_mul * n
    rep.bytes_written += n * eb
    rep.transactions += ideal_segments(n * eb, SEGMENT_BYTES)
    rep.tb_count += -(-n // 1024)
    return rep


def _gemv_accumulate(
    rep: ExecutionReport,
    A: np.ndarray,
    traffic_view: MatrixView,
    x: np.ndarray,
    alpha,
    cfg: KernelConfig,
    transposed: bool,
    conjugate: bool,
) -> np.ndarray:
    """alpha * A x (or alpha * A^T/A^H x) with TB-granular accounting.

    ``A`` carries the numbers (possibly a masked copy), ``traffic_view`` the
    addresses. Returns the accumulated contribution vector.
    """
    m, n = A.shape
    nb = cfg.block_size
    if transposed:
        x_count, total = -(-n // nb), -(-m // nb)
        out_len = n
    else:
        x_count, total = -(-m // nb), -(-n // nb)
        out_len = m
    dtype = A.dtype
    alpha = dtype.type(alpha)
    acc_out = np.zeros(out_len, dtype=dtype)
    for xb in range(x_count):
        o0, o1 = xb * nb, min(out_len, (xb + 1) * nb)
        for slot in range(cfg.coop_tbs):
            w, s = tb_share(total, cfg.coop_tbs, slot)
            if w == 0:
                continue  # idle TB: launches and exits, writes nothing
            acc = np.zeros(o1 - o0, dtype=dtype)
            inner = m if transposed else n
            for j in range(s, s + w):
                i0, i1 = j * nb, min(inner, (j + 1) * nb)
                if transposed:
                    r0, r1, c0, c1 = i0, i1, o0, o1
                else:
                    r0, r1, c0, c1 = o0, o1, i0, i1
                blk = A[r0:r1, c0:c1]
                _count_block_read(rep, traffic_view, r0, r1, c0, c1)
                if transposed:
                    bt = blk.conj().T if conjugate else blk.T
                    acc += bt @ x[r0:r1]
                else:
                    acc += blk @ x[c0:c1]
            acc_out[o0:o1] += alpha * acc
            rep.reduction_events += 1
            rep.atomic_adds += 1
            _atomic_traffic(rep, o1 - o0, traffic_view.precision.element_bytes)
    rep.tb_count += x_count * cfg.coop_tbs
    return acc_out


def _gemv_flops(rep: ExecutionReport, m: int, n: int, prec: Precision):
    # products m*n, dot-reduction adds m*(n-1), alpha scaling m, merge adds m
    rep.flops += prec.flops_per_mul * (m * n + m) + prec.flops_per_add * (m * n)


def run_gemv_n(req: KernelRequest) -> ExecutionReport:
    """Accumulation kernel for y += alpha * A x (beta handled by run_scal)."""
    if req.op is not Op.GEMV_N:
        raise ValueError(f"expected GEMV_N request, got {req.op}")
    rep = ExecutionReport()
    view = req.view
    _count_x_read(rep, view.cols, view.precision.element_bytes)
    contrib = _gemv_accumulate(
        rep, view.array(), view, req.x, req.alpha, req.config, transposed=False, conjugate=False
    )
    _gemv_flops(rep, view.rows, view.cols, view.precision)
    rep.y_out = np.asarray(req.y) + contrib
    return rep


def run_gemv_t(req: KernelRequest, conjugate: bool = False) -> ExecutionReport:
    """Accumulation kernel for y += alpha * A^T x (A^H with ``conjugate``)."""
    if req.op is not Op.GEMV_T:
        raise ValueError(f"expected GEMV_T request, got {req.op}")
    rep = ExecutionReport()
    view = req.view
    _count_x_read(rep, view.rows, view.precision.element_bytes)
    contrib = _gemv_accumulate(
        rep, view.array(), view, req.x, req.alpha, req.config, transposed=True, conjugate=conjugate
    )
    _gemv_flops(rep, view.cols, view.rows, view.precision)
    rep.y_out = np.asarray(req.y) + contrib
    return rep


def _symv_offdiag_accumulate(
    rep: ExecutionReport,
    A: np.ndarray,
    hv: HermitianView,
    traffic_view: MatrixView,
    x: np.ndarray,
    alpha,
    cfg: KernelConfig,
    conjugate: bool,
) -> np.ndarray:
    d = A.shape[0]
    nb = cfg.block_size
    t = -(-d // nb)
    dtype = A.dtype
    alpha = dtype.type(alpha)
    lower = hv.uplo == "l"
    acc_out = np.zeros(d, dtype=dtype)
    eb = traffic_view.precision.element_bytes
    for i in range(t):
        c0, c1 = i * nb, min(d, (i + 1) * nb)
        total = (t - i - 1) if lower else i
        for slot in range(cfg.coop_tbs):
            w, s = tb_share(total, cfg.coop_tbs, slot)
            if w == 0:
                continue
            vacc = np.zeros(c1 - c0, dtype=dtype)
            for k in range(s, s + w):
                j = (i + 1 + k) if lower else k
                r0, r1 = j * nb, min(d, (j + 1) * nb)
                hv.record_read(r0, r1, c0, c1)
                blk = A[r0:r1, c0:c1]
                _count_block_read(rep, traffic_view, r0, r1, c0, c1)
                # non-transposed product: reduced and written out every block,
                # because successive blocks hit different output segments
                acc_out[r0:r1] += alpha * (blk @ x[c0:c1])
                rep.reduction_events += 1
                rep.atomic_adds += 1
                _atomic_traffic(rep, r1 - r0, eb)
                bt = blk.conj().T if conjugate else blk.T
                vacc += bt @ x[r0:r1]
            acc_out[c0:c1] += alpha * vacc
            rep.reduction_events += 1  # one extra reduction for the transposed sums
            rep.atomic_adds += 1
            _atomic_traffic(rep, c1 - c0, eb)
        rep.tb_count += cfg.coop_tbs
    return acc_out


def run_symv_offdiag(req: KernelRequest) -> ExecutionReport:
    """Off-diagonal contribution alpha * A_hat x from one stored triangle.

    Every stored block contributes once as-is and once (conjugate-)transposed.
    Per TB there is one sync-and-reduce per processed block plus one final
    reduction for the transposed accumulation.
    """
    if req.op not in (Op.SYMV_LOWER, Op.SYMV_UPPER, Op.HEMV_LOWER, Op.HEMV_UPPER):
        raise ValueError(f"expected a symmetric/hermitian request, got {req.op}")
    hv = req.a
    conjugate = req.op in (Op.HEMV_LOWER, Op.HEMV_UPPER)
    rep = ExecutionReport()
    view = hv.base
    _count_x_read(rep, hv.dim, view.precision.element_bytes)
    contrib = _symv_offdiag_accumulate(
        rep, view.array(), hv, view, req.x, req.alpha, req.config, conjugate
    )
    d = hv.dim
    nb = req.config.block_size
    t = -(-d // nb)
    diag_elems = (t - 1) * nb * nb + (d - (t - 1) * nb) ** 2
    # one product per mirrored full-matrix element outside the diagonal
    # blocks; alpha scaling was already charged by the diagonal kernel
    off = d * d - diag_elems
    rep.flops += view.precision.flops_per_mul * off + view.precision.flops_per_add * off
    rep.y_out = np.asarray(req.y) + contrib
    return rep


def _diag_accumulate(
    rep: ExecutionReport,
    A: np.ndarray,
    hv: HermitianView,
    traffic_view: MatrixView,
    x: np.ndarray,
    alpha,
    cfg: KernelConfig,
    hermitian: bool,
) -> np.ndarray:
    """alpha * D x where D is the mirrored diagonal-block part of A.

    One TB per diagonal block; the whole block region is read (extra reads
    of the unreferenced triangle included), the stored triangle mirrored
    over the diagonal (conjugated for Hermitian ops, diagonal forced real).
    """
    d = A.shape[0]
    nb = cfg.block_size
    t = -(-d // nb)
    dtype = A.dtype
    alpha = dtype.type(alpha)
    prec = traffic_view.precision
    out = np.zeros(d, dtype=dtype)
    for k in range(t):
        r0, r1 = k * nb, min(d, (k + 1) * nb)
        hv.record_read(r0, r1, r0, r1, diag_block=True)
        blk = np.array(A[r0:r1, r0:r1], copy=True)
        _count_block_read(rep, traffic_view, r0, r1, r0, r1)
        if hv.uplo == "l":
            m_half = np.tril(blk)
            mirror = np.tril(blk, -1)
        else:
            m_half = np.triu(blk)
            mirror = np.triu(blk, 1)
        mirror = mirror.conj().T if hermitian else mirror.T
        mirrored = m_half + mirror
        if hermitian:
            idx = np.arange(r1 - r0)
            mirrored[idx, idx] = mirrored[idx, idx].real
        out[r0:r1] = alpha * (mirrored @ x[r0:r1])
        rb = r1 - r0
        rep.flops += prec.flops_per_mul * (rb * rb + rb) + prec.flops_per_add * (rb * rb)
        rep.tb_count += 1
    return out


def run_diag_block(req: KernelRequest) -> ExecutionReport:
    """Diagonal-block kernel with the beta scaling fused in.

    The per-segment result alpha * D x + beta * y is written directly (no
    atomics: exactly one TB owns each segment), so no separate scale kernel
    is needed on the symmetric/Hermitian path.
    """
    if req.op not in (Op.SYMV_LOWER, Op.SYMV_UPPER, Op.HEMV_LOWER, Op.HEMV_UPPER):
        raise ValueError(f"expected a symmetric/hermitian request, got {req.op}")
    hv = req.a
    hermitian = req.op in (Op.HEMV_LOWER, Op.HEMV_UPPER)
    rep = ExecutionReport()
    view = hv.base
    prec = view.precision
    eb = prec.element_bytes
    d = hv.dim
    dtype = prec.dtype
    beta = dtype.type(req.beta)
    _count_x_read(rep, d, eb)
    contrib = _diag_accumulate(rep, view.array(), hv, view, req.x, req.alpha, req.config, hermitian)
    if req.beta == 0:
        y_out = contrib
    else:
        y_out = beta * np.asarray(req.y, dtype=dtype) + contrib
        rep.bytes_read += d * eb
        rep.transactions += ideal_segments(d * eb, SEGMENT_BYTES)
    rep.flops += prec.flops_per_mul * d  # nominal beta scaling
    rep.bytes_written += d * eb
    rep.transactions += ideal_segments(d * eb, SEGMENT_BYTES)
    rep.y_out = y_out
    return rep


def _as_vector(v, length: int, prec: Precision, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=prec.dtype)
    if arr.ndim != 1 or arr.size != length:
        raise ValueError(f"{name} must be a vector of length {length}")
    return arr


def gemv(
    trans: str,
    alpha: complex,
    a: MatrixView,
    x,
    beta: complex,
    y,
    config: KernelConfig,
) -> ExecutionReport:
    """Standard-interface general MV: y = alpha * op(A) x + beta * y.

    ``trans`` is 'n', 't', or 'c'. Launch order mirrors the device pipeline:
    the scale kernel always runs first, then the accumulation kernel.
    """
    trans = trans.lower()
    if trans not in ("n", "t", "c"):
        raise ValueError(f"trans must be 'n', 't' or 'c', got {trans!r}")
    if not isinstance(a, MatrixView):
        raise ValueError("gemv requires a MatrixView")
    prec = a.precision
    if trans == "c" and not prec.is_complex:
        trans = "t"
    x_len, y_len = (a.cols, a.rows) if trans == "n" else (a.rows, a.cols)
    x = _as_vector(x, x_len, prec, "x")
    y = _as_vector(y, y_len, prec, "y")
    if alpha == 0 and beta == 1:
        return ExecutionReport(y_out=y.copy())  # quick return, nothing launched
    scal_rep = run_scal(y, beta, prec)
    scal_rep.scal_invocations = 1
    if alpha == 0:
        return scal_rep
    op = Op.GEMV_N if trans == "n" else Op.GEMV_T
    req = KernelRequest(op=op, a=a, x=x, y=scal_rep.y_out, alpha=alpha, beta=beta, config=config)
    if trans == "n":
        rep = run_gemv_n(req)
    else:
        rep = run_gemv_t(req, conjugate=(trans == "c"))
    rep.absorb(replace(scal_rep, y_out=None))
    return rep


def symv_hemv(
    uplo: str,
    alpha: complex,
    a: HermitianView,
    x,
    beta: complex,
    y,
    config: KernelConfig,
    hermitian: bool | None = None,
) -> ExecutionReport:
    """Standard-interface symmetric/Hermitian MV: y = alpha * A x + beta * y.

    Kernel sequence: diagonal-block kernel (beta fused) then the off-diagonal
    kernel; no scale kernel ever runs on this path.
    """
    if not isinstance(a, HermitianView):
        raise ValueError("symv/hemv requires a HermitianView")
    uplo = uplo.lower()
    if uplo not in ("l", "u"):
        raise ValueError(f"uplo must be 'l' or 'u', got {uplo!r}")
    if uplo != a.uplo:
        raise ValueError(f"uplo {uplo!r} does not match the stored triangle {a.uplo!r}")
    prec = a.base.precision
    if hermitian is None:
        hermitian = prec.is_complex
    if hermitian and not prec.is_complex:
        raise ValueError("hermitian treatment requires a complex precision")
    d = a.dim
    x = _as_vector(x, d, prec, "x")
    y = _as_vector(y, d, prec, "y")
    if alpha == 0 and beta == 1:
        return ExecutionReport(y_out=y.copy())
    if hermitian:
        op = Op.HEMV_LOWER if uplo == "l" else Op.HEMV_UPPER
    else:
        op = Op.SYMV_LOWER if uplo == "l" else Op.SYMV_UPPER
    diag_req = KernelRequest(op=op, a=a, x=x, y=y, alpha=alpha, beta=beta, config=config)
    diag_rep = run_diag_block(diag_req)
    if alpha == 0:
        return diag_rep
    off_req = KernelRequest(op=op, a=a, x=x, y=diag_rep.y_out, alpha=alpha, beta=beta, config=config)
    rep = run_symv_offdiag(off_req)
    rep.absorb(replace(diag_rep, y_out=None))
    return rep


def symv(uplo, alpha, a, x, beta, y, config) -> ExecutionReport:
    """Real symmetric MV (s/d precisions)."""
    if a.base.precision.is_complex:
        raise ValueError("symv supports real precisions; use hemv for complex matrices")
    return symv_hemv(uplo, alpha, a, x, beta, y, config, hermitian=False)


def hemv(uplo, alpha, a, x, beta, y, config) -> ExecutionReport:
    """Complex Hermitian MV (c/z precisions)."""
    if not a.base.precision.is_complex:
        raise ValueError("hemv supports complex precisions; use symv for real matrices")
    return symv_hemv(uplo, alpha, a, x, beta, y, config, hermitian=True)
