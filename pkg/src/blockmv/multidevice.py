"""1D block-cyclic column distribution across simulated devices.

Block column j of the global matrix lives on device ``j mod G``. Each device
holds its block columns packed contiguously in a private column-major
allocation (leading dimension padded to the warp size so local kernel reads
stay aligned). Every device keeps a full local copy of the input vector;
output partials are reduced on the host in device order, which keeps the
whole pipeline deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import WARP_SIZE, MatrixView, Precision, make_padded_view
from .kernels import (
    ExecutionReport,
    _atomic_traffic,
    _count_block_read,
    _count_x_read,
    _gemv_accumulate,
    _gemv_flops,
)
from .partition import KernelConfig, tb_share


def block_col_count(n: int, nb_cols: int) -> int:
    return -(-n // nb_cols)


def owned_block_cols(n: int, nb_cols: int, device_count: int, device: int) -> list[int]:
    """Block-column indices owned by one device under the cyclic layout."""
    return list(range(device, block_col_count(n, nb_cols), device_count))


def local_col_count(n: int, nb_cols: int, device_count: int, device: int) -> int:
    """Columns held by one device (the global tail block may be narrow)."""
    total = 0
    for j in owned_block_cols(n, nb_cols, device_count, device):
        total += min(n, (j + 1) * nb_cols) - j * nb_cols
    return total


def required_local_elements(m: int, n: int, nb_cols: int, device_count: int, device: int) -> int:
    """Allocation size (in elements) for one device's packed block columns."""
    cols = local_col_count(n, nb_cols, device_count, device)
    if cols == 0:
        return 0
    ld = -(-m // WARP_SIZE) * WARP_SIZE
    return ld * cols


@dataclass
class DistributedMatrix:
    global_m: int
    global_n: int
    nb_cols: int
    device_count: int
    precision: Precision
    local_views: list[MatrixView | None]

    @property
    def block_cols(self) -> int:
        return block_col_count(self.global_n, self.nb_cols)

    def owned(self, device: int) -> list[int]:
        return owned_block_cols(self.global_n, self.nb_cols, self.device_count, device)


def distribute(a: MatrixView, nb_cols: int, device_count: int) -> DistributedMatrix:
    """Pack block columns cyclically onto ``device_count`` devices."""
    if device_count < 1 or nb_cols < 1:
        raise ValueError("device_count and nb_cols must be >= 1")
    m, n = a.rows, a.cols
    src = a.array()
    locals_: list[MatrixView | None] = []
    for g in range(device_count):
        owned = owned_block_cols(n, nb_cols, device_count, g)
        if not owned:
            locals_.append(None)  # more devices than block columns: idle device
            continue
        width = local_col_count(n, nb_cols, device_count, g)
        local = make_padded_view(m, width, a.precision, pad_to=WARP_SIZE)
        dst = local.array()
        pos = 0
        for j in owned:
            c0, c1 = j * nb_cols, min(n, (j + 1) * nb_cols)
            dst[:, pos : pos + (c1 - c0)] = src[:, c0:c1]
            pos += c1 - c0
        locals_.append(local)
    return DistributedMatrix(m, n, nb_cols, device_count, a.precision, locals_)


def gather(dist: DistributedMatrix) -> MatrixView:
    """Reassemble the global matrix from the device-local packings."""
    out = make_padded_view(dist.global_m, dist.global_n, dist.precision, pad_to=1)
    dst = out.array()
    for g in range(dist.device_count):
        local = dist.local_views[g]
        if local is None:
            continue
        src = local.array()
        pos = 0
        for j in dist.owned(g):
            c0, c1 = j * dist.nb_cols, min(dist.global_n, (j + 1) * dist.nb_cols)
            dst[:, c0:c1] = src[:, pos : pos + (c1 - c0)]
            pos += c1 - c0
    return out


def _global_col_slices(dist: DistributedMatrix, g: int) -> list[tuple[int, int]]:
    return [
        (j * dist.nb_cols, min(dist.global_n, (j + 1) * dist.nb_cols)) for j in dist.owned(g)
    ]


def gemv_mgpu(
    trans: str,
    alpha: complex,
    dist: DistributedMatrix,
    x,
    beta: complex,
    y,
    config: KernelConfig,
) -> tuple[ExecutionReport, list[ExecutionReport]]:
    """General MV over a distributed matrix.

    Non-transposed: each device produces a full-length partial over its block
    columns; the host sums partials in device order and composes with beta.
    Transposed: devices produce disjoint output segments for their columns,
    which the host scatters into place.
    """
    trans = trans.lower()
    if trans not in ("n", "t", "c"):
        raise ValueError(f"trans must be 'n', 't' or 'c', got {trans!r}")
    prec = dist.precision
    if trans == "c" and not prec.is_complex:
        trans = "t"
    m, n = dist.global_m, dist.global_n
    x_len, y_len = (n, m) if trans == "n" else (m, n)
    x = np.asarray(x, dtype=prec.dtype)
    y = np.asarray(y, dtype=prec.dtype)
    if len(x) != x_len or len(y) != y_len:
        raise ValueError(f"expected x of length {x_len} and y of length {y_len}")
    dtype = prec.dtype
    per_device: list[ExecutionReport] = []
    accum = np.zeros(y_len, dtype=dtype)
    for g in range(dist.device_count):
        local = dist.local_views[g]
        rep = ExecutionReport()
        if local is not None and alpha != 0:
            slices = _global_col_slices(dist, g)
            if trans == "n":
                x_local = np.concatenate([x[c0:c1] for c0, c1 in slices])
                _count_x_read(rep, len(x_local), prec.element_bytes)
                partial = _gemv_accumulate(
                    rep, local.array(), local, x_local, alpha, config, False, False
                )
                accum += partial
            else:
                _count_x_read(rep, m, prec.element_bytes)
                partial = _gemv_accumulate(
                    rep, local.array(), local, x, alpha, config, True, trans == "c"
                )
                pos = 0
                for c0, c1 in slices:
                    accum[c0:c1] = partial[pos : pos + (c1 - c0)]
                    pos += c1 - c0
            _gemv_flops(rep, local.cols if trans != "n" else local.rows,
                        local.rows if trans != "n" else local.cols, prec)
        rep.y_out = None
        per_device.append(rep)
    merged = ExecutionReport()
    for rep in per_device:
        merged.absorb(rep)
    beta_part = dtype.type(beta) * y if beta != 0 else np.zeros(y_len, dtype=dtype)
    merged.y_out = beta_part + accum
    return merged, per_device


def symv_hemv_mgpu(
    uplo: str,
    alpha: complex,
    dist: DistributedMatrix,
    x,
    beta: complex,
    y,
    config: KernelConfig,
    hermitian: bool | None = None,
) -> tuple[ExecutionReport, list[ExecutionReport]]:
    """Symmetric/Hermitian MV over a triangle-stored distributed matrix.

    Local rectangular strips lose symmetry, so each device walks its own
    block columns: the diagonal block is mirrored in place and every stored
    off-diagonal block contributes both products into a full-length local
    partial. The host reduces the partials in device order.
    """
    uplo = uplo.lower()
    if uplo not in ("l", "u"):
        raise ValueError(f"uplo must be 'l' or 'u', got {uplo!r}")
    if dist.global_m != dist.global_n:
        raise ValueError("symmetric ops need a square distributed matrix")
    if dist.nb_cols != config.block_size:
        raise ValueError(
            "distribution block width must equal the kernel block size for symmetric ops"
        )
    prec = dist.precision
    if hermitian is None:
        hermitian = prec.is_complex
    d = dist.global_n
    nb = config.block_size
    t = dist.block_cols
    x = np.asarray(x, dtype=prec.dtype)
    y = np.asarray(y, dtype=prec.dtype)
    if len(x) != d or len(y) != d:
        raise ValueError(f"expected x and y of length {d}")
    dtype = prec.dtype
    alpha_t = dtype.type(alpha)
    eb = prec.element_bytes
    per_device: list[ExecutionReport] = []
    accum = np.zeros(d, dtype=dtype)
    for g in range(dist.device_count):
        local = dist.local_views[g]
        rep = ExecutionReport()
        if local is not None and alpha != 0:
            A = local.array()
            _count_x_read(rep, d, eb)
            partial = np.zeros(d, dtype=dtype)
            for pos, i in enumerate(dist.owned(g)):
                c0, c1 = i * nb, min(d, (i + 1) * nb)
                p0 = pos * nb
                pw = c1 - c0
                # diagonal block: mirror the stored triangle, fuse nothing
                r0, r1 = c0, c1
                blk = np.array(A[r0:r1, p0 : p0 + pw], copy=True)
                _count_block_read(rep, local, r0, r1, p0, p0 + pw)
                if uplo == "l":
                    half, mirror = np.tril(blk), np.tril(blk, -1)
                else:
                    half, mirror = np.triu(blk), np.triu(blk, 1)
                mirror = mirror.conj().T if hermitian else mirror.T
                mirrored = half + mirror
                if hermitian:
                    idx = np.arange(pw)
                    mirrored[idx, idx] = mirrored[idx, idx].real
                partial[r0:r1] += alpha_t * (mirrored @ x[c0:c1])
                rep.tb_count += 1
                rep.flops += prec.flops_per_mul * (pw * pw + pw) + prec.flops_per_add * (pw * pw)
                # off-diagonal blocks of this block column
                total = (t - i - 1) if uplo == "l" else i
                for slot in range(config.coop_tbs):
                    w, s = tb_share(total, config.coop_tbs, slot)
                    if w == 0:
                        continue
                    vacc = np.zeros(pw, dtype=dtype)
                    for k in range(s, s + w):
                        j = (i + 1 + k) if uplo == "l" else k
                        jr0, jr1 = j * nb, min(d, (j + 1) * nb)
                        oblk = A[jr0:jr1, p0 : p0 + pw]
                        _count_block_read(rep, local, jr0, jr1, p0, p0 + pw)
                        partial[jr0:jr1] += alpha_t * (oblk @ x[c0:c1])
                        rep.reduction_events += 1
                        rep.atomic_adds += 1
                        _atomic_traffic(rep, jr1 - jr0, eb)
                        bt = oblk.conj().T if hermitian else oblk.T
                        vacc += bt @ x[jr0:jr1]
                        rep.flops += prec.flops_per_mul * 2 * (jr1 - jr0) * pw
                        rep.flops += prec.flops_per_add * 2 * (jr1 - jr0) * pw
                    partial[c0:c1] += alpha_t * vacc
                    rep.reduction_events += 1
                    rep.atomic_adds += 1
                    _atomic_traffic(rep, pw, eb)
                rep.tb_count += config.coop_tbs
            accum += partial
        rep.y_out = None
        per_device.append(rep)
    merged = ExecutionReport()
    for rep in per_device:
        merged.absorb(rep)
    beta_part = dtype.type(beta) * y if beta != 0 else np.zeros(d, dtype=dtype)
    merged.y_out = beta_part + accum
    return merged, per_device


class CommandQueue:
    """Named in-order execution queue: submitted operations run, in
    submission order, when the queue is synchronized."""

    def __init__(self, name: str = "default"):
        self.name = name
        self._pending: list[_Pending] = []

    def submit(self, fn, *args, **kwargs) -> "_Pending":
        handle = _Pending(self, fn, args, kwargs)
        self._pending.append(handle)
        return handle

    def synchronize(self) -> None:
        pending, self._pending = self._pending, []
        for handle in pending:
            handle._run()


@dataclass
class _Pending:
    queue: CommandQueue
    fn: object
    args: tuple
    kwargs: dict
    done: bool = False
    _result: object = field(default=None, repr=False)

    def _run(self):
        self._result = self.fn(*self.args, **self.kwargs)
        self.done = True

    def result(self):
        if not self.done:
            raise RuntimeError("queue not synchronized yet")
        return self._result


def gemv_mgpu_async(trans, alpha, dist, x, beta, y, config, queue: CommandQueue) -> _Pending:
    return queue.submit(gemv_mgpu, trans, alpha, dist, x, beta, y, config)


def symv_hemv_mgpu_async(
    uplo, alpha, dist, x, beta, y, config, queue: CommandQueue, hermitian=None
) -> _Pending:
    return queue.submit(symv_hemv_mgpu, uplo, alpha, dist, x, beta, y, config, hermitian)
