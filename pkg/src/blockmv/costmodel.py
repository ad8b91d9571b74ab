"""Memory-transaction counting, execution-round occupancy, and predicted time.

Transactions are counted at warp granularity: a warp request covering a
contiguous byte range touches every aligned ``segment_bytes`` window that
intersects it. Column reads longer than a warp are split into 32-element
chunks, each counted as its own request.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import WARP_SIZE, DeviceProfile, HermitianView, MatrixView


def count_warp_transactions(
    start_offset: int, elements: int, element_bytes: int, segment_bytes: int
) -> int:
    """Aligned segments touched by one warp request of ``elements`` contiguous
    elements starting at element index ``start_offset``."""
    if elements <= 0:
        raise ValueError(f"elements must be positive, got {elements}")
    first_byte = start_offset * element_bytes
    last_byte = (start_offset + elements) * element_bytes - 1
    return last_byte // segment_bytes - first_byte // segment_bytes + 1


def column_read_traffic(
    col_starts: np.ndarray, length: int, element_bytes: int, segment_bytes: int
) -> tuple[int, int]:
    """(segments, elements) for reading ``length`` contiguous elements in each
    of several columns, chunked into warp-sized requests from each column's
    start. ``col_starts`` holds the linear element index of each column's
    first read element."""
    starts = np.asarray(col_starts, dtype=np.int64)
    segments = 0
    for r0 in range(0, length, WARP_SIZE):
        chunk = min(WARP_SIZE, length - r0)
        lo = (starts + r0) * element_bytes // segment_bytes
        hi = ((starts + r0 + chunk) * element_bytes - 1) // segment_bytes
        segments += int(np.sum(hi - lo + 1))
    return segments, length * starts.size


def ideal_segments(nbytes: int, segment_bytes: int) -> int:
    """Segments for a perfectly aligned transfer of ``nbytes``."""
    if nbytes == 0:
        return 0
    return -(-nbytes // segment_bytes)


@dataclass
class TransactionLedger:
    """Per-phase breakdown of memory traffic for one kernel request."""

    matrix_segments: int = 0
    matrix_bytes: int = 0
    x_segments: int = 0
    x_bytes: int = 0
    y_segments: int = 0
    y_bytes: int = 0
    phases: dict = field(default_factory=dict)

    @property
    def total_segments(self) -> int:
        return self.matrix_segments + self.x_segments + self.y_segments

    @property
    def total_bytes(self) -> int:
        return self.matrix_bytes + self.x_bytes + self.y_bytes


def _matrix_traffic_gemv(view: MatrixView, segment_bytes: int) -> tuple[int, int]:
    eb = view.precision.element_bytes
    base = view.linear_index(0, 0)
    starts = base + np.arange(view.cols, dtype=np.int64) * view.ld
    return column_read_traffic(starts, view.rows, eb, segment_bytes)


def _matrix_traffic_symv(
    view: MatrixView, nb: int, uplo: str, segment_bytes: int
) -> tuple[int, int]:
    """Stored-triangle traffic: each off-diagonal block read once per pass,
    diagonal blocks read in full (both triangles)."""
    d = view.rows
    eb = view.precision.element_bytes
    t = -(-d // nb)
    segments = elements = 0
    for i in range(t):
        c0, c1 = i * nb, min(d, (i + 1) * nb)
        if uplo == "l":
            r0, r1 = i * nb, d  # diagonal block plus everything below
        else:
            r0, r1 = 0, min(d, (i + 1) * nb)
        starts = view.linear_index(r0, c0) + np.arange(c1 - c0, dtype=np.int64) * view.ld
        s, e = column_read_traffic(starts, r1 - r0, eb, segment_bytes)
        segments += s
        elements += e
    return segments, elements


def ledger_for_request(
    a: MatrixView | HermitianView,
    kind: str,
    nb: int,
    segment_bytes: int = 128,
) -> TransactionLedger:
    """Analytic transaction ledger for a kernel over ``a``.

    ``kind`` is 'gemv' (either direction; both read the full matrix once) or
    'symv' (stored triangle plus full diagonal blocks). Vector traffic is
    counted ideally: x read once, y read and written once.
    """
    ledger = TransactionLedger()
    if kind == "gemv":
        view = a if isinstance(a, MatrixView) else a.base
        segs, elems = _matrix_traffic_gemv(view, segment_bytes)
        x_len, y_len = view.cols, view.rows
    elif kind == "symv":
        if not isinstance(a, HermitianView):
            raise ValueError("symv ledger requires a HermitianView")
        segs, elems = _matrix_traffic_symv(a.base, nb, a.uplo, segment_bytes)
        x_len = y_len = a.dim
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    eb = (a if isinstance(a, MatrixView) else a.base).precision.element_bytes
    ledger.matrix_segments = segs
    ledger.matrix_bytes = elems * eb
    ledger.x_segments = ideal_segments(x_len * eb, segment_bytes)
    ledger.x_bytes = x_len * eb
    ledger.y_segments = 2 * ideal_segments(y_len * eb, segment_bytes)
    ledger.y_bytes = 2 * y_len * eb
    ledger.phases = {"matrix": segs, "x": ledger.x_segments, "y": ledger.y_segments}
    return ledger


@dataclass(frozen=True)
class RoundModel:
    """Execution rounds of a launch on a device running one TB per SM at a time."""

    tb_count: int
    sm_count: int
    full_rounds: int
    tb_remainder: int

    @property
    def rounds(self) -> int:
        return self.full_rounds + (1 if self.tb_remainder else 0)

    @property
    def utilization(self) -> float:
        """Fraction of round-slots doing useful work; the partial round runs
        at tb_remainder/sm_count throughput but costs a full round."""
        return self.tb_count / (self.rounds * self.sm_count)


def round_model(tb_count: int, profile: DeviceProfile) -> RoundModel:
    if tb_count < 1:
        raise ValueError(f"tb_count must be >= 1, got {tb_count}")
    full, rem = divmod(tb_count, profile.sm_count)
    return RoundModel(tb_count=tb_count, sm_count=profile.sm_count, full_rounds=full, tb_remainder=rem)


def predict_time(transactions: int, model: RoundModel, profile: DeviceProfile) -> float:
    """First-order kernel time estimate in seconds.

    Pure bandwidth bound on the transferred segments, stretched by the
    round-model utilization: the partial round costs a full round's wall
    time while moving only tb_remainder/sm_count of a round's data. This is
    a model, not a wall-clock claim; use it for orderings and ratios.
    """
    nbytes = transactions * profile.segment_bytes
    base = nbytes / (profile.b_max_sustained * 1e9)
    return base / model.utilization
