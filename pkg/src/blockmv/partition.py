"""Grid-design arithmetic: grid shape, per-TB workload shares, starting blocks.

All functions are pure. A thread block (TB) is addressed by coordinates
(x, y): x selects the block row or block column it contributes to, y its
cooperation slot among the ``coop_tbs`` TBs that share that output segment.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class KernelConfig:
    """The tuning triple: block size, thread columns per TB, cooperating TBs.

    ``block_size`` must be even and ``block_size / (2 * thread_cols)`` must
    be a positive integer (the per-thread register buffer length).
    """

    block_size: int
    thread_cols: int
    coop_tbs: int = 1

    def __post_init__(self):
        if self.block_size <= 0 or self.block_size % 2 != 0:
            raise ValueError(f"block_size must be positive and even, got {self.block_size}")
        if self.thread_cols <= 0:
            raise ValueError(f"thread_cols must be positive, got {self.thread_cols}")
        if self.coop_tbs < 1:
            raise ValueError(f"coop_tbs must be >= 1, got {self.coop_tbs}")
        if self.block_size % (2 * self.thread_cols) != 0:
            raise ValueError(
                f"block_size/(2*thread_cols) must be a positive integer "
                f"(got {self.block_size}/{2 * self.thread_cols})"
            )

    @property
    def buffer_len(self) -> int:
        """Per-thread register buffer length for one half block."""
        return self.block_size // (2 * self.thread_cols)

    @property
    def threads_per_tb(self) -> int:
        return self.block_size * self.thread_cols


@dataclass(frozen=True)
class GridShape:
    """2-D launch grid: x_count block rows/columns, coop_tbs cooperation slots."""

    x_count: int
    coop_tbs: int

    @property
    def total_tbs(self) -> int:
        return self.x_count * self.coop_tbs


@dataclass(frozen=True)
class TbAssignment:
    """One TB's place in the grid and its contiguous share of blocks."""

    x: int
    y: int
    start: int
    workload: int


def grid_x(m: int, n: int, block_size: int, transposed: bool = False) -> int:
    """Number of block rows (non-transposed) or block columns (transposed)."""
    if m <= 0 or n <= 0 or block_size <= 0:
        raise ValueError("dimensions and block_size must be positive")
    dim = n if transposed else m
    return -(-dim // block_size)


def total_workload_gemv(d: int, block_size: int) -> int:
    """Blocks to process along one block row/column of a d-wide traversal."""
    if d <= 0 or block_size <= 0:
        raise ValueError("dimension and block_size must be positive")
    return -(-d // block_size)


def total_workload_symv(d: int, block_size: int, block_col: int, uplo: str) -> int:
    """Off-diagonal blocks in one block column of a stored triangle.

    Diagonal blocks are excluded; they are handled by the dedicated
    diagonal-block kernel.
    """
    t = -(-d // block_size)
    if not 0 <= block_col < t:
        raise ValueError(f"block_col {block_col} out of range for {t} block columns")
    if uplo.lower() == "l":
        return t - block_col - 1
    if uplo.lower() == "u":
        return block_col
    raise ValueError(f"uplo must be 'l' or 'u', got {uplo!r}")


def tb_share(total: int, coop_tbs: int, slot: int) -> tuple[int, int]:
    """(workload, start) for cooperation slot ``slot`` of ``coop_tbs`` TBs.

    Shares tile [start, start+workload) and the union over slots covers
    [0, total) exactly, with workloads differing by at most one.
    """
    if total < 0:
        raise ValueError(f"total workload must be >= 0, got {total}")
    if not 0 <= slot < coop_tbs:
        raise ValueError(f"slot {slot} out of range for {coop_tbs} cooperating TBs")
    base, rem = divmod(total, coop_tbs)
    w = base + (1 if slot < rem else 0)
    s = slot * base + min(slot, rem)
    return w, s


def tb_assignments(x: int, total: int, coop_tbs: int) -> list[TbAssignment]:
    """All assignments for one block row/column, ordered by slot."""
    out = []
    for slot in range(coop_tbs):
        w, s = tb_share(total, coop_tbs, slot)
        out.append(TbAssignment(x=x, y=slot, start=s, workload=w))
    return out
