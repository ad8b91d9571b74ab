"""Analytic coarse/fine tuning over the (block_size, thread_cols, coop_tbs)
triple.

No numeric kernels run here: every candidate is scored from geometry-only
views through the transaction ledger, the execution-round model, and an
atomic-traffic surcharge. Coarse tuning fixes coop_tbs = 1 and picks the
(block_size, thread_cols) pair that wins at the largest problem size; fine
tuning keeps that pair and scans coop_tbs per size.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .core import DeviceProfile, HermitianView, MatrixView, Precision, precision
from .costmodel import ideal_segments, ledger_for_request, predict_time, round_model
from .partition import KernelConfig, tb_share
from .roofline import flop_count

KERNELS = ("gemv", "gemv-t", "symv", "hemv")
DEFAULT_BLOCK_SIZES = (32, 64, 128)
DEFAULT_COOP_TBS = (1, 2, 4, 8, 16)


def _family(kernel: str) -> str:
    if kernel in ("gemv", "gemv-t"):
        return "gemv"
    if kernel in ("symv", "hemv"):
        return "symv"
    raise ValueError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")


def enumerate_configs(
    block_sizes=DEFAULT_BLOCK_SIZES,
    coop_tbs=(1,),
) -> list[KernelConfig]:
    """All legal tuning triples: thread_cols runs over the powers of two that
    keep the per-thread buffer length a positive integer."""
    out = []
    for nb in block_sizes:
        q = 1
        while 2 * q <= nb and nb % (2 * q) == 0:
            for y in coop_tbs:
                out.append(KernelConfig(block_size=nb, thread_cols=q, coop_tbs=y))
            q *= 2
    return out


@dataclass(frozen=True)
class TunePoint:
    """Predicted performance of one (kernel, precision, size, config) cell."""

    kernel: str
    precision: Precision
    size: int
    config: KernelConfig
    predicted_gflops: float
    transactions: int
    tb_count: int
    tb_remainder: int


def _geometry_view(n: int, prec: Precision) -> MatrixView:
    ld = -(-n // 32) * 32  # segment-aligned leading dimension at every precision
    return MatrixView(data=None, rows=n, cols=n, ld=ld, precision=prec)


def _atomic_segments_gemv(n: int, cfg: KernelConfig, eb: int, seg: int) -> int:
    nb = cfg.block_size
    x_count = -(-n // nb)
    total = -(-n // nb)  # square matrix: inner traversal has the same extent
    active = min(cfg.coop_tbs, total)
    segs = 0
    for xb in range(x_count):
        blk = min(n, (xb + 1) * nb) - xb * nb
        segs += active * 2 * ideal_segments(blk * eb, seg)
    return segs


def _atomic_segments_symv(n: int, cfg: KernelConfig, eb: int, seg: int) -> int:
    nb = cfg.block_size
    t = -(-n // nb)
    lens = [min(n, (j + 1) * nb) - j * nb for j in range(t)]
    segs = 0
    for j in range(1, t):
        # block row j is processed once per block column left of it
        segs += j * 2 * ideal_segments(lens[j] * eb, seg)
    for i in range(t):
        total = t - i - 1
        active = sum(1 for slot in range(cfg.coop_tbs) if tb_share(total, cfg.coop_tbs, slot)[0])
        segs += active * 2 * ideal_segments(lens[i] * eb, seg)
    return segs


def predict_point(
    kernel: str,
    prec: Precision,
    n: int,
    cfg: KernelConfig,
    profile: DeviceProfile,
    atomic_coeff: float = 1.0,
) -> TunePoint:
    """Score one configuration on an n x n problem.

    Transactions = analytic ledger + atomic_coeff * atomic read/write
    segments; time = bandwidth bound stretched by the round-model
    utilization of the accumulation launch.
    """
    family = _family(kernel)
    eb = prec.element_bytes
    seg = profile.segment_bytes
    view = _geometry_view(n, prec)
    nb = cfg.block_size
    if family == "gemv":
        ledger = ledger_for_request(view, "gemv", nb, segment_bytes=seg)
        atomic = _atomic_segments_gemv(n, cfg, eb, seg)
        tb_count = -(-n // nb) * cfg.coop_tbs
    else:
        hv = HermitianView(base=view, uplo="l")
        ledger = ledger_for_request(hv, "symv", nb, segment_bytes=seg)
        atomic = _atomic_segments_symv(n, cfg, eb, seg)
        tb_count = -(-n // nb) * cfg.coop_tbs
    transactions = ledger.total_segments + round(atomic_coeff * atomic)
    model = round_model(tb_count, profile)
    seconds = predict_time(transactions, model, profile)
    gflops = flop_count(prec, family, n) / seconds / 1e9
    return TunePoint(
        kernel=kernel,
        precision=prec,
        size=n,
        config=cfg,
        predicted_gflops=gflops,
        transactions=transactions,
        tb_count=tb_count,
        tb_remainder=model.tb_remainder,
    )


def sweep(
    kernel: str,
    prec: Precision,
    sizes,
    configs,
    profile: DeviceProfile,
    atomic_coeff: float = 1.0,
) -> list[TunePoint]:
    return [
        predict_point(kernel, prec, n, cfg, profile, atomic_coeff)
        for cfg in configs
        for n in sizes
    ]


@dataclass(frozen=True)
class CoarseResult:
    winner: KernelConfig
    points: list[TunePoint]


@dataclass(frozen=True)
class FineResult:
    per_size: dict[int, KernelConfig]
    recommended: KernelConfig
    points: list[TunePoint]


def coarse_tune(
    kernel: str,
    prec: Precision,
    sizes,
    profile: DeviceProfile,
    block_sizes=DEFAULT_BLOCK_SIZES,
    atomic_coeff: float = 1.0,
) -> CoarseResult:
    """Stage one: coop_tbs pinned to 1, pick (block_size, thread_cols).

    Ranking is by predicted throughput at the largest size; ties go to the
    smaller block size, then the smaller thread-column count.
    """
    sizes = sorted(set(sizes))
    if not sizes:
        raise ValueError("coarse_tune needs at least one size")
    configs = enumerate_configs(block_sizes, coop_tbs=(1,))
    points = sweep(kernel, prec, sizes, configs, profile, atomic_coeff)
    top = max(sizes)
    at_top = [p for p in points if p.size == top]
    best = min(
        at_top,
        key=lambda p: (-p.predicted_gflops, p.config.block_size, p.config.thread_cols),
    )
    return CoarseResult(winner=best.config, points=points)


def fine_tune(
    kernel: str,
    prec: Precision,
    sizes,
    profile: DeviceProfile,
    base: KernelConfig,
    coop_tbs=DEFAULT_COOP_TBS,
    atomic_coeff: float = 1.0,
) -> FineResult:
    """Stage two: scan coop_tbs around a fixed (block_size, thread_cols).

    Produces a per-size winner and an overall recommendation (the winner at
    the largest size; ties go to fewer cooperating TBs).
    """
    sizes = sorted(set(sizes))
    if not sizes:
        raise ValueError("fine_tune needs at least one size")
    configs = [
        KernelConfig(base.block_size, base.thread_cols, coop_tbs=y) for y in sorted(set(coop_tbs))
    ]
    points = sweep(kernel, prec, sizes, configs, profile, atomic_coeff)
    per_size: dict[int, KernelConfig] = {}
    for n in sizes:
        here = [p for p in points if p.size == n]
        per_size[n] = min(
            here, key=lambda p: (-p.predicted_gflops, p.config.coop_tbs)
        ).config
    return FineResult(per_size=per_size, recommended=per_size[max(sizes)], points=points)


SWEEP_CSV_HEADER = [
    "kernel",
    "precision",
    "nb",
    "q",
    "y",
    "size",
    "predicted_gflops",
    "transactions",
    "tb_r",
]


def write_sweep_csv(points, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(SWEEP_CSV_HEADER)
    for p in points:
        writer.writerow(
            [
                p.kernel,
                p.precision.tag,
                p.config.block_size,
                p.config.thread_cols,
                p.config.coop_tbs,
                p.size,
                f"{p.predicted_gflops:.4f}",
                p.transactions,
                p.tb_remainder,
            ]
        )


def tune(
    kernel: str,
    prec_tag: str,
    sizes,
    profile: DeviceProfile,
    block_sizes=DEFAULT_BLOCK_SIZES,
    coop_tbs=DEFAULT_COOP_TBS,
    atomic_coeff: float = 1.0,
) -> tuple[CoarseResult, FineResult]:
    """Full two-stage pipeline; returns both stages' results."""
    prec = precision(prec_tag)
    coarse = coarse_tune(kernel, prec, sizes, profile, block_sizes, atomic_coeff)
    fine = fine_tune(kernel, prec, sizes, profile, coarse.winner, coop_tbs, atomic_coeff)
    return coarse, fine
