"""Optional matplotlib renderings of the CSV reports.

Every function takes the already-computed data and a target path, renders
with the Agg backend, and returns the path written. The CSV output remains
the primary artifact; these are companions for eyeballing trends.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .core import DeviceProfile
from .roofline import FAMILIES, intensity_table


def render_roofline(profile: DeviceProfile, out_path: str) -> str:
    """Bandwidth roofline with each precision/family kernel placed at its
    asymptotic intensity."""
    records = intensity_table(profile)
    bw = profile.b_max_sustained
    fig, ax = plt.subplots(figsize=(7, 5))
    max_i = max(r.intensity for r in records) * 2
    xs = [max_i / 1000 * (1.02**k) for k in range(700)]
    ax.plot(xs, [bw * x for x in xs], color="black", lw=1.5, label=f"{bw:.1f} GB/s roof")
    markers = {"gemv": "o", "symv": "s"}
    for rec in records:
        ax.plot(
            rec.intensity,
            rec.peak_gflops,
            markers[rec.family],
            label=f"{rec.precision.tag}-{rec.family}: {rec.peak_gflops:.1f} Gflop/s",
        )
        if rec.published_gflops is not None and rec.note:
            ax.plot(rec.intensity, rec.published_gflops, "x", color="red")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("operational intensity (flop/byte)")
    ax.set_ylabel("attainable Gflop/s")
    ax.set_title(f"MV roofline on {profile.name}")
    ax.legend(fontsize=7, loc="lower right")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def render_offset_scan(rows, out_path: str, title: str = "offset scan") -> str:
    """Transaction inflation versus row offset.

    ``rows`` are (offset, segments, inflation) triples as produced by the
    offset-scan report.
    """
    offs = [r[0] for r in rows]
    inflation = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(offs, inflation, drawstyle="steps-post", lw=1.2)
    aligned = [o for o, _, f in rows if abs(f - 1.0) < 1e-12]
    if aligned:
        ax.plot(aligned, [1.0] * len(aligned), "o", ms=3, color="green", label="aligned")
        ax.legend(fontsize=8)
    ax.set_xlabel("row offset (elements)")
    ax.set_ylabel("transaction inflation vs aligned")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def render_tune_sweep(points, out_path: str, title: str = "tuning sweep") -> str:
    """Predicted Gflop/s versus size, one line per configuration."""
    by_cfg: dict = {}
    for p in points:
        key = (p.config.block_size, p.config.thread_cols, p.config.coop_tbs)
        by_cfg.setdefault(key, []).append(p)
    fig, ax = plt.subplots(figsize=(7, 5))
    for (nb, q, y), ps in sorted(by_cfg.items()):
        ps = sorted(ps, key=lambda p: p.size)
        ax.plot(
            [p.size for p in ps],
            [p.predicted_gflops for p in ps],
            marker=".",
            lw=1.0,
            label=f"nb={nb} q={q} y={y}",
        )
    ax.set_xlabel("matrix dimension")
    ax.set_ylabel("predicted Gflop/s")
    ax.set_title(title)
    ax.legend(fontsize=6, ncol=2)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def figure_path(directory: str, stem: str) -> str:
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, f"{stem}.png")
