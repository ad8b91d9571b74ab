"""Command-line front end: run kernels against the oracle, emit roofline and
offset-scan reports, and drive the tuning pipeline.

All reports are comma-delimited; ``--figures DIR`` additionally renders the
matching plot next to the delimited output.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from .core import (
    PROFILE_ENV_VAR,
    HermitianView,
    MatrixView,
    builtin_k20c_profile,
    load_device_profile,
    make_padded_view,
    precision,
)
from .costmodel import ledger_for_request, predict_time, round_model
from .kernels import gemv, symv_hemv
from .multidevice import distribute, gemv_mgpu, symv_hemv_mgpu
from .offset import OffsetRequest, gemv_offset, symv_hemv_offset
from .partition import KernelConfig
from .reference import max_abs_error, naive_gemv, naive_symv_hemv, tolerance_bound
from .roofline import sustained_peak, write_intensity_csv
from .tuner import sweep as tuner_sweep
from .tuner import enumerate_configs, tune, write_sweep_csv

KERNEL_CHOICES = ("gemv", "gemv-t", "symv", "hemv")


def _resolve_profile(args):
    path = args.profile or os.environ.get(PROFILE_ENV_VAR)
    if path:
        return load_device_profile(path)
    return builtin_k20c_profile(ecc=getattr(args, "ecc", False))


def _open_csv(path):
    if path and path != "-":
        return open(path, "w", newline="")
    return sys.stdout


def _fill(rng, shape, prec):
    if prec.is_complex:
        re = rng.uniform(-1, 1, size=shape)
        im = rng.uniform(-1, 1, size=shape)
        return (re + 1j * im).astype(prec.dtype)
    return rng.uniform(-1, 1, size=shape).astype(prec.dtype)


def _config(args) -> KernelConfig:
    return KernelConfig(block_size=args.nb, thread_cols=args.q, coop_tbs=args.y)


RUN_CSV_HEADER = [
    "scope",
    "kernel",
    "precision",
    "m",
    "n",
    "nb",
    "q",
    "y",
    "row_off",
    "col_off",
    "devices",
    "bytes_read",
    "bytes_written",
    "transactions",
    "matrix_transactions",
    "flops",
    "tb_count",
    "tb_remainder",
    "atomic_adds",
    "reduction_events",
    "scal_invocations",
    "predicted_seconds",
    "predicted_gflops",
    "roofline_peak_gflops",
    "roofline_efficiency",
    "max_abs_error",
    "error_bound",
    "verified",
]


def cmd_run(args) -> int:
    prec = precision(args.prec)
    profile = _resolve_profile(args)
    cfg = _config(args)
    rng = np.random.default_rng(args.seed)
    symmetric = args.kernel in ("symv", "hemv")
    n = args.n
    if n <= 0 or (args.m is not None and args.m <= 0):
        print("error: --m and --n must be positive", file=sys.stderr)
        return 2
    m = args.m if (args.m is not None and not symmetric) else n
    if symmetric and args.col_off not in (0, args.row_off):
        print("error: symmetric offsets must be diagonal (equal row/col)", file=sys.stderr)
        return 2
    row_off, col_off = args.row_off, (args.row_off if symmetric else args.col_off)
    parent_m, parent_n = m + row_off, n + col_off
    if symmetric:
        parent_m = parent_n = n + row_off
    parent = make_padded_view(parent_m, parent_n, prec, pad_to=32)
    parent.array()[:, :] = _fill(rng, (parent_m, parent_n), prec)
    if args.kernel == "hemv":
        # keep the stored diagonal real so both triangles agree
        d = parent.array()
        idx = np.arange(min(parent_m, parent_n))
        d[idx, idx] = d[idx, idx].real

    trans = {"gemv": "n", "gemv-t": "t"}.get(args.kernel)
    x_len, y_len = (n, m) if trans in (None, "n") else (m, n)
    x = _fill(rng, x_len, prec)
    y = _fill(rng, y_len, prec)
    alpha = prec.dtype.type(args.alpha)
    beta = prec.dtype.type(args.beta)

    sub = parent.submatrix(row_off, col_off, m, n)
    if symmetric:
        hv_sub = HermitianView(base=sub, uplo=args.uplo)

    per_device = []
    if args.devices > 1:
        if row_off or col_off:
            print("error: --devices cannot be combined with offsets", file=sys.stderr)
            return 2
        dist = distribute(parent, args.nb, args.devices)
        if symmetric:
            rep, per_device = symv_hemv_mgpu(
                args.uplo, alpha, dist, x, beta, y, cfg, hermitian=(args.kernel == "hemv")
            )
        else:
            rep, per_device = gemv_mgpu(trans, alpha, dist, x, beta, y, cfg)
    elif row_off or col_off:
        if symmetric:
            hv_parent = HermitianView(base=parent, uplo=args.uplo)
            rep = symv_hemv_offset(
                args.uplo, alpha, hv_parent, row_off, n, x, beta, y, cfg,
                hermitian=(args.kernel == "hemv"),
            )
        else:
            req = OffsetRequest(parent=parent, row_off=row_off, col_off=col_off, sub_m=m, sub_n=n)
            rep = gemv_offset(trans, alpha, req, x, beta, y, cfg)
    else:
        if symmetric:
            rep = symv_hemv(
                args.uplo, alpha, hv_sub, x, beta, y, cfg, hermitian=(args.kernel == "hemv")
            )
        else:
            rep = gemv(trans, alpha, sub, x, beta, y, cfg)

    if symmetric:
        from .reference import dense_from_triangle

        dense = dense_from_triangle(hv_sub, args.kernel == "hemv")
        want = naive_symv_hemv(alpha, hv_sub, x, beta, y, hermitian=(args.kernel == "hemv"))
    else:
        dense = np.abs(sub.array())
        want = naive_gemv(trans, alpha, sub, x, beta, y)
    bound = tolerance_bound(np.abs(alpha) * np.abs(dense), x, prec) + tolerance_bound(
        np.abs(beta) * np.eye(y_len), y, prec
    )
    err = max_abs_error(rep.y_out, want)
    ok = err <= max(bound, 10 * prec.eps)

    family = "symv" if symmetric else "gemv"
    model = round_model(max(rep.tb_count, 1), profile)
    seconds = predict_time(rep.transactions, model, profile)
    gflops = rep.flops / seconds / 1e9
    peak = sustained_peak(profile, prec, family)

    def report_row(scope, r, model_r=None, seconds_r=None, gflops_r=None, verdict=("", "", "")):
        return [
            scope,
            args.kernel,
            prec.tag,
            m,
            n,
            args.nb,
            args.q,
            args.y,
            row_off,
            col_off,
            args.devices,
            r.bytes_read,
            r.bytes_written,
            r.transactions,
            r.matrix_transactions,
            r.flops,
            r.tb_count,
            "" if model_r is None else model_r.tb_remainder,
            r.atomic_adds,
            r.reduction_events,
            r.scal_invocations,
            "" if seconds_r is None else f"{seconds_r:.6e}",
            "" if gflops_r is None else f"{gflops_r:.4f}",
            f"{peak:.4f}",
            "" if gflops_r is None else f"{gflops_r / peak:.4f}",
            *verdict,
        ]

    fh = _open_csv(args.csv)
    try:
        writer = csv.writer(fh)
        writer.writerow(RUN_CSV_HEADER)
        writer.writerow(
            report_row(
                "merged", rep, model, seconds, gflops,
                (f"{err:.3e}", f"{bound:.3e}", "pass" if ok else "FAIL"),
            )
        )
        for g, dev_rep in enumerate(per_device):
            dev_model = round_model(max(dev_rep.tb_count, 1), profile)
            dev_seconds = predict_time(dev_rep.transactions, dev_model, profile)
            writer.writerow(report_row(f"device-{g}", dev_rep, dev_model, dev_seconds))
    finally:
        if fh is not sys.stdout:
            fh.close()
    if not ok:
        print(f"verification FAILED: error {err:.3e} exceeds bound {bound:.3e}", file=sys.stderr)
        return 1
    return 0


def cmd_roofline(args) -> int:
    profile = _resolve_profile(args)
    fh = _open_csv(args.csv)
    try:
        write_intensity_csv(profile, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    if args.figures:
        from .figures import figure_path, render_roofline

        render_roofline(profile, figure_path(args.figures, "roofline"))
    return 0


def offset_scan_rows(prec_tag: str, n: int, nb: int, max_off: int, segment_bytes: int = 128):
    """(offset, matrix_segments, inflation) for a standard kernel reading an
    n x n window at each row offset; inflation is relative to offset 0."""
    prec = precision(prec_tag)
    parent = MatrixView(
        data=None,
        rows=n + max_off,
        cols=n,
        ld=-(-(n + max_off) // 32) * 32,
        precision=prec,
    )
    rows = []
    base = None
    for off in range(max_off + 1):
        sub = parent.submatrix(off, 0, n, n)
        segs = ledger_for_request(sub, "gemv", nb, segment_bytes=segment_bytes).matrix_segments
        if base is None:
            base = segs
        rows.append((off, segs, segs / base))
    return rows


def cmd_offset_scan(args) -> int:
    rows = offset_scan_rows(args.prec, args.n, args.nb, args.max_off)
    fh = _open_csv(args.csv)
    try:
        writer = csv.writer(fh)
        writer.writerow(["offset", "matrix_segments", "inflation"])
        for off, segs, infl in rows:
            writer.writerow([off, segs, f"{infl:.6f}"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    if args.figures:
        from .figures import figure_path, render_offset_scan

        render_offset_scan(
            rows,
            figure_path(args.figures, "offset-scan"),
            title=f"{args.prec}-precision offset scan (n={args.n}, nb={args.nb})",
        )
    return 0


def cmd_tune(args) -> int:
    profile = _resolve_profile(args)
    sizes = [int(s) for s in args.sizes.split(",") if s]
    coarse, fine = tune(
        args.kernel, args.prec, sizes, profile, atomic_coeff=args.atomic_coeff
    )
    prec = precision(args.prec)
    points = tuner_sweep(
        args.kernel, prec, sizes, enumerate_configs(coop_tbs=(1,)), profile, args.atomic_coeff
    )
    fh = _open_csv(args.csv)
    try:
        write_sweep_csv(points + fine.points, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    w, r = coarse.winner, fine.recommended
    print(
        f"coarse winner: nb={w.block_size} q={w.thread_cols}; "
        f"fine recommendation: nb={r.block_size} q={r.thread_cols} y={r.coop_tbs}",
        file=sys.stderr,
    )
    for size in sorted(fine.per_size):
        c = fine.per_size[size]
        print(f"  size {size}: y={c.coop_tbs}", file=sys.stderr)
    if args.figures:
        from .figures import figure_path, render_tune_sweep

        render_tune_sweep(
            fine.points,
            figure_path(args.figures, "tune-sweep"),
            title=f"{args.prec}-{args.kernel} cooperation sweep",
        )
    return 0


def _add_common(p):
    p.add_argument("--profile", help="device profile file (key=value); overrides the builtin")
    p.add_argument("--ecc", action="store_true", help="use the ECC-on builtin profile")
    p.add_argument("--csv", help="write the delimited report here instead of stdout")
    p.add_argument("--figures", help="directory to render companion figures into")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockmv",
        description="Simulate blocked matrix-vector kernels with transaction-level cost accounting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one kernel and verify it against the naive oracle")
    p.add_argument("--kernel", choices=KERNEL_CHOICES, required=True)
    p.add_argument("--prec", choices="sdcz", default="d")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None, help="rows (general kernels; defaults to n)")
    p.add_argument("--nb", type=int, default=64)
    p.add_argument("--q", type=int, default=4)
    p.add_argument("--y", type=int, default=1)
    p.add_argument("--uplo", choices=("l", "u"), default="l")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--row-off", type=int, default=0)
    p.add_argument("--col-off", type=int, default=0)
    p.add_argument("--devices", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("roofline", help="emit the intensity / sustained-peak table")
    _add_common(p)
    p.set_defaults(func=cmd_roofline)

    p = sub.add_parser("offset-scan", help="transaction inflation versus row offset")
    p.add_argument(
        "--kernel",
        choices=("gemv", "gemv-t"),
        default="gemv",
        help="kernel whose matrix traffic is scanned (both directions read identically)",
    )
    p.add_argument("--prec", choices="sdcz", default="s")
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--nb", type=int, default=64)
    p.add_argument("--max-off", type=int, default=64)
    _add_common(p)
    p.set_defaults(func=cmd_offset_scan)

    p = sub.add_parser("tune", help="coarse/fine configuration search")
    p.add_argument("--kernel", choices=KERNEL_CHOICES, required=True)
    p.add_argument("--prec", choices="sdcz", default="d")
    p.add_argument("--sizes", default="1024,2048,4096,8192")
    p.add_argument("--atomic-coeff", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(func=cmd_tune)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
