"""Deterministic simulator of blocked matrix-vector kernels on a many-core
SIMT machine, with transaction-level cost accounting, offset (submatrix)
variants, block-cyclic multi-device dispatch, and an analytic tuner."""

from .core import (
    PRECISIONS,
    PROFILE_ENV_VAR,
    WARP_SIZE,
    DeviceProfile,
    HermitianView,
    MatrixView,
    Precision,
    alloc_matrix,
    builtin_k20c_profile,
    load_device_profile,
    make_padded_view,
    precision,
)
from .costmodel import (
    RoundModel,
    TransactionLedger,
    count_warp_transactions,
    ideal_segments,
    ledger_for_request,
    predict_time,
    round_model,
)
from .kernels import (
    SEGMENT_BYTES,
    ExecutionReport,
    KernelRequest,
    Op,
    gemv,
    hemv,
    run_diag_block,
    run_gemv_n,
    run_gemv_t,
    run_scal,
    run_symv_offdiag,
    symv,
    symv_hemv,
)
from .multidevice import (
    CommandQueue,
    DistributedMatrix,
    distribute,
    gather,
    gemv_mgpu,
    gemv_mgpu_async,
    symv_hemv_mgpu,
    symv_hemv_mgpu_async,
)
from .offset import OffsetRequest, effective_dims, gemv_offset, symv_hemv_offset
from .partition import GridShape, KernelConfig, TbAssignment, grid_x, tb_assignments, tb_share
from .reference import (
    dense_from_triangle,
    max_abs_error,
    naive_gemv,
    naive_symv_hemv,
    tolerance_bound,
)
from .roofline import (
    flop_count,
    intensity_asymptotic,
    intensity_exact,
    intensity_table,
    sustained_peak,
)
from .tuner import TunePoint, coarse_tune, enumerate_configs, fine_tune, predict_point, tune

__version__ = "0.1.0"

__all__ = [
    "PRECISIONS",
    "PROFILE_ENV_VAR",
    "SEGMENT_BYTES",
    "WARP_SIZE",
    "CommandQueue",
    "DeviceProfile",
    "DistributedMatrix",
    "ExecutionReport",
    "GridShape",
    "HermitianView",
    "KernelConfig",
    "KernelRequest",
    "MatrixView",
    "OffsetRequest",
    "Op",
    "Precision",
    "RoundModel",
    "TbAssignment",
    "TransactionLedger",
    "TunePoint",
    "alloc_matrix",
    "builtin_k20c_profile",
    "coarse_tune",
    "count_warp_transactions",
    "dense_from_triangle",
    "distribute",
    "effective_dims",
    "enumerate_configs",
    "fine_tune",
    "flop_count",
    "gather",
    "gemv",
    "gemv_mgpu",
    "gemv_mgpu_async",
    "gemv_offset",
    "grid_x",
    "hemv",
    "ideal_segments",
    "intensity_asymptotic",
    "intensity_exact",
    "intensity_table",
    "ledger_for_request",
    "load_device_profile",
    "make_padded_view",
    "max_abs_error",
    "naive_gemv",
    "naive_symv_hemv",
    "precision",
    "predict_point",
    "predict_time",
    "round_model",
    "run_diag_block",
    "run_gemv_n",
    "run_gemv_t",
    "run_scal",
    "run_symv_offdiag",
    "sustained_peak",
    "symv",
    "symv_hemv",
    "symv_hemv_mgpu",
    "symv_hemv_mgpu_async",
    "symv_hemv_offset",
    "tb_assignments",
    "tb_share",
    "tolerance_bound",
    "tune",
]
