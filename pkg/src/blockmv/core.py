"""Precision model, column-major matrix containers, and device profiles.

Everything else in the package consumes these types. Matrices are stored
column-major in one flat buffer per allocation; submatrix views are
(offset, leading-dimension) descriptors into that buffer and never copy.
Complex elements are interleaved (re, im) pairs and ``element_bytes``
counts the pair.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

WARP_SIZE = 32

_DTYPES = {
    "s": np.dtype(np.float32),
    "d": np.dtype(np.float64),
    "c": np.dtype(np.complex64),
    "z": np.dtype(np.complex128),
}


@dataclass(frozen=True)
class Precision:
    """One of the four standard BLAS precisions (s, d, c, z)."""

    tag: str
    element_bytes: int
    flops_per_mul: int
    flops_per_add: int

    @property
    def is_complex(self) -> bool:
        return self.tag in ("c", "z")

    @property
    def dtype(self) -> np.dtype:
        return _DTYPES[self.tag]

    @property
    def eps(self) -> float:
        # machine epsilon of the real component type
        return float(np.finfo(np.float32 if self.tag in ("s", "c") else np.float64).eps)


PRECISIONS = {
    "s": Precision("s", 4, 1, 1),
    "d": Precision("d", 8, 1, 1),
    "c": Precision("c", 8, 6, 2),
    "z": Precision("z", 16, 6, 2),
}


def precision(tag: str) -> Precision:
    """Look up a precision by its one-letter tag (case-insensitive)."""
    try:
        return PRECISIONS[tag.lower()]
    except KeyError:
        raise ValueError(f"unknown precision tag {tag!r}; expected one of s, d, c, z")


@dataclass
class MatrixView:
    """A column-major m x n window into a flat parent allocation.

    Element (i, j) lives at linear index
    ``(col_offset + j) * ld + row_offset + i`` of ``data``.
    ``data`` may be None for geometry-only views used by the analytic
    cost model, which never dereferences elements.
    """

    data: np.ndarray | None
    rows: int
    cols: int
    ld: int
    precision: Precision
    row_offset: int = 0
    col_offset: int = 0

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError(f"matrix dimensions must be positive, got {self.rows}x{self.cols}")
        if self.ld < self.rows + self.row_offset:
            raise ValueError(
                f"leading dimension {self.ld} too small for {self.rows} rows at offset {self.row_offset}"
            )
        if self.data is not None:
            needed = (self.col_offset + self.cols) * self.ld
            if self.data.ndim != 1 or self.data.size < needed:
                raise ValueError("parent buffer too small for the addressable region")
            if self.data.dtype != self.precision.dtype:
                raise ValueError(
                    f"buffer dtype {self.data.dtype} does not match precision {self.precision.tag}"
                )

    def linear_index(self, i: int, j: int) -> int:
        return (self.col_offset + j) * self.ld + self.row_offset + i

    def decode_linear(self, index: int) -> tuple[int, int]:
        """Inverse of linear_index for addresses inside the window."""
        j, rem = divmod(index, self.ld)
        return rem - self.row_offset, j - self.col_offset

    def array(self) -> np.ndarray:
        """Writable 2-D (rows x cols) view of the window, no copy."""
        if self.data is None:
            raise ValueError("geometry-only view has no element buffer")
        itemsize = self.data.itemsize
        start = self.linear_index(0, 0)
        return np.lib.stride_tricks.as_strided(
            self.data[start:],
            shape=(self.rows, self.cols),
            strides=(itemsize, self.ld * itemsize),
        )

    def submatrix(self, row_off: int, col_off: int, m: int, n: int) -> "MatrixView":
        """Descriptor for an m x n window shifted by (row_off, col_off)."""
        if row_off < 0 or col_off < 0 or row_off + m > self.rows or col_off + n > self.cols:
            raise ValueError("submatrix exceeds parent window")
        return MatrixView(
            data=self.data,
            rows=m,
            cols=n,
            ld=self.ld,
            precision=self.precision,
            row_offset=self.row_offset + row_off,
            col_offset=self.col_offset + col_off,
        )


def alloc_matrix(m: int, n: int, prec: Precision, ld: int | None = None) -> MatrixView:
    """Fresh zero-initialized column-major allocation."""
    if m <= 0 or n <= 0:
        raise ValueError(f"matrix dimensions must be positive, got {m}x{n}")
    if ld is None:
        ld = m
    buf = np.zeros(ld * n, dtype=prec.dtype)
    return MatrixView(data=buf, rows=m, cols=n, ld=ld, precision=prec)


def make_padded_view(m: int, n: int, prec: Precision, pad_to: int) -> MatrixView:
    """Allocation whose leading dimension is the smallest multiple of pad_to >= m."""
    if pad_to <= 0:
        raise ValueError(f"pad_to must be positive, got {pad_to}")
    if m <= 0 or n <= 0:
        raise ValueError(f"matrix dimensions must be positive, got {m}x{n}")
    ld = -(-m // pad_to) * pad_to
    return alloc_matrix(m, n, prec, ld=ld)


@dataclass
class HermitianView:
    """Square matrix of which only one triangle is meaningfully stored.

    With ``guard`` enabled, kernels record any read touching the opposite
    off-diagonal triangle into ``violations`` instead of silently using it.
    """

    base: MatrixView
    uplo: str  # 'l' or 'u'
    guard: bool = False
    violations: list = field(default_factory=list)

    def __post_init__(self):
        if self.base.rows != self.base.cols:
            raise ValueError("hermitian view requires a square window")
        self.uplo = self.uplo.lower()
        if self.uplo not in ("l", "u"):
            raise ValueError(f"uplo must be 'l' or 'u', got {self.uplo!r}")

    @property
    def dim(self) -> int:
        return self.base.rows

    def record_read(self, r0: int, r1: int, c0: int, c1: int, diag_block: bool = False):
        """Note a rectangular read; flags it if it strays into the wrong triangle."""
        if not self.guard or diag_block:
            return
        if self.uplo == "l":
            bad = c1 - 1 > r0  # rectangle reaches strictly above the diagonal
        else:
            bad = r1 - 1 > c0
        if bad:
            self.violations.append((r0, r1, c0, c1))


@dataclass(frozen=True)
class DeviceProfile:
    """Simulated machine: SM count, transaction granularity, sustained bandwidths."""

    name: str
    sm_count: int
    segment_bytes: int
    bandwidth_copy: float  # GB/s
    bandwidth_scale: float
    bandwidth_add: float
    bandwidth_triad: float
    b_max_theoretical: float | None = None

    def __post_init__(self):
        for bw in (self.bandwidth_copy, self.bandwidth_scale, self.bandwidth_add, self.bandwidth_triad):
            if bw <= 0:
                raise ValueError("bandwidths must be positive")
        if self.b_max_theoretical is not None and self.b_max_sustained > self.b_max_theoretical:
            raise ValueError("sustained bandwidth cannot exceed the theoretical peak")
        if self.sm_count < 1 or self.segment_bytes < 1:
            raise ValueError("sm_count and segment_bytes must be positive")

    @property
    def b_max_sustained(self) -> float:
        """Best sustained streaming bandwidth in GB/s."""
        return max(
            self.bandwidth_copy, self.bandwidth_scale, self.bandwidth_add, self.bandwidth_triad
        )


def builtin_k20c_profile(ecc: bool = False) -> DeviceProfile:
    """Tesla K20c: 13 SMs, 320-bit bus at 2.6 GHz (208 GB/s theoretical).

    Sustained bandwidths are measured streaming figures; ECC-off is the
    default as all reference numbers assume it.
    """
    if ecc:
        return DeviceProfile("k20c-ecc-on", 13, 128, 148.99, 150.64, 149.99, 150.09, 208.0)
    return DeviceProfile("k20c", 13, 128, 172.44, 172.33, 175.24, 175.24, 208.0)


_PROFILE_KEYS = {
    "sm_count": int,
    "segment_bytes": int,
    "bw_copy": float,
    "bw_scale": float,
    "bw_add": float,
    "bw_triad": float,
    "b_max": float,
}

PROFILE_ENV_VAR = "BLOCKMV_PROFILE"


def load_device_profile(path: str) -> DeviceProfile:
    """Read a profile from a flat key=value text file.

    Keys: sm_count, segment_bytes, bw_copy, bw_scale, bw_add, bw_triad,
    b_max (optional). Blank lines and '#' comments are ignored.
    """
    values: dict = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in _PROFILE_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _PROFILE_KEYS[key](raw.strip())
    missing = [k for k in _PROFILE_KEYS if k not in values and k != "b_max"]
    if missing:
        raise ValueError(f"{path}: missing keys: {', '.join(missing)}")
    return DeviceProfile(
        name=os.path.splitext(os.path.basename(path))[0],
        sm_count=values["sm_count"],
        segment_bytes=values["segment_bytes"],
        bandwidth_copy=values["bw_copy"],
        bandwidth_scale=values["bw_scale"],
        bandwidth_add=values["bw_add"],
        bandwidth_triad=values["bw_triad"],
        b_max_theoretical=values.get("b_max"),
    )
