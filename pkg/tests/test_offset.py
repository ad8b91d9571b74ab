import numpy as np
import pytest

from blockmv.core import HermitianView, make_padded_view, precision
from blockmv.costmodel import ledger_for_request
from blockmv.kernels import gemv, symv_hemv
from blockmv.offset import OffsetRequest, effective_dims, gemv_offset, symv_hemv_offset
from blockmv.partition import KernelConfig
from blockmv.reference import max_abs_error, tolerance_bound

from test_kernels import random_matrix, random_vec


class TestEffectiveDims:
    def test_pads_up_to_block_multiple(self):
        assert effective_dims(1000, 1000, 100, 70, 32) == (128, 96)

    def test_caps_at_parent(self):
        assert effective_dims(100, 100, 97, 99, 32) == (100, 100)

    def test_exact_multiples_unchanged(self):
        assert effective_dims(512, 512, 64, 128, 32) == (64, 128)

    def test_rejects_oversized(self):
        with pytest.raises(ValueError):
            effective_dims(50, 50, 51, 10, 32)


class TestOffsetRequest:
    def test_validation(self):
        rng = np.random.default_rng(0)
        parent = random_matrix(rng, 64, 64, "d")
        with pytest.raises(ValueError):
            OffsetRequest(parent=parent, row_off=-1, col_off=0, sub_m=8, sub_n=8)
        with pytest.raises(ValueError):
            OffsetRequest(parent=parent, row_off=60, col_off=0, sub_m=8, sub_n=8)


class TestGemvOffsetNumerics:
    @pytest.mark.parametrize("tag", "sdcz")
    @pytest.mark.parametrize("trans", "ntc")
    def test_matches_standard_kernel_on_submatrix(self, tag, trans):
        rng = np.random.default_rng(41)
        cfg = KernelConfig(32, 2, coop_tbs=2)
        prec = precision(tag)
        for _ in range(8):
            pm, pn = int(rng.integers(40, 200)), int(rng.integers(40, 200))
            parent = random_matrix(rng, pm, pn, tag)
            sub_m = int(rng.integers(1, pm))
            sub_n = int(rng.integers(1, pn))
            ro = int(rng.integers(0, pm - sub_m + 1))
            co = int(rng.integers(0, pn - sub_n + 1))
            xl, yl = (sub_n, sub_m) if trans == "n" else (sub_m, sub_n)
            x, y = random_vec(rng, xl, tag), random_vec(rng, yl, tag)
            req = OffsetRequest(parent=parent, row_off=ro, col_off=co, sub_m=sub_m, sub_n=sub_n)
            rep = gemv_offset(trans, 0.9, req, x, -1.2, y, cfg)
            std = gemv(trans, 0.9, parent.submatrix(ro, co, sub_m, sub_n), x, -1.2, y, cfg)
            sub_arr = parent.submatrix(ro, co, sub_m, sub_n).array()
            bound = tolerance_bound(np.abs(sub_arr), x, prec) + 50 * prec.eps * (
                np.max(np.abs(y)) + 1
            )
            assert max_abs_error(rep.y_out, std.y_out) <= bound

    def test_scal_runs_once(self):
        rng = np.random.default_rng(42)
        parent = random_matrix(rng, 100, 100, "d")
        req = OffsetRequest(parent=parent, row_off=5, col_off=9, sub_m=40, sub_n=40)
        x, y = random_vec(rng, 40, "d"), random_vec(rng, 40, "d")
        rep = gemv_offset("n", 1.0, req, x, 0.0, y, KernelConfig(32, 2))
        assert rep.scal_invocations == 1


class TestOffsetAlignment:
    def test_offset_kernel_reads_aligned_standard_does_not(self):
        rng = np.random.default_rng(43)
        nb = 32
        n = 256
        parent = random_matrix(rng, 512, 512, "s")
        for off in (1, 5, 17, 33):
            x, y = random_vec(rng, n, "s"), random_vec(rng, n, "s")
            req = OffsetRequest(parent=parent, row_off=off, col_off=0, sub_m=n, sub_n=n)
            rep = gemv_offset("n", 1.0, req, x, 0.0, y, KernelConfig(nb, 2))
            std = gemv("n", 1.0, parent.submatrix(off, 0, n, n), x, 0.0, y, KernelConfig(nb, 2))
            # the aligned frame covers n + nb rows' worth of full columns at most
            start = off - off % nb
            frame_rows = min(512 - start, -(-(off - start + n) // nb) * nb)
            ideal_frame = frame_rows * n * 4 // 128
            assert rep.matrix_transactions == ideal_frame  # zero inflation
            assert std.matrix_transactions > ideal_frame  # misaligned reads inflate

    def test_aligned_offset_matches_standard_traffic(self):
        rng = np.random.default_rng(44)
        parent = random_matrix(rng, 512, 512, "s")
        n = 128
        x, y = random_vec(rng, n, "s"), random_vec(rng, n, "s")
        req = OffsetRequest(parent=parent, row_off=64, col_off=64, sub_m=n, sub_n=n)
        rep = gemv_offset("n", 1.0, req, x, 0.0, y, KernelConfig(32, 2))
        std = gemv("n", 1.0, parent.submatrix(64, 64, n, n), x, 0.0, y, KernelConfig(32, 2))
        assert rep.matrix_transactions == std.matrix_transactions

    def test_extra_read_bound(self):
        # padding measured from the aligned start stays below one block per dimension
        rng = np.random.default_rng(45)
        nb = 32
        parent = random_matrix(rng, 500, 500, "d")
        for ro, co, sm, sn in [(1, 0, 100, 100), (31, 17, 65, 33), (47, 95, 7, 200)]:
            x, y = random_vec(rng, sn, "d"), random_vec(rng, sm, "d")
            req = OffsetRequest(parent=parent, row_off=ro, col_off=co, sub_m=sm, sub_n=sn)
            rep = gemv_offset("n", 1.0, req, x, 0.0, y, KernelConfig(nb, 2))
            read_elems = (rep.bytes_read - sn * 8 - sm * 8) // 8  # subtract vector reads
            assert read_elems < (sm + nb) * (sn + nb)

    def test_unaligned_parent_ld_warns(self):
        prec = precision("d")
        from blockmv.core import alloc_matrix

        parent = alloc_matrix(100, 100, prec, ld=101)  # 101 * 8 not segment-aligned
        req = OffsetRequest(parent=parent, row_off=3, col_off=0, sub_m=32, sub_n=32)
        x = np.zeros(32)
        with pytest.warns(UserWarning, match="not segment-aligned"):
            gemv_offset("n", 1.0, req, x, 0.0, x, KernelConfig(32, 2))


class TestSymvHemvOffset:
    @pytest.mark.parametrize("tag", "sdcz")
    @pytest.mark.parametrize("uplo", "lu")
    def test_matches_standard_kernel_on_submatrix(self, tag, uplo):
        rng = np.random.default_rng(46)
        cfg = KernelConfig(32, 2)
        prec = precision(tag)
        for _ in range(6):
            pd = int(rng.integers(64, 300))
            parent_mat = random_matrix(rng, pd, pd, tag)
            sub_d = int(rng.integers(1, pd))
            off = int(rng.integers(0, pd - sub_d + 1))
            parent = HermitianView(base=parent_mat, uplo=uplo)
            x, y = random_vec(rng, sub_d, tag), random_vec(rng, sub_d, tag)
            rep = symv_hemv_offset(uplo, 0.8, parent, off, sub_d, x, -0.4, y, cfg)
            sub_hv = HermitianView(base=parent_mat.submatrix(off, off, sub_d, sub_d), uplo=uplo)
            std = symv_hemv(uplo, 0.8, sub_hv, x, -0.4, y, cfg)
            dense = np.abs(sub_hv.base.array())
            bound = tolerance_bound(dense + dense.T, x, prec) + 50 * prec.eps * (
                np.max(np.abs(y)) + 1
            )
            assert max_abs_error(rep.y_out, std.y_out) <= bound

    def test_ideal_flop_count(self):
        rng = np.random.default_rng(47)
        parent_mat = random_matrix(rng, 256, 256, "d")
        parent = HermitianView(base=parent_mat, uplo="l")
        sub_d = 100
        x, y = random_vec(rng, sub_d, "d"), random_vec(rng, sub_d, "d")
        rep = symv_hemv_offset("l", 1.0, parent, 13, sub_d, x, 1.0, y, KernelConfig(32, 2))
        assert rep.flops == 2 * sub_d * sub_d + 2 * sub_d

    def test_no_scal_kernel(self):
        rng = np.random.default_rng(48)
        parent_mat = random_matrix(rng, 128, 128, "d")
        parent = HermitianView(base=parent_mat, uplo="l")
        x, y = random_vec(rng, 50, "d"), random_vec(rng, 50, "d")
        rep = symv_hemv_offset("l", 1.0, parent, 7, 50, x, 2.0, y, KernelConfig(32, 2))
        assert rep.scal_invocations == 0

    def test_beta_zero_kills_nan(self):
        rng = np.random.default_rng(49)
        parent_mat = random_matrix(rng, 128, 128, "d")
        parent = HermitianView(base=parent_mat, uplo="u")
        x = random_vec(rng, 40, "d")
        y = np.full(40, np.nan)
        rep = symv_hemv_offset("u", 1.0, parent, 3, 40, x, 0.0, y, KernelConfig(32, 2))
        assert np.all(np.isfinite(rep.y_out))

    def test_uplo_mismatch_rejected(self):
        rng = np.random.default_rng(50)
        parent = HermitianView(base=random_matrix(rng, 64, 64, "d"), uplo="l")
        x = np.zeros(32)
        with pytest.raises(ValueError):
            symv_hemv_offset("u", 1.0, parent, 0, 32, x, 0.0, x, KernelConfig(32, 2))
