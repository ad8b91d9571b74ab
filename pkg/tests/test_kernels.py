import numpy as np
import pytest

from blockmv.core import HermitianView, make_padded_view, precision
from blockmv.kernels import gemv, hemv, run_scal, symv, symv_hemv
from blockmv.partition import KernelConfig
from blockmv.reference import (
    dense_from_triangle,
    max_abs_error,
    naive_gemv,
    naive_symv_hemv,
    tolerance_bound,
)


def random_matrix(rng, m, n, tag):
    prec = precision(tag)
    v = make_padded_view(m, n, prec, pad_to=32)
    arr = v.array()
    if prec.is_complex:
        arr[:, :] = rng.uniform(-1, 1, (m, n)) + 1j * rng.uniform(-1, 1, (m, n))
    else:
        arr[:, :] = rng.uniform(-1, 1, (m, n))
    return v


def random_vec(rng, n, tag):
    prec = precision(tag)
    if prec.is_complex:
        return (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)).astype(prec.dtype)
    return rng.uniform(-1, 1, n).astype(prec.dtype)


def check_close(rep, want, a_arr, x, tag):
    prec = precision(tag)
    bound = tolerance_bound(np.abs(a_arr), x, prec) + 50 * prec.eps * np.max(
        np.abs(want) if len(want) else [0.0]
    )
    assert max_abs_error(rep.y_out, want) <= bound


class TestGemv:
    @pytest.mark.parametrize("tag", "sdcz")
    @pytest.mark.parametrize("trans", "ntc")
    def test_matches_oracle(self, tag, trans):
        rng = np.random.default_rng(11)
        cfg = KernelConfig(32, 4, coop_tbs=2)
        for m, n in [(1, 1), (7, 5), (32, 32), (65, 33), (100, 300)]:
            a = random_matrix(rng, m, n, tag)
            xl, yl = (n, m) if trans == "n" else (m, n)
            x, y = random_vec(rng, xl, tag), random_vec(rng, yl, tag)
            alpha, beta = 0.7, -0.3
            rep = gemv(trans, alpha, a, x, beta, y, cfg)
            want = naive_gemv(trans, alpha, a, x, beta, y)
            check_close(rep, want, a.array(), x, tag)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        a = random_matrix(rng, 97, 61, "s")
        x, y = random_vec(rng, 61, "s"), random_vec(rng, 97, "s")
        cfg = KernelConfig(32, 2, coop_tbs=4)
        r1 = gemv("n", 1.3, a, x, 0.4, y, cfg)
        r2 = gemv("n", 1.3, a, x, 0.4, y, cfg)
        assert np.array_equal(r1.y_out, r2.y_out)  # bit-identical, not just close
        assert r1.transactions == r2.transactions

    def test_always_runs_scal(self):
        rng = np.random.default_rng(5)
        a = random_matrix(rng, 64, 64, "d")
        x, y = random_vec(rng, 64, "d"), random_vec(rng, 64, "d")
        cfg = KernelConfig(32, 2)
        for beta in (0.0, 1.0, 2.5):
            rep = gemv("n", 1.0, a, x, beta, y, cfg)
            assert rep.scal_invocations == 1

    def test_beta_zero_kills_nan(self):
        rng = np.random.default_rng(6)
        a = random_matrix(rng, 32, 32, "d")
        x = random_vec(rng, 32, "d")
        y = np.full(32, np.nan)
        cfg = KernelConfig(32, 1)
        rep = gemv("n", 1.0, a, x, 0.0, y, cfg)
        assert np.all(np.isfinite(rep.y_out))
        want = naive_gemv("n", 1.0, a, x, 0.0, np.zeros(32))
        check_close(rep, want, a.array(), x, "d")

    def test_quick_return(self):
        rng = np.random.default_rng(7)
        a = random_matrix(rng, 32, 32, "d")
        x, y = random_vec(rng, 32, "d"), random_vec(rng, 32, "d")
        rep = gemv("n", 0.0, a, x, 1.0, y, KernelConfig(32, 1))
        assert np.array_equal(rep.y_out, y)
        assert rep.transactions == 0 and rep.tb_count == 0 and rep.flops == 0

    def test_alpha_zero_only_scales(self):
        rng = np.random.default_rng(8)
        a = random_matrix(rng, 32, 32, "d")
        x, y = random_vec(rng, 32, "d"), random_vec(rng, 32, "d")
        rep = gemv("n", 0.0, a, x, 0.5, y, KernelConfig(32, 1))
        assert np.allclose(rep.y_out, 0.5 * y)
        assert rep.matrix_transactions == 0

    def test_flop_count_real(self):
        rng = np.random.default_rng(9)
        n = 96
        a = random_matrix(rng, n, n, "d")
        x, y = random_vec(rng, n, "d"), random_vec(rng, n, "d")
        rep = gemv("n", 1.0, a, x, 1.0, y, KernelConfig(32, 2))
        # merged product + scaling pipeline: 2n^2 + 2n real flops
        assert rep.flops == 2 * n * n + 2 * n

    def test_flop_count_complex(self):
        rng = np.random.default_rng(10)
        n = 96
        a = random_matrix(rng, n, n, "z")
        x, y = random_vec(rng, n, "z"), random_vec(rng, n, "z")
        rep = gemv("n", 1.0, a, x, 1.0, y, KernelConfig(32, 2))
        assert rep.flops == 8 * n * n + 12 * n

    def test_atomic_adds_full_grid(self):
        rng = np.random.default_rng(12)
        m = n = 256
        a = random_matrix(rng, m, n, "s")
        x, y = random_vec(rng, n, "s"), random_vec(rng, m, "s")
        for coop in (1, 2, 4):
            rep = gemv("n", 1.0, a, x, 1.0, y, KernelConfig(32, 2, coop_tbs=coop))
            x_count = -(-m // 32)
            assert rep.atomic_adds == x_count * coop
            assert rep.tb_count >= x_count * coop  # plus the scal launch

    def test_conjugate_transpose_real_falls_back(self):
        rng = np.random.default_rng(13)
        a = random_matrix(rng, 40, 30, "d")
        x, y = random_vec(rng, 40, "d"), random_vec(rng, 30, "d")
        cfg = KernelConfig(32, 2)
        rc = gemv("c", 1.0, a, x, 0.0, y, cfg)
        rt = gemv("t", 1.0, a, x, 0.0, y, cfg)
        assert np.array_equal(rc.y_out, rt.y_out)

    def test_matrix_read_exactly_once(self):
        rng = np.random.default_rng(14)
        m, n = 128, 96
        a = random_matrix(rng, m, n, "d")
        x, y = random_vec(rng, n, "d"), random_vec(rng, m, "d")
        rep = gemv("n", 1.0, a, x, 0.0, y, KernelConfig(32, 2))
        # aligned allocation: matrix traffic is the ideal segment count
        assert rep.matrix_transactions == m * n * 8 // 128


class TestScal:
    def test_beta_zero_writes_without_reading(self):
        y = np.full(64, np.inf)
        rep = run_scal(y, 0.0, precision("d"))
        assert np.array_equal(rep.y_out, np.zeros(64))
        assert rep.bytes_read == 0
        assert rep.bytes_written == 64 * 8

    def test_nonzero_beta_reads_and_writes(self):
        y = np.ones(64)
        rep = run_scal(y, 2.0, precision("d"))
        assert np.array_equal(rep.y_out, 2 * y)
        assert rep.bytes_read == 64 * 8
        assert rep.flops == 64


class TestSymvHemv:
    @pytest.mark.parametrize("tag", "sdcz")
    @pytest.mark.parametrize("uplo", "lu")
    def test_matches_oracle(self, tag, uplo):
        rng = np.random.default_rng(21)
        cfg = KernelConfig(32, 2, coop_tbs=2)
        for d in (1, 5, 32, 33, 100, 257):
            a = random_matrix(rng, d, d, tag)
            hv = HermitianView(base=a, uplo=uplo)
            x, y = random_vec(rng, d, tag), random_vec(rng, d, tag)
            rep = symv_hemv(uplo, 1.1, hv, x, -0.2, y, cfg)
            want = naive_symv_hemv(1.1, hv, x, -0.2, y)
            dense = dense_from_triangle(hv, precision(tag).is_complex)
            check_close(rep, want, dense, x, tag)

    def test_never_invokes_scal(self):
        rng = np.random.default_rng(22)
        a = random_matrix(rng, 96, 96, "d")
        hv = HermitianView(base=a, uplo="l")
        x, y = random_vec(rng, 96, "d"), random_vec(rng, 96, "d")
        for beta in (0.0, 1.0, 3.0):
            rep = symv_hemv("l", 1.0, hv, x, beta, y, KernelConfig(32, 2))
            assert rep.scal_invocations == 0

    def test_beta_zero_kills_nan(self):
        rng = np.random.default_rng(23)
        a = random_matrix(rng, 64, 64, "d")
        hv = HermitianView(base=a, uplo="u")
        x = random_vec(rng, 64, "d")
        y = np.full(64, np.nan)
        rep = symv_hemv("u", 1.0, hv, x, 0.0, y, KernelConfig(32, 2))
        assert np.all(np.isfinite(rep.y_out))

    def test_reduction_events_per_tb(self):
        rng = np.random.default_rng(24)
        d, nb = 160, 32  # 5 block columns
        a = random_matrix(rng, d, d, "d")
        hv = HermitianView(base=a, uplo="l")
        x, y = random_vec(rng, d, "d"), random_vec(rng, d, "d")
        rep = symv_hemv("l", 1.0, hv, x, 1.0, y, KernelConfig(nb, 2, coop_tbs=1))
        t = d // nb
        # off-diagonal TBs: workload blocks + one final transposed reduction each
        off_blocks = t * (t - 1) // 2
        active_tbs = t - 1  # the last block column has no off-diagonal work
        assert rep.reduction_events == off_blocks + active_tbs
        assert rep.atomic_adds == off_blocks + active_tbs

    def test_guard_clean_on_both_triangles(self):
        rng = np.random.default_rng(25)
        d = 128
        for uplo in "lu":
            a = random_matrix(rng, d, d, "d")
            hv = HermitianView(base=a, uplo=uplo, guard=True)
            x, y = random_vec(rng, d, "d"), random_vec(rng, d, "d")
            symv_hemv(uplo, 1.0, hv, x, 1.0, y, KernelConfig(32, 2, coop_tbs=3))
            assert hv.violations == []

    def test_hemv_ignores_imaginary_diagonal(self):
        rng = np.random.default_rng(26)
        d = 64
        a = random_matrix(rng, d, d, "c")
        arr = a.array()
        idx = np.arange(d)
        arr[idx, idx] = arr[idx, idx].real + 5j  # garbage imaginary parts
        hv = HermitianView(base=a, uplo="l")
        x, y = random_vec(rng, d, "c"), random_vec(rng, d, "c")
        rep = hemv("l", 1.0, hv, x, 0.0, y, KernelConfig(32, 2))
        want = naive_symv_hemv(1.0, hv, x, 0.0, y, hermitian=True)
        dense = dense_from_triangle(hv, True)
        check_close(rep, want, dense, x, "c")

    def test_symv_rejects_complex(self):
        rng = np.random.default_rng(27)
        a = random_matrix(rng, 32, 32, "c")
        hv = HermitianView(base=a, uplo="l")
        x = random_vec(rng, 32, "c")
        with pytest.raises(ValueError):
            symv("l", 1.0, hv, x, 0.0, x, KernelConfig(32, 2))

    def test_hemv_rejects_real(self):
        rng = np.random.default_rng(28)
        a = random_matrix(rng, 32, 32, "d")
        hv = HermitianView(base=a, uplo="l")
        x = random_vec(rng, 32, "d")
        with pytest.raises(ValueError):
            hemv("l", 1.0, hv, x, 0.0, x, KernelConfig(32, 2))

    def test_uplo_mismatch_rejected(self):
        rng = np.random.default_rng(29)
        a = random_matrix(rng, 32, 32, "d")
        hv = HermitianView(base=a, uplo="l")
        x = random_vec(rng, 32, "d")
        with pytest.raises(ValueError):
            symv_hemv("u", 1.0, hv, x, 0.0, x, KernelConfig(32, 2))

    def test_flop_count_matches_gemv(self):
        rng = np.random.default_rng(30)
        n = 128
        a = random_matrix(rng, n, n, "d")
        hv = HermitianView(base=a, uplo="l")
        x, y = random_vec(rng, n, "d"), random_vec(rng, n, "d")
        rep = symv_hemv("l", 1.0, hv, x, 1.0, y, KernelConfig(32, 2))
        assert rep.flops == 2 * n * n + 2 * n
