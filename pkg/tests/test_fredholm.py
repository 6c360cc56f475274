import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgekernel.finite_kernels import Ensemble, EnsembleSpec, FiniteKernel
from edgekernel.fredholm import (
    DetConfig,
    DeterminantError,
    EpsMode,
    RhoMode,
    cdf_table,
    det2_identity_residual,
    discretize,
    gap_matrix,
    gap_scalar,
    resolve_kind,
)
from edgekernel.kernels import MatrixKernel
from edgekernel.limit_kernels import AiryKernel, GOELimitKernel, GSELimitKernel
from edgekernel.numerics import QuadratureGrid
from edgekernel.oracles import painleve_f1, painleve_f2

AIRY, GSE_K, GOE_K = AiryKernel(), GSELimitKernel(), GOELimitKernel()
FIXED = dict(adaptive=False)


class ZeroKernel(MatrixKernel):
    name = "zero"

    def blocks(self, x, y):
        z = np.zeros((len(x), len(y)))
        return z, z, z, z

    def truncation(self, s, tol):
        return s + 8.0


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(m=7), dict(m=513), dict(tol=0.0), dict(rho_mode="cubic")])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            DetConfig(**kw)

    def test_coerces_modes(self):
        cfg = DetConfig(rho_mode="exp", eps_mode="naive")
        assert cfg.rho_mode is RhoMode.EXP and cfg.eps_mode is EpsMode.NAIVE


class TestScalar:
    def test_zero_kernel(self):
        res = gap_scalar(lambda x, y: np.zeros((len(x), len(y))), 0.0)
        assert res.det_value == 1.0 and res.sqrt_value == 1.0

    def test_empty_gap_limit(self):
        assert gap_scalar(AIRY, 8.0).det_value == pytest.approx(1.0, abs=1e-10)

    def test_painleve(self):
        assert abs(gap_scalar(AIRY, -1.0).det_value - painleve_f2(-1.0)) < 1e-7

    def test_sqrt_mirrors_det(self):
        res = gap_scalar(AIRY, -2.0)
        assert res.sqrt_value == res.det_value and res.value == res.det_value

    def test_negative_determinant_is_an_error(self):
        with pytest.raises(DeterminantError):
            gap_scalar(lambda x, y: np.full((len(x), len(y)), 3.0), 0.0, DetConfig(T=1.0))

    def test_determinant_above_one_is_an_error(self):
        with pytest.raises(DeterminantError):
            gap_scalar(lambda x, y: np.full((len(x), len(y)), -1.0), 0.0, DetConfig(T=1.0))

    def test_result_fields(self):
        res = gap_scalar(AIRY, 0.0, DetConfig(m=32))
        assert res.m_used >= 32 and res.T_used == 16.0 and res.err_est >= 0 and res.converged


class TestMatrix:
    def test_zero_kernel(self):
        assert gap_matrix(ZeroKernel(), 0.0).sqrt_value == 1.0

    def test_gse_empty_gap(self):
        assert gap_matrix(GSE_K, 9.0).sqrt_value == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("kernel", [GSE_K, GOE_K])
    def test_monotone(self, kernel):
        vals = [gap_matrix(kernel, s).sqrt_value for s in (-1.0, 0.0, 1.0)]
        assert vals[0] < vals[1] < vals[2]

    def test_goe_painleve(self):
        assert abs(gap_matrix(GOE_K, -1.0).sqrt_value - painleve_f1(-1.0)) < 1e-8

    @pytest.mark.parametrize("t", [-1.0, 0.0, 0.7])
    def test_single_gse_eigenvalue(self, t):
        # N = 3 carries one eigenvalue with density exp(-x^2)/sqrt(pi)
        res = gap_matrix(FiniteKernel(EnsembleSpec(Ensemble.GSE, 3), scaled=False), t)
        assert res.sqrt_value == pytest.approx(0.5 * (1 + math.erf(t)), abs=1e-8)

    def test_no_gse_eigenvalue(self):
        res = gap_matrix(FiniteKernel(EnsembleSpec(Ensemble.GSE, 1), scaled=False), 0.0)
        assert res.sqrt_value == pytest.approx(1.0, abs=1e-12)

    def test_discretization_shape(self):
        grid = QuadratureGrid.gauss(12, 0.0, 10.0)
        assert discretize(GOE_K, grid).shape == (24, 24)

    def test_spectral_eps_beats_naive(self):
        exact = painleve_f1(-2.0)
        cfg = dict(m=64, adaptive=False)
        spectral = gap_matrix(GOE_K, -2.0, DetConfig(**cfg)).sqrt_value
        naive = gap_matrix(GOE_K, -2.0, DetConfig(eps_mode="naive", **cfg)).sqrt_value
        assert abs(spectral - exact) < 1e-10
        assert abs(naive - exact) > 1e3 * abs(spectral - exact)

    def test_eps_operator_antisymmetric_in_the_limit(self):
        # the spectral eps discretization is skew under the quadrature inner product
        from edgekernel.fredholm import _eps_matrix
        grid = QuadratureGrid.gauss(48, -2.0, 6.0)
        E = _eps_matrix(grid, EpsMode.SPECTRAL)
        f = np.sqrt(grid.weights) * np.exp(-grid.nodes ** 2)
        g = np.sqrt(grid.weights) * np.cos(grid.nodes)
        assert abs(f @ E @ g + g @ E @ f) < 1e-12


class TestInvariants:
    @pytest.mark.parametrize("kernel,fn", [(GSE_K, gap_matrix), (GOE_K, gap_matrix), (AIRY, gap_scalar)])
    @pytest.mark.parametrize("s", [-6.0, -2.0, 3.0])
    def test_quadrature_convergence(self, kernel, fn, s):
        a = fn(kernel, s, DetConfig(m=64, **FIXED)).det_value
        b = fn(kernel, s, DetConfig(m=128, **FIXED)).det_value
        assert abs(a - b) < 1e-8

    @pytest.mark.parametrize("kernel", [GSE_K, GOE_K])
    @pytest.mark.parametrize("s", [-4.0, 0.0])
    def test_truncation_convergence(self, kernel, s):
        base = gap_matrix(kernel, s)
        moved = gap_matrix(kernel, s, DetConfig(T=base.T_used + 4.0))
        assert abs(base.det_value - moved.det_value) < 1e-8

    @pytest.mark.parametrize("s", [-2.0, 0.0, 1.0])
    def test_rho_independence(self, s):
        vals = [gap_matrix(GOE_K, s, DetConfig(rho_mode=mode)).det_value for mode in RhoMode]
        assert max(vals) - min(vals) < 1e-6

    def test_rho_similarity_discrete(self):
        grid = QuadratureGrid.gauss(24, -1.0, 10.0)
        base = np.linalg.det(np.eye(48) - discretize(GOE_K, grid))
        for mode in (RhoMode.EXP, RhoMode.POLY):
            conj = np.linalg.det(np.eye(48) - discretize(GOE_K, grid, mode))
            assert conj == pytest.approx(base, rel=1e-12)

    @given(st.floats(-5.0, 4.0))
    @settings(max_examples=8, deadline=None)
    def test_bounds(self, s):
        for kernel in (GSE_K, GOE_K):
            d = gap_matrix(kernel, s).det_value
            assert -1e-9 <= d <= 1 + 1e-9

    def test_det2_identity(self):
        grid = QuadratureGrid.gauss(32, -1.0, 10.0)
        direct, via_det2 = det2_identity_residual(discretize(GOE_K, grid))
        assert abs(direct - via_det2) < 1e-9


class TestTable:
    def test_far_right(self):
        table = cdf_table("GSE_LIMIT", [9.0, 10.0])
        assert table.ok
        assert np.allclose(table.columns()["F"], 1.0, atol=1e-9)

    def test_single_point_matches_direct_call(self):
        table = cdf_table("GOE_LIMIT", [-0.5])
        assert table.rows[0] == gap_matrix(GOE_K, -0.5)

    def test_goe_nondecreasing(self):
        F = cdf_table("GOE_LIMIT", [-4.0, -2.0, 0.0, 2.0]).columns()["F"]
        assert all(b >= a for a, b in zip(F, F[1:]))

    def test_airy_rows_scalar(self):
        table = cdf_table("AIRY_F2", [-1.0])
        assert table.kind == "AIRY_F2"
        assert abs(table.rows[0].det_value - painleve_f2(-1.0)) < 1e-7

    def test_threads_do_not_change_order(self, monkeypatch):
        grid = [-3.0, -1.0, 0.5, 2.0]
        serial = cdf_table("GSE_LIMIT", grid).columns()
        monkeypatch.setenv("EDGEKERNEL_THREADS", "4")
        assert cdf_table("GSE_LIMIT", grid).columns() == serial

    def test_row_failure_recorded(self):
        class Bad(ZeroKernel):
            name = "bad"

            def blocks(self, x, y):
                k = np.full((len(x), len(y)), 1.0)
                return k, 0 * k, 0 * k, 0 * k

        table = cdf_table(Bad(), [0.0, 1.0])
        assert not table.ok and set(table.failures) == {0.0, 1.0}
        assert table.rows == []

    @pytest.mark.parametrize("grid", [[1.0, 0.0], [0.0, math.inf]])
    def test_rejects_bad_grid(self, grid):
        with pytest.raises(ValueError):
            cdf_table("GOE_LIMIT", grid)

    def test_resolve(self):
        assert resolve_kind("gue")[0] == "AIRY_F2"
        assert resolve_kind(EnsembleSpec("GSE", 5))[0] == "FINITE(GSE,5)"
        with pytest.raises(ValueError):
            resolve_kind("CUE")
