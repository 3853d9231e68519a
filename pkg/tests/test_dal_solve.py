"""Outer loop behavior: multiplier updates, full solves, variant agreement."""

import numpy as np
import pytest

from dalsparse import (
    NumericError,
    ProblemInstance,
    SolverConfig,
    outer_update,
    primal_objective,
    project_linf,
    solve,
)
from oracles import cd_lasso


def gaussian_problem(rng, m=32, n=128, lam=0.025):
    A = rng.standard_normal((m, n)) / np.sqrt(2 * n)
    w0 = np.zeros(n)
    support = rng.choice(n, size=max(1, n // 25), replace=False)
    w0[support] = rng.choice([-1.0, 1.0], size=support.size)
    b = A @ w0 + rng.standard_normal(m) * 1e-2
    return ProblemInstance(design=A, observations=b, lam=lam)


class TestOuterUpdate:
    def test_zero_alpha_thresholds_w(self):
        p = ProblemInstance(design=np.eye(3), observations=np.zeros(3), lam=1.0)
        w = np.array([0.5, -2.0, 1.5])
        out = outer_update(w, np.zeros(3), 1.0, p)
        np.testing.assert_allclose(out, [0.0, -1.0, 0.5])
        below = outer_update(np.array([0.5, -0.5, 0.2]), np.zeros(3), 1.0, p)
        assert np.count_nonzero(below) == 0

    def test_1d_fixed_point_at_optimum(self):
        # at the optimum A^T alpha* = 1 = lam * sign(w*), so for any eta
        # ST_{eta}(1.25 + eta) returns exactly 1.25
        p = ProblemInstance(design=[[2.0]], observations=[3.0], lam=1.0)
        for eta in (0.5, 1.0, 7.0, 1e4):
            out = outer_update(np.array([1.25]), np.array([0.5]), eta, p)
            assert out[0] == pytest.approx(1.25, rel=1e-12)

    def test_three_forms_identity(self):
        rng = np.random.default_rng(20)
        for _ in range(30):
            m, n = 6, 15
            A = rng.standard_normal((m, n))
            p = ProblemInstance(design=A, observations=rng.standard_normal(m),
                                lam=rng.uniform(0.05, 1.0))
            w = rng.standard_normal(n)
            alpha = rng.standard_normal(m)
            eta = rng.uniform(0.1, 50)
            ata = A.T @ alpha
            via_st = outer_update(w, alpha, eta, p)
            via_proj = w + eta * (ata - project_linf(ata + w / eta, p.lam))
            scale = max(1.0, np.abs(via_st).max())
            assert np.abs(via_st - via_proj).max() <= 1e-12 * scale

    def test_thresholded_coordinates_are_exact_zeros(self):
        rng = np.random.default_rng(21)
        p = gaussian_problem(rng)
        w = rng.standard_normal(p.n)
        alpha = rng.standard_normal(p.m) * 0.01
        eta = 3.0
        out = outer_update(w, alpha, eta, p)
        mask = np.abs(w + eta * (p.design.T @ alpha)) <= p.lam * eta
        assert mask.any()
        assert np.all(out[mask] == 0.0)


class TestSolve:
    def test_lambda_dominated_single_outer_iteration(self):
        rng = np.random.default_rng(22)
        A = rng.standard_normal((6, 20)) * 0.1
        b = rng.standard_normal(6)
        lam = float(np.abs(A.T @ b).max()) * 1.5
        p = ProblemInstance(design=A, observations=b, lam=lam)
        report = solve(p)
        assert report.converged
        assert report.outer_iters == 1
        assert report.relative_gap == 0.0
        assert np.count_nonzero(report.w_final) == 0
        assert report.nnz_fraction == 0.0

    def test_identity_design_matches_soft_threshold(self):
        # the objective is quadratically flat around w*, so w-accuracy 1e-6
        # needs a gap around 1e-12
        p = ProblemInstance(design=np.eye(2), observations=[3.0, 0.5], lam=1.0)
        report = solve(p, SolverConfig(outer_tolerance=1e-12))
        np.testing.assert_allclose(report.w_final, [2.0, 0.0], atol=1e-6)

    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(23)
        for variant in ("cholesky", "pcg"):
            cfg = SolverConfig(outer_tolerance=1e-6, inner_variant=variant)
            for _ in range(3):
                p = gaussian_problem(rng)
                report = solve(p, cfg)
                assert report.converged
                _, f_star, _ = cd_lasso(p.design, p.observations, p.lam, gap_tol=1e-10)
                assert report.primal_value <= f_star * (1 + 1e-6)
                assert abs(report.primal_value - f_star) <= 1e-6 * f_star

    def test_objective_trace_monotone(self):
        rng = np.random.default_rng(24)
        for _ in range(5):
            p = gaussian_problem(rng)
            report = solve(p, SolverConfig(outer_tolerance=1e-6))
            trace = np.asarray(report.objective_trace)
            assert np.all(np.diff(trace) <= 1e-12)

    def test_final_gap_below_tolerance_and_consistent(self):
        rng = np.random.default_rng(25)
        p = gaussian_problem(rng)
        report = solve(p, SolverConfig(outer_tolerance=1e-4))
        assert report.converged
        assert report.relative_gap <= 1e-4
        assert report.gap_trace[-1] == report.relative_gap
        assert report.primal_value == pytest.approx(
            primal_objective(p, report.w_final), rel=1e-12
        )

    def test_variant_agreement(self):
        rng = np.random.default_rng(26)
        for _ in range(4):
            p = gaussian_problem(rng)
            w_chol = solve(p, SolverConfig(outer_tolerance=1e-6,
                                           inner_variant="cholesky")).w_final
            w_pcg = solve(p, SolverConfig(outer_tolerance=1e-6,
                                          inner_variant="pcg")).w_final
            bound = 1e-4 * (1 + np.abs(w_chol).max())
            assert np.abs(w_chol - w_pcg).max() <= bound

    def test_iterates_exactly_sparse(self):
        rng = np.random.default_rng(27)
        p = gaussian_problem(rng)
        report = solve(p, SolverConfig(outer_tolerance=1e-6))
        w = report.w_final
        assert np.all((w == 0.0) | (np.abs(w) > 1e-300))
        assert 0.0 <= report.nnz_fraction <= 1.0

    def test_random_initial_vector(self):
        rng = np.random.default_rng(28)
        p = gaussian_problem(rng)
        w_init = rng.standard_normal(p.n)
        report = solve(p, SolverConfig(outer_tolerance=1e-6), w_initial=w_init)
        assert report.converged
        _, f_star, _ = cd_lasso(p.design, p.observations, p.lam, gap_tol=1e-10)
        assert abs(report.primal_value - f_star) <= 1e-5 * f_star

    def test_non_convergence_is_flagged_not_raised(self):
        rng = np.random.default_rng(29)
        p = gaussian_problem(rng)
        report = solve(p, SolverConfig(outer_tolerance=1e-12, max_outer=2))
        assert not report.converged
        assert report.outer_iters == 2
        assert report.relative_gap > 1e-12

    def test_inner_cap_hits_reported(self):
        rng = np.random.default_rng(30)
        p = gaussian_problem(rng)
        cfg = SolverConfig(outer_tolerance=1e-10, max_outer=6, max_inner_newton=1,
                           eta_initial=1e6)
        report = solve(p, cfg)
        assert report.inner_cap_hits > 0

    def test_wrong_initial_length_rejected(self):
        p = ProblemInstance(design=np.eye(2), observations=[1.0, 2.0], lam=0.5)
        with pytest.raises(ValueError):
            solve(p, w_initial=np.zeros(3))

    def test_nonfinite_data_raises_numeric_error(self):
        p = ProblemInstance(design=[[np.nan]], observations=[1.0], lam=0.5)
        with pytest.raises(NumericError):
            solve(p)


class TestSolverConfigValidation:
    def test_growth_must_exceed_one(self):
        with pytest.raises(ValueError):
            SolverConfig(eta_growth=1.0)

    def test_eps_shrink_in_unit_interval(self):
        with pytest.raises(ValueError):
            SolverConfig(eps_shrink=1.0)
        with pytest.raises(ValueError):
            SolverConfig(eps_shrink=0.0)

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError):
            SolverConfig(inner_variant="qr")

    def test_negative_eta_initial_rejected(self):
        with pytest.raises(ValueError):
            SolverConfig(eta_initial=-1.0)
