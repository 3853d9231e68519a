"""Feasible-point construction and relative-gap behavior."""

import numpy as np

from dalsparse import (
    ProblemInstance,
    dual_certificate,
    dual_objective,
    feasible_dual_point,
    primal_objective,
    relative_duality_gap,
)
from oracles import cd_lasso


def random_problem(rng, m=8, n=32, lam=0.05):
    A = rng.standard_normal((m, n)) / np.sqrt(2 * n)
    b = rng.standard_normal(m)
    return ProblemInstance(design=A, observations=b, lam=lam)


def test_sign_orientation_pinned_by_1d_optimum():
    # The dual maximizer of the tiny instance A=[2], b=[3], lam=1 is
    # alpha* = b - A w* = 0.5 with value 1.375 = f(w*).  The certificate must
    # reproduce it at w* so the gap vanishes there; the opposite orientation
    # would evaluate to -1.625 and never certify convergence.
    p = ProblemInstance(design=[[2.0]], observations=[3.0], lam=1.0)
    alpha_hat = feasible_dual_point(p, [1.25])
    np.testing.assert_allclose(alpha_hat, [0.5], atol=1e-12)
    assert dual_objective(p, alpha_hat) == 1.375
    assert relative_duality_gap(p, [1.25]) == 0.0


def test_feasible_by_construction_for_arbitrary_w():
    rng = np.random.default_rng(7)
    for _ in range(50):
        p = random_problem(rng, m=rng.integers(2, 10), n=rng.integers(2, 40))
        w = rng.standard_normal(p.n) * rng.uniform(0.1, 10)
        alpha_hat = feasible_dual_point(p, w)
        corr = np.abs(p.design.T @ alpha_hat).max()
        assert corr <= p.lam * (1 + 1e-9)


def test_boundary_tight_when_residual_correlation_exceeds_lambda():
    rng = np.random.default_rng(8)
    p = random_problem(rng, lam=1e-3)
    w = rng.standard_normal(p.n)
    alpha_hat = feasible_dual_point(p, w)
    corr = np.abs(p.design.T @ alpha_hat).max()
    assert abs(corr - p.lam) <= 1e-12 * p.lam


def test_zero_correlation_residual_returned_unscaled():
    # A w - b in the null space of A^T: 1x1 with w at the least-squares point
    p = ProblemInstance(design=[[2.0]], observations=[3.0], lam=1.0)
    alpha_hat = feasible_dual_point(p, [1.5])  # residual exactly 0
    np.testing.assert_array_equal(alpha_hat, [0.0])


def test_gap_at_oracle_optimum_small():
    rng = np.random.default_rng(9)
    p = random_problem(rng)
    w_star, f_star, _ = cd_lasso(p.design, p.observations, p.lam, gap_tol=1e-12)
    assert relative_duality_gap(p, w_star) <= 1e-6
    assert abs(primal_objective(p, w_star) - f_star) <= 1e-12 * (1 + abs(f_star))


def test_gap_soundness_small_gap_implies_near_optimal():
    rng = np.random.default_rng(10)
    for _ in range(5):
        p = random_problem(rng)
        w_star, f_star, _ = cd_lasso(p.design, p.observations, p.lam, gap_tol=1e-12)
        cert = dual_certificate(p, w_star)
        assert cert.relative_gap <= 1e-9
        assert cert.primal_value <= f_star * (1 + 1e-9)


def test_zero_problem_gap_is_zero_by_floor_rule():
    p = ProblemInstance(design=[[1.0]], observations=[0.0], lam=1.0)
    assert relative_duality_gap(p, [0.0]) == 0.0


def test_certificate_invariants_random_points():
    rng = np.random.default_rng(11)
    for _ in range(30):
        p = random_problem(rng, m=6, n=18, lam=rng.uniform(0.01, 1.0))
        w = rng.standard_normal(p.n)
        cert = dual_certificate(p, w)
        assert cert.dual_value <= cert.primal_value + 1e-9 * (1 + abs(cert.primal_value))
        assert cert.relative_gap >= 0.0
        assert np.abs(p.design.T @ cert.alpha_hat).max() <= p.lam * (1 + 1e-9)


def test_gap_conservative_away_from_optimum():
    # far from the solution the certificate reports a large positive gap
    rng = np.random.default_rng(12)
    p = random_problem(rng)
    w_far = rng.standard_normal(p.n) * 100
    assert relative_duality_gap(p, w_far) > 0.1
