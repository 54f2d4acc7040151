"""Toy, bilinear and quadratic problems plus interface-level validation."""

import numpy as np
import pytest

from ogaprox.problem import ProblemConstants, PsiUndefinedError, validate_problem
from ogaprox.problems import (
    BilinearProblem,
    QuadraticSaddleProblem,
    random_toy_problem,
)
from ogaprox.prox import prox_oracle
from ogaprox.rng import make_rng


def _toy(rng, d=6, n=9, nu=0.0):
    return random_toy_problem(d, n, nu, rng)


# -- toy gradient and prox ---------------------------------------------------

def test_toy_grad_vanishes_on_nonpositive_x():
    p = _toy(make_rng(20, 0))
    x = -np.abs(make_rng(20, 1).standard_normal(p.dim_x))
    y = p.sample_point(make_rng(20, 2))[1]
    np.testing.assert_allclose(p.grad_y(x, y), np.zeros(p.dim_y), atol=0)


def test_toy_grad_basis_vector_gives_matrix_row():
    p = _toy(make_rng(21, 0))
    e1 = np.zeros(p.dim_x)
    e1[0] = 1.0
    np.testing.assert_allclose(p.grad_y(e1, np.zeros(p.dim_y)), p.a[0], atol=0)


def test_toy_grad_matches_finite_differences():
    p = _toy(make_rng(22, 0))
    rng = make_rng(22, 1)
    x, y = p.sample_point(rng)
    grad = p.grad_y(x, y)
    h = 1e-6
    for j in range(p.dim_y):
        e = np.zeros(p.dim_y)
        e[j] = h
        num = (p.phi_value(x, y + e) - p.phi_value(x, y - e)) / (2 * h)
        assert num == pytest.approx(grad[j], abs=1e-6 * max(1.0, abs(grad[j])))


def test_toy_prox_x_cases_and_identity_on_nonpositive():
    p = _toy(make_rng(23, 0))
    rng = make_rng(23, 1)
    _, y = p.sample_point(rng)
    x = -np.abs(rng.standard_normal(p.dim_x))
    np.testing.assert_allclose(p.prox_phi_x(0.7, y, x), x, atol=0)


def test_toy_prox_x_matches_oracle():
    p = _toy(make_rng(24, 0))
    rng = make_rng(24, 1)
    _, y = p.sample_point(rng)
    x = rng.standard_normal(p.dim_x) * 2
    tau = 0.9
    cand = p.prox_phi_x(tau, y, x)
    violation = prox_oracle(lambda u: tau * p.phi_value(u, y), x, cand,
                            trials=1000, seed=7)
    assert violation <= 1e-8


def test_toy_prox_x_rejects_infeasible_y():
    p = _toy(make_rng(25, 0))
    y_bad = make_rng(25, 1).standard_normal(p.dim_y) * 10
    if np.min(p.a @ y_bad) < -1e-6:
        with pytest.raises(ValueError):
            p.prox_phi_x(1.0, y_bad, np.zeros(p.dim_x))


# -- toy saddle points -------------------------------------------------------

def test_toy_saddle_strongly_concave_case():
    p = _toy(make_rng(26, 0), nu=0.3)
    x_star, y_star = p.saddle_point()
    np.testing.assert_allclose(y_star, np.zeros(p.dim_y))
    assert np.all(x_star <= 0)


def test_toy_saddle_merely_concave_case():
    p = _toy(make_rng(27, 0))
    x_star, y_star = p.saddle_point()
    assert np.all(x_star <= 0)
    assert np.linalg.norm(y_star) == pytest.approx(1.0, rel=1e-9)
    assert np.min(p.a @ y_star) > 0  # strictly inside the cone


@pytest.mark.parametrize("nu", [0.0, 0.3])
def test_toy_saddle_inequalities_against_random_points(nu):
    p = _toy(make_rng(28, 0), nu=nu)
    saddle = p.saddle_point()
    x_star, y_star = saddle
    psi_star = p.psi_value(x_star, y_star)
    rng = make_rng(28, 1)
    for _ in range(1000):
        x, y = p.sample_point(rng)
        assert p.psi_value(x_star, y) <= psi_star + 1e-9
        assert psi_star <= p.psi_value(x, y_star) + 1e-9


def test_toy_gap_zero_at_saddle_and_matches_direct_psi():
    p = _toy(make_rng(29, 0), nu=0.3)
    saddle = p.saddle_point()
    assert p.gap_value(saddle, saddle) == pytest.approx(0.0, abs=1e-12)
    rng = make_rng(29, 1)
    pair = p.sample_point(rng)
    stable = p.gap_value(saddle, pair)
    direct = p.psi_value(pair[0], saddle[1]) - p.psi_value(saddle[0], pair[1])
    assert stable == pytest.approx(direct, rel=1e-9, abs=1e-9)
    # with x* <= 0 and y* = 0 the gap reduces to nu/2 ||y||^2
    assert stable == pytest.approx(0.5 * 0.3 * float(pair[1] @ pair[1]), rel=1e-9)


def test_toy_gap_rejects_infeasible_y():
    p = _toy(make_rng(30, 0))
    saddle = p.saddle_point()
    y_bad = make_rng(30, 1).standard_normal(p.dim_y) * 10
    if p.g_value(y_bad) == np.inf:
        with pytest.raises(PsiUndefinedError):
            p.gap_value(saddle, (np.zeros(p.dim_x), y_bad))


def test_toy_lipschitz_constant_is_spectral_norm():
    p = _toy(make_rng(31, 0))
    exact = np.linalg.svd(p.a, compute_uv=False)[0]
    assert p.constants.l_yx == pytest.approx(1.001 * exact, rel=1e-9)
    assert p.constants.l_yy == 0.0


# -- bilinear ---------------------------------------------------------------

def test_bilinear_prox_identity_exact():
    rng = make_rng(32, 0)
    a = rng.standard_normal((5, 4))
    p = BilinearProblem(a)
    x = rng.standard_normal(4)
    y = rng.standard_normal(5)
    tau = 0.37
    np.testing.assert_array_equal(p.prox_phi_x(tau, y, x), x - tau * (a.T @ y))


# -- quadratic --------------------------------------------------------------

def test_quadratic_saddle_zero_data():
    rng = make_rng(33, 0)
    a = rng.standard_normal((4, 3))
    p = QuadraticSaddleProblem(a, np.zeros(3), np.zeros(4), mu=1.0, nu=1.0)
    x_star, y_star = p.saddle_point()
    np.testing.assert_allclose(x_star, np.zeros(3), atol=1e-12)
    np.testing.assert_allclose(y_star, np.zeros(4), atol=1e-12)


def test_quadratic_saddle_decoupled():
    b = np.array([1.0, -2.0])
    c = np.array([0.5, 0.0, -1.5])
    p = QuadraticSaddleProblem(np.zeros((3, 2)), b, c, mu=2.0, nu=0.5)
    x_star, y_star = p.saddle_point()
    np.testing.assert_allclose(x_star, -b / 2.0, atol=1e-12)
    np.testing.assert_allclose(y_star, -c / 0.5, atol=1e-12)


def test_quadratic_gap_identity_matches_direct_psi():
    rng = make_rng(34, 0)
    a = rng.standard_normal((5, 4)) * 0.5
    p = QuadraticSaddleProblem(a, rng.standard_normal(4), rng.standard_normal(5),
                               mu=1.3, nu=0.8)
    saddle = p.saddle_point()
    pair = (rng.standard_normal(4), rng.standard_normal(5))
    direct = p.psi_value(pair[0], saddle[1]) - p.psi_value(saddle[0], pair[1])
    assert p.gap_value(saddle, pair) == pytest.approx(direct, rel=1e-9, abs=1e-9)


def test_quadratic_proxes_match_oracle():
    rng = make_rng(35, 0)
    a = rng.standard_normal((4, 4))
    p = QuadraticSaddleProblem(a, rng.standard_normal(4), rng.standard_normal(4),
                               mu=0.9, nu=1.4)
    x = rng.standard_normal(4)
    y = rng.standard_normal(4)
    tau, sigma = 0.8, 1.1
    cand_x = p.prox_phi_x(tau, y, x)
    assert prox_oracle(lambda u: tau * p.phi_value(u, y), x, cand_x,
                       trials=500, seed=8) <= 1e-8
    cand_y = p.prox_g(sigma, y)
    assert prox_oracle(lambda w: sigma * p.g_value(w), y, cand_y,
                       trials=500, seed=9) <= 1e-8


# -- interface validation ----------------------------------------------------

@pytest.mark.parametrize("make", [
    lambda: _toy(make_rng(36, 0), nu=0.0),
    lambda: _toy(make_rng(36, 1), nu=0.5),
    lambda: BilinearProblem(make_rng(36, 2).standard_normal((4, 4)), box=(-1.0, 1.0)),
    lambda: QuadraticSaddleProblem(
        make_rng(36, 3).standard_normal((4, 3)),
        make_rng(36, 4).standard_normal(3),
        make_rng(36, 5).standard_normal(4), mu=1.0, nu=1.0),
])
def test_validate_problem_reports_no_violation(make):
    problem = make()
    report = validate_problem(problem, trials=60, seed=5)
    assert report.ok, (report.lipschitz_violation, report.prox_violation)


def test_validate_problem_identical_pairs_zero_violation():
    p = _toy(make_rng(37, 0))
    rng = make_rng(37, 1)
    x, y = p.sample_point(rng)
    lhs = np.linalg.norm(p.grad_y(x, y) - p.grad_y(x, y))
    assert lhs == 0.0


def test_validate_problem_rejects_zero_trials():
    p = _toy(make_rng(38, 0))
    with pytest.raises(ValueError):
        validate_problem(p, trials=0, seed=0)


def test_constants_reject_negative():
    with pytest.raises(ValueError):
        ProblemConstants(l_yx=-1.0, l_yy=0.0)


def test_validator_detects_understated_lipschitz_constant():
    p = _toy(make_rng(39, 0))
    true_l = p.constants.l_yx
    p.constants = ProblemConstants(l_yx=true_l / 50.0, l_yy=0.0)
    report = validate_problem(p, trials=200, seed=2)
    assert report.lipschitz_violation > 1e-8
    assert not report.ok


def test_validator_detects_wrong_prox():
    class Crooked(type(_toy(make_rng(39, 1)))):
        def prox_phi_x(self, tau, y, x):
            return super().prox_phi_x(tau, y, x) + 0.05

    base = _toy(make_rng(39, 2))
    crooked = Crooked(base.a, nu=0.0)
    report = validate_problem(crooked, trials=50, seed=3)
    assert report.prox_violation > 1e-8
    assert not report.ok


def test_toy_prox_x_componentwise_matches_scalar_prox():
    from ogaprox.prox import prox_positive_part_scaled

    p = _toy(make_rng(41, 0))
    rng = make_rng(41, 1)
    _, y = p.sample_point(rng)
    w = p.a @ y
    tau = 0.8
    # include the breakpoints 0 and tau*w explicitly
    x = np.concatenate([rng.standard_normal(p.dim_x - 2), [0.0, tau * w[-1]]])
    vectorized = p.prox_phi_x(tau, y, x)
    scalar = np.array([
        prox_positive_part_scaled(tau, max(wi, 0.0), xi) for wi, xi in zip(w, x)
    ])
    np.testing.assert_array_equal(vectorized, scalar)
