import numpy as np
import pytest

from diamondnorm.coords import FeasibleSetSpec, ProductSet
from diamondnorm.matkernel import InvalidInputError
from diamondnorm.objective import Objective
from diamondnorm.solver import (
    Ball,
    BudgetExceededError,
    SolverConfig,
    compute_constants,
    diamond_norm,
    minimize,
)
from diamondnorm.superop import StinespringPair, stinespring_of_difference

Z = np.diag([1.0, -1.0])


class Quadratic:
    def __init__(self, target):
        self.target = np.asarray(target, dtype=float)

    def evaluate(self, z):
        d = z - self.target
        return float(d @ d), 2 * d


class Linear:
    def __init__(self, c):
        self.c = np.asarray(c, dtype=float)

    def evaluate(self, z):
        return float(self.c @ z), self.c.copy()


class Recording:
    """Wraps an objective and keeps every point it was asked about."""

    def __init__(self, inner):
        self.inner = inner
        self.points = []

    def evaluate(self, z):
        self.points.append(np.array(z))
        return self.inner.evaluate(z)


@pytest.mark.parametrize("mode", ["separation_cuts", "membership_only"])
def test_quadratic_over_ball(mode):
    tol = 1e-4
    ball = Ball(np.zeros(3), 1.0)
    rep = minimize(ball, Quadratic(np.zeros(3)), SolverConfig(epsilon=tol, mode=mode))
    assert rep.opt_value == pytest.approx(0.0, abs=tol)
    assert rep.certified_gap <= tol


def test_quadratic_with_target_outside_ball():
    tol = 1e-5
    rep = minimize(Ball(np.zeros(2), 1.0), Quadratic([3.0, 0.0]), SolverConfig(epsilon=tol))
    assert rep.opt_value == pytest.approx(4.0, abs=tol)
    assert rep.lower_bound <= 4.0 + 1e-12


@pytest.mark.parametrize("mode", ["separation_cuts", "membership_only"])
def test_linear_over_ball(mode, rng):
    tol = 1e-4
    c = rng.normal(size=4)
    rep = minimize(Ball(np.zeros(4), 1.0), Linear(c), SolverConfig(epsilon=tol, mode=mode))
    assert rep.opt_value == pytest.approx(-np.linalg.norm(c), abs=tol)
    assert rep.lower_bound <= -np.linalg.norm(c) + 1e-12


def test_linear_over_offcenter_ball():
    tol = 1e-4
    ball = Ball(np.array([1.0, -2.0]), 0.5)
    rep = minimize(ball, Linear([1.0, 0.0]), SolverConfig(epsilon=tol))
    assert rep.opt_value == pytest.approx(0.5, abs=tol)


def test_identity_objective_over_shrunk_product():
    tol = 1e-4
    body = ProductSet(FeasibleSetSpec(2, 0.1))
    rep = minimize(body, Objective.from_pair(StinespringPair.identity(2)), SolverConfig(epsilon=tol))
    assert rep.opt_value == pytest.approx(-1.0, abs=tol)


def test_gap_history_monotone_and_points_feasible():
    p = stinespring_of_difference(np.eye(2), Z)
    body = ProductSet(FeasibleSetSpec(2, 0.05))
    rec = Recording(Objective.from_pair(p))
    rep = minimize(body, rec, SolverConfig(epsilon=1e-3))
    assert all(b <= a for a, b in zip(rep.gap_history, rep.gap_history[1:]))
    assert rep.certified_gap <= 1e-3
    assert rep.objective_cuts == len(rec.points)
    for z in rec.points:
        x, y = body.split(z)
        for part in (x, y):
            ans = body.factor.membership(part, 1e-3)
            assert ans.verdict and ans.min_eigenvalue >= 0


def test_budget_exceeded_carries_report():
    with pytest.raises(BudgetExceededError) as info:
        minimize(Ball(np.zeros(3), 1.0), Linear([1.0, 2.0, 3.0]), SolverConfig(epsilon=1e-8, max_iterations=5))
    rep = info.value.report
    assert rep.iterations == 5
    assert rep.certified_gap > 1e-8


def test_config_validation():
    with pytest.raises(InvalidInputError):
        SolverConfig(epsilon=0)
    with pytest.raises(InvalidInputError):
        SolverConfig(mode="simplex")
    with pytest.raises(InvalidInputError):
        SolverConfig(max_iterations=0)


def test_diamond_norm_identity():
    res = diamond_norm(StinespringPair.identity(2), 1e-3)
    assert res.value == pytest.approx(1.0, abs=1e-3)
    assert res.error_budget["total"] <= 1e-3


def test_diamond_norm_zero_map():
    res = diamond_norm(StinespringPair.zero(2), 1e-3)
    assert res.value == 0.0
    assert res.constants is None
    zeros = StinespringPair(2, 1, np.zeros((2, 2)), np.zeros((2, 2)))
    assert diamond_norm(zeros, 1e-3).value == 0.0


def test_diamond_norm_i_vs_z():
    res = diamond_norm(stinespring_of_difference(np.eye(2), Z), 1e-2)
    assert res.value == pytest.approx(2.0, abs=1e-2)
    assert res.report.certified_gap <= res.constants.eps_prime


def test_diamond_norm_membership_only_mode():
    p = StinespringPair.identity(2)
    res = diamond_norm(p, 1e-2, SolverConfig(epsilon=1e-2, mode="membership_only"))
    assert res.value == pytest.approx(1.0, abs=1e-2)


def test_diamond_norm_rejects_bad_epsilon():
    with pytest.raises(InvalidInputError):
        diamond_norm(StinespringPair.identity(2), -1.0)


def test_constants_identity():
    c = compute_constants(StinespringPair.identity(2), 1e-3)
    assert 2 * np.sqrt(2) <= c.M <= 2 * np.sqrt(2) * 1.01
    assert c.alpha == pytest.approx(1e-3 / (4 * c.M))
    assert c.eps_prime == pytest.approx(c.alpha / np.sqrt(2))


def test_constants_zero_and_scaling(rng):
    assert compute_constants(StinespringPair.zero(2), 1e-3) is None
    p = stinespring_of_difference(np.eye(2), Z)
    base = compute_constants(p, 1e-3).M
    for s in (0.5, 3.0):
        assert compute_constants(p.scaled(s, s), 1e-3).M == pytest.approx(s * s * base, rel=1e-9)


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3])
def test_error_budget_fits(eps):
    res = diamond_norm(stinespring_of_difference(np.eye(2), Z), eps)
    parts = {k: v for k, v in res.error_budget.items() if k != "total"}
    assert sum(parts.values()) == pytest.approx(res.error_budget["total"])
    assert res.error_budget["total"] <= eps
