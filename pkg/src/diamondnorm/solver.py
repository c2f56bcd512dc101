"""Oracle-driven convex minimization and the diamond-norm algorithm built on it.

``minimize`` is an ellipsoid method over a convex body that exposes a
membership oracle (``membership(z, eps) -> OracleAnswer``), an inner radius,
an outer radius and a center, with an objective exposing
``evaluate(z) -> (value, gradient)``.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .coords import FeasibleSetSpec, OracleAnswer, ProductSet
from .matkernel import InvalidInputError
from .objective import Objective, PrecisionError
from .superop import StinespringPair, superop_spectral_norm

logger = logging.getLogger(__name__)

MODES = ("separation_cuts", "membership_only")
# Relative inflation applied to computed ||T_i|| so M is an upper bound despite SVD roundoff.
NORM_UPPER_SLACK = 1e-6
KERNEL_RTOL = 1e-12
# Per-update blow-up of the ellipsoid so roundoff cannot shave off the minimizer.
BLOWUP = 1e-10


class BudgetExceededError(RuntimeError):
    """The iteration budget ran out before the certified gap closed."""

    def __init__(self, message: str, report: SolveReport):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-3
    max_iterations: int | None = None
    mode: str = "separation_cuts"
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")
        if self.mode not in MODES:
            raise InvalidInputError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass
class SolveReport:
    opt_value: float
    opt_point: np.ndarray | None
    iterations: int
    certified_gap: float
    wall_time: float
    lower_bound: float = -np.inf
    feasibility_cuts: int = 0
    objective_cuts: int = 0
    gap_history: list[float] = field(default_factory=list, repr=False)


class Constants(NamedTuple):
    M: float
    alpha: float
    eps_prime: float


@dataclass
class DiamondResult:
    value: float
    epsilon: float
    report: SolveReport
    constants: Constants | None
    error_budget: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class Ball:
    """Euclidean ball ``B(center, radius)`` with a separation oracle; a test body for ``minimize``."""

    center: np.ndarray
    radius: float

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def inner_radius(self) -> float:
        return self.radius

    @property
    def outer_radius(self) -> float:
        return self.radius + float(np.linalg.norm(self.center))

    def membership(self, z, eps: float) -> OracleAnswer:
        d = np.asarray(z, dtype=float) - self.center
        dist = float(np.linalg.norm(d))
        if dist <= self.radius:
            return OracleAnswer(True)
        u = d / dist
        # -u . y >= -u . center - radius on the ball
        return OracleAnswer(False, (-u, float(-u @ self.center - self.radius)))


def default_budget(n: int, outer: float, inner: float, tol: float) -> int:
    return int(np.ceil(50 * n * n * np.log(max(outer / (inner * tol), np.e))))


class _Ellipsoid:
    """``{x + J u : ||u|| <= 1}`` with deep/shallow cut updates.

    The shape is kept as the factor ``J`` (``P = J J^T``) rather than ``P``
    itself: cuts that keep hitting one direction drive ``cond(P)`` past 1e12,
    where explicit updates of ``P`` drift enough to shave off the minimizer.
    """

    def __init__(self, center: np.ndarray, radius: float):
        self.x = np.array(center, dtype=float)
        self.n = len(self.x)
        if self.n < 2:
            raise InvalidInputError("the ellipsoid method needs dimension >= 2")
        self.J = np.eye(self.n) * radius

    def width(self, a: np.ndarray) -> float:
        """``max_{y in E} a . (y - x)``, rounded up."""
        return float(np.linalg.norm(self.J.T @ a)) * (1.0 + BLOWUP)

    def cut(self, a: np.ndarray, depth: float) -> bool:
        """Keep ``{y : a . (y - x) <= -depth}``; returns False if that leaves nothing.

        Negative depth gives a shallow cut; it is floored at ``-1 / (2n)`` in
        normalized units so every update still shrinks the volume.
        """
        n = self.n
        ja = self.J.T @ a
        root = float(np.linalg.norm(ja))
        if not root > 0:
            raise PrecisionError("ellipsoid degenerated (J^T a = 0)")
        ad = depth / root
        if ad >= 1.0:
            return False
        ad = max(ad, -0.5 / n)
        u = ja / root
        tau = (1.0 + n * ad) / (n + 1.0)
        sigma = 2.0 * (1.0 + n * ad) / ((n + 1.0) * (1.0 + ad))
        scale = n * n * (1.0 - ad * ad) / (n * n - 1.0) * (1.0 + BLOWUP)
        self.x = self.x - tau * (self.J @ u)
        # (I - beta u u^T)^2 = I - sigma u u^T
        beta = 1.0 - np.sqrt(1.0 - sigma)
        self.J = np.sqrt(scale) * (self.J - beta * np.outer(self.J @ u, u))
        return True


def _gauge(feasible, point: np.ndarray, eps: float, rtol: float = 1e-11) -> float:
    """Minkowski gauge of ``point`` about the body's center, by bisection on membership."""
    a0 = feasible.center
    d = point - a0
    if not np.any(d):
        return 0.0
    lo, hi = 0.0, 1.0
    while feasible.membership(a0 + hi * d, eps).verdict:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            return 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if feasible.membership(a0 + mid * d, eps).verdict:
            lo = mid
        else:
            hi = mid
    return 1.0 / (0.5 * (lo + hi))


def _fd_gradient(fun, x: np.ndarray, step: float, basis: np.ndarray) -> tuple[np.ndarray, float]:
    """Central differences along an orthonormal basis, with a two-step error estimate."""
    coeffs = np.empty((2, len(x)))
    for k, h in enumerate((step, 2 * step)):
        for i, q in enumerate(basis.T):
            coeffs[k, i] = (fun(x + h * q) - fun(x - h * q)) / (2 * h)
    grad = basis @ coeffs[0]
    err = float(np.linalg.norm(coeffs[0] - coeffs[1]))
    return grad, err


def minimize(feasible, objective, cfg: SolverConfig) -> SolveReport:
    """Minimize a convex objective over a convex body to certified accuracy ``cfg.epsilon``.

    Feasibility cuts come from the oracle's eigenvector cut (separation mode)
    or from a finite-difference subgradient of the body's gauge built from
    membership queries alone (membership mode). Objective cuts are deep cuts
    at the best value found. Each objective cut at ``x_k`` certifies the lower
    bound ``f(x_k) - max_{y in E_k} s_k . (x_k - y)`` since the minimizer never
    leaves the ellipsoid. The loop stops once best value minus best lower bound
    is at most ``cfg.epsilon``.

    Raises:
        BudgetExceededError: iteration budget exhausted; carries the best report.
    """
    start = time.perf_counter()
    tol = cfg.epsilon
    n = feasible.n
    outer = feasible.outer_radius + float(np.linalg.norm(feasible.center))
    budget = cfg.max_iterations or default_budget(n, outer, feasible.inner_radius, tol)
    membership_only = cfg.mode == "membership_only"
    rng = np.random.default_rng(cfg.seed)
    fd_step = min(1e-6, 0.25 * tol)

    ell = _Ellipsoid(feasible.center, outer)
    best_val, best_point = np.inf, None
    lower = -np.inf
    gaps: list[float] = []
    n_feas = n_obj = 0

    def report(iterations: int) -> SolveReport:
        return SolveReport(
            opt_value=float(best_val),
            opt_point=None if best_point is None else best_point.copy(),
            iterations=iterations,
            certified_gap=float(best_val - lower),
            wall_time=time.perf_counter() - start,
            lower_bound=float(lower),
            feasibility_cuts=n_feas,
            objective_cuts=n_obj,
            gap_history=gaps,
        )

    for it in range(1, budget + 1):
        x = ell.x
        ans = feasible.membership(x, tol)
        if not ans.verdict:
            n_feas += 1
            if membership_only:
                basis = np.linalg.qr(rng.normal(size=(n, n)))[0]
                gamma = _gauge(feasible, x, tol)
                s, err = _fd_gradient(lambda p: _gauge(feasible, p, tol), x, fd_step, basis)
                margin = 2.0 * outer * err + 1e-9
                # gauge(y) <= 1 on the body and gauge(y) >= gauge(x) + s . (y - x)
                depth = (gamma - 1.0) - margin
            else:
                c, b = ans.cut
                s, depth = -c, float(b - c @ x)
            if not np.any(s):
                raise PrecisionError("feasibility oracle returned a zero cut")
            if not ell.cut(s, depth):
                raise PrecisionError("feasibility cut excluded the whole ellipsoid")
            continue

        # Points handed to the objective must decode to PSD matrices.
        assert not ans.min_eigenvalue < 0, "objective queried at an infeasible point"
        n_obj += 1
        if membership_only:
            val = objective.evaluate(x)[0]
            basis = np.linalg.qr(rng.normal(size=(n, n)))[0]
            s, err = _fd_gradient(lambda p: objective.evaluate(p)[0], x, fd_step, basis)
            margin = 2.0 * outer * err
        else:
            val, s = objective.evaluate(x)
            margin = 0.0
        if val < best_val:
            best_val, best_point = float(val), x.copy()
        lower = max(lower, val - ell.width(s) - margin)
        gaps.append(float(best_val - lower))
        if best_val - lower <= tol:
            return report(it)
        if not np.any(s):
            lower = best_val
            gaps[-1] = 0.0
            return report(it)
        if not ell.cut(s, (val - best_val) - margin):
            lower = best_val
            gaps[-1] = 0.0
            return report(it)

    rep = report(budget)
    raise BudgetExceededError(
        f"no certificate after {budget} iterations (gap {rep.certified_gap:.3e} > {tol:.3e})", rep
    )


def compute_constants(p: StinespringPair, epsilon: float) -> Constants | None:
    """``M = N sqrt(||T1|| ||T2||)`` (norms rounded up), ``alpha = eps / 4M``, ``eps' = alpha / sqrt(N)``.

    Returns None for the zero map (``M = 0``), whose diamond norm is exactly 0.
    """
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    d = p.derived
    up = 1.0 + NORM_UPPER_SLACK
    t1 = superop_spectral_norm(d, "t1") * up
    t2 = superop_spectral_norm(d, "t2") * up
    M = p.dim_v * float(np.sqrt(t1 * t2))
    if M == 0.0:
        return None
    alpha = epsilon / (4.0 * M)
    if alpha >= 1.0:
        # Any epsilon >= 4M is met by the shrink factor of a smaller target.
        alpha = 0.25
    return Constants(M, alpha, alpha / np.sqrt(p.dim_v))


def _error_budget(obj: Objective, consts: Constants, delta: float) -> dict[str, float]:
    eta = obj.smoothing_error(delta)
    budget = {
        "solver_gap": consts.eps_prime,
        "shrinkage": 2.0 * consts.alpha * consts.M,
        "smoothing": 2.0 * eta,
        "kernel": KERNEL_RTOL * consts.M * obj.dim_a,
    }
    budget["total"] = sum(budget.values())
    return budget


def diamond_norm(p: StinespringPair, epsilon: float, cfg: SolverConfig | None = None) -> DiamondResult:
    """Approximate ``||T||_diamond`` to additive accuracy ``epsilon``.

    Minimizes ``g`` over the product of shrunk bodies ``(1 - alpha) K1`` and
    returns ``c = max(0, -opt)``. The pieces of the error (solver gap, the
    shrinkage bias ``2 alpha M``, smoothing of the fidelity, kernel roundoff)
    are summed and checked against ``epsilon`` before solving.
    """
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    cfg = cfg or SolverConfig(epsilon=epsilon)
    start = time.perf_counter()
    consts = compute_constants(p, epsilon)
    if consts is None:
        rep = SolveReport(0.0, None, 0, 0.0, time.perf_counter() - start, 0.0)
        return DiamondResult(0.0, epsilon, rep, None, {"total": 0.0})

    obj = Objective.from_pair(p)
    delta = obj.delta
    budget = _error_budget(obj, consts, delta)
    while budget["total"] > epsilon and delta > 1e-30:
        delta /= 100.0
        budget = _error_budget(obj, consts, delta)
    if budget["total"] > epsilon:
        raise PrecisionError(f"error budget {budget['total']:.3e} cannot meet epsilon={epsilon:.3e}")
    if consts.eps_prime < 1e-13 * max(1.0, consts.M):
        raise PrecisionError("epsilon is too small relative to ||T1||, ||T2|| for double precision")
    obj = replace(obj, delta=delta)

    body = ProductSet(FeasibleSetSpec(p.dim_v, consts.alpha))
    inner = replace(cfg, epsilon=consts.eps_prime)
    logger.debug("diamond_norm: M=%.4g alpha=%.3g eps'=%.3g delta=%.2g", *consts, delta)
    rep = minimize(body, obj, inner)
    return DiamondResult(max(0.0, -rep.opt_value), epsilon, rep, consts, budget)
