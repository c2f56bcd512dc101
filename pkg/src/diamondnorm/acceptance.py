"""Acceptance checks, runnable from pytest or ``diamondnorm selftest``.

Each check returns a :class:`CriterionResult`; ``scale="quick"`` shrinks the
sample counts so the whole table finishes in well under a minute.
"""

from __future__ import annotations

import io
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import solver as _solver
from .coords import FeasibleSetSpec, decode, encode, n_coords
from .matkernel import eig_hermitian, psd_sqrt, spectral_norm, trace_norm
from .objective import Objective, g_exact, g_subgradient, sqrt_fidelity
from .solver import diamond_norm
from .superop import (
    NaturalRep,
    StinespringPair,
    apply_derived,
    natural_from_stinespring,
    random_channel_difference,
    random_unitary,
    stinespring_from_natural,
    stinespring_of_difference,
    tensor_superop,
)
from .verify import BruteForceConfig, bruteforce_diamond, fidelity_seesaw, unitary_diamond

SCALES = ("quick", "full")


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d}. {self.name}: {self.detail} ({self.seconds:.1f}s)"


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_psd(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return g @ g.conj().T * rng.uniform(0.1, 2.0)


def _n(scale: str, quick: int, full: int) -> int:
    return quick if scale == "quick" else full


def _bf_cfg(scale: str, seed: int = 0) -> BruteForceConfig:
    return BruteForceConfig(restarts=_n(scale, 16, 64), ascent_steps=400, seed=seed)


def identity_channel(scale: str) -> CriterionResult:
    dims = (2,) if scale == "quick" else (2, 4)
    limits = {2: 60.0, 4: 20 * 60.0}
    worst, ok = 0.0, True
    for n in dims:
        t = time.perf_counter()
        r = diamond_norm(StinespringPair.identity(n), 1e-3)
        dt = time.perf_counter() - t
        worst = max(worst, abs(r.value - 1.0))
        ok &= abs(r.value - 1.0) <= 1e-3 and dt < limits[n]
    return CriterionResult(1, "identity channel", ok, f"N={dims}, max |c-1| = {worst:.2e}")


def zero_map(scale: str) -> CriterionResult:
    t = time.perf_counter()
    r = diamond_norm(StinespringPair.zero(2), 1e-3)
    dt = time.perf_counter() - t
    ok = abs(r.value) <= 1e-3 and r.report.iterations == 0 and dt < 1.0
    return CriterionResult(2, "zero map", ok, f"c = {r.value:g} in {dt * 1e3:.2f} ms")


def unitary_differences(scale: str) -> CriterionResult:
    rng = np.random.default_rng(3)
    worst = 0.0
    count = _n(scale, 3, 10)
    for _ in range(count):
        u, v = random_unitary(2, rng), random_unitary(2, rng)
        c = diamond_norm(stinespring_of_difference(u, v), 1e-2).value
        worst = max(worst, abs(c - unitary_diamond(u, v)))
    return CriterionResult(
        3, "unitary differences", worst <= 2e-2, f"{count} pairs, max error {worst:.2e} (tol 2e-2)"
    )


def oracle_concordance(scale: str) -> CriterionResult:
    rng = np.random.default_rng(4)
    count = _n(scale, 3, 20)
    worst_solver = worst_oracles = 0.0
    for k in range(count):
        p = random_channel_difference(2, rng)
        cfg = _bf_cfg(scale, seed=k)
        bf = bruteforce_diamond(p, cfg)
        ss = fidelity_seesaw(p.derived, cfg)
        c = diamond_norm(p, 1e-2).value
        worst_solver = max(worst_solver, abs(c - bf), abs(c - ss))
        worst_oracles = max(worst_oracles, abs(bf - ss))
    ok = worst_solver <= 2e-2 and worst_oracles <= 1e-3
    return CriterionResult(
        4,
        "oracle concordance",
        ok,
        f"{count} instances, solver-vs-oracle {worst_solver:.2e} (tol 2e-2), "
        f"oracle-vs-oracle {worst_oracles:.2e} (tol 1e-3)",
    )


def ball_containments(scale: str) -> CriterionResult:
    rng = np.random.default_rng(5)
    count = _n(scale, 200, 1000)
    bad = 0
    for n in (2, 4, 8):
        k = n_coords(n)
        r = 1.0 / (2.0 * np.sqrt(n))
        for _ in range(count):
            x = rng.normal(size=k)
            x *= r * rng.uniform() ** (1.0 / k) / np.linalg.norm(x)
            bad += eig_hermitian(decode(x, n)).min_eigenvalue < 0
            rank = int(rng.integers(1, n + 1))
            bad += np.linalg.norm(encode(random_density(n, rng, rank))) > n
    return CriterionResult(5, "ball containments", bad == 0, f"N in (2, 4, 8), {bad} violations")


def membership_contract(scale: str) -> CriterionResult:
    rng = np.random.default_rng(6)
    target = _n(scale, 100, 500)
    bad = 0
    checked = 0
    for eps in (1e-2, 1e-4):
        for spec in (FeasibleSetSpec(2), FeasibleSetSpec(4, 0.05)):
            got = 0
            while got < target:
                x = encode(random_density(spec.dim_v, rng, 1))
                # Scatter radially around the boundary, within a few eps of it.
                x *= 1.0 + rng.uniform(-3, 3) * eps
                if spec.alpha:
                    x *= 1.0 - spec.alpha
                verdict = spec.membership(x, eps).verdict
                if spec.distance_inside(x) >= eps:
                    bad += not verdict
                elif spec.distance_outside(x) > eps:
                    bad += verdict
                else:
                    continue
                got += 1
            checked += got
    return CriterionResult(
        6, "membership oracle contract", bad == 0, f"{checked} classified points, {bad} violations"
    )


def convexity_suites(scale: str) -> CriterionResult:
    rng = np.random.default_rng(7)
    count = _n(scale, 200, 1000)
    obj = Objective.from_pair(random_channel_difference(2, rng))
    bad_g = 0
    for _ in range(count):
        pts = [encode(random_density(2, rng)) for _ in range(4)]
        x1, y1, x2, y2 = pts
        mid = g_exact(obj, (x1 + x2) / 2, (y1 + y2) / 2)
        bad_g += mid > (g_exact(obj, x1, y1) + g_exact(obj, x2, y2)) / 2 + 1e-9
    bad_f = 0
    for _ in range(count):
        k = int(rng.integers(2, 5))
        lam = rng.dirichlet(np.ones(k))
        rhos = [random_psd(3, rng) for _ in range(k)]
        xis = [random_psd(3, rng) for _ in range(k)]
        lhs = sqrt_fidelity(sum(l * r for l, r in zip(lam, rhos)), sum(l * x for l, x in zip(lam, xis)))
        rhs = sum(l * sqrt_fidelity(r, x) for l, r, x in zip(lam, rhos, xis))
        bad_f += lhs < rhs - 1e-9
    return CriterionResult(
        7,
        "convexity of g / joint concavity of sqrtF",
        bad_g == 0 and bad_f == 0,
        f"{count}+{count} samples, {bad_g}+{bad_f} violations",
    )


def perturbation_claims(scale: str) -> CriterionResult:
    rng = np.random.default_rng(8)
    count = _n(scale, 50, 200)
    dim = 4
    bad_p = 0
    for _ in range(count):
        zeta = 10.0 ** rng.uniform(-6, -1)
        rho = [random_psd(dim, rng) + zeta * np.eye(dim) for _ in range(2)]
        sig = []
        for r in rho:
            h = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            h = h + h.conj().T
            sig.append(r + zeta * rng.uniform() * h / spectral_norm(h))
        diff = abs(trace_norm(rho[0] @ rho[1]) - trace_norm(sig[0] @ sig[1]))
        bound = dim * zeta * (spectral_norm(rho[0]) + spectral_norm(sig[1]))
        bad_p += diff > bound * (1 + 1e-9) + 1e-12
    bad_n = 0
    for _ in range(count):
        n, a = 2, int(rng.integers(1, 5))
        B = rng.normal(size=(n * a, n)) + 1j * rng.normal(size=(n * a, n))
        C = rng.normal(size=(n * a, n)) + 1j * rng.normal(size=(n * a, n))
        d = StinespringPair(n, a, B, C).derived
        rho = random_density(n, rng, int(rng.integers(1, n + 1)))
        for which, gen in (("t1", B), ("t2", C)):
            root = psd_sqrt(apply_derived(d, which, rho))
            bad_n += spectral_norm(root) > spectral_norm(gen) * (1 + 1e-12)
    return CriterionResult(
        8,
        "perturbation claims",
        bad_p == 0 and bad_n == 0,
        f"{count}+{count} samples, {bad_p}+{bad_n} violations",
    )


def finite_difference_gradient(obj: Objective, x: np.ndarray, y: np.ndarray, h: float = 1e-5):
    def fd(vec, which):
        out = np.empty_like(vec)
        for i in range(len(vec)):
            e = np.zeros_like(vec)
            e[i] = h
            if which == "x":
                out[i] = (g_exact(obj, x + e, y) - g_exact(obj, x - e, y)) / (2 * h)
            else:
                out[i] = (g_exact(obj, x, y + e) - g_exact(obj, x, y - e)) / (2 * h)
        return out

    return fd(x, "x"), fd(y, "y")


def gradient_check(scale: str) -> CriterionResult:
    rng = np.random.default_rng(9)
    count = _n(scale, 20, 100)
    worst = 0.0
    for _ in range(count):
        obj = Objective.from_pair(random_channel_difference(2, rng))
        x = encode(random_density(2, rng))
        y = encode(random_density(2, rng))
        ax, ay = g_subgradient(obj, x, y, obj.delta)
        fx, fy = finite_difference_gradient(obj, x, y)
        analytic, fd = np.concatenate([ax, ay]), np.concatenate([fx, fy])
        worst = max(worst, np.linalg.norm(analytic - fd) / max(np.linalg.norm(fd), 1e-12))
    return CriterionResult(
        9, "gradient check", worst <= 1e-3, f"{count} points, max rel. error {worst:.2e} (tol 1e-3)"
    )


def multiplicativity(scale: str) -> CriterionResult:
    rng = np.random.default_rng(10)
    count = _n(scale, 1, 5)
    worst = 0.0
    first = None
    for k in range(count):
        p, q = random_channel_difference(2, rng), random_channel_difference(2, rng)
        pq = tensor_superop(p, q)
        cfg = _bf_cfg(scale, seed=k)
        prod = bruteforce_diamond(p, cfg) * bruteforce_diamond(q, cfg)
        joint = bruteforce_diamond(pq, cfg)
        worst = max(worst, abs(joint - prod))
        if first is None:
            first = (pq, joint)
    detail = f"{count} pairs at N=4, max |bf(p x q) - bf(p) bf(q)| = {worst:.2e} (tol 5e-3)"
    ok = worst <= 5e-3
    if scale == "full":
        eps = 1e-2
        pq, joint = first
        c = diamond_norm(pq, eps).value
        ok &= abs(c - joint) <= 2 * eps + 5e-3
        detail += f"; solver on product off by {abs(c - joint):.2e} (tol {2 * eps + 5e-3:.1e})"
    return CriterionResult(10, "multiplicativity", ok, detail)


def determinism(scale: str) -> CriterionResult:
    from .cli import run_compute

    rng = np.random.default_rng(11)
    p = random_channel_difference(2, rng)
    outputs = []
    for method in ("convex", "bruteforce"):
        runs = []
        for _ in range(2):
            buf = io.StringIO()
            run_compute(p, 1e-2, method, seed=7, output_format="json", out=buf, timing=False)
            runs.append(buf.getvalue().encode())
        outputs.append(runs[0] == runs[1])
    return CriterionResult(11, "determinism", all(outputs), "byte-identical JSON for convex and bruteforce")


def conversion_roundtrips(scale: str) -> CriterionResult:
    rng = np.random.default_rng(12)
    count = _n(scale, 10, 50)
    worst = 0.0
    for k in range(count):
        n = 2 if k % 2 else 4
        m = rng.normal(size=(n * n, n * n)) + 1j * rng.normal(size=(n * n, n * n))
        nat = NaturalRep(n, m)
        back = natural_from_stinespring(stinespring_from_natural(nat)).matrix
        worst = max(worst, spectral_norm(back - m))
        p = stinespring_from_natural(nat)
        again = natural_from_stinespring(stinespring_from_natural(natural_from_stinespring(p))).matrix
        worst = max(worst, spectral_norm(again - m))
    return CriterionResult(
        12, "conversion round-trips", worst <= 1e-9, f"{count} maps, max error {worst:.2e} (tol 1e-9)"
    )


CRITERIA: list[Callable[[str], CriterionResult]] = [
    identity_channel,
    zero_map,
    unitary_differences,
    oracle_concordance,
    ball_containments,
    membership_contract,
    convexity_suites,
    perturbation_claims,
    gradient_check,
    multiplicativity,
    determinism,
    conversion_roundtrips,
]


def run_criterion(check: Callable[[str], CriterionResult], scale: str) -> CriterionResult:
    t = time.perf_counter()
    try:
        res = check(scale)
    except Exception as exc:  # a crash is a failed criterion, reported in the table
        name = check.__name__.replace("_", " ")
        res = CriterionResult(CRITERIA.index(check) + 1, name, False, f"raised {exc!r}")
    res.seconds = time.perf_counter() - t
    return res


@contextmanager
def corrupted_constants():
    """Test hook: make ``compute_constants`` return a wildly wrong shrink factor."""
    original = _solver.compute_constants

    def broken(p, epsilon):
        c = original(p, epsilon)
        return None if c is None else _solver.Constants(c.M, 0.5, c.eps_prime)

    _solver.compute_constants = broken
    try:
        yield
    finally:
        _solver.compute_constants = original


def run(scale: str = "quick", out=None, fault: str | None = None) -> list[CriterionResult]:
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {SCALES}")
    results = []
    if fault == "constants":
        ctx = corrupted_constants()
    elif fault is None:
        ctx = _null()
    else:
        raise ValueError(f"unknown fault {fault!r}")
    with ctx:
        for check in CRITERIA:
            res = run_criterion(check, scale)
            results.append(res)
            if out is not None:
                print(res.line(), file=out, flush=True)
    return results


@contextmanager
def _null():
    yield
