"""Independent, desk-scale estimates of the diamond norm used to cross-check the solver.

None of these are certified: the two ascents return lower bounds that are
tight in practice for small systems, and ``unitary_diamond`` is a closed form
valid only for differences of unitary channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matkernel import InvalidInputError, as_matrix, is_unitary
from .superop import DerivedPair, StinespringPair, choi_from_stinespring


@dataclass(frozen=True)
class BruteForceConfig:
    restarts: int = 64
    ascent_steps: int = 400
    seed: int = 0
    tol: float = 1e-10

    def __post_init__(self):
        if self.restarts < 8:
            raise InvalidInputError("restarts must be >= 8")
        if not self.tol > 0:
            raise InvalidInputError("tol must be positive")


def _restart_rngs(cfg: BruteForceConfig):
    # Counter-derived streams keep each restart reproducible on its own.
    for k in range(cfg.restarts):
        yield np.random.default_rng([cfg.seed, k])


def _random_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _extended_output(p: StinespringPair, psi: np.ndarray) -> np.ndarray:
    """``(T (x) I_R)(|psi><psi|)``, with ``psi`` indexed (system, reference)."""
    n, a = p.dim_v, p.dim_a
    m = psi.reshape(n, n)
    b = (p.B @ m).reshape(n, a, n)
    c = (p.C @ m).reshape(n, a, n)
    return np.einsum("var,waq->vrwq", b, c.conj()).reshape(n * n, n * n)


def _linearization(p: StinespringPair, psi: np.ndarray) -> tuple[float, np.ndarray]:
    """Trace norm of the extended output and the operator ``W`` that linearizes it at ``psi``.

    ``W`` is the Hermitian part of ``(C (x) I)^H (S (x) I_A) (B (x) I)`` with
    ``S`` the sign of the (Hermitian) output. ``<psi|W|psi>`` equals the trace
    norm at ``psi`` and lower-bounds it everywhere else, since ``||S|| <= 1``.
    """
    n = p.dim_v
    out = _extended_output(p, psi)
    out = 0.5 * (out + out.conj().T)
    lam, vecs = np.linalg.eigh(out)
    value = float(np.sum(np.abs(lam)))
    s4 = ((vecs * np.sign(lam)) @ vecs.conj().T).reshape(n, n, n, n)  # (v, r, w, q)
    b = p.B.reshape(n, p.dim_a, n)  # (w, a, i)
    c = p.C.reshape(n, p.dim_a, n)
    k = np.einsum("vaj,vrwq,wai->jriq", c.conj(), s4, b).reshape(n * n, n * n)
    return value, 0.5 * (k + k.conj().T)


def bruteforce_diamond(p: StinespringPair, cfg: BruteForceConfig | None = None) -> float:
    """Multi-start ascent of ``||(T (x) I)(|psi><psi|)||_1`` over unit ``psi``.

    Valid for Hermitian-preserving ``T`` (differences of completely positive
    maps, scaled channels); the reference system has the same dimension as
    the input. Each step fixes the sign matrix of the current output and
    jumps to the top eigenvector of the resulting linearization, so the value
    never decreases.
    """
    cfg = cfg or BruteForceConfig()
    j = choi_from_stinespring(p).matrix
    if not np.allclose(j, j.conj().T, rtol=0.0, atol=1e-10 * max(1.0, np.abs(j).max())):
        raise InvalidInputError("bruteforce_diamond needs a Hermitian-preserving map")
    dim = p.dim_v**2
    best = 0.0
    for rng in _restart_rngs(cfg):
        psi = _random_unit(rng, dim)
        val, w = _linearization(p, psi)
        for _ in range(cfg.ascent_steps):
            psi = np.linalg.eigh(w)[1][:, -1]
            new, w = _linearization(p, psi)
            gain = new - val
            val = max(val, new)
            if gain <= cfg.tol * max(1.0, val):
                break
        best = max(best, val)
    return best


def _numerical_range_distance(eigs: np.ndarray) -> float:
    """Distance from 0 to the convex hull of points on the unit circle."""
    angles = np.sort(np.mod(np.angle(eigs), 2 * np.pi))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
    largest = float(np.max(gaps))
    if largest <= np.pi:
        return 0.0
    # The points fit in an arc of width 2pi - largest; its chord is the nearest edge.
    return float(np.cos((2 * np.pi - largest) / 2))


def unitary_diamond(u, v) -> float:
    """``||U . U^H - V . V^H||_diamond = 2 sqrt(1 - d^2)`` with ``d`` the distance from 0 to W(U^H V)."""
    u, v = as_matrix(u, "u"), as_matrix(v, "v")
    if u.shape != v.shape or not is_unitary(u) or not is_unitary(v):
        raise InvalidInputError("u and v must be unitaries of the same dimension")
    eigs = np.linalg.eigvals(u.conj().T @ v)
    d = min(1.0, _numerical_range_distance(eigs))
    return 2.0 * float(np.sqrt(1.0 - d * d))


def fidelity_seesaw(d: DerivedPair, cfg: BruteForceConfig | None = None) -> float:
    """Alternating maximization of ``sqrtF(T1(rho), T2(xi))`` through purifications.

    With ``rho, xi`` purified by unit ``u, w`` on ``V (x) R`` the value is
    ``max_W |<u| (B (x) I)^H (W_VR (x) I_A) (C (x) I) |w>|`` over unitaries
    ``W``. The loop alternates the polar-decomposition optimum for ``W`` with
    the top singular pair of the resulting operator for ``(u, w)``; each half
    step cannot decrease the value.
    """
    cfg = cfg or BruteForceConfig()
    n, a = d.dim_v, d.dim_a
    dim = n * n
    Bb = d.B.reshape(n, a, n)  # (v, a, i)
    Cb = d.C.reshape(n, a, n)
    best = 0.0
    for rng in _restart_rngs(cfg):
        u = _random_unit(rng, dim)
        w = _random_unit(rng, dim)
        val = 0.0
        for _ in range(cfg.ascent_steps):
            bu = np.einsum("vai,ir->var", Bb, u.reshape(n, n))
            cw = np.einsum("vai,ir->var", Cb, w.reshape(n, n))
            # overlap <bu| (W (x) I_A) |cw> = Tr(W X) with X = sum_a |cw_a><bu_a|
            X = np.einsum("var,wap->vrwp", cw, bu.conj()).reshape(dim, dim)
            U, s, Vh = np.linalg.svd(X)
            W = Vh.conj().T @ U.conj().T
            W4 = W.reshape(n, n, n, n)
            # M = (B (x) I)^H (W (x) I_A) (C (x) I) on V (x) R
            wc = np.einsum("vrwp,wai->vraip", W4, Cb)
            M = np.einsum("vaj,vraip->jrip", Bb.conj(), wc).reshape(dim, dim)
            U2, s2, Vh2 = np.linalg.svd(M)
            u, w = U2[:, 0], Vh2[0].conj()
            new = float(s2[0])
            if new - val <= cfg.tol * max(1.0, new):
                val = max(val, new)
                break
            val = new
        best = max(best, val)
    return best
