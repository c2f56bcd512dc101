"""Root fidelity and the convex target ``g(x, y) = -sqrtF(T1(Phi(x)), T2(Phi(y)))``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coords import coords_adjoint, decode, n_coords
from .matkernel import (
    DomainError,
    InvalidInputError,
    eig_hermitian,
    hermitian,
    psd_sqrt,
    spectral_norm,
    trace_norm,
)
from .superop import DerivedPair, StinespringPair, apply_derived, superop_spectral_norm

NEGATIVE_EIG_TOL = 1e-6


class PrecisionError(ArithmeticError):
    """Raised when double precision cannot deliver a requested accuracy."""


def _checked_psd(m, name: str) -> np.ndarray:
    h = hermitian(m, name, atol=1e-10)
    lam = np.linalg.eigvalsh(h)
    if lam.size and lam[0] < -NEGATIVE_EIG_TOL * max(1.0, abs(lam[-1])):
        raise DomainError(f"{name} has eigenvalue {lam[0]:.3e}; not positive semidefinite")
    return h


def sqrt_fidelity(rho, sigma) -> float:
    """``||sqrt(rho) sqrt(sigma)||_1`` for PSD operators of any trace.

    Eigenvalues down to ``-1e-6`` (relative) are treated as roundoff and clipped.
    """
    rho = _checked_psd(rho, "rho")
    sigma = _checked_psd(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise InvalidInputError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    return trace_norm(psd_sqrt(rho) @ psd_sqrt(sigma))


def _root_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dec = eig_hermitian(m)
    return np.sqrt(np.clip(dec.eigenvalues, 0.0, None)), dec.eigenvectors


def _pullback(k: np.ndarray, roots: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. ``A`` of ``Re Tr(K dS)`` where ``S = sqrt(A)``.

    ``S dS + dS S = dA`` is solved in the eigenbasis of ``S``.
    """
    kt = vecs.conj().T @ k @ vecs
    g = kt / (roots[:, None] + roots[None, :])
    g = vecs @ g @ vecs.conj().T
    return 0.5 * (g + g.conj().T)


def sqrt_fidelity_with_gradients(rho, sigma) -> tuple[float, np.ndarray, np.ndarray]:
    """Value and Hermitian gradients of ``sqrtF`` at positive definite ``rho, sigma``.

    With ``R = sqrt(rho)``, ``S = sqrt(sigma)`` and ``R S = W D V^H`` the
    value is ``sum(D)``; the gradients (equal to ``R (R sigma R)^{-1/2} R / 2``
    and its mirror) come from differentiating ``Re Tr(V W^H R S)`` through
    both square roots, which avoids inverting ``R sigma R``.
    """
    r_roots, r_vecs = _root_eig(rho)
    s_roots, s_vecs = _root_eig(sigma)
    if r_roots[-1] <= 0 or s_roots[-1] <= 0:
        raise PrecisionError("fidelity gradient needs positive definite arguments")
    R = (r_vecs * r_roots) @ r_vecs.conj().T
    S = (s_vecs * s_roots) @ s_vecs.conj().T
    w, d, vh = np.linalg.svd(R @ S)
    phase = vh.conj().T @ w.conj().T  # V W^H
    g_rho = _pullback(S @ phase, r_roots, r_vecs)
    g_sigma = _pullback(phase @ R, s_roots, s_vecs)
    return float(np.sum(d)), g_rho, g_sigma


def default_delta(norm_t1: float, norm_t2: float) -> float:
    return 1e-10 * (1.0 + norm_t1 + norm_t2)


@dataclass(frozen=True)
class Objective:
    """The target ``g`` for a Stinespring pair, with the norms its error budget needs."""

    derived: DerivedPair
    dim_v: int
    norm_b: float
    norm_c: float
    norm_t1: float
    norm_t2: float
    delta: float = field(default=0.0)

    @classmethod
    def from_pair(cls, p: StinespringPair, delta: float | None = None) -> Objective:
        d = p.derived
        t1 = superop_spectral_norm(d, "t1")
        t2 = superop_spectral_norm(d, "t2")
        if delta is None:
            delta = default_delta(t1, t2)
        return cls(d, p.dim_v, spectral_norm(p.B), spectral_norm(p.C), t1, t2, float(delta))

    @property
    def dim_a(self) -> int:
        return self.derived.dim_a

    @property
    def n(self) -> int:
        """Dimension of the product coordinate space."""
        return 2 * n_coords(self.dim_v)

    @property
    def bound(self) -> float:
        """``M = N sqrt(||T1|| ||T2||)``; ``-M <= g <= 0`` on the feasible product."""
        return self.dim_v * float(np.sqrt(self.norm_t1 * self.norm_t2))

    def images(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        return (
            apply_derived(self.derived, "t1", decode(x, self.dim_v)),
            apply_derived(self.derived, "t2", decode(y, self.dim_v)),
        )

    def smoothing_error(self, delta: float | None = None) -> float:
        """Uniform bound on ``|g_delta - g|`` over density-matrix inputs.

        ``||sqrt(M + delta I) - sqrt(M)|| <= sqrt(delta)`` combined with the
        trace-norm perturbation bound and ``||sqrt(T1(rho))|| <= ||B||``.
        """
        delta = self.delta if delta is None else delta
        z = np.sqrt(delta)
        return self.dim_a * z * (self.norm_b + self.norm_c + 2.0 * z)

    def split(self, z) -> tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=float)
        k = n_coords(self.dim_v)
        if z.shape != (2 * k,):
            raise InvalidInputError(f"expected {2 * k} product coordinates, got shape {z.shape}")
        return z[:k], z[k:]

    def evaluate(self, z) -> tuple[float, np.ndarray]:
        """Value and gradient of the delta-regularized ``g`` at product point ``z``."""
        x, y = self.split(z)
        gx, gy, val = _regularized(self, x, y, self.delta)
        return val, np.concatenate([gx, gy])


def g_exact(obj: Objective, x, y) -> float:
    m1, m2 = obj.images(x, y)
    return -sqrt_fidelity(m1, m2)


def _root_error_bound(s: np.ndarray, m: np.ndarray) -> float:
    """A posteriori bound on ``||s - sqrt(m)||`` for PSD ``s``.

    Uses ``||sqrt(A) - sqrt(B)|| <= min(sqrt(r), r / lambda_min(sqrt(A)))`` with
    ``r = ||A - B||`` and ``A = s @ s``.
    """
    r = spectral_norm(s @ s - m)
    floor = float(np.linalg.eigvalsh(s)[0])
    return min(float(np.sqrt(r)), r / floor) if floor > 0 else float(np.sqrt(r))


def g_oracle(obj: Objective, x, y, eps: float) -> float:
    """Evaluation oracle: a value within ``eps`` of ``g(x, y)``.

    Square roots are accepted when they are within ``zeta / 2`` of the true
    ones, ``zeta = eps / (2 N (||B|| + ||C|| + 1))``, or when the trace-norm
    perturbation bound ``N (e1 ||S2|| + (||S1|| + e1) e2)`` they induce is
    already below ``eps / 2``. Near-singular images make the first test
    unattainable in double precision for small ``eps`` while the second,
    which is what the schedule exists to guarantee, still holds.
    """
    if not eps > 0:
        raise InvalidInputError(f"eps must be positive, got {eps}")
    zeta = eps / (2.0 * obj.dim_v * (obj.norm_b + obj.norm_c + 1.0))
    roots, errs = [], []
    for m in obj.images(x, y):
        s = psd_sqrt(_checked_psd(m, "T(Phi(x))"), clip_negative=True)
        roots.append(s)
        errs.append(_root_error_bound(s, m))
    n1, n2 = spectral_norm(roots[0]), spectral_norm(roots[1])
    induced = obj.dim_v * (errs[0] * n2 + (n1 + errs[0]) * errs[1])
    if max(errs) > zeta / 2 and induced > eps / 2:
        raise PrecisionError(
            f"square-root errors {errs[0]:.2e}, {errs[1]:.2e} exceed the budget for eps={eps:.2e}"
        )
    return -trace_norm(roots[0] @ roots[1])


def _regularized(obj: Objective, x, y, delta: float) -> tuple[np.ndarray, np.ndarray, float]:
    if not delta > 0:
        raise InvalidInputError(f"delta must be positive, got {delta}")
    m1, m2 = obj.images(x, y)
    eye = np.eye(obj.dim_a)
    val, g1, g2 = sqrt_fidelity_with_gradients(m1 + delta * eye, m2 + delta * eye)
    gx = coords_adjoint(obj.derived.adjoint("t1", g1), obj.dim_v)
    gy = coords_adjoint(obj.derived.adjoint("t2", g2), obj.dim_v)
    return -gx, -gy, -val


def g_regularized(obj: Objective, x, y, delta: float) -> float:
    """``-sqrtF(T1(Phi(x)) + delta I, T2(Phi(y)) + delta I)``; convex, within ``smoothing_error`` of g."""
    return _regularized(obj, x, y, delta)[2]


def g_subgradient(obj: Objective, x, y, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of the delta-regularized target with respect to ``x`` and ``y``."""
    gx, gy, _ = _regularized(obj, x, y, delta)
    return gx, gy
