"""Pauli-coordinate chart for density matrices and the feasible bodies built on it.

A unit-trace Hermitian ``rho`` on ``n`` qubits (``N = 2**n``) is represented by
``x_i = Tr(P_{i+1} rho)`` for the ``N**2 - 1`` non-identity tensor-product
Paulis, and decoded by ``Phi(x) = (I + sum_i x_i P_{i+1}) / N``.

Paulis are ordered lexicographically over ``(i_1, ..., i_n)`` with each
``i_k`` in ``I, X, Y, Z``; the identity is first and is omitted from coordinates.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, replace

import numpy as np

from .matkernel import InvalidInputError, eig_hermitian, hermitian, project_to_density
from .superop import is_power_of_two

_SIGMA = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


@dataclass(frozen=True)
class PauliBasis:
    n_qubits: int
    operators: np.ndarray  # shape (N**2, N, N), identity first

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def labels(self) -> list[str]:
        return ["".join("IXYZ"[i] for i in idx) for idx in itertools.product(range(4), repeat=self.n_qubits)]


@functools.lru_cache(maxsize=None)
def pauli_basis(dim: int) -> PauliBasis:
    if not is_power_of_two(dim):
        raise InvalidInputError(f"dimension {dim} is not a power of 2")
    n = dim.bit_length() - 1
    ops = []
    for idx in itertools.product(range(4), repeat=n):
        m = np.ones((1, 1), dtype=np.complex128)
        for i in idx:
            m = np.kron(m, _SIGMA[i])
        ops.append(m)
    arr = np.array(ops) if n else np.ones((1, 1, 1), dtype=np.complex128)
    arr.flags.writeable = False
    return PauliBasis(n, arr)


def n_coords(dim: int) -> int:
    return dim * dim - 1


def _check_coords(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n_coords(dim),):
        raise InvalidInputError(f"expected {n_coords(dim)} coordinates for N={dim}, got shape {x.shape}")
    return x


def encode(rho, atol: float = 1e-10) -> np.ndarray:
    rho = hermitian(rho, "rho", atol=atol)
    dim = rho.shape[0]
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise InvalidInputError(f"rho must have unit trace, got {tr:.12g}")
    ops = pauli_basis(dim).operators[1:]
    # Tr(P rho) = sum_ij P[i, j] rho[j, i]
    vals = np.einsum("kij,ji->k", ops, rho)
    if np.max(np.abs(vals.imag), initial=0.0) > atol:
        raise InvalidInputError("Pauli coefficients are not real")
    return vals.real.copy()


def decode(x, dim: int) -> np.ndarray:
    x = _check_coords(x, dim)
    ops = pauli_basis(dim).operators
    m = np.eye(dim, dtype=np.complex128) + np.tensordot(x, ops[1:], axes=1)
    m /= dim
    return 0.5 * (m + m.conj().T)


def coords_adjoint(h, dim: int) -> np.ndarray:
    """Pull a matrix gradient back to coordinates: ``d/dx_i Re Tr(H Phi(x)) = Re Tr(H P_{i+1}) / N``."""
    ops = pauli_basis(dim).operators[1:]
    return np.einsum("kij,ji->k", ops, np.asarray(h)).real / dim


def dim_from_coords(n: int) -> int:
    dim = int(round(np.sqrt(n + 1)))
    if dim * dim - 1 != n or not is_power_of_two(dim):
        raise InvalidInputError(f"{n} is not N**2 - 1 for a power of two N")
    return dim


@dataclass(frozen=True)
class OracleAnswer:
    """Membership verdict; when False, ``cut = (c, b)`` with ``c . y >= b`` on the set and ``c . x < b``."""

    verdict: bool
    cut: tuple[np.ndarray, float] | None = None
    min_eigenvalue: float = float("nan")


@dataclass(frozen=True)
class FeasibleSetSpec:
    """``(1 - alpha) K1``: the Pauli image of density matrices, shrunk toward ``I/N``.

    Members are exactly the ``x`` with ``lambda_min(Phi(x)) >= alpha / N``.
    """

    dim_v: int
    alpha: float = 0.0

    def __post_init__(self):
        if not is_power_of_two(int(self.dim_v)) or self.dim_v < 2:
            raise InvalidInputError(f"dim_v={self.dim_v} must be a power of 2 (>= 2)")
        if not 0.0 <= self.alpha < 1.0:
            raise InvalidInputError(f"alpha={self.alpha} must lie in [0, 1)")

    @property
    def n(self) -> int:
        return n_coords(self.dim_v)

    @property
    def threshold(self) -> float:
        return self.alpha / self.dim_v

    @property
    def inner_radius(self) -> float:
        return (1.0 - self.alpha) / (2.0 * np.sqrt(self.dim_v))

    @property
    def outer_radius(self) -> float:
        return 2.0 * self.dim_v

    @property
    def center(self) -> np.ndarray:
        return np.zeros(self.n)

    def zeta(self, eps: float) -> float:
        """Eigenvalue accuracy the membership oracle must achieve for tolerance ``eps``."""
        return eps / (10.0 * self.dim_v**1.5)

    def membership(self, x, eps: float) -> OracleAnswer:
        return membership(self, x, eps)

    def distance_inside(self, x) -> float:
        """Exact Euclidean distance from ``x`` to the complement (negative when outside)."""
        lam = eig_hermitian(decode(x, self.dim_v)).min_eigenvalue
        return (self.dim_v * lam - self.alpha) / np.sqrt(self.dim_v - 1.0)

    def distance_outside(self, x) -> float:
        """Exact Euclidean distance from ``x`` to the set (0 for members)."""
        scale = 1.0 - self.alpha
        y = np.asarray(x, dtype=float) / scale
        rho = decode(y, self.dim_v)
        proj = project_to_density(rho)
        return scale * np.sqrt(self.dim_v) * float(np.linalg.norm(rho - proj, "fro"))


def membership(spec: FeasibleSetSpec, x, eps: float) -> OracleAnswer:
    """Membership oracle with an eigenvector cut for rejected points.

    Accepts iff ``lambda_min(Phi(x)) > alpha / N``. The dense eigensolver is
    accurate far beyond the ``zeta = eps / (10 N^1.5)`` the oracle contract
    needs, so the computed eigenvalue is compared directly.
    """
    if not eps > 0:
        raise InvalidInputError(f"eps must be positive, got {eps}")
    dim = spec.dim_v
    x = _check_coords(x, dim)
    dec = eig_hermitian(decode(x, dim))
    lam = dec.min_eigenvalue
    assert spec.zeta(eps) > 1e-15 * max(1.0, float(np.max(np.abs(dec.eigenvalues)))), (
        "requested oracle accuracy is below double precision"
    )
    if lam > spec.threshold:
        return OracleAnswer(True, None, lam)
    u = dec.min_eigenvector
    ops = pauli_basis(dim).operators[1:]
    c = np.einsum("i,kij,j->k", u.conj(), ops, u).real
    b = dim * spec.threshold - 1.0
    return OracleAnswer(False, (c, b), lam)


def shrink(spec: FeasibleSetSpec, alpha: float) -> FeasibleSetSpec:
    """``(1 - alpha) K1`` for the same dimension (alpha is absolute, not compounded)."""
    if not 0.0 <= alpha < 1.0:
        raise InvalidInputError(f"alpha={alpha} must lie in [0, 1)")
    return replace(spec, alpha=float(alpha))


@dataclass(frozen=True)
class ProductSet:
    """``F x F`` over concatenated coordinates ``z = (x, y)``."""

    factor: FeasibleSetSpec

    @property
    def n(self) -> int:
        return 2 * self.factor.n

    @property
    def inner_radius(self) -> float:
        return self.factor.inner_radius

    @property
    def outer_radius(self) -> float:
        return self.factor.outer_radius

    @property
    def center(self) -> np.ndarray:
        return np.zeros(self.n)

    def split(self, z) -> tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n,):
            raise InvalidInputError(f"expected {self.n} product coordinates, got shape {z.shape}")
        k = self.factor.n
        return z[:k], z[k:]

    def membership(self, z, eps: float) -> OracleAnswer:
        x, y = self.split(z)
        return product_membership(self.factor, x, y, eps)


def product_membership(spec: FeasibleSetSpec, x, y, eps: float) -> OracleAnswer:
    ax = membership(spec, x, eps)
    ay = membership(spec, y, eps)
    lam = min(ax.min_eigenvalue, ay.min_eigenvalue)
    if ax.verdict and ay.verdict:
        return OracleAnswer(True, None, lam)
    k = spec.n
    c = np.zeros(2 * k)
    # Cut on the more violated factor.
    if not ax.verdict and (ay.verdict or ax.min_eigenvalue <= ay.min_eigenvalue):
        c[:k], b = ax.cut
    else:
        c[k:], b = ay.cut
    return OracleAnswer(False, (c, b), lam)
