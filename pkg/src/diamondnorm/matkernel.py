"""Dense complex matrix primitives.

Every composite index over a tensor product ``V (x) A`` is first-factor-major:
the basis vector ``|v>|a>`` sits at position ``v * dim_a + a``. Vectorization
of operators is row-major (``vec(X)[i * n + j] = X[i, j]``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_ATOL = 1e-12
PSD_ATOL = 1e-10


class InvalidInputError(ValueError):
    """Raised when an argument has the wrong shape or violates a precondition."""


class DomainError(ValueError):
    """Raised when a matrix is outside the domain of an operation (e.g. not PSD)."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition with eigenvalues sorted in descending order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def min_eigenvector(self) -> np.ndarray:
        return self.eigenvectors[:, -1]


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    return arr


def hermitian(m, name: str = "matrix", atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate a Hermitian matrix and return its symmetrized copy ``(M + M^H) / 2``."""
    arr = as_matrix(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {arr.shape}")
    scale = max(1.0, float(np.max(np.abs(arr), initial=0.0)))
    if not np.allclose(arr, arr.conj().T, rtol=0.0, atol=atol * scale):
        raise InvalidInputError(f"{name} is not Hermitian")
    return 0.5 * (arr + arr.conj().T)


def eig_hermitian(m) -> EigenDecomposition:
    h = hermitian(m)
    w, v = np.linalg.eigh(h)
    return EigenDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def psd_sqrt(m, clip_negative: bool = True) -> np.ndarray:
    """Principal square root ``V diag(sqrt(max(l, 0))) V^H`` of a Hermitian matrix.

    With ``clip_negative`` off, eigenvalues below ``-1e-10`` raise DomainError
    instead of being clipped to zero.
    """
    dec = eig_hermitian(m)
    lam = dec.eigenvalues
    if not clip_negative and lam.size and lam[-1] < -PSD_ATOL:
        raise DomainError(f"matrix has negative eigenvalue {lam[-1]:.3e}")
    v = dec.eigenvectors
    root = (v * np.sqrt(np.clip(lam, 0.0, None))) @ v.conj().T
    return 0.5 * (root + root.conj().T)


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def trace_norm(m) -> float:
    """Sum of singular values."""
    return float(np.sum(singular_values(m)))


def spectral_norm(m) -> float:
    """Largest singular value (0 for an empty matrix)."""
    s = singular_values(m)
    return float(s[0]) if s.size else 0.0


def frobenius_norm(m) -> float:
    """The l2 (Hilbert-Schmidt) norm ``sqrt(Tr(A^H A))``."""
    return float(np.linalg.norm(as_matrix(m), "fro"))


def partial_trace(m, dim_first: int, dim_second: int, which: str = "second") -> np.ndarray:
    """Trace out one factor of an operator on ``C^dim_first (x) C^dim_second``.

    ``which`` names the factor that is traced out.
    """
    arr = as_matrix(m)
    d = dim_first * dim_second
    if arr.shape != (d, d):
        raise InvalidInputError(
            f"expected a {d}x{d} matrix for dims ({dim_first}, {dim_second}), got {arr.shape}"
        )
    t = arr.reshape(dim_first, dim_second, dim_first, dim_second)
    if which == "second":
        return np.einsum("iaja->ij", t)
    if which == "first":
        return np.einsum("iaib->ab", t)
    raise InvalidInputError(f"which must be 'first' or 'second', got {which!r}")


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def vec(m) -> np.ndarray:
    """Row-major vectorization."""
    return as_matrix(m).reshape(-1)


def unvec(v, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return np.asarray(v, dtype=np.complex128).reshape(rows, cols)


def is_unitary(u, atol: float = 1e-10) -> bool:
    arr = as_matrix(u)
    if arr.shape[0] != arr.shape[1]:
        return False
    return spectral_norm(arr.conj().T @ arr - np.eye(arr.shape[0])) <= atol


def project_to_density(m) -> np.ndarray:
    """Frobenius-nearest density matrix: eigenvalues projected onto the probability simplex."""
    dec = eig_hermitian(m)
    lam = dec.eigenvalues  # descending
    css = np.cumsum(lam) - 1.0
    k = np.arange(1, lam.size + 1)
    cond = lam - css / k > 0
    rho = k[cond][-1]
    shift = css[rho - 1] / rho
    p = np.clip(lam - shift, 0.0, None)
    v = dec.eigenvectors
    return (v * p) @ v.conj().T
