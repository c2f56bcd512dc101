"""Super-operator representations and conversions.

A super-operator ``T: L(V) -> L(V)`` is held in Stinespring form as a pair of
operators ``B, C: V -> V (x) A`` with ``T(X) = Tr_A(B X C^H)``. From the same
pair come the two completely positive maps ``T1(X) = Tr_V(B X B^H)`` and
``T2(X) = Tr_V(C X C^H)`` into ``L(A)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matkernel import InvalidInputError, as_matrix, is_unitary, partial_trace, spectral_norm

# Singular values of the Choi matrix below this fraction of the largest are dropped.
CHOI_RANK_RTOL = 1e-12


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _ancilla_blocks(m: np.ndarray, dim_v: int, dim_a: int) -> np.ndarray:
    """Reshape a ``(dim_v*dim_a) x dim_v`` operator into blocks ``[a] -> (dim_v x dim_v)``."""
    return m.reshape(dim_v, dim_a, dim_v).transpose(1, 0, 2)


@dataclass(frozen=True)
class StinespringPair:
    """The pair ``(B, C)`` defining ``T(X) = Tr_A(B X C^H)``.

    ``dim_v`` must be a power of two and ``dim_a <= dim_v**2``.
    """

    dim_v: int
    dim_a: int
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        dim_v, dim_a = int(self.dim_v), int(self.dim_a)
        if not is_power_of_two(dim_v):
            raise InvalidInputError(
                f"dim_v={dim_v} is not a power of 2; the Pauli-coordinate chart "
                "requires a system of qubits (dim_v = 2**n)"
            )
        if dim_a < 1 or dim_a > dim_v**2:
            raise InvalidInputError(f"dim_a={dim_a} must lie in [1, dim_v**2={dim_v**2}]")
        B = as_matrix(self.B, "B")
        C = as_matrix(self.C, "C")
        shape = (dim_v * dim_a, dim_v)
        if B.shape != shape or C.shape != shape:
            raise InvalidInputError(
                f"B and C must both have shape {shape}, got {B.shape} and {C.shape}"
            )
        B, C = B.copy(), C.copy()
        B.flags.writeable = False
        C.flags.writeable = False
        object.__setattr__(self, "dim_v", dim_v)
        object.__setattr__(self, "dim_a", dim_a)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    @classmethod
    def identity(cls, dim_v: int) -> StinespringPair:
        eye = np.eye(dim_v, dtype=np.complex128)
        return cls(dim_v, 1, eye, eye)

    @classmethod
    def zero(cls, dim_v: int) -> StinespringPair:
        eye = np.eye(dim_v, dtype=np.complex128)
        return cls(dim_v, 1, eye, np.zeros_like(eye))

    def scaled(self, b_factor: complex, c_factor: complex = 1.0) -> StinespringPair:
        return StinespringPair(self.dim_v, self.dim_a, b_factor * self.B, c_factor * self.C)

    @property
    def derived(self) -> DerivedPair:
        return DerivedPair(self.dim_v, self.dim_a, self.B, self.C)


@dataclass(frozen=True)
class NaturalRep:
    """Matrix ``K`` with ``vec(T(X)) = K vec(X)`` under row-major vectorization."""

    dim_v: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "natural matrix")
        d2 = int(self.dim_v) ** 2
        if m.shape != (d2, d2):
            raise InvalidInputError(f"natural matrix must be {d2}x{d2}, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    def apply(self, x) -> np.ndarray:
        n = self.dim_v
        return (self.matrix @ as_matrix(x).reshape(-1)).reshape(n, n)


@dataclass(frozen=True)
class ChoiMatrix:
    """``J(T) = sum_ij T(|i><j|) (x) |i><j|``."""

    dim_v: int
    matrix: np.ndarray


@dataclass(frozen=True)
class DerivedPair:
    """The completely positive maps ``T1`` (generated by B) and ``T2`` (generated by C)."""

    dim_v: int
    dim_a: int
    B: np.ndarray
    C: np.ndarray

    def generator(self, which: str) -> np.ndarray:
        if which == "t1":
            return self.B
        if which == "t2":
            return self.C
        raise InvalidInputError(f"which must be 't1' or 't2', got {which!r}")

    def natural(self, which: str) -> np.ndarray:
        """The ``dim_a**2 x dim_v**2`` matrix of the chosen map on row-major vectorizations."""
        g = _ancilla_blocks(self.generator(which), self.dim_v, self.dim_a)
        # T(X)[a, b] = sum_v sum_ij g[a, v, i] X[i, j] conj(g[b, v, j])
        k = np.einsum("avi,bvj->abij", g, g.conj())
        return k.reshape(self.dim_a**2, self.dim_v**2)

    def adjoint(self, which: str, y) -> np.ndarray:
        """Hilbert-Schmidt adjoint ``X -> G^H (I_V (x) Y) G`` of the chosen map."""
        g = self.generator(which)
        lifted = np.kron(np.eye(self.dim_v), as_matrix(y))
        return g.conj().T @ lifted @ g


def apply_stinespring(p: StinespringPair, x) -> np.ndarray:
    x = as_matrix(x, "x")
    if x.shape != (p.dim_v, p.dim_v):
        raise InvalidInputError(f"x must be {p.dim_v}x{p.dim_v}, got {x.shape}")
    return partial_trace(p.B @ x @ p.C.conj().T, p.dim_v, p.dim_a, "second")


def apply_derived(d: DerivedPair, which: str, rho) -> np.ndarray:
    rho = as_matrix(rho, "rho")
    if rho.shape != (d.dim_v, d.dim_v):
        raise InvalidInputError(f"rho must be {d.dim_v}x{d.dim_v}, got {rho.shape}")
    g = d.generator(which)
    return partial_trace(g @ rho @ g.conj().T, d.dim_v, d.dim_a, "first")


def superop_spectral_norm(d: DerivedPair, which: str) -> float:
    """Spectral norm of ``T1`` or ``T2`` as a linear map between Hilbert-Schmidt spaces."""
    return spectral_norm(d.natural(which))


def natural_from_stinespring(p: StinespringPair) -> NaturalRep:
    b = _ancilla_blocks(p.B, p.dim_v, p.dim_a)
    c = _ancilla_blocks(p.C, p.dim_v, p.dim_a)
    # row-major vec(B_k X C_k^H) = (B_k (x) conj(C_k)) vec(X)
    k = np.einsum("kai,kbj->abij", b, c.conj())
    n2 = p.dim_v**2
    return NaturalRep(p.dim_v, k.reshape(n2, n2))


def choi_from_natural(n: NaturalRep) -> ChoiMatrix:
    d = n.dim_v
    j = n.matrix.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    return ChoiMatrix(d, j)


def natural_from_choi(j: ChoiMatrix) -> NaturalRep:
    d = j.dim_v
    k = as_matrix(j.matrix).reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    return NaturalRep(d, k)


def choi_from_stinespring(p: StinespringPair) -> ChoiMatrix:
    return choi_from_natural(natural_from_stinespring(p))


def stinespring_from_natural(n: NaturalRep) -> StinespringPair:
    """Stinespring pair from the singular value decomposition of the Choi matrix.

    With ``J = sum_k s_k vec(A_k) vec(B_k)^H`` the branches are ``sqrt(s_k) A_k``
    and ``sqrt(s_k) B_k``; branches with negligible ``s_k`` are dropped.
    """
    d = n.dim_v
    j = choi_from_natural(n).matrix
    u, s, wh = np.linalg.svd(j)
    keep = s > CHOI_RANK_RTOL * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    rank = max(1, int(np.count_nonzero(keep)))
    root = np.sqrt(s[:rank])
    # Choi row index is (a, i): output row a, input column i.
    b_blocks = (u[:, :rank] * root).T.reshape(rank, d, d)
    c_blocks = (wh[:rank].conj().T * root).T.reshape(rank, d, d)
    if not np.any(keep):
        b_blocks = np.zeros((1, d, d), dtype=np.complex128)
        b_blocks[0] = np.eye(d)
        c_blocks = np.zeros((1, d, d), dtype=np.complex128)
    B = b_blocks.transpose(1, 0, 2).reshape(d * rank, d)
    C = c_blocks.transpose(1, 0, 2).reshape(d * rank, d)
    return StinespringPair(d, rank, B, C)


def stinespring_of_difference(u, v) -> StinespringPair:
    """Pair realizing ``X -> U X U^H - V X V^H`` with a two-dimensional ancilla."""
    u, v = as_matrix(u, "u"), as_matrix(v, "v")
    if u.shape != v.shape or not is_unitary(u) or not is_unitary(v):
        raise InvalidInputError("u and v must be unitaries of the same dimension")
    return stinespring_of_channel_difference(u, v)


def stinespring_of_channel_difference(w1, w2, weight: float = 1.0) -> StinespringPair:
    """Pair realizing ``weight * (Phi_1 - Phi_2)`` for channels with isometries ``w1, w2``.

    Each ``w_i`` maps ``V -> V (x) E`` (first-factor-major); the resulting
    ancilla is ``E (x) C^2`` with the branch label last.
    """
    w1, w2 = as_matrix(w1, "w1"), as_matrix(w2, "w2")
    if w1.shape != w2.shape:
        raise InvalidInputError("isometries must have the same shape")
    n = w1.shape[1]
    e = w1.shape[0] // n
    if e * n != w1.shape[0]:
        raise InvalidInputError(f"isometry rows {w1.shape[0]} not a multiple of {n}")
    s = np.sqrt(weight)
    b = np.stack([w1, w2], axis=1) * s  # rows: (v*e + k), branch
    c = np.stack([w1, -w2], axis=1) * s
    B = b.reshape(n * e * 2, n)
    C = c.reshape(n * e * 2, n)
    return StinespringPair(n, 2 * e, B, C)


def tensor_superop(p: StinespringPair, q: StinespringPair) -> StinespringPair:
    """Stinespring pair of ``T_p (x) T_q`` with ancilla ``A_p (x) A_q``."""

    def combine(x, y):
        t = np.kron(x, y).reshape(p.dim_v, p.dim_a, q.dim_v, q.dim_a, p.dim_v * q.dim_v)
        t = t.transpose(0, 2, 1, 3, 4)
        return t.reshape(p.dim_v * q.dim_v * p.dim_a * q.dim_a, p.dim_v * q.dim_v)

    return StinespringPair(
        p.dim_v * q.dim_v, p.dim_a * q.dim_a, combine(p.B, q.B), combine(p.C, q.C)
    )


def random_isometry(dim_in: int, dim_out: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim_out, dim_in)) + 1j * rng.normal(size=(dim_out, dim_in))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return random_isometry(dim, dim, rng)


def random_channel_difference(
    dim_v: int, rng: np.random.Generator, env_dim: int = 2
) -> StinespringPair:
    """Difference of two random channels, each given by a random isometry ``V -> V (x) E``."""
    w1 = random_isometry(dim_v, dim_v * env_dim, rng)
    w2 = random_isometry(dim_v, dim_v * env_dim, rng)
    return stinespring_of_channel_difference(w1, w2)
