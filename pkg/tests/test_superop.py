import numpy as np
import pytest

from diamondnorm.matkernel import InvalidInputError, eig_hermitian, psd_sqrt, spectral_norm
from diamondnorm.superop import (
    NaturalRep,
    StinespringPair,
    apply_derived,
    apply_stinespring,
    choi_from_natural,
    choi_from_stinespring,
    natural_from_choi,
    natural_from_stinespring,
    random_channel_difference,
    random_unitary,
    stinespring_from_natural,
    stinespring_of_difference,
    superop_spectral_norm,
    tensor_superop,
)

from conftest import random_complex

I2 = np.eye(2)
Z = np.diag([1.0, -1.0])
PLUS = np.full((2, 2), 0.5)


def random_pair(n, a, rng):
    return StinespringPair(n, a, random_complex(n * a, n, rng), random_complex(n * a, n, rng))


def natural_by_columns(fun, dim_in):
    """Natural matrix assembled by applying ``fun`` to each matrix unit."""
    cols = []
    for i in range(dim_in):
        for j in range(dim_in):
            e = np.zeros((dim_in, dim_in), dtype=complex)
            e[i, j] = 1
            cols.append(fun(e).reshape(-1))
    return np.array(cols).T


def power_norm(k, iters=5000, seed=0):
    v = np.random.default_rng(seed).normal(size=k.shape[1]).astype(complex)
    for _ in range(iters):
        v = k.conj().T @ (k @ v)
        v /= np.linalg.norm(v)
    return np.linalg.norm(k @ v)


def test_pair_validation():
    with pytest.raises(InvalidInputError, match="power of 2"):
        StinespringPair(3, 1, np.eye(3), np.eye(3))
    with pytest.raises(InvalidInputError):
        StinespringPair(2, 5, np.zeros((10, 2)), np.zeros((10, 2)))
    with pytest.raises(InvalidInputError):
        StinespringPair(2, 2, np.zeros((4, 2)), np.zeros((2, 2)))


def test_apply_stinespring_examples(rng):
    x = random_complex(2, 2, rng)
    np.testing.assert_allclose(apply_stinespring(StinespringPair.identity(2), x), x)
    np.testing.assert_array_equal(apply_stinespring(StinespringPair.zero(2), x), np.zeros((2, 2)))
    u, v = random_unitary(2, rng), random_unitary(2, rng)
    rho = PLUS
    got = apply_stinespring(stinespring_of_difference(u, v), rho)
    np.testing.assert_allclose(got, u @ rho @ u.conj().T - v @ rho @ v.conj().T, atol=1e-12)
    with pytest.raises(InvalidInputError):
        apply_stinespring(StinespringPair.identity(2), np.eye(3))


def test_apply_stinespring_linear(rng):
    p = random_pair(2, 3, rng)
    x, y = random_complex(2, 2, rng), random_complex(2, 2, rng)
    a, b = 1.5 - 0.5j, -0.25
    lhs = apply_stinespring(p, a * x + b * y)
    rhs = a * apply_stinespring(p, x) + b * apply_stinespring(p, y)
    assert spectral_norm(lhs - rhs) <= 1e-12 * max(1, spectral_norm(lhs))


def test_apply_derived_examples(rng):
    d = StinespringPair.identity(2).derived
    np.testing.assert_allclose(apply_derived(d, "t1", PLUS), [[1.0]])
    w, _ = np.linalg.qr(random_complex(6, 2, rng))
    iso = StinespringPair(2, 3, w, w).derived
    rho = np.array([[0.6, 0.1j], [-0.1j, 0.4]])
    assert np.trace(apply_derived(iso, "t1", rho)).real == pytest.approx(1.0)
    # B|+> = |+>|0> + |->|1>, maximally entangled across V and A.
    iz = stinespring_of_difference(I2, Z).derived
    np.testing.assert_allclose(apply_derived(iz, "t1", PLUS), I2, atol=1e-12)
    np.testing.assert_allclose(apply_derived(iz, "t2", PLUS), I2, atol=1e-12)


def test_derived_maps_completely_positive_and_bounded(rng):
    from diamondnorm.acceptance import random_density

    p = random_pair(2, 4, rng)
    d = p.derived
    for _ in range(100):
        rho = random_density(2, rng, int(rng.integers(1, 3)))
        for which, gen in (("t1", p.B), ("t2", p.C)):
            out = apply_derived(d, which, rho)
            assert eig_hermitian(out).min_eigenvalue >= -1e-10
            assert spectral_norm(psd_sqrt(out)) <= spectral_norm(gen) * (1 + 1e-12)


def test_superop_norm_identity_channel():
    d = StinespringPair.identity(2).derived
    # X -> Tr(X) has natural matrix vec(I)^T, a single row of norm sqrt(2).
    row = np.eye(2).reshape(1, -1)
    assert superop_spectral_norm(d, "t1") == pytest.approx(np.linalg.svd(row)[1][0])
    assert superop_spectral_norm(d, "t1") == pytest.approx(np.sqrt(2))


def test_superop_norm_scaling_and_power_method(rng):
    p = random_pair(2, 3, rng)
    n1 = superop_spectral_norm(p.derived, "t1")
    assert superop_spectral_norm(p.scaled(3.0).derived, "t1") == pytest.approx(9 * n1)
    d = p.derived
    for which in ("t1", "t2"):
        k = natural_by_columns(lambda e: apply_derived(d, which, e), 2)
        np.testing.assert_allclose(k, d.natural(which), atol=1e-12)
        assert superop_spectral_norm(d, which) == pytest.approx(power_norm(k), abs=1e-8)


def test_derived_adjoint(rng):
    d = random_pair(2, 3, rng).derived
    x, y = random_complex(2, 2, rng), random_complex(3, 3, rng)
    for which in ("t1", "t2"):
        lhs = np.vdot(y, apply_derived(d, which, x + x.conj().T))
        rhs = np.vdot(d.adjoint(which, y), x + x.conj().T)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_natural_from_stinespring(rng):
    np.testing.assert_allclose(natural_from_stinespring(StinespringPair.identity(2)).matrix, np.eye(4))
    np.testing.assert_array_equal(natural_from_stinespring(StinespringPair.zero(4)).matrix, 0)
    p = random_pair(2, 3, rng)
    nat = natural_from_stinespring(p)
    for _ in range(20):
        x = random_complex(2, 2, rng)
        assert spectral_norm(nat.apply(x) - apply_stinespring(p, x)) <= 1e-10


def test_stinespring_from_natural_identity_and_zero():
    p = stinespring_from_natural(NaturalRep(2, np.eye(4)))
    assert p.dim_a == 1
    phase = p.B[0, 0]
    assert abs(phase) == pytest.approx(1.0)
    np.testing.assert_allclose(p.B / phase, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(p.C / phase, np.eye(2), atol=1e-12)
    z = stinespring_from_natural(NaturalRep(2, np.zeros((4, 4))))
    assert z.dim_a == 1
    np.testing.assert_array_equal(natural_from_stinespring(z).matrix, 0)


@pytest.mark.parametrize("dim", [2, 4])
def test_natural_roundtrip(dim, rng):
    m = random_complex(dim * dim, dim * dim, rng)
    p = stinespring_from_natural(NaturalRep(dim, m))
    assert p.dim_a <= dim * dim
    assert spectral_norm(natural_from_stinespring(p).matrix - m) <= 1e-9


def test_rank_minimized_ancilla(rng):
    p = random_channel_difference(2, rng, env_dim=1)
    assert stinespring_from_natural(natural_from_stinespring(p)).dim_a == 2


def test_choi_conversions(rng):
    m = random_complex(4, 4, rng)
    nat = NaturalRep(2, m)
    np.testing.assert_allclose(natural_from_choi(choi_from_natural(nat)).matrix, m)
    j = choi_from_stinespring(random_channel_difference(2, rng)).matrix
    np.testing.assert_allclose(j, j.conj().T, atol=1e-12)
    w, _ = np.linalg.qr(random_complex(8, 2, rng))
    jcp = choi_from_stinespring(StinespringPair(2, 4, w, w)).matrix
    assert eig_hermitian(jcp).min_eigenvalue >= -1e-10


def test_difference_examples(rng):
    assert spectral_norm(natural_from_stinespring(stinespring_of_difference(Z, Z)).matrix) <= 1e-12
    p = stinespring_of_difference(I2, Z)
    assert p.dim_a == 2
    x = random_complex(2, 2, rng)
    np.testing.assert_allclose(apply_stinespring(p, x), x - Z @ x @ Z, atol=1e-12)
    with pytest.raises(InvalidInputError):
        stinespring_of_difference(I2, 2 * Z)


def test_tensor_superop(rng):
    ident = tensor_superop(StinespringPair.identity(2), StinespringPair.identity(2))
    np.testing.assert_allclose(natural_from_stinespring(ident).matrix, np.eye(16), atol=1e-12)
    zero = tensor_superop(random_pair(2, 2, rng), StinespringPair.zero(2))
    assert spectral_norm(natural_from_stinespring(zero).matrix) == 0
    p, q = random_pair(2, 3, rng), random_pair(2, 2, rng)
    pq = tensor_superop(p, q)
    for _ in range(5):
        x, y = random_complex(2, 2, rng), random_complex(2, 2, rng)
        lhs = apply_stinespring(pq, np.kron(x, y))
        rhs = np.kron(apply_stinespring(p, x), apply_stinespring(q, y))
        assert spectral_norm(lhs - rhs) <= 1e-10 * max(1, spectral_norm(rhs))
