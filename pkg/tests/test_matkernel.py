import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diamondnorm.matkernel import (
    DomainError,
    InvalidInputError,
    eig_hermitian,
    kron,
    partial_trace,
    psd_sqrt,
    spectral_norm,
    trace_norm,
)

from conftest import random_complex, random_hermitian

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_eig_diagonal():
    dec = eig_hermitian(np.diag([1.0, 3.0]))
    np.testing.assert_allclose(dec.eigenvalues, [3, 1])
    np.testing.assert_allclose(np.abs(dec.eigenvectors), [[0, 1], [1, 0]])


def test_eig_pauli_x():
    np.testing.assert_allclose(eig_hermitian(X).eigenvalues, [1, -1], atol=1e-15)


def test_eig_reconstruction_and_unitarity(rng):
    h = random_hermitian(4, rng)
    dec = eig_hermitian(h)
    v = dec.eigenvectors
    assert spectral_norm(h - dec.reconstruct()) <= 1e-10
    assert spectral_norm(v.conj().T @ v - np.eye(4)) <= 1e-10
    assert np.all(np.diff(dec.eigenvalues) <= 0)


def test_eig_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        eig_hermitian(np.ones((2, 3)))
    with pytest.raises(InvalidInputError):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_psd_sqrt_examples():
    np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2, 3]), atol=1e-14)
    np.testing.assert_allclose(psd_sqrt(np.eye(3)), np.eye(3), atol=1e-14)
    np.testing.assert_allclose(psd_sqrt(np.diag([1.0, -1e-15])), np.diag([1, 0]), atol=1e-14)


def test_psd_sqrt_without_clipping_rejects_negative():
    with pytest.raises(DomainError):
        psd_sqrt(np.diag([1.0, -1e-3]), clip_negative=False)
    psd_sqrt(np.diag([1.0, -1e-12]), clip_negative=False)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, dim=st.integers(1, 6))
def test_psd_sqrt_squares_to_clipped(seed, dim):
    rng = np.random.default_rng(seed)
    h = random_hermitian(dim, rng)
    dec = eig_hermitian(h)
    v = dec.eigenvectors
    clipped = (v * np.clip(dec.eigenvalues, 0, None)) @ v.conj().T
    root = psd_sqrt(h)
    assert spectral_norm(root @ root - clipped) <= 1e-9 * max(1, spectral_norm(h))
    assert eig_hermitian(root).min_eigenvalue >= -1e-10


def test_trace_norm_examples(rng):
    assert trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3.0)
    q, _ = np.linalg.qr(random_complex(4, 4, rng))
    assert trace_norm(q) == pytest.approx(4.0, abs=1e-12)
    a = random_complex(3, 3, rng)
    # singular values through the eigenvalues of A^H A
    oracle = np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(a.conj().T @ a), 0, None)))
    assert trace_norm(a) == pytest.approx(oracle, rel=1e-12)


def test_spectral_norm_examples(rng):
    assert spectral_norm(Z) == pytest.approx(1.0)
    assert spectral_norm(np.diag([1.0, -2.0])) == pytest.approx(2.0)
    a = random_complex(3, 5, rng)
    assert spectral_norm(2 * a) == pytest.approx(2 * spectral_norm(a), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, n=st.integers(1, 5))
def test_norm_inequalities(seed, n):
    rng = np.random.default_rng(seed)
    a = random_complex(n, n, rng)
    assert trace_norm(a) >= spectral_norm(a) - 1e-12
    assert trace_norm(a) <= n * spectral_norm(a) + 1e-12
    r1 = np.outer(random_complex(n, 1, rng), random_complex(1, n, rng))
    assert trace_norm(r1) == pytest.approx(spectral_norm(r1), rel=1e-10)


def test_partial_trace_examples(rng):
    rho = np.array([[0.7, 0.2j], [-0.2j, 0.3]])
    sigma = np.array([[0.4, 0.1], [0.1, 0.6]])
    np.testing.assert_allclose(partial_trace(np.kron(rho, sigma), 2, 2, "second"), rho, atol=1e-15)
    bell = np.zeros(4)
    bell[[0, 3]] = 1 / np.sqrt(2)
    np.testing.assert_allclose(partial_trace(np.outer(bell, bell), 2, 2, "first"), np.eye(2) / 2)
    m = random_complex(4, 4, rng)
    for which in ("first", "second"):
        assert np.trace(partial_trace(m, 2, 2, which)) == pytest.approx(np.trace(m), abs=1e-12)


def test_partial_trace_uneven_dims_and_linearity(rng):
    m, n = random_complex(6, 6, rng), random_complex(6, 6, rng)
    a, b = 0.3 - 1j, 2.5
    for which in ("first", "second"):
        lhs = partial_trace(a * m + b * n, 2, 3, which)
        rhs = a * partial_trace(m, 2, 3, which) + b * partial_trace(n, 2, 3, which)
        assert spectral_norm(lhs - rhs) <= 1e-12
    x, y = random_complex(2, 2, rng), random_complex(3, 3, rng)
    np.testing.assert_allclose(partial_trace(kron(x, y), 2, 3, "first"), np.trace(x) * y, atol=1e-12)


def test_partial_trace_rejects_mismatch():
    with pytest.raises(InvalidInputError):
        partial_trace(np.eye(5), 2, 2)
    with pytest.raises(InvalidInputError):
        partial_trace(np.eye(4), 2, 2, "third")


def test_kron_examples(rng):
    np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    np.testing.assert_array_equal(kron(Z, Z), np.diag([1, -1, -1, 1]))
    rho, sigma = random_complex(2, 2, rng), random_complex(3, 3, rng)
    np.testing.assert_allclose(
        partial_trace(kron(rho, sigma), 2, 3, "second"), np.trace(sigma) * rho, atol=1e-12
    )
