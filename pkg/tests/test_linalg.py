import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_matrix, taylor_expm
from unitary_decomp.linalg import (
    DimensionError,
    StructureError,
    adjoint,
    eig_hermitian,
    hermitian_split,
    is_unitary,
    max_abs,
    structure_checks,
    unitary_exp,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)


def test_split_identity():
    s, a = hermitian_split(np.eye(2))
    assert np.array_equal(s, np.eye(2))
    assert np.array_equal(a, np.zeros((2, 2)))


def test_split_imaginary_identity():
    s, a = hermitian_split(1j * np.eye(2))
    assert np.array_equal(s, np.zeros((2, 2)))
    assert np.array_equal(a, 1j * np.eye(2))


def test_split_lowering_shape():
    s, a = hermitian_split([[0, 0.6], [0, 0]])
    np.testing.assert_allclose(s, [[0, 0.3], [0.3, 0]], atol=1e-15)
    np.testing.assert_allclose(a, [[0, 0.3], [-0.3, 0]], atol=1e-15)


def test_split_rejects_non_square():
    with pytest.raises(DimensionError):
        hermitian_split(np.zeros((2, 3)))


def test_split_is_a_projection_pair(rng):
    m = random_matrix(rng, 4)
    s, a = hermitian_split(m)
    assert max_abs(s + a - m) <= 4e-16 * max_abs(m)
    s2, a2 = hermitian_split(s)
    np.testing.assert_allclose(s2, s, atol=1e-15)
    assert max_abs(a2) == 0
    s3, a3 = hermitian_split(a)
    assert max_abs(s3) == 0
    np.testing.assert_allclose(a3, a, atol=1e-15)


def test_adjoint_involution(rng):
    m = random_matrix(rng, 3)
    assert np.array_equal(adjoint(adjoint(m)), m)


@pytest.mark.parametrize(
    "h, expected",
    [
        (np.diag([2.0, 1.0]), [1.0, 2.0]),
        (X, [-1.0, 1.0]),
        (np.array([[0, 0.3], [0.3, 0]]), [-0.3, 0.3]),
    ],
)
def test_eig_values(h, expected):
    np.testing.assert_allclose(eig_hermitian(h).eigenvalues, expected, atol=1e-14)


def test_eig_pauli_x_vectors():
    v = eig_hermitian(X).eigenvectors
    s = 1 / np.sqrt(2)
    # phase convention: largest component real-positive, first index on ties
    np.testing.assert_allclose(v[:, 0], [s, -s], atol=1e-14)
    np.testing.assert_allclose(v[:, 1], [s, s], atol=1e-14)


def test_eig_rejects_non_hermitian():
    with pytest.raises(StructureError):
        eig_hermitian([[0, 1], [0, 0]])


def test_eig_reconstructs(rng):
    m = random_matrix(rng, 6)
    h = (m + adjoint(m)) / 2
    es = eig_hermitian(h)
    v = es.eigenvectors
    assert np.linalg.norm(es.reconstruct() - h) <= 1e-12
    assert np.linalg.norm(adjoint(v) @ v - np.eye(6)) <= 1e-12
    assert np.all(np.diff(es.eigenvalues) >= 0)
    for k in range(6):
        col = v[:, k]
        idx = np.argmax(np.abs(col))
        assert abs(col[idx].imag) < 1e-12 and col[idx].real > 0


def test_unitary_exp_zero():
    np.testing.assert_allclose(unitary_exp(np.zeros((2, 2)), 0.7), np.eye(2), atol=1e-15)


def test_unitary_exp_pauli_z():
    np.testing.assert_allclose(unitary_exp(Z, np.pi / 2), np.diag([-1j, 1j]), atol=1e-15)


@pytest.mark.parametrize("eps", [0.2, 1.0, 1.15])
def test_unitary_exp_anti_hermitian_rotation(eps):
    a = np.array([[0, 0.3], [-0.3, 0]], dtype=complex)
    got = unitary_exp(1j * a, eps)
    np.testing.assert_allclose(got, taylor_expm(eps * a), atol=1e-12)
    c, s = np.cos(0.3 * eps), np.sin(0.3 * eps)
    np.testing.assert_allclose(got, [[c, s], [-s, c]], atol=1e-12)


def test_structure_flags():
    f = structure_checks(np.eye(2))
    assert f.is_hermitian and f.is_unitary and not f.is_zero and not f.is_anti_hermitian
    f = structure_checks([[0, 1], [0, 0]])
    assert not (f.is_hermitian or f.is_anti_hermitian or f.is_unitary or f.is_zero)


def test_structure_flag_on_exponential(rng):
    m = random_matrix(rng, 4)
    s = (m + adjoint(m)) / 2
    assert structure_checks(unitary_exp(s, 0.2)).is_unitary


def test_frobenius_submultiplicative(rng):
    for _ in range(50):
        a, b = random_matrix(rng, 4, 3.0), random_matrix(rng, 4, 2.0)
        assert np.linalg.norm(a @ b) <= np.linalg.norm(a) * np.linalg.norm(b) * (1 + 1e-14)


complex_entries = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(arrays(np.complex128, (3, 3), elements=complex_entries), st.floats(-3, 3))
def test_exp_inverse_pair(m, theta):
    h = (m + adjoint(m)) / 2
    u = unitary_exp(h, theta)
    assert is_unitary(u)
    assert max_abs(u @ unitary_exp(h, -theta) - np.eye(3)) <= 1e-12
