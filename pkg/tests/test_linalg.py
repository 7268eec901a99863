import numpy as np
import pytest

from kickspec.errors import NonHermitian, NonUnitary
from kickspec.linalg import (
    eig_hermitian,
    eig_unitary,
    expm_i_hermitian,
    principal_args,
)
from kickspec.operators import clock_shift, dft_matrix

ROOT8 = 2.0 * np.sqrt(2.0)  # eigenvalues of [[2,2],[2,-2]]: roots of t^2 - 8


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def random_unitary(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))[np.newaxis, :]


def set_distance(a, b):
    """max-min distance between two small point sets."""
    a = np.asarray(a).ravel()[:, None]
    b = np.asarray(b).ravel()[None, :]
    d = np.abs(a - b)
    return max(d.min(axis=1).max(), d.min(axis=0).max())


# -- eig_hermitian -------------------------------------------------------------


def test_eigh_identity():
    dec = eig_hermitian(np.eye(3))
    assert np.allclose(dec.values, [1.0, 1.0, 1.0], atol=1e-14)


def test_eigh_hand_2x2():
    dec = eig_hermitian(np.array([[2.0, 2.0], [2.0, -2.0]]))
    assert np.allclose(dec.values, [-ROOT8, ROOT8], atol=1e-12)


def test_eigh_already_diagonal_sorted():
    dec = eig_hermitian(np.diag([np.cos(0.0), np.cos(np.pi)]))
    assert np.allclose(dec.values, [-1.0, 1.0], atol=0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_eigh_residual_and_orthonormality(seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, 7)
    dec = eig_hermitian(a, want_vectors=True)
    norm = np.linalg.norm(a, 2)
    resid = np.linalg.norm(a @ dec.vectors - dec.vectors * dec.values[None, :], axis=0)
    assert resid.max() <= 1e-10 * norm
    assert np.abs(dec.vectors.conj().T @ dec.vectors - np.eye(7)).max() <= 1e-10
    assert np.all(np.diff(dec.values) >= 0)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NonHermitian):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


# -- eig_unitary ---------------------------------------------------------------


def test_eigu_identity():
    dec = eig_unitary(np.eye(2))
    assert np.allclose(dec.values, [1.0, 1.0], atol=0)


def test_eigu_cyclic_shift_q3_is_cube_roots():
    c, _ = clock_shift(3)
    dec = eig_unitary(c)
    expected = np.exp(2j * np.pi * np.array([0, 1, 2]) / 3)
    assert set_distance(dec.values, expected) <= 1e-12


def test_eigu_rotation_2x2():
    dec = eig_unitary(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert np.allclose(dec.values, [-1j, 1j], atol=1e-12)


@pytest.mark.parametrize("seed,n", [(0, 5), (1, 8), (2, 13)])
def test_eigu_modulus_order_and_vectors(seed, n):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, n)
    dec = eig_unitary(u, want_vectors=True)
    assert np.abs(np.abs(dec.values) - 1.0).max() <= 1e-15
    args = principal_args(dec.values)
    assert np.all(np.diff(args) >= 0)
    resid = np.linalg.norm(u @ dec.vectors - dec.vectors * dec.values[None, :], axis=0)
    assert resid.max() <= 1e-10
    assert np.abs(dec.vectors @ dec.vectors.conj().T - np.eye(n)).max() <= 1e-10


@pytest.mark.parametrize("seed", [3, 4, 5])
def test_eigu_similarity_invariance(seed):
    rng = np.random.default_rng(seed)
    x = random_unitary(rng, 6)
    f = dft_matrix(6)
    d1 = eig_unitary(f @ x @ f.conj().T).values
    d2 = eig_unitary(x).values
    assert set_distance(d1, d2) <= 1e-9


def test_eigu_rejects_non_unitary():
    with pytest.raises(NonUnitary):
        eig_unitary(2.0 * np.eye(2))


# -- expm_i_hermitian ------------------------------------------------------------


def test_expm_zero_matrix_is_identity():
    assert np.abs(expm_i_hermitian(np.zeros((3, 3)), 1.0) - np.eye(3)).max() <= 1e-14


def test_expm_diagonal_pi():
    out = expm_i_hermitian(np.diag([1.0, -1.0]), np.pi)
    assert np.abs(out + np.eye(2)).max() <= 1e-12


def test_expm_hand_2x2_spectral_mapping():
    out = expm_i_hermitian(np.array([[2.0, 2.0], [2.0, -2.0]]), 1.0)
    vals = eig_unitary(out).values
    expected = np.exp(-1j * np.array([-ROOT8, ROOT8]))
    assert set_distance(vals, expected) <= 1e-12


@pytest.mark.parametrize("seed", [0, 1])
def test_expm_one_parameter_group_law(seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, 6)
    s1, s2 = rng.uniform(-2, 2, size=2)
    lhs = expm_i_hermitian(a, s1 + s2)
    rhs = expm_i_hermitian(a, s1) @ expm_i_hermitian(a, s2)
    assert np.abs(lhs - rhs).max() <= 1e-9


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_expm_exponential_contraction(seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, 5)
    b = random_hermitian(rng, 5)
    lhs = np.linalg.norm(expm_i_hermitian(a, 1.0) - expm_i_hermitian(b, 1.0), 2)
    assert lhs <= np.linalg.norm(a - b, 2) + 1e-12


def test_eigu_tolerates_near_unitary_input():
    rng = np.random.default_rng(9)
    u = random_unitary(rng, 6)
    bump = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    u = u + 1e-12 * bump  # inside the 1e-10 unitarity tolerance
    dec = eig_unitary(u, want_vectors=True)
    assert np.abs(np.abs(dec.values) - 1.0).max() <= 1e-15


def test_principal_args_wraps_minus_pi_to_pi():
    vals = np.array([complex(-1.0, -0.0), 1.0, 1j])
    args = principal_args(vals)
    assert args[0] == pytest.approx(np.pi)
    assert args[1] == 0.0
    assert args[2] == pytest.approx(np.pi / 2)
