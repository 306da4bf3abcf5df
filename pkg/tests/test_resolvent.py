import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bandlab.errors import InvalidParameterError
from bandlab.resolvent import average_G_identity, lambda_stat, resolvent, t_matrices, ward_residual
from bandlab.semicircle import msc
from bandlab.torus import build_model, sample


def test_scalar_resolvent():
    b = resolvent(np.zeros((1, 1)), 1j)
    assert b.G[0, 0] == pytest.approx(1j)


def test_zero_matrix_lambda():
    z = 0.4 + 0.3j
    b = resolvent(np.zeros((5, 5)), z)
    assert b.lam == pytest.approx(abs(-1 / z - msc(z)), rel=1e-13)


def test_degenerate_diagonal_lambda():
    a, z = 0.7, -0.2 + 0.5j
    b = resolvent(a * np.eye(6), z)
    assert lambda_stat(b) == pytest.approx(abs(1 / (a - z) - msc(z)), rel=1e-13)


def test_lambda_zero_iff_G_is_m():
    # a matrix whose resolvent is exactly m I: H = (z + 1/m) I = -m I ... scalar shift
    z = 0.1 + 0.4j
    m = msc(z)
    H = np.eye(3) * (z + 1 / m)
    # H is not Hermitian in general, so check the statistic directly
    G = np.linalg.inv(H - z * np.eye(3))
    D = G - m * np.eye(3)
    assert np.max(np.abs(D)) < 1e-14


def test_rejects_lower_half_plane():
    with pytest.raises(InvalidParameterError):
        resolvent(np.zeros((2, 2)), 1.0)


@pytest.mark.parametrize("L, W", [(64, 8), (128, 16), (512, 32)])
def test_solve_residual_and_ward(L, W):
    m = build_model(1, L, W)
    b = resolvent(sample(m, 7).H, 0.3 + 0.05j)
    assert b.solve_residual <= 1e-10 * L
    assert b.ward_residual <= 1e-9
    assert np.max(np.abs(b.G - np.linalg.inv(b.H - b.z * np.eye(L)))) < 1e-9
    assert np.max(np.abs(b.G)) <= 1 / b.eta * (1 + 1e-12)


@given(st.integers(0, 10**6), st.floats(-1.8, 1.8), st.floats(0.01, 2.0))
def test_ward_identity_property(seed, E, eta):
    m = build_model(1, 32, 4)
    b = resolvent(sample(m, seed).H, complex(E, eta))
    lhs = np.sum(np.abs(b.G) ** 2, axis=1)
    assert np.max(np.abs(lhs - b.G.diagonal().imag / eta) / np.abs(b.G.diagonal().imag / eta)) < 1e-9
    assert ward_residual(b.G, eta) < 1e-9
    assert b.lam >= 0


def test_t_matrices():
    m = build_model(1, 1, 1)
    b = resolvent(np.array([[0.3]]), 0.5j)
    tm = t_matrices(b, m)
    assert tm.T[0, 0] == pytest.approx(m.S[0, 0] * abs(b.G[0, 0]) ** 2)

    m = build_model(1, 48, 6)
    b = resolvent(sample(m, 3).H, 0.2 + 0.1j)
    tm = t_matrices(b, m)
    A = np.abs(b.G) ** 2
    loop = np.array([[sum(m.S[x, i] * A[i, y] for i in range(48)) for y in range(48)] for x in range(48)])
    assert np.max(np.abs(tm.T - loop)) < 1e-14
    assert np.all(tm.T >= 0) and np.all(tm.Tprime >= 0)
    rows = tm.T.sum(axis=1)
    want = m.S @ (b.G.diagonal().imag / b.eta)
    assert np.max(np.abs(rows - want) / want) < 1e-9
    with pytest.raises(InvalidParameterError):
        t_matrices(b, build_model(1, 40, 6))


def test_T_equals_Tprime_for_zero_matrix():
    m = build_model(1, 16, 4)
    b = resolvent(np.zeros((16, 16)), 0.5j)
    tm = t_matrices(b, m)
    assert np.max(np.abs(tm.T - tm.Tprime)) < 1e-15


def test_average_identity():
    m = build_model(1, 64, 8)
    assert average_G_identity(resolvent(sample(m, 1).H, 0.1j)) <= 1e-10
    b = resolvent(np.array([[0.2]]), 0.3j)
    assert average_G_identity(b) <= 1e-14
