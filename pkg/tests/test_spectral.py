import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bandlab.errors import InvalidParameterError
from bandlab.spectral import deloc_metric, deloc_metrics, eigh, localized_set, tql, tridiagonalize
from bandlab.torus import build_model, sample
from oracles import deloc_loop


def _random_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / 2


def test_eigh_diagonal():
    d = np.array([3.0, -1.0, 0.5, 2.0])
    es = eigh(np.diag(d))
    assert np.allclose(es.eigenvalues, np.sort(d), atol=1e-15)
    V = np.abs(es.eigenvectors)
    assert np.allclose(np.sort(V, axis=0)[-1], 1.0)
    assert np.allclose(V[np.argsort(d), np.arange(4)], 1.0)


def test_eigh_two_by_two():
    es = eigh(np.array([[0, 1 + 1j], [1 - 1j, 0]]))
    assert np.allclose(es.eigenvalues, [-math.sqrt(2), math.sqrt(2)], atol=1e-14)


@given(st.integers(1, 40), st.integers(0, 2**32))
def test_eigh_contracts_and_trace(n, seed):
    H = _random_hermitian(n, seed)
    es = eigh(H)
    norm = np.linalg.norm(H, 2)
    assert es.residual <= 1e-8 * max(norm, 1)
    assert es.orthonormality <= 1e-8
    assert np.all(np.diff(es.eigenvalues) >= 0)
    assert abs(es.eigenvalues.sum() - np.trace(H).real) <= 1e-8 * n
    assert np.max(np.abs(es.eigenvalues - np.linalg.eigvalsh(H))) <= 1e-10 * max(norm, 1)


def test_eigh_band_sample_against_lapack():
    m = build_model(1, 128, 16)
    H = sample(m, 3).H
    a = eigh(H)
    b = eigh(H, method="lapack")
    assert np.max(np.abs(a.eigenvalues - b.eigenvalues)) < 1e-12
    assert a.residual <= 1e-8 * np.linalg.norm(H, 2)
    # eigenvectors agree up to phase for simple eigenvalues
    ov = np.abs(np.sum(a.eigenvectors.conj() * b.eigenvectors, axis=0))
    assert np.min(ov) > 1 - 1e-8


def test_tridiagonalize_similarity():
    H = _random_hermitian(12, 8)
    d, e, Q = tridiagonalize(H)
    assert len(e) == len(d) - 1 and np.all(e >= 0)
    Tm = np.diag(d) + np.diag(e, -1) + np.diag(e, 1)
    assert np.max(np.abs(Q.conj().T @ H @ Q - Tm)) < 1e-12


def test_tql_eigenvalues_only():
    d = np.array([2.0, 2.0, 2.0, 2.0])
    e = np.array([-1.0, -1.0, -1.0])
    lam, _ = tql(d, e)
    want = 2 - 2 * np.cos(np.pi * np.arange(1, 5) / 5)
    assert np.allclose(np.sort(lam), np.sort(want), atol=1e-13)


def test_eigh_rejects_non_hermitian():
    A = np.array([[0, 1.0], [0.0, 0]])
    with pytest.raises(InvalidParameterError):
        eigh(A)
    with pytest.raises(InvalidParameterError):
        eigh(np.zeros((2, 3)))
    with pytest.raises(InvalidParameterError):
        eigh(np.eye(2), method="jacobi")


def test_deloc_basis_and_flat():
    L = 32
    assert deloc_metric(np.eye(L)[5], 4, L) == 0.0
    for ell in (1, 4, 16):
        flat = np.full(L, L**-0.5)
        # each x keeps L - 2ell + 1 coordinates of weight 1/L
        assert deloc_metric(flat, ell, L) == pytest.approx(math.sqrt(L - 2 * ell + 1), rel=1e-12)


def test_deloc_matches_loop_oracle():
    rng = np.random.default_rng(4)
    L = 24
    u = rng.normal(size=L) + 1j * rng.normal(size=L)
    u /= np.linalg.norm(u)
    for ell in (1, 3, 12):
        assert deloc_metric(u, ell, L) == pytest.approx(deloc_loop(u, ell, L), rel=1e-12)


def test_deloc_euclidean_metric():
    L = 16
    u = np.zeros(L)
    u[[0, L - 1]] = 2**-0.5
    # periodic: sites 0 and L-1 are neighbours; euclidean: they are far apart
    assert deloc_metric(u, 2, L) == pytest.approx(0.0, abs=1e-12)
    assert deloc_metric(u, 2, L, metric="euclidean") == pytest.approx(1.0, rel=1e-12)


def test_deloc_2d_flat():
    L = 8
    flat = np.full(L * L, 1 / L)
    ell = 2
    near = sum(1 for a in range(-3, 4) for b in range(-3, 4) if math.hypot(a, b) < ell)
    assert deloc_metric(flat, ell, L, d=2) == pytest.approx(L * math.sqrt(1 - near / L**2), rel=1e-12)


def test_deloc_errors():
    with pytest.raises(InvalidParameterError):
        deloc_metric(np.ones(8), 2, 8)
    with pytest.raises(InvalidParameterError):
        deloc_metric(np.eye(8)[0], 5, 8)
    with pytest.raises(InvalidParameterError):
        deloc_metric(np.eye(8)[0], 2, 8, metric="manhattan")


@given(st.integers(0, 2**32), st.integers(1, 16), st.integers(0, 31), st.floats(0, 2 * math.pi))
def test_deloc_invariances_and_cs_bound(seed, ell, shift, phase):
    L = 32
    rng = np.random.default_rng(seed)
    u = rng.normal(size=L) + 1j * rng.normal(size=L)
    u /= np.linalg.norm(u)
    v = deloc_metric(u, ell, L)
    assert deloc_metric(np.exp(1j * phase) * u, ell, L) == pytest.approx(v, rel=1e-12, abs=1e-14)
    assert deloc_metric(np.roll(u, shift), ell, L) == pytest.approx(v, rel=1e-12, abs=1e-14)
    far = [math.sqrt(sum(abs(u[y]) ** 2 for y in range(L) if min((x - y) % L, (y - x) % L) >= ell))
           for x in range(L)]
    assert v <= math.sqrt(L) * max(far) + 1e-12


def test_localized_set_diagonal():
    es = eigh(np.diag(np.linspace(-2.5, 2.5, 16)))
    rep = localized_set(es, 0.5, 0.0, 4, 16)
    assert set(rep.localized_indices) == set(np.flatnonzero(rep.in_bulk))
    assert rep.bulk_interval == (-1.5, 1.5)
    assert rep.fraction == len(rep.localized_indices) / 16


def test_localized_set_monotone_and_large_eps():
    m = build_model(1, 64, 16)
    es = eigh(sample(m, 7).H)
    mets = deloc_metrics(es, 16, 64)
    fr = [localized_set(es, 0.1, eps, 16, 64, metrics=mets).fraction for eps in np.linspace(0, 9, 40)]
    assert np.all(np.diff(fr) >= 0)
    full = localized_set(es, 0.1, math.sqrt(64), 16, 64, metrics=mets)
    assert set(full.localized_indices) == set(np.flatnonzero(full.in_bulk))
    with pytest.raises(InvalidParameterError):
        localized_set(es, 2.5, 0.1, 16, 64)
    with pytest.raises(InvalidParameterError):
        localized_set(es, 0.1, -1, 16, 64)
