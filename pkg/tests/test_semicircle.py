import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bandlab.errors import InvalidParameterError
from bandlab.semicircle import SpectralPoint, alpha, msc, msc_array, msc_identities
from oracles import msc_quadratic, msc_stieltjes

bulk_E = st.floats(-1.95, 1.95)
etas = st.floats(1e-4, 10.0)


def test_msc_examples():
    assert msc(1j) == pytest.approx(0.6180339887j, abs=1e-10)
    assert abs(msc(1e-9j) - 1j) < 1e-6
    assert abs(msc(SpectralPoint(0.0, 1.0)) - msc(1j)) == 0


@given(st.floats(-5, 5), etas)
def test_msc_matches_quadratic_oracle(E, eta):
    z = complex(E, eta)
    m = msc(z)
    assert abs(m - msc_quadratic(z)) < 1e-10
    assert m.imag > 0
    assert abs(m + 1 / m + z) < 1e-12


@pytest.mark.parametrize("z", [0.3 + 0.5j, -1.2 + 0.05j, 1.9 + 0.2j])
def test_msc_matches_stieltjes_transform(z):
    assert abs(msc(z) - msc_stieltjes(z)) < 1e-7


@given(bulk_E, etas)
def test_conjugate_symmetry(E, eta):
    z = complex(E, eta)
    # continuation to the lower half plane is the other root-branch test
    r = np.roots([1.0, np.conj(z), 1.0])
    lower = r[np.argmin(r.imag)]
    assert abs(np.conj(msc(z)) - lower) < 1e-10


def test_msc_rejects_real_axis():
    with pytest.raises(InvalidParameterError):
        msc(0.5)
    with pytest.raises(InvalidParameterError):
        SpectralPoint(0.0, 0.0)


@pytest.mark.parametrize("E, want", [(0, 1.0), (1, 1.1547005), (1.9, 3.2025631)])
def test_alpha(E, want):
    assert alpha(E) == pytest.approx(want, abs=1e-7)


def test_identities():
    assert msc_identities(0.5j).identity_residual <= 1e-12
    assert 0.5 < msc_identities(1 + 0.1j).abs_m < 1
    for eta in [0.2, 0.1, 0.05]:
        r = msc_identities(eta * 1j)
        assert r.expansion_defect <= 2 * eta**2


@given(bulk_E, st.floats(1e-3, 10.0))
def test_identity_everywhere(E, eta):
    r = msc_identities(complex(E, eta))
    assert r.equation_residual < 1e-12
    assert r.identity_residual < 1e-10
    assert r.abs_m < 1


def test_domain_membership():
    sp = SpectralPoint(0.0, 0.1)
    assert sp.in_bulk() and sp.in_domain(100)
    assert not SpectralPoint(1.99, 0.1).in_bulk()
    assert not SpectralPoint(0.0, 1e-4).in_domain(100)


def test_min_abs_m_on_domain():
    # smallest |m| over the bulk domain with eta <= 10 sits at the top corner
    E = np.linspace(-1.95, 1.95, 79)
    eta = np.geomspace(1e-3, 10, 60)
    m = msc_array(E[:, None] + 1j * eta[None, :])
    assert np.abs(m).min() > 0.09
    assert np.max(np.abs(m - np.vectorize(msc)(E[:, None] + 1j * eta[None, :]))) < 1e-12
