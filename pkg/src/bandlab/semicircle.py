"""Stieltjes transform of the semicircle law and its scalar identities."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class SpectralPoint:
    """Spectral parameter ``z = E + i eta`` with the bulk-domain constants."""

    E: float
    eta: float
    kappa: float = 0.05
    gamma: float = 0.1

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidParameterError(f"eta must be positive, got {self.eta}")
        if not (self.kappa > 0 and self.gamma > 0):
            raise InvalidParameterError("kappa and gamma must be positive")

    @property
    def z(self):
        return complex(self.E, self.eta)

    def in_bulk(self):
        return -2 + self.kappa <= self.E <= 2 - self.kappa

    def in_domain(self, M):
        """Membership in the spectral domain for band parameter ``M``."""
        return self.in_bulk() and M ** (-1 + self.gamma) <= self.eta <= 10


def _as_complex(z):
    if isinstance(z, SpectralPoint):
        return z.z
    return complex(z)


def msc(z):
    """Root of ``m^2 + z m + 1 = 0`` with positive imaginary part."""
    z = _as_complex(z)
    if not z.imag > 0:
        raise InvalidParameterError(f"need Im z > 0, got {z}")
    r = cmath.sqrt(z * z - 4)
    m1, m2 = (-z + r) / 2, (-z - r) / 2
    m = m1 if m1.imag > m2.imag else m2
    # one Newton step on m + 1/m + z polishes the root chosen by the test above
    m = m - (m * m + z * m + 1) / (2 * m + z)
    return m


def alpha(E):
    """``2 / sqrt(4 - E^2)``, the rate in ``|m|^2 = 1 - alpha*eta + O(eta^2)``."""
    if not abs(E) < 2:
        raise InvalidParameterError(f"alpha needs |E| < 2, got {E}")
    return 2.0 / math.sqrt(4.0 - E * E)


@dataclass(frozen=True)
class MscReport:
    m: complex
    equation_residual: float
    identity_residual: float
    abs_m: float
    expansion_defect: float


def msc_identities(z):
    z = _as_complex(z)
    m = msc(z)
    eta = z.imag
    am2 = abs(m) ** 2
    return MscReport(
        m=m,
        equation_residual=abs(m + 1 / m + z),
        identity_residual=abs(1 - am2 - eta * am2 / m.imag),
        abs_m=math.sqrt(am2),
        expansion_defect=abs(am2 - (1 - eta * alpha(z.real))) if abs(z.real) < 2 else math.nan,
    )


def msc_array(z):
    """Vectorized ``msc`` for arrays with positive imaginary part."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise InvalidParameterError("need Im z > 0")
    r = np.sqrt(z * z - 4)
    m1, m2 = (-z + r) / 2, (-z - r) / 2
    return np.where(m1.imag > m2.imag, m1, m2)
