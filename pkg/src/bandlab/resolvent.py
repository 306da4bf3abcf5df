"""Resolvent ``G(z) = (H - z)^{-1}`` and the observables built from it."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import InvalidParameterError, NumericalFailureError
from .semicircle import SpectralPoint, msc


@dataclass(frozen=True, eq=False)
class ResolventBundle:
    G: np.ndarray = field(repr=False)
    z: complex
    m: complex
    lam: float
    ward_residual: float
    solve_residual: float
    H: np.ndarray = field(repr=False)

    @property
    def eta(self):
        return self.z.imag

    @property
    def N(self):
        return self.G.shape[0]


@dataclass(frozen=True, eq=False)
class TMatrices:
    T: np.ndarray
    Tprime: np.ndarray


def _matrix(H):
    return np.asarray(getattr(H, "entries", H))


def _z(z):
    return z.z if isinstance(z, SpectralPoint) else complex(z)


def ward_residual(G, eta):
    """Max relative defect of ``sum_i |G_xi|^2 = Im G_xx / eta`` over ``x``."""
    lhs = np.sum(np.abs(G) ** 2, axis=1)
    rhs = G.diagonal().imag / eta
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))


def resolvent(H, z):
    """Dense LU (partial pivoting) inverse of ``H - z`` with its diagnostics."""
    z = _z(z)
    if not z.imag > 0:
        raise InvalidParameterError(f"need Im z > 0, got {z}")
    H = _matrix(H)
    n = H.shape[0]
    A = H - z * np.eye(n)
    try:
        lu, piv = sla.lu_factor(A, check_finite=False)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericalFailureError(f"LU factorization failed: {exc}") from exc
    if not np.all(np.isfinite(lu)) or np.min(np.abs(lu.diagonal())) == 0:
        raise NumericalFailureError("singular pivot in resolvent factorization")
    G = sla.lu_solve((lu, piv), np.eye(n, dtype=complex), check_finite=False)
    solve_res = float(np.max(np.abs(A @ G - np.eye(n))))
    m = msc(z)
    return ResolventBundle(
        G=G, z=z, m=m, lam=lambda_stat_matrix(G, m),
        ward_residual=ward_residual(G, z.imag),
        solve_residual=solve_res, H=H,
    )


def lambda_stat_matrix(G, m):
    D = G.copy()
    D[np.diag_indices_from(D)] -= m
    return float(np.max(np.abs(D)))


def lambda_stat(bundle):
    """``max_{x,y} |G_xy - delta_xy m(z)|``."""
    return lambda_stat_matrix(bundle.G, bundle.m)


def t_matrices(bundle, model):
    """``T = S A`` and ``T' = A S`` with ``A_xy = |G_xy|^2``."""
    if bundle.N != model.N:
        raise InvalidParameterError(f"bundle has N={bundle.N}, model has N={model.N}")
    A = np.abs(bundle.G) ** 2
    return TMatrices(T=model.S @ A, Tprime=A @ model.S)


def average_G_identity(bundle):
    """Absolute defect of ``N^-2 sum |G_xy|^2 = Im(tr G / N) / (N eta)``."""
    n = bundle.N
    lhs = np.sum(np.abs(bundle.G) ** 2) / n**2
    rhs = np.trace(bundle.G).imag / n / (n * bundle.eta)
    return float(abs(lhs - rhs))
