"""Open chains, loops, the ``X`` statistics and the operator ``L``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ..errors import DomainError, InvalidParameterError
from ..semicircle import SpectralPoint, msc

SUP_FACTOR = 10.0
L1_BOUND = 10.0
MAX_ORDER = 4


@dataclass(frozen=True)
class SigmaCheck:
    sup: float
    row_l1: float
    col_l1: float
    member: bool


def check_sigma(sigma, W, sup_factor=SUP_FACTOR, l1_bound=L1_BOUND):
    """Membership test for the class of matrices with entries ``<~ 1/W`` and
    ``O(1)`` row and column l1 norms."""
    a = np.abs(np.asarray(sigma))
    sup = float(a.max())
    row = float(a.sum(axis=1).max())
    col = float(a.sum(axis=0).max())
    ok = sup <= sup_factor / W and row <= l1_bound and col <= l1_bound
    return SigmaCheck(sup=sup, row_l1=row, col_l1=col, member=bool(ok))


def _require(sigmas, W, n):
    if len(sigmas) != n:
        raise InvalidParameterError(f"need {n} sigma matrices, got {len(sigmas)}")
    for k, s in enumerate(sigmas):
        c = check_sigma(s, W)
        if not c.member:
            raise InvalidParameterError(
                f"sigma[{k}] not admissible: sup={c.sup:.3g}, row l1={c.row_l1:.3g}, col l1={c.col_l1:.3g}"
            )


def _expand(sigmas, n):
    if not isinstance(sigmas, (list, tuple)):
        sigmas = [sigmas] * n
    return [np.asarray(s) for s in sigmas]


def chain_Y(bundle, sigmas, a, b, us, n, W=None):
    """Open chain ``sum sigma1_{u1 i1}...sigman_{un in} G_{a i1} G_{i1 i2} ... G_{in b}``.

    ``sigmas`` is one matrix (used at every step) or a list of ``n``.
    Evaluated as ``n`` row-vector products, ``O(n N^2)``.  ``W`` enables the
    membership check (pass ``model.W``).
    """
    if not 1 <= n <= MAX_ORDER:
        raise InvalidParameterError(f"chain order must be in 1..{MAX_ORDER}")
    sigmas = _expand(sigmas, n)
    us = list(np.atleast_1d(us))
    if len(us) == 1:
        us = us * n
    if len(us) != n:
        raise InvalidParameterError(f"need {n} u indices")
    if W is not None:
        _require(sigmas, W, n)
    G = bundle.G if hasattr(bundle, "G") else np.asarray(bundle)
    r = G[a, :] * sigmas[0][us[0], :]
    for k in range(1, n):
        r = (r @ G) * sigmas[k][us[k], :]
    return complex(r @ G[:, b])


def loop_Z(bundle, sigmas, a, b, us, n, W=None):
    """Loop ``sum sigma1_{a i1} sigma2_{b i2} sigma3_{u3 i3}... G_{i1 i2}...G_{in i1}``.

    Equal to ``tr(D1 G D2 G ... Dn G)`` with ``Dk`` the diagonal matrix of the
    relevant sigma row.  ``n = 2`` costs ``O(N^2)``; larger ``n`` needs
    ``n - 2`` matrix products.
    """
    if not 2 <= n <= MAX_ORDER:
        raise InvalidParameterError(f"loop order must be in 2..{MAX_ORDER}")
    sigmas = _expand(sigmas, n)
    us = list(np.atleast_1d(us)) if us is not None else []
    if len(us) != n - 2:
        raise InvalidParameterError(f"need {n - 2} u indices for a loop of order {n}")
    if W is not None:
        _require(sigmas, W, n)
    G = bundle.G if hasattr(bundle, "G") else np.asarray(bundle)
    rows = [sigmas[0][a], sigmas[1][b]] + [sigmas[k][us[k - 2]] for k in range(2, n)]
    if n == 2:
        return complex(rows[0] @ (G * G.T) @ rows[1])
    # M = D2 G D3 G ... Dn G, then Z = sum_{i1,i2} w1_{i1} G_{i1 i2} M_{i2 i1}
    M = rows[1][:, None] * G
    for w in rows[2:]:
        M = M @ (w[:, None] * G)
    return complex(np.sum(rows[0][:, None] * G * M.T))


@dataclass(frozen=True, eq=False)
class XStats:
    Xi: np.ndarray
    Xij: np.ndarray = field(repr=False)


def x_stat(bundle, sigma, m=None):
    """``X_i = sum_j sigma_ij (G_jj - m)`` and ``X_ij = sum_k sigma_ik G_kj``."""
    G = bundle.G if hasattr(bundle, "G") else np.asarray(bundle)
    if m is None:
        m = bundle.m
    sigma = np.asarray(sigma)
    return XStats(Xi=sigma @ (G.diagonal() - m), Xij=sigma @ G)


@dataclass(frozen=True, eq=False)
class OperatorL:
    L: np.ndarray = field(repr=False)
    norm_inf: float
    inverse_residual: float


def operator_L(model, z):
    """``L = -m (1 - m^2 S)^{-1}``, the inverse of ``(z + m) + m S``."""
    z = z.z if isinstance(z, SpectralPoint) else complex(z)
    m = msc(z)
    if not abs(m) < 1:
        raise DomainError("operator L needs |m| < 1")
    n = model.N
    S = model.S
    I = np.eye(n)
    Lop = -m * sla.solve(I - m * m * S, I)
    res = float(np.max(np.abs(((z + m) * I + m * S) @ Lop - I)))
    return OperatorL(L=Lop, norm_inf=float(np.abs(Lop).sum(axis=1).max()), inverse_residual=res)


__all__ = [
    "SigmaCheck", "check_sigma", "chain_Y", "loop_Z", "XStats", "x_stat",
    "OperatorL", "operator_L",
]
