"""Self-consistent equation error for ``T`` and its exact decompositions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, InvalidParameterError
from ..semicircle import SpectralPoint, msc
from .fourier import apply_multiplier, bump_chi, build_Q, cutoff_scale, fourier_s, momentum_norm


def _z(z):
    return z.z if isinstance(z, SpectralPoint) else complex(z)


def error_E(T, model, z):
    """``E = T - |m|^2 S T - |m|^2 S``."""
    T = np.asarray(T)
    if T.shape != model.S.shape:
        raise InvalidParameterError(f"T has shape {T.shape}, expected {model.S.shape}")
    m2 = abs(msc(_z(z))) ** 2
    return T - m2 * (model.S @ T) - m2 * model.S


@dataclass(frozen=True, eq=False)
class PRSplit:
    P: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    E: np.ndarray = field(repr=False)

    @property
    def residual(self):
        return float(np.max(np.abs(self.E - self.P - self.R)))


def split_PR(bundle, model, z=None):
    """Split ``E = P + R`` into the mean-zero (Gaussian) part and the remainder.

    ``P`` carries the full diagonal entries of ``G``; ``R`` collects their
    deviations from ``m``.  The two add up to ``E`` because
    ``m^2 + z m + 1 = 0``.
    """
    z = bundle.z if z is None else _z(z)
    m = msc(z)
    S = model.S
    G = bundle.G
    A = np.abs(G) ** 2
    T = S @ A
    g = G.diagonal()
    gb = g.conj()
    Sg = S @ g
    P = (
        -m * z * T
        - m * (S @ (Sg[:, None] * A))
        - m * (S @ (gb[:, None] * T))
        - m * S * gb[None, :]
    )
    R = m * (
        S @ ((Sg - m)[:, None] * A)
        + S @ ((gb - np.conj(m))[:, None] * T)
        + S * (gb - np.conj(m))[None, :]
    )
    return PRSplit(P=P, R=R, E=error_E(T, model, z))


def P_entries(bundle, model, pairs):
    """``P_xy`` only at the given ``(x, y)`` pairs, at ``O(N^2)`` cost per pair."""
    m = msc(bundle.z)
    z = bundle.z
    S = model.S
    G = bundle.G
    g = G.diagonal()
    gb = g.conj()
    Sg = S @ g
    out = np.empty(len(pairs), dtype=complex)
    for k, (x, y) in enumerate(pairs):
        a = np.abs(G[:, y]) ** 2
        Ty = S @ a
        out[k] = (
            -m * z * Ty[x]
            - m * S[x] @ (Sg * a)
            - m * S[x] @ (gb * Ty)
            - m * S[x, y] * gb[y]
        )
    return out


def projector(n):
    """``Pi = i i^*`` with ``i = n^{-1/2} (1, ..., 1)``."""
    return np.full((n, n), 1.0 / n)


@dataclass(frozen=True, eq=False)
class Projection:
    tildeE: np.ndarray = field(repr=False)
    Tbar: np.ndarray | None = field(repr=False, default=None)
    reconstruction_residual: float | None = None
    commutation_residual: float = 0.0


def _resolvent_symbol(model, z):
    m2 = abs(msc(_z(z))) ** 2
    if not m2 < 1:
        raise DomainError("1 - |m|^2 S is singular for |m| >= 1")
    sh = fourier_s(model)
    return 1.0 / (1.0 - m2 * sh), m2, sh


def project_decompose(E, model, z, T=None):
    """``tildeE = (1 - |m|^2 S)^{-1} (1 - Pi) E`` and the reconstruction of ``T``.

    With ``T`` supplied, also returns ``Tbar_y = (Pi T)_xy`` and the max defect
    of ``T = Tbar + |m|^2 (S - Pi)/(1 - |m|^2 S) + tildeE``.
    """
    n = model.N
    Pi = projector(n)
    S = model.S
    comm = float(max(np.max(np.abs(Pi @ S - Pi)), np.max(np.abs(S @ Pi - Pi))))
    inv_sym, m2, sh = _resolvent_symbol(model, z)
    w = E - Pi @ E
    tildeE = apply_multiplier(inv_sym, w, model.L, model.d)
    if T is None:
        return Projection(tildeE=tildeE, commutation_residual=comm)
    Tbar = np.mean(T, axis=0)
    zero = np.zeros_like(sh)
    zero.flat[0] = 1.0
    mid = apply_multiplier(m2 * (sh - zero) * inv_sym, np.eye(n), model.L, model.d)
    rec = Tbar[None, :] + mid + tildeE
    return Projection(
        tildeE=tildeE, Tbar=Tbar,
        reconstruction_residual=float(np.max(np.abs(T - rec))),
        commutation_residual=comm,
    )


@dataclass(frozen=True, eq=False)
class ModeSplit:
    low: np.ndarray = field(repr=False)
    high: np.ndarray = field(repr=False)
    tildeE: np.ndarray = field(repr=False)

    @property
    def partition_residual(self):
        return float(np.max(np.abs(self.tildeE - self.low - self.high)))


def mode_split(E, model, z, alpha=None):
    """Low/high momentum parts of ``tildeE`` using the smooth cutoff ``chi``."""
    inv_sym, _, _ = _resolvent_symbol(model, z)
    chi = bump_chi(momentum_norm(model.L, model.d) * cutoff_scale(model, alpha))
    q_hat = build_Q(model, alpha).q_hat
    w = E - np.mean(E, axis=0, keepdims=True)
    low = apply_multiplier(chi * inv_sym, w, model.L, model.d)
    high = apply_multiplier(q_hat * inv_sym, w, model.L, model.d)
    tildeE = apply_multiplier(inv_sym, w, model.L, model.d)
    return ModeSplit(low=low, high=high, tildeE=tildeE)


def isotropic_contract(A, v, y):
    """Generalized entry ``A_{v y} = sum_x v_x A_xy`` (no conjugation of ``v``)."""
    return complex(np.asarray(v) @ np.asarray(A)[:, y])


__all__ = [
    "error_E", "split_PR", "P_entries", "PRSplit", "projector", "project_decompose",
    "Projection", "mode_split", "ModeSplit", "isotropic_contract",
]
