"""Fourier-space tools for translation invariant operators on the torus.

Conventions: ``f_hat(p) = sum_x e^{-ipx} f_x`` for ``p`` in ``(2 pi / L) T_L``,
``e_x(p) = L^{-d/2} e^{ipx}``.  Arrays over momenta use FFT (residue) order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..torus import _canonical, site_coords


def momenta(L, d=1):
    """Canonical momenta in FFT order, shape ``(d,) + (L,) * d``."""
    one = 2 * np.pi * _canonical(np.arange(L), L) / L
    return np.array(np.meshgrid(*([one] * d), indexing="ij"))


def momentum_norm(L, d=1):
    return np.sqrt(np.sum(momenta(L, d) ** 2, axis=0))


def fourier_s(model):
    """``s_hat(p)``; real and even because ``s`` is symmetric."""
    sh = np.fft.fftn(model.s_profile)
    imag = float(np.max(np.abs(sh.imag)))
    if imag > 1e-12:
        raise ArithmeticError(f"s_hat has imaginary part {imag}")
    return sh.real


def _psi(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def bump_chi(r):
    """Smooth cutoff: 1 for ``r^2 <= 1``, 0 for ``r^2 >= 2``.

    On the transition ``t = r^2 - 1`` it is ``psi(1-t) / (psi(1-t) + psi(t))``
    with ``psi(t) = exp(-1/t)``, which is C-infinity and decreasing.
    """
    r = np.asarray(r, dtype=float)
    t = np.clip(r * r - 1.0, 0.0, 1.0)
    a, b = _psi(1.0 - t), _psi(t)
    out = a / (a + b)
    return out if out.ndim else float(out)


def cutoff_scale(model, alpha=None):
    """``W`` in one dimension; ``W^(1-alpha) L^alpha`` (default ``alpha = 1/2``) above."""
    if alpha is None:
        alpha = 0.0 if model.d == 1 else 0.5
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    return model.W ** (1 - alpha) * model.L**alpha


@dataclass(frozen=True, eq=False)
class FourierTable:
    p: np.ndarray = field(repr=False)
    s_hat: np.ndarray = field(repr=False)
    q_hat: np.ndarray = field(repr=False)
    q_profile: np.ndarray = field(repr=False)

    @property
    def q_l1(self):
        return float(np.sum(np.abs(self.q_profile)))


def build_Q(model, alpha=None):
    """High-mode filter ``q_hat(p) = 1 - chi(|p| W)`` and its kernel ``q_x``."""
    pn = momentum_norm(model.L, model.d)
    q_hat = 1.0 - bump_chi(pn * cutoff_scale(model, alpha))
    q = np.fft.ifftn(q_hat).real
    return FourierTable(p=momenta(model.L, model.d), s_hat=fourier_s(model), q_hat=q_hat, q_profile=q)


def apply_multiplier(mult, cols, L, d):
    """Apply the translation invariant operator with symbol ``mult`` to columns."""
    n = cols.shape[0]
    shape = (L,) * d
    X = cols.reshape(shape + cols.shape[1:])
    axes = tuple(range(d))
    Xh = np.fft.fftn(X, axes=axes)
    Xh *= mult.reshape(shape + (1,) * (cols.ndim - 1))
    return np.fft.ifftn(Xh, axes=axes).reshape((n,) + cols.shape[1:])


def kernel_from_multiplier(mult):
    return np.fft.ifftn(mult)


def e_vector(p, L, d=1):
    """Plane wave ``e_x(p) = L^{-d/2} e^{i p.x}`` over sites in matrix order."""
    x = site_coords(L, d)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    return np.exp(1j * x @ p) / L ** (d / 2)


def fourier_coefficients(E, L, d=1):
    """``<e(p), E>_y = sum_x e_{-x}(p) E_xy`` for all momenta (FFT order) and ``y``.

    Output shape ``(L,) * d + (n_columns,)``.
    """
    shape = (L,) * d
    X = E.reshape(shape + E.shape[1:])
    axes = tuple(range(d))
    Xh = np.fft.fftn(X, axes=axes)
    # FFT sums over digits k = x + L//2; restore the e^{-ipx} phase of canonical x
    phase = np.exp(1j * np.tensordot(momenta(L, d), np.full(d, L // 2), axes=(0, 0)))
    return Xh * phase.reshape(shape + (1,)) / L ** (d / 2)
