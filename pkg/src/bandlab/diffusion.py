"""Deterministic diffusion predictions for the averaged squared resolvent.

``Theta = |m|^2 S (1 - |m|^2 S)^{-1}`` is computed exactly from the variance
matrix; in one dimension it is compared against the closed-form profile
``theta_x``, written either as a Fourier series or as a sum of periodic
images of a two-sided exponential.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, InvalidParameterError
from .semicircle import SpectralPoint, alpha, msc
from .torus import _canonical, circulant, displacement_grid

TERM_RTOL = 1e-12
MAX_TERMS = 10**6


def _z(z):
    return z.z if isinstance(z, SpectralPoint) else complex(z)


def _abs_m2(z):
    m2 = abs(msc(z)) ** 2
    if not m2 < 1:
        raise DomainError(f"|m|^2 = {m2} >= 1; 1 - |m|^2 S is not invertible")
    return m2


@dataclass(frozen=True, eq=False)
class DiffusionPrediction:
    Theta: np.ndarray = field(repr=False)
    theta_profile: np.ndarray | None = field(repr=False)
    Upsilon: np.ndarray | None = field(repr=False)
    Phi2: float
    D: object
    Dinf: object
    fixed_point_residual: float


def theta_kernel(model, z):
    """Column ``Theta[:, 0]`` as a kernel of shape ``(L,) * d``.

    Solves ``(1 - |m|^2 S) x = |m|^2 S e_0`` densely; translation invariance
    gives every other column.
    """
    m2 = _abs_m2(_z(z))
    n = model.N
    A = np.eye(n) - m2 * model.S
    col = sla.solve(A, m2 * model.s_column, assume_a="sym")
    return col.reshape(model.s_profile.shape)


def theta_exact(model, z):
    """Dense ``Theta`` assembled from ``theta_kernel``."""
    return circulant(theta_kernel(model, z))


def fixed_point_residual(Theta, model, z):
    m2 = _abs_m2(_z(z))
    return float(np.max(np.abs(Theta - m2 * model.S @ Theta - m2 * model.S)))


def theta_random_walk(model, z, n_max):
    """Partial sum ``sum_{n<=n_max} |m|^{2n} (S^n)_{x0}`` and its tail bound."""
    if n_max < 1:
        raise InvalidParameterError("n_max must be at least 1")
    m2 = _abs_m2(_z(z))
    v = np.zeros(model.N)
    v[0] = 1.0
    total = np.zeros(model.N)
    w = 1.0
    for _ in range(n_max):
        v = model.S @ v
        w *= m2
        total += w * v
    tail = m2 ** (n_max + 1) / (1 - m2)
    return total.reshape(model.s_profile.shape), tail


def _profile_constants(z, W, D):
    z = _z(z)
    m2 = abs(msc(z)) ** 2
    a = alpha(z.real) * z.imag
    b = W * W * D
    return m2, a, b


def _bernoulli2(t):
    u = t - np.floor(t)
    return u * u - u + 1.0 / 6.0


def theta_profile_fourier(x, z, L, W, D, p_trunc=None, accelerate=True):
    """Fourier-series form of the diffusion profile.

    Sums ``(|m|^2/L) sum_p e^{ipx}/(alpha*eta + W^2 D p^2)`` over
    ``p in (2 pi/L) Z``.  With ``accelerate`` the ``1/(W^2 D p^2)`` asymptote is
    summed in closed form (Bernoulli polynomial), so the remaining series
    decays like ``p^-4``.  ``p_trunc`` caps ``|k|`` for ``p = 2 pi k/L``;
    otherwise terms are added until the next one is below ``1e-12`` of the
    accumulated value.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m2, a, b = _profile_constants(z, W, D)
    acc = np.full(x.shape, 1.0 / a)
    if accelerate:
        acc = acc + L * L / (2 * b) * _bernoulli2(x / L)

    def term(k):
        p = 2 * np.pi * k / L
        if accelerate:
            return -a / (b * p * p * (a + b * p * p))
        return 1.0 / (a + b * p * p)

    kmax = MAX_TERMS if p_trunc is None else int(p_trunc)
    k0 = 1
    chunk = 512
    while k0 <= kmax:
        ks = np.arange(k0, min(k0 + chunk, kmax + 1), dtype=float)
        c = term(ks)
        acc = acc + 2 * np.cos(2 * np.pi * np.outer(x, ks) / L) @ c
        k0 = int(ks[-1]) + 1
        if p_trunc is None and abs(term(float(k0))) * 2 < TERM_RTOL * np.min(np.abs(acc)):
            break
        chunk = min(chunk * 2, 65536)
    out = m2 / L * acc
    return out if out.size > 1 else float(out[0])


def theta_profile_exponential(x, z, L, W, D, k_trunc=None):
    """Image-sum form ``|m|^2/(2W sqrt(D alpha eta)) sum_k exp(-c |x + kL|)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m2, a, b = _profile_constants(z, W, D)
    c = math.sqrt(a / b)
    acc = np.exp(-c * np.abs(x))
    kmax = MAX_TERMS if k_trunc is None else int(k_trunc)
    k = 1
    while k <= kmax:
        t = np.exp(-c * np.abs(x + k * L)) + np.exp(-c * np.abs(x - k * L))
        acc = acc + t
        k += 1
        if k_trunc is None and np.max(t) < TERM_RTOL * np.min(acc):
            break
    out = m2 / (2 * math.sqrt(a * b)) * acc
    return out if out.size > 1 else float(out[0])


def total_mass_budget(z, W, D):
    """Relative weight ``sum_{k != 0} alpha*eta / (W^2 D (2 pi k)^2)`` of the
    non-zero winding terms in ``sum_x theta_x``."""
    _, a, b = _profile_constants(z, W, D)
    return a / (12.0 * b)


def _bracket(x):
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


def upsilon(x, y, z, L, W, D, K=1):
    """Envelope ``1/(L eta) + e^{-c|x-y|_L}/(W sqrt(eta)) + <sqrt(eta)|x-y|_L/W>^{-K}/W``."""
    if K < 1:
        raise InvalidParameterError("K must be a positive integer")
    z = _z(z)
    eta = z.imag
    dist = np.abs(_canonical(np.asarray(x) - np.asarray(y), L)).astype(float)
    c = math.sqrt(alpha(z.real) * eta) / (W * math.sqrt(D))
    out = (
        1.0 / (L * eta)
        + np.exp(-c * dist) / (W * math.sqrt(eta))
        + _bracket(math.sqrt(eta) * dist / W) ** (-K) / W
    )
    return out if np.ndim(out) else float(out)


def control_phi(z, L, W, d=1, M=None):
    """Squared control parameter: ``Phi^2`` in one dimension, ``1/M + 1/(N eta)`` above."""
    eta = _z(z).imag
    if not eta > 0:
        raise InvalidParameterError("eta must be positive")
    if d == 1:
        return 1.0 / (L * eta) + 1.0 / (W * math.sqrt(eta))
    M = float(W**d) if M is None else float(M)
    return 1.0 / M + 1.0 / (L**d * eta)


def diffusion_constant(model):
    """Lattice step variance ``D`` and its continuum limit ``D_inf``.

    Scalars in one dimension, ``d x d`` second-moment matrices otherwise.
    """
    g = displacement_grid(model.L, model.d).reshape(model.d, -1) / model.W
    Dm = 0.5 * (g * model.s_profile.reshape(-1)) @ g.T
    Dinf = 0.5 * model.profile.second_moment(model.d)
    if model.d == 1:
        return float(Dm[0, 0]), float(Dinf[0, 0])
    return Dm, Dinf


def predict(model, z, K=1):
    """Bundle ``Theta``, the closed-form profile and envelopes for ``model`` at ``z``."""
    Theta = theta_exact(model, z)
    D, Dinf = diffusion_constant(model)
    prof = ups = None
    if model.d == 1:
        x = _canonical(np.arange(model.L), model.L)
        prof = theta_profile_fourier(x, z, model.L, model.W, D)
        ups = upsilon(x, 0, z, model.L, model.W, D, K)
    return DiffusionPrediction(
        Theta=Theta, theta_profile=prof, Upsilon=ups,
        Phi2=control_phi(z, model.L, model.W, model.d, model.M),
        D=D, Dinf=Dinf,
        fixed_point_residual=fixed_point_residual(Theta, model, z),
    )


__all__ = [
    "DiffusionPrediction", "theta_kernel", "theta_exact", "theta_random_walk",
    "theta_profile_fourier", "theta_profile_exponential", "total_mass_budget",
    "upsilon", "control_phi", "diffusion_constant", "predict",
    "fixed_point_residual",
]
