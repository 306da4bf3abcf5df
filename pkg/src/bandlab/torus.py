"""Torus geometry, variance profiles and sampling of Hermitian band matrices.

Sites of the torus ``(Z/LZ)^d`` are ordered row-major over their canonical
coordinates, i.e. matrix index ``k`` has base-``L`` digits ``(k_1, ..., k_d)``
and canonical coordinates ``k_i - L // 2``.  Kernel vectors of translation
invariant matrices (``s_x = S_{x0}`` and friends) are stored as arrays of shape
``(L,) * d`` indexed by the residue ``x mod L``, which is the layout used by
``numpy.fft``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy import integrate, special

from .errors import DegenerateProfileError, InvalidParameterError
from .rng import generator

PROFILE_KINDS = ("gaussian-density", "smooth-compact-bump", "exponential-decay")
DIST_KINDS = (
    "complex-gaussian-circular",
    "real-gaussian",
    "complex-fourth-roots",
    "complex-gaussian-correlated",
)


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class TorusIndex:
    coords: tuple
    L: int

    def __post_init__(self):
        lo = -(self.L // 2)
        if any(not lo <= c < lo + self.L for c in self.coords):
            raise InvalidParameterError(f"{self.coords} is not canonical for L={self.L}")

    @property
    def d(self):
        return len(self.coords)

    def residue(self):
        return tuple(c % self.L for c in self.coords)


def _canonical(i, L):
    i = np.asarray(i, dtype=np.int64)
    h = L // 2
    return (i + h) % L - h


def canonical_rep(i, L):
    """Representative of ``i + L Z^d`` in ``[-L/2, L/2)^d``.

    >>> canonical_rep(5, 8).coords
    (-3,)
    """
    if L <= 0:
        raise InvalidParameterError(f"side length must be positive, got {L}")
    coords = np.atleast_1d(_canonical(i, int(L)))
    return TorusIndex(tuple(int(c) for c in coords), int(L))


def periodic_distance(i, j, L):
    """Euclidean norm of the canonical representative of ``i - j``."""
    if L <= 0:
        raise InvalidParameterError(f"side length must be positive, got {L}")
    a = np.atleast_1d(np.asarray(i, dtype=np.int64))
    b = np.atleast_1d(np.asarray(j, dtype=np.int64))
    if a.shape != b.shape:
        raise InvalidParameterError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum(_canonical(a - b, int(L)).astype(float) ** 2)))


def displacement_grid(L, d):
    """Canonical displacement of every residue, shape ``(d,) + (L,) * d``."""
    one = _canonical(np.arange(L), L)
    return np.array(np.meshgrid(*([one] * d), indexing="ij"))


def site_coords(L, d):
    """Canonical coordinates of matrix index ``k``, shape ``(L**d, d)``."""
    digits = np.array(np.unravel_index(np.arange(L**d), (L,) * d)).T
    return digits - L // 2


def periodic_distances(L, d):
    """Periodic norm ``|x|_L`` over residues, shape ``(L,) * d``."""
    g = displacement_grid(L, d).astype(float)
    return np.sqrt(np.sum(g**2, axis=0))


def circulant(kernel):
    """Dense translation invariant matrix ``A_ij = kernel[(i - j) mod L]``."""
    kernel = np.asarray(kernel)
    d = kernel.ndim
    L = kernel.shape[0]
    digits = np.array(np.unravel_index(np.arange(L**d), (L,) * d))
    diff = (digits[:, :, None] - digits[:, None, :]) % L
    return kernel[tuple(diff)]


# ---------------------------------------------------------------------------
# profiles


def _radial_shape(kind, r):
    r = np.asarray(r, dtype=float)
    if kind == "gaussian-density":
        return np.exp(-0.5 * r**2)
    if kind == "smooth-compact-bump":
        return _bump_radial(r)
    return np.exp(-r)


@lru_cache(maxsize=None)
def _radial_moment(kind, k, d):
    # int_{R^d} |x|^k g(|x|) dx for the unscaled shape g
    upper = 1.0 if kind == "smooth-compact-bump" else np.inf
    val, _ = integrate.quad(
        lambda r: r ** (d - 1 + k) * float(_radial_shape(kind, r)), 0.0, upper, limit=200
    )
    return _sphere_area(d) * val


def _bump_radial(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def _real_gaussian_moment(p):
    return float(2 ** (p / 2) * special.gamma((p + 1) / 2) / math.sqrt(math.pi))


def _sphere_area(d):
    return 2.0 * math.pi ** (d / 2) / special.gamma(d / 2)


@dataclass(frozen=True)
class ProfileSpec:
    """Symmetric probability density ``f`` on ``R^d`` generating the variances.

    ``scale`` stretches the reference shape: standard normal for
    ``gaussian-density``, ``exp(-1/(1-|x|^2))`` on the unit ball for
    ``smooth-compact-bump``, ``exp(-|x|)`` for ``exponential-decay``.
    """

    kind: str = "gaussian-density"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise InvalidParameterError(f"unknown profile kind {self.kind!r}")
        if not self.scale > 0:
            raise InvalidParameterError("profile scale must be positive")

    def _radial(self, r):
        return _radial_shape(self.kind, r)

    def _radial_moment(self, k, d):
        return _radial_moment(self.kind, k, d)

    def norm_const(self, d):
        return self._radial_moment(0, d) * self.scale**d

    def __call__(self, x):
        """Evaluate ``f`` at points ``x`` of shape ``(..., d)``."""
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        r = np.sqrt(np.sum(x**2, axis=-1)) / self.scale
        return self._radial(r) / self.norm_const(d)

    def sup(self, d):
        return 1.0 / self.norm_const(d)

    def second_moment(self, d):
        """``int x_i x_j f(x) dx`` as a ``d x d`` matrix (isotropic)."""
        per_axis = self._radial_moment(2, d) / self._radial_moment(0, d) / d
        return np.eye(d) * per_axis * self.scale**2

    def decay_constant(self, n, d, rmax=200.0):
        """Smallest ``C_n`` with ``f(x) <= C_n <x>^{-n}`` on a radial grid."""
        r = np.linspace(0.0, rmax * self.scale, 20001)
        pts = np.zeros((r.size, d))
        pts[:, 0] = r
        return float(np.max(self(pts) * (1.0 + r**2) ** (n / 2)))

    def to_dict(self):
        return {"kind": self.kind, "scale": self.scale}

    @classmethod
    def from_dict(cls, data):
        return cls(kind=data["kind"], scale=float(data.get("scale", 1.0)))


# ---------------------------------------------------------------------------
# entry distributions


@dataclass(frozen=True)
class DistributionSpec:
    """Law of the normalized entries ``zeta_ij`` (mean 0, ``E|zeta|^2 = 1``).

    Off-diagonal draws follow ``kind``; diagonal draws are real: standard
    normal for the Gaussian kinds and Rademacher for ``complex-fourth-roots``.
    ``rho`` is ``E zeta^2`` for ``complex-gaussian-correlated`` and ignored
    otherwise.
    """

    kind: str = "complex-gaussian-circular"
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in DIST_KINDS:
            raise InvalidParameterError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "complex-gaussian-correlated" and not -1.0 < self.rho < 1.0:
            raise InvalidParameterError("rho must lie in (-1, 1)")

    @property
    def pseudo_variance(self):
        """``E zeta^2`` of the off-diagonal entries."""
        if self.kind == "real-gaussian":
            return 1.0
        if self.kind == "complex-gaussian-correlated":
            return self.rho
        return 0.0

    def offdiag_moment(self, p):
        """``E|zeta_ij|^p`` for ``i != j``."""
        if self.kind == "complex-fourth-roots":
            return 1.0
        if self.kind == "complex-gaussian-circular":
            return float(special.gamma(1 + p / 2))
        if self.kind == "real-gaussian":
            return _real_gaussian_moment(p)
        a, b = (1 + self.rho) / 2, (1 - self.rho) / 2
        ang, _ = integrate.quad(
            lambda t: (a * math.cos(t) ** 2 + b * math.sin(t) ** 2) ** (p / 2), 0, 2 * math.pi
        )
        return float(2 ** (p / 2) * special.gamma(1 + p / 2) * ang / (2 * math.pi))

    def diag_moment(self, p):
        if self.kind == "complex-fourth-roots":
            return 1.0
        return _real_gaussian_moment(p)

    def moment_bound(self, p):
        """``mu_p``: bound on ``E|zeta_ij|^p`` over all entries, diagonal included."""
        return max(self.offdiag_moment(p), self.diag_moment(p))

    def moment_table(self, pmax=8):
        return {p: self.moment_bound(p) for p in range(1, pmax + 1)}

    def draw_offdiag(self, rng, size):
        if self.kind == "complex-gaussian-circular":
            x = rng.standard_normal(size)
            y = rng.standard_normal(size)
            return (x + 1j * y) / math.sqrt(2.0)
        if self.kind == "real-gaussian":
            return rng.standard_normal(size).astype(complex)
        if self.kind == "complex-fourth-roots":
            return (1j) ** rng.integers(0, 4, size)
        a, b = math.sqrt((1 + self.rho) / 2), math.sqrt((1 - self.rho) / 2)
        x = rng.standard_normal(size)
        y = rng.standard_normal(size)
        return a * x + 1j * b * y

    def draw_diag(self, rng, size):
        if self.kind == "complex-fourth-roots":
            return rng.choice(np.array([-1.0, 1.0]), size)
        return rng.standard_normal(size)

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind == "complex-gaussian-correlated":
            out["rho"] = self.rho
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(kind=data["kind"], rho=float(data.get("rho", 0.0)))


# ---------------------------------------------------------------------------
# model and samples


@dataclass(frozen=True, eq=False)
class BandModel:
    d: int
    L: int
    W: int
    profile: ProfileSpec
    dist: DistributionSpec
    s_profile: np.ndarray = field(repr=False)
    Z: float
    M: float

    @property
    def N(self):
        return self.L**self.d

    @cached_property
    def S(self):
        """Dense variance matrix ``S_ij = s[(i - j) mod L]``."""
        S = circulant(self.s_profile)
        S.setflags(write=False)
        return S

    @cached_property
    def s_column(self):
        """``s_profile`` flattened in matrix-index order (column ``S[:, 0]``)."""
        return self.s_profile.reshape(-1)

    def to_dict(self):
        return {
            "d": self.d,
            "L": self.L,
            "W": self.W,
            "profile": self.profile.to_dict(),
            "dist": self.dist.to_dict(),
        }


def build_model(d, L, W, profile=None, dist=None):
    """Variance profile ``s_x = f([x]_L / W) / Z`` and the derived band model."""
    profile = profile if profile is not None else ProfileSpec()
    dist = dist if dist is not None else DistributionSpec()
    if d not in (1, 2, 3):
        raise InvalidParameterError(f"dimension must be 1, 2 or 3, got {d}")
    if not (isinstance(L, (int, np.integer)) and isinstance(W, (int, np.integer))):
        raise InvalidParameterError("L and W must be integers")
    if not 1 <= W <= L:
        raise InvalidParameterError(f"need 1 <= W <= L, got W={W}, L={L}")
    if W < L**0.1:
        warnings.warn(f"W={W} is below L^0.1; band regime assumptions are weak", stacklevel=2)
    grid = displacement_grid(L, d).astype(float)
    f = profile(np.moveaxis(grid, 0, -1) / W)
    Z = math.fsum(f.ravel())
    if not Z > 0:
        raise DegenerateProfileError("profile has zero mass on the torus")
    s = f / Z
    s.setflags(write=False)
    return BandModel(
        d=int(d), L=int(L), W=int(W), profile=profile, dist=dist,
        s_profile=s, Z=Z, M=1.0 / float(np.max(s)),
    )


@dataclass(frozen=True, eq=False)
class HermitianSample:
    entries: np.ndarray = field(repr=False)
    seed: int
    model: BandModel = field(repr=False)

    @property
    def H(self):
        return self.entries


def draw_zeta(dist, n, rng):
    """Hermitian array of normalized entries ``zeta`` (upper triangle independent)."""
    X = dist.draw_offdiag(rng, (n, n))
    U = np.triu(X, 1)
    zeta = U + U.conj().T
    zeta[np.diag_indices(n)] = dist.draw_diag(rng, n)
    return zeta


def sample(model, seed):
    """Draw ``H_ij = sqrt(S_ij) zeta_ij``; a pure function of ``(model, seed)``."""
    rng = generator(seed)
    zeta = draw_zeta(model.dist, model.N, rng)
    H = np.sqrt(model.S) * zeta
    H.setflags(write=False)
    return HermitianSample(entries=H, seed=int(seed), model=model)
