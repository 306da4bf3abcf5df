"""Joint cumulants of a complex variable and the cumulant expansion formula.

``C^(p,q)(h)`` is the joint cumulant of ``p`` copies of ``h`` and ``q``
copies of ``conj(h)``; ``mu[a, b] = E h^a conj(h)^b``.  Moments and cumulants
are related by the recursion obtained from singling out one ``h`` (or one
``conj(h)`` when ``a = 0``):

    mu[a, b] = sum_{i<a, j<=b} C(a-1, i) C(b, j) kappa[a-i, b-j] mu[i, j]
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .torus import DistributionSpec

K_MAX = 6
MIN_SAMPLES = 1000


def _recursion_terms(a, b):
    """Yield ``(i, j, weight)`` for the recursion at lattice point ``(a, b)``."""
    if a >= 1:
        for i in range(a):
            for j in range(b + 1):
                yield i, j, math.comb(a - 1, i) * math.comb(b, j)
    else:
        for j in range(b):
            yield 0, j, math.comb(b - 1, j)


def moments_to_cumulants(mu, k_max):
    """Cumulants ``kappa[p, q]`` for ``p + q <= k_max`` from raw moments ``mu``."""
    mu = np.asarray(mu, dtype=complex)
    kap = np.zeros((k_max + 1, k_max + 1), dtype=complex)
    for k in range(1, k_max + 1):
        for a in range(k + 1):
            b = k - a
            acc = mu[a, b]
            for i, j, w in _recursion_terms(a, b):
                if i == 0 and j == 0:
                    continue
                pa, pb = (a - i, b - j)
                acc -= w * kap[pa, pb] * mu[i, j]
            kap[a, b] = acc / mu[0, 0]
    return kap


def cumulants_to_moments(kap, k_max):
    """Inverse of ``moments_to_cumulants`` (same recursion, solved for ``mu``)."""
    kap = np.asarray(kap, dtype=complex)
    mu = np.zeros((k_max + 1, k_max + 1), dtype=complex)
    mu[0, 0] = 1.0
    for k in range(1, k_max + 1):
        for a in range(k + 1):
            b = k - a
            mu[a, b] = sum(w * kap[a - i, b - j] * mu[i, j] for i, j, w in _recursion_terms(a, b))
    return mu


def empirical_moments(h, k_max):
    h = np.asarray(h, dtype=complex)
    hb = h.conj()
    pw = [np.ones_like(h)]
    for _ in range(k_max):
        pw.append(pw[-1] * h)
    pwb = [np.ones_like(h)]
    for _ in range(k_max):
        pwb.append(pwb[-1] * hb)
    mu = np.zeros((k_max + 1, k_max + 1), dtype=complex)
    for a in range(k_max + 1):
        for b in range(k_max + 1 - a):
            mu[a, b] = np.mean(pw[a] * pwb[b])
    return mu


@dataclass(frozen=True, eq=False)
class CumulantTable:
    k_max: int
    estimate: np.ndarray = field(repr=False)
    stderr: np.ndarray = field(repr=False)
    n_samples: int = 0

    def __getitem__(self, pq):
        return self.estimate[pq]

    def entries(self):
        for k in range(1, self.k_max + 1):
            for p in range(k + 1):
                yield p, k - p

    def to_records(self):
        return [
            {"p": p, "q": q, "estimate_re": float(self.estimate[p, q].real),
             "estimate_im": float(self.estimate[p, q].imag), "stderr": float(self.stderr[p, q])}
            for p, q in self.entries()
        ]

    def to_json(self, path=None):
        text = json.dumps(self.to_records(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def joint_cumulants(samples, k_max, n_batches=20):
    """Cumulant estimates with batch-means standard errors.

    The point estimate uses all samples; the standard error is the spread of
    per-batch estimates divided by ``sqrt(n_batches)``.
    """
    h = np.asarray(samples, dtype=complex).ravel()
    if not 1 <= k_max <= K_MAX:
        raise InvalidParameterError(f"k_max must lie in 1..{K_MAX}")
    if h.size < MIN_SAMPLES:
        raise InvalidParameterError(f"need at least {MIN_SAMPLES} samples, got {h.size}")
    est = moments_to_cumulants(empirical_moments(h, k_max), k_max)
    batches = np.array_split(h, n_batches)
    per = np.array([moments_to_cumulants(empirical_moments(b, k_max), k_max) for b in batches])
    spread = np.sqrt(np.sum(np.abs(per - per.mean(axis=0)) ** 2, axis=0) / (n_batches - 1))
    return CumulantTable(k_max=k_max, estimate=est, stderr=spread / math.sqrt(n_batches), n_samples=h.size)


# -- distributions with exactly known moments -------------------------------

@dataclass(frozen=True)
class AtomicLaw:
    """Finitely supported law ``P(h = atoms[k]) = probs[k]``."""
    atoms: tuple
    probs: tuple
    name: str = "atomic"

    def moments(self, k_max):
        x = np.asarray(self.atoms, dtype=complex)
        w = np.asarray(self.probs, dtype=float)
        mu = np.zeros((k_max + 1, k_max + 1), dtype=complex)
        for a in range(k_max + 1):
            for b in range(k_max + 1 - a):
                mu[a, b] = np.sum(w * x**a * x.conj() ** b)
        return mu

    def cumulants(self, k_max):
        return moments_to_cumulants(self.moments(k_max), k_max)

    def expect(self, fn):
        """``E fn(h, conj(h))`` by enumerating the atoms."""
        return complex(sum(p * fn(complex(x), complex(x).conjugate()) for x, p in zip(self.atoms, self.probs)))

    def draw(self, rng, size):
        return np.asarray(self.atoms, dtype=complex)[rng.choice(len(self.atoms), size=size, p=self.probs)]


@dataclass(frozen=True)
class GaussianLaw:
    """Centred complex Gaussian with ``E|h|^2 = variance`` and ``E h^2 = pseudo``."""
    variance: float = 1.0
    pseudo: complex = 0.0
    name: str = "gaussian"

    def cumulants(self, k_max):
        kap = np.zeros((k_max + 1, k_max + 1), dtype=complex)
        if k_max >= 2:
            kap[1, 1] = self.variance
            kap[2, 0] = self.pseudo
            kap[0, 2] = np.conj(self.pseudo)
        return kap

    def moments(self, k_max):
        return cumulants_to_moments(self.cumulants(k_max), k_max)

    def draw(self, rng, size):
        # real/imaginary covariance from (variance, pseudo)
        c = np.array([
            [(self.variance + np.real(self.pseudo)) / 2, np.imag(self.pseudo) / 2],
            [np.imag(self.pseudo) / 2, (self.variance - np.real(self.pseudo)) / 2],
        ])
        xy = rng.multivariate_normal(np.zeros(2), c, size=size, method="eigh")
        return xy[..., 0] + 1j * xy[..., 1]


def rademacher():
    return AtomicLaw(atoms=(-1.0, 1.0), probs=(0.5, 0.5), name="rademacher")


def fourth_roots():
    return AtomicLaw(atoms=(1.0, 1j, -1.0, -1j), probs=(0.25,) * 4, name="complex-fourth-roots")


def law_of(dist):
    """Exact law of the off-diagonal entry distribution ``zeta``."""
    if isinstance(dist, (AtomicLaw, GaussianLaw)):
        return dist
    if not isinstance(dist, DistributionSpec):
        raise InvalidParameterError(f"unsupported distribution {dist!r}")
    if dist.kind == "complex-fourth-roots":
        return fourth_roots()
    return GaussianLaw(variance=1.0, pseudo=dist.pseudo_variance, name=dist.kind)


def scaled(law, s):
    """Law of ``sqrt(s) h``."""
    r = math.sqrt(s)
    if isinstance(law, AtomicLaw):
        return AtomicLaw(atoms=tuple(r * complex(x) for x in law.atoms), probs=law.probs, name=law.name)
    return GaussianLaw(variance=s * law.variance, pseudo=s * law.pseudo, name=law.name)


@dataclass(frozen=True, eq=False)
class ScalingReport:
    k_max: int
    s_values: np.ndarray = field(repr=False)
    max_defect: float = 0.0
    slopes: dict = field(default_factory=dict)


def band_cumulant_scaling(model, k_max, n_values=12):
    """Homogeneity ``C^(p,q)(sqrt(S_ij) zeta) = S_ij^((p+q)/2) C^(p,q)(zeta)``.

    Cumulants of ``H_ij`` come from its own exact moments, independently of
    the scaling law being checked.  Slopes of ``log |C|`` against
    ``log S_ij`` are fitted for every non-vanishing base cumulant.
    """
    if not 1 <= k_max <= K_MAX:
        raise InvalidParameterError(f"k_max must lie in 1..{K_MAX}")
    law = law_of(model.dist)
    base = law.cumulants(k_max)
    s = np.unique(model.s_column[model.s_column > 0])
    s = s[np.linspace(0, len(s) - 1, min(n_values, len(s))).astype(int)]
    defect = 0.0
    logs = {}
    for sv in s:
        kap = moments_to_cumulants(scaled(law, sv).moments(k_max), k_max)
        for k in range(1, k_max + 1):
            for p in range(k + 1):
                q = k - p
                want = sv ** (k / 2) * base[p, q]
                defect = max(defect, abs(kap[p, q] - want) / max(abs(want), sv ** (k / 2)))
                if abs(base[p, q]) > 1e-12:
                    logs.setdefault((p, q), []).append((math.log(sv), math.log(abs(kap[p, q]))))
    slopes = {}
    for pq, pts in logs.items():
        if len(pts) >= 2:
            x, y = np.array(pts).T
            slopes[pq] = float(np.polyfit(x, y, 1)[0])
    return ScalingReport(k_max=k_max, s_values=s, max_defect=float(defect), slopes=slopes)


# -- cumulant expansion -----------------------------------------------------

def _falling(n, k):
    return math.perm(n, k) if k <= n else 0


def poly_derivative(coeffs, p, q):
    """``d^p/dz1^p d^q/dz2^q`` of ``sum c_ij z1^i z2^j`` (dict form)."""
    out = {}
    for (i, j), c in coeffs.items():
        w = _falling(i, p) * _falling(j, q)
        if w:
            out[(i - p, j - q)] = out.get((i - p, j - q), 0) + c * w
    return out


def poly_eval(coeffs, z1, z2):
    return sum(c * z1**i * z2**j for (i, j), c in coeffs.items())


def poly_degree(coeffs):
    return max((i + j for (i, j), c in coeffs.items() if c != 0), default=0)


def _poly_moment(coeffs, mu):
    return sum(c * mu[i, j] for (i, j), c in coeffs.items())


@dataclass(frozen=True)
class ExpansionReport:
    lhs: complex
    rhs: complex
    remainder: complex
    lhs_stderr: float
    ell: int
    exact: bool


def expansion_check(law, coeffs, ell, n_samples=None, rng=None):
    """Compare ``E f(h, conj h) conj h`` with its truncated cumulant expansion.

    ``coeffs`` maps ``(i, j)`` to the coefficient of ``z1^i z2^j``.  The
    right-hand side uses exact cumulants and exact moments of the law.  The
    left-hand side is computed by enumeration for atomic laws, from exact
    moments for Gaussian laws, or by Monte Carlo when ``n_samples`` is given.
    """
    law = law_of(law)
    if ell < 0:
        raise InvalidParameterError("ell must be nonnegative")
    deg = poly_degree(coeffs)
    k_max = max(ell + 1, deg + 1)
    kap = law.cumulants(k_max)
    mu = law.moments(k_max)
    rhs = 0j
    for k in range(ell + 1):
        for p in range(k + 1):
            q = k - p
            dp = poly_derivative(coeffs, p, q)
            if dp:
                rhs += kap[p, q + 1] / (math.factorial(p) * math.factorial(q)) * _poly_moment(dp, mu)
    se = 0.0
    if n_samples is not None:
        if rng is None:
            raise InvalidParameterError("Monte-Carlo evaluation needs an rng")
        h = law.draw(rng, n_samples)
        vals = poly_eval(coeffs, h, h.conj()) * h.conj()
        lhs = complex(np.mean(vals))
        se = float(np.std(vals) / math.sqrt(n_samples))
        exact = False
    elif isinstance(law, AtomicLaw):
        lhs = law.expect(lambda z1, z2: poly_eval(coeffs, z1, z2) * z2)
        exact = True
    else:
        lhs = complex(sum(c * mu[i, j + 1] for (i, j), c in coeffs.items()))
        exact = True
    return ExpansionReport(lhs=lhs, rhs=complex(rhs), remainder=complex(lhs - rhs),
                           lhs_stderr=se, ell=ell, exact=exact)


__all__ = [
    "moments_to_cumulants", "cumulants_to_moments", "empirical_moments", "CumulantTable",
    "joint_cumulants", "AtomicLaw", "GaussianLaw", "rademacher", "fourth_roots", "law_of",
    "scaled", "ScalingReport", "band_cumulant_scaling", "poly_derivative", "poly_eval",
    "ExpansionReport", "expansion_check",
]
