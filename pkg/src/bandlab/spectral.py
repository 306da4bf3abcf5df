"""Hermitian eigendecomposition and eigenvector delocalization.

The reference eigensolver reduces ``H`` to a real symmetric tridiagonal
matrix with Householder reflections (a diagonal phase absorbs the complex
off-diagonal), then diagonalizes it with implicit-shift QL while
accumulating the rotations.  ``method="lapack"`` delegates to
``numpy.linalg.eigh`` for large batches.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, NumericalFailureError
from .torus import displacement_grid

HERMITIAN_TOL = 1e-12
MAX_QL_ITER = 60


@dataclass(frozen=True, eq=False)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    residual: float
    orthonormality: float


def _check_hermitian(H):
    H = np.asarray(getattr(H, "entries", H))
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidParameterError(f"expected a square matrix, got shape {H.shape}")
    asym = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
    if asym > HERMITIAN_TOL * scale:
        raise InvalidParameterError(f"matrix is not Hermitian (asymmetry {asym:.3g})")
    return H


def tridiagonalize(H):
    """Return ``(d, e, U)`` with ``H = U T U^*``, ``T`` real tridiagonal.

    ``d`` is the diagonal, ``e[k] = T[k+1, k] >= 0`` the subdiagonal.
    """
    A = np.array(H, dtype=complex)
    n = A.shape[0]
    Q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = A[k + 1:, k]
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        ph = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        alpha = -ph * nx
        v = x.copy()
        v[0] -= alpha
        nv = np.linalg.norm(v)
        if nv == 0.0:
            continue
        v /= nv
        B = A[k + 1:, k + 1:]
        p = B @ v
        K = np.vdot(v, p).real
        w = p - K * v
        B -= 2.0 * np.outer(v, w.conj()) + 2.0 * np.outer(w, v.conj())
        A[k + 1, k] = alpha
        A[k, k + 1] = np.conj(alpha)
        A[k + 2:, k] = 0.0
        A[k, k + 2:] = 0.0
        Qs = Q[:, k + 1:]
        Qs -= 2.0 * np.outer(Qs @ v, v.conj())
    d = A.diagonal().real.copy()
    sub = A.diagonal(-1).copy()
    e = np.abs(sub)
    # phase trick: T = P T_real P^*, so the basis becomes Q P
    phase = np.ones(n, dtype=complex)
    for k in range(n - 1):
        phase[k + 1] = phase[k] * (sub[k] / e[k] if e[k] > 0 else 1.0)
    return d, e, Q * phase[None, :]


def tql(d, e, Z=None):
    """Implicit-shift QL on a real symmetric tridiagonal matrix.

    ``Z`` (optional, shape ``(n, n)``) is right-multiplied by the rotations,
    so passing the tridiagonalizing basis yields the eigenvectors of the
    original matrix.  Returns ``(eigenvalues, Z)`` unsorted.
    """
    d = [float(v) for v in d]
    n = len(d)
    e = [float(v) for v in e] + [0.0]
    Zt = None if Z is None else np.array(Z).T.copy()
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 1e-16 * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > MAX_QL_ITER:
                raise NumericalFailureError("QL iteration failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if Zt is not None:
                    zi1 = Zt[i + 1].copy()
                    Zt[i + 1] = s * Zt[i] + c * zi1
                    Zt[i] = c * Zt[i] - s * zi1
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.array(d), (None if Zt is None else Zt.T)


def eigh(H, method="householder-ql"):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix."""
    H = _check_hermitian(H)
    n = H.shape[0]
    if method == "lapack":
        lam, U = np.linalg.eigh(H)
    elif method == "householder-ql":
        d, e, Q = tridiagonalize(H)
        lam, U = tql(d, e[: max(n - 1, 0)], Q)
        order = np.argsort(lam, kind="stable")
        lam, U = lam[order], U[:, order]
    else:
        raise InvalidParameterError(f"unknown eigensolver method {method!r}")
    norm = max(float(np.linalg.norm(H, 2)) if n else 0.0, 1e-300)
    res = float(np.max(np.linalg.norm(H @ U - U * lam[None, :], axis=0))) / norm if n else 0.0
    orth = float(np.max(np.abs(U.conj().T @ U - np.eye(n)))) if n else 0.0
    return EigenSystem(eigenvalues=lam, eigenvectors=U, residual=res, orthonormality=orth)


def _near_mask(L, d, ell, metric):
    """Indicator of displacements with ``|y| < ell`` (kernel in FFT order)."""
    g = displacement_grid(L, d)
    if metric == "periodic":
        return (np.sqrt(np.sum(g.astype(float) ** 2, axis=0)) < ell).astype(float)
    raise InvalidParameterError(f"unknown metric {metric!r}")


def _near_weight(w, L, d, ell, metric):
    """``sum_{y : |x - y| < ell} w_y`` for every site ``x``; ``w`` has shape ``(L,)*d``."""
    if metric == "periodic":
        box = _near_mask(L, d, ell, metric)
        return np.fft.ifftn(np.fft.fftn(w) * np.fft.fftn(box)).real
    if metric == "euclidean":
        # canonical coordinates are increasing in the digit, so no wraparound:
        # linear convolution on the digit grid, zero padded to 3L per axis
        r = np.arange(-(L - 1), L)
        grids = np.meshgrid(*([r] * d), indexing="ij")
        box = (np.sqrt(sum(q.astype(float) ** 2 for q in grids)) < ell).astype(float)
        shape = (3 * L,) * d
        ax = tuple(range(d))
        conv = np.fft.ifftn(np.fft.fftn(w, shape, axes=ax) * np.fft.fftn(box, shape, axes=ax), axes=ax).real
        sl = tuple(slice(L - 1, 2 * L - 1) for _ in range(d))
        return conv[sl]
    raise InvalidParameterError(f"unknown metric {metric!r}")


def deloc_metric(u, ell, L, d=1, metric="periodic"):
    """``sum_x |u(x)| ||P_{x,ell} u||`` where ``P_{x,ell}`` removes the
    coordinates within distance ``ell`` of ``x``."""
    u = np.asarray(u)
    n = L**d
    if u.shape != (n,):
        raise InvalidParameterError(f"vector has shape {u.shape}, expected ({n},)")
    if abs(np.linalg.norm(u) - 1.0) > 1e-10:
        raise InvalidParameterError("deloc_metric needs a unit vector")
    if not 1 <= ell <= L / 2:
        raise InvalidParameterError(f"ell must lie in [1, L/2], got {ell}")
    w = (np.abs(u) ** 2).reshape((L,) * d)
    far = np.clip(1.0 - _near_weight(w, L, d, ell, metric), 0.0, None)
    return float(np.sum(np.abs(u) * np.sqrt(far.reshape(-1))))


@dataclass(frozen=True, eq=False)
class DelocReport:
    bulk_interval: tuple
    epsilon: float
    ell: int
    localized_indices: np.ndarray
    metrics: np.ndarray = field(repr=False)
    in_bulk: np.ndarray = field(repr=False)

    @property
    def fraction(self):
        return len(self.localized_indices) / len(self.metrics)


def deloc_metrics(system, ell, L, d=1, metric="periodic"):
    U = system.eigenvectors
    return np.array([deloc_metric(U[:, a], ell, L, d, metric) for a in range(U.shape[1])])


def localized_set(system, kappa, epsilon, ell, L, d=1, metric="periodic", metrics=None):
    """Indices of bulk eigenvectors whose delocalization metric is at most ``epsilon``."""
    if not 0 < kappa < 2:
        raise InvalidParameterError("kappa must lie in (0, 2)")
    if epsilon < 0:
        raise InvalidParameterError("epsilon must be nonnegative")
    if metrics is None:
        metrics = deloc_metrics(system, ell, L, d, metric)
    lam = system.eigenvalues
    bulk = (lam >= -2 + kappa) & (lam <= 2 - kappa)
    idx = np.flatnonzero(bulk & (metrics <= epsilon))
    return DelocReport(
        bulk_interval=(-2 + kappa, 2 - kappa), epsilon=float(epsilon), ell=int(ell),
        localized_indices=idx, metrics=np.asarray(metrics), in_bulk=bulk,
    )


__all__ = [
    "EigenSystem", "tridiagonalize", "tql", "eigh", "deloc_metric", "deloc_metrics",
    "DelocReport", "localized_set",
]
