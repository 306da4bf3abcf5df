"""Acceptance criteria: exact identities, profile equivalence and finite-size scaling.

Each test prints a single PASS/FAIL line (also repeated in the terminal
summary) with the measured numbers, then asserts the criterion at its stated
tolerance.
"""
import math
import time

import numpy as np
import pytest

from acceptance_log import record
from bandlab.cumulants import (
    AtomicLaw, band_cumulant_scaling, expansion_check, fourth_roots, rademacher,
)
from bandlab.diffusion import (
    control_phi, diffusion_constant, fixed_point_residual, theta_exact, theta_profile_exponential,
    theta_profile_fourier, total_mass_budget,
)
from bandlab.domination import DominationProbe, exceedance, log_growth_fit, scaling_fit
from bandlab.errorlab import (
    build_Q, chain_Y, error_E, fourier_s, mode_split, momenta, operator_L, P_entries, projector,
    split_PR,
)
from bandlab.resolvent import resolvent, t_matrices
from bandlab.rng import sample_seed
from bandlab.semicircle import SpectralPoint, alpha, msc, msc_identities
from bandlab.spectral import deloc_metrics, eigh, localized_set
from bandlab.torus import DistributionSpec, build_model, sample

pytestmark = pytest.mark.acceptance


def _bundles(model, z, base, n):
    for k in range(n):
        yield resolvent(sample(model, sample_seed(base, k)).H, z)


def test_criterion_01_exact_identities():
    t0 = time.perf_counter()
    L, W = 256, 32
    model = build_model(1, L, W)
    z = SpectralPoint(0.3, 0.05).z
    b = resolvent(sample(model, sample_seed(1, 0)).H, z)
    T = t_matrices(b, model).T
    E = error_E(T, model, z)
    P = projector(model.N)
    res = {
        "ward": b.ward_residual,
        "solve/N": b.solve_residual / model.N,
        "theta": fixed_point_residual(theta_exact(model, z), model, z),
        "E=P+R": split_PR(b, model).residual,
        "modes": mode_split(E, model, z).partition_residual,
        "m-eq": msc_identities(z).equation_residual,
        "PiS": max(np.max(np.abs(P @ model.S - P)), np.max(np.abs(model.S @ P - P))),
    }
    tol = {"ward": 1e-9, "solve/N": 1e-10, "theta": 1e-10, "E=P+R": 1e-10, "modes": 1e-10,
           "m-eq": 1e-12, "PiS": 1e-12}
    dt = time.perf_counter() - t0
    ok = all(res[k] <= tol[k] for k in res) and dt < 60
    detail = ", ".join(f"{k}={v:.1e}" for k, v in res.items())
    assert record(1, "exact identities", ok, detail, dt), detail


def test_criterion_02_profile_equivalence():
    t0 = time.perf_counter()
    L, W, eta = 512, 32, 0.05
    z = complex(0.0, eta)
    D, _ = diffusion_constant(build_model(1, L, W))
    x = np.arange(L) - L // 2
    f = theta_profile_fourier(x, z, L, W, D)
    e = theta_profile_exponential(x, z, L, W, D)
    diff = float(np.max(np.abs(f - e)))
    target = abs(msc(z)) ** 2 / (alpha(0.0) * eta)
    mass_dev = abs(f.sum() / target - 1)
    budget = total_mass_budget(z, W, D)
    ok = diff <= 1e-8 and mass_dev <= budget * (1 + 1e-6) and budget <= 0.01
    dt = time.perf_counter() - t0
    detail = f"max|fourier-exp|={diff:.1e}, mass deviation={mass_dev:.2e}, k!=0 budget={budget:.2e}"
    assert record(2, "profile equivalence", ok, detail, dt), detail


def test_criterion_03_mean_zero_error():
    t0 = time.perf_counter()
    L, W, n = 128, 16, 10_000
    model = build_model(1, L, W)
    z = SpectralPoint(0.0, 0.2).z
    rng = np.random.default_rng(2024)
    pairs = [tuple(p) for p in rng.integers(0, L, size=(20, 2))]
    vals = np.array([P_entries(b, model, pairs) for b in _bundles(model, z, 3, n)])
    mean = vals.mean(axis=0)
    se = np.sqrt(vals.real.var(axis=0, ddof=1) + vals.imag.var(axis=0, ddof=1)) / math.sqrt(n)
    ratio = np.abs(mean) / se
    ok = bool(np.all(ratio <= 4))
    dt = time.perf_counter() - t0
    detail = f"max |mean P|/se over 20 pairs = {ratio.max():.2f} (n={n})"
    assert record(3, "mean-zero error P", ok, detail, dt), detail


def test_criterion_04_rough_bound_scaling():
    t0 = time.perf_counter()
    L, n = 512, 100
    z = SpectralPoint(0.1, 0.1).z
    Ws = [8, 16, 32, 64]
    xs, groups = [], []
    for W in Ws:
        model = build_model(1, L, W)
        groups.append([b.lam for b in _bundles(model, z, 40 + W, n)])
        xs.append(model.M * z.imag)
    fit = scaling_fit(xs, groups, "Lambda", n_boot=1000)
    ok = abs(fit.slope + 0.5) <= 0.15
    dt = time.perf_counter() - t0
    detail = f"slope={fit.slope:.3f} (CI {fit.ci_lo:.3f}..{fit.ci_hi:.3f}), target -0.5 +- 0.15"
    assert record(4, "Lambda vs M eta slope", ok, detail, dt), detail


def test_criterion_05_local_law_proxy():
    t0 = time.perf_counter()
    L, W, n = 256, 64, 500
    model = build_model(1, L, W)
    freqs = {}
    for eta in (0.2, 0.4):
        z = SpectralPoint(0.0, eta).z
        lam2 = np.array([b.lam**2 for b in _bundles(model, z, 50, n)])
        phi2 = control_phi(z, L, W)
        row = exceedance(DominationProbe("Lambda^2", lam2, phi2, model.N, (0.2,)))[0]
        freqs[eta] = (row.frequency, float(np.median(lam2 / phi2)))
    ok = all(f <= 0.05 for f, _ in freqs.values())
    dt = time.perf_counter() - t0
    detail = ", ".join(f"eta={k}: freq={f:.3f} (median Lambda^2/Phi^2={m:.2f}, N^0.2={model.N**0.2:.2f})"
                       for k, (f, m) in freqs.items())
    assert record(5, "local-law exceedance <= 5%", ok, detail, dt), detail


def test_criterion_06_diffusion_profile_proxy():
    t0 = time.perf_counter()
    L, W, n = 128, 64, 100
    model = build_model(1, L, W)
    etas = np.geomspace((W / L) ** 2, 1.0, 5)
    med = []
    for k, eta in enumerate(etas):
        z = complex(0.0, eta)
        Th = theta_exact(model, z)
        sups = [np.max(np.abs(t_matrices(b, model).T - Th)) for b in _bundles(model, z, 60 + k, n)]
        med.append(float(np.median(sups)) * L * eta)
    band = max(med) / min(med)
    ok = band <= 3
    dt = time.perf_counter() - t0
    detail = f"medians of sup|T-Theta| L eta = {np.round(med, 3).tolist()}, max/min={band:.2f} (<= 3)"
    assert record(6, "diffusion-profile band", ok, detail, dt), detail


def test_criterion_07_delocalization_proxy():
    t0 = time.perf_counter()
    L, W, n, eps = 128, 64, 100, 0.1
    ell = L // 4
    model = build_model(1, L, W)
    fr = []
    for k in range(n):
        es = eigh(sample(model, sample_seed(70, k)).H)
        mets = deloc_metrics(es, ell, L)
        fr.append(localized_set(es, 0.05, eps, ell, L, metrics=mets).fraction)
    bound = 3 * math.sqrt(eps)
    ok = max(fr) <= bound
    dt = time.perf_counter() - t0
    detail = f"fraction mean={np.mean(fr):.3f}, max={max(fr):.3f}, bound 3 sqrt(eps)={bound:.3f}"
    assert record(7, "localized fraction", ok, detail, dt), detail


def test_criterion_08_cumulant_suite():
    t0 = time.perf_counter()
    laws = [rademacher(), fourth_roots(),
            AtomicLaw((1.5, -0.5 + 1j, -0.5 - 1j), (0.25, 0.375, 0.375), "three-point")]
    polys = [{(1, 0): 1.0}, {(2, 0): 1.0}, {(3, 0): 1.0},
             {(1, 2): 1.0, (2, 1): 2.0 - 1j}, {(2, 2): 0.5, (4, 0): 1j, (0, 3): -2.0, (0, 0): 1.0}]
    worst = 0.0
    for law in laws:
        for c in polys:
            for ell in range(max(i + j for i, j in c), 6):
                worst = max(worst, abs(expansion_check(law, c, ell).remainder))
    slope_err = 0.0
    for dist in (DistributionSpec("complex-fourth-roots"), DistributionSpec("complex-gaussian-circular")):
        rep = band_cumulant_scaling(build_model(1, 256, 32, dist=dist), 6)
        slope_err = max(slope_err, max(abs(s - (p + q) / 2) for (p, q), s in rep.slopes.items()))
    ok = worst <= 1e-12 and slope_err <= 1e-10
    dt = time.perf_counter() - t0
    detail = f"max expansion remainder={worst:.1e}, max |slope - k/2|={slope_err:.1e}"
    assert record(8, "cumulant expansion and homogeneity", ok, detail, dt), detail


def test_criterion_09_fourier_structure():
    t0 = time.perf_counter()
    W = 32
    big = build_model(1, 4096, W)
    p = momenta(4096)[0]
    sh = fourier_s(big)
    D, _ = diffusion_constant(big)
    sel = np.abs(p) <= 0.5 / W
    c2 = np.linalg.lstsq(np.stack([p[sel] ** 2, p[sel] ** 4], 1), 1 - sh[sel], rcond=None)[0][0]
    quad_err = abs(c2 / (W * W * D) - 1)
    gap = float(np.min(1 - sh[np.abs(p) >= 1 / W]))
    Ls = [128, 256, 512, 1024]
    q = [build_Q(build_model(1, L, W)).q_l1 for L in Ls]
    Lnorm = [operator_L(build_model(1, L, W), 0.1j).norm_inf for L in Ls]
    fq, fL = log_growth_fit(Ls, q), log_growth_fit(Ls, Lnorm)
    parts = {"quadratic": quad_err <= 0.02, "gap": gap > 0, "q R2": fq.r2 >= 0.9, "L R2": fL.r2 >= 0.9}
    ok = all(parts.values())
    dt = time.perf_counter() - t0
    detail = (f"W^2 D rel err={quad_err:.1e}, min(1-s)={gap:.3f}, ||q||_1={np.round(q, 3).tolist()} "
              f"R2={fq.r2:.3f}, ||L||={np.round(Lnorm, 4).tolist()} R2={fL.r2:.3f} c1={fL.c1:.1e}; "
              f"failed parts: {[k for k, v in parts.items() if not v] or 'none'}")
    assert record(9, "Fourier structure", ok, detail, dt), detail


def test_criterion_10_chain_exponents():
    t0 = time.perf_counter()
    L, n = 256, 100
    z = SpectralPoint(0.1, 0.5).z
    Ws = [8, 16, 32, 64]
    Ms, off, diag = [], [], []
    for W in Ws:
        model = build_model(1, L, W)
        a, b = 0, W
        o, d = [], []
        for bun in _bundles(model, z, 100 + W, n):
            o.append(abs(chain_Y(bun, model.S, a, b, [a], 1)))
            d.append(abs(chain_Y(bun, model.S, a, a, [a], 1)))
        Ms.append(model.M)
        off.append(o)
        diag.append(d)
    f_off = scaling_fit(Ms, off, "Y1 offdiag", n_boot=1000)
    ratio = [np.array(d) / np.median(o) for d, o in zip(diag, off)]
    f_rat = scaling_fit(Ms, ratio, "Y1 diag/offdiag", n_boot=1000)
    ok = abs(f_off.slope + 1.5) <= 0.25 and abs(f_rat.slope - 0.5) <= 0.25
    dt = time.perf_counter() - t0
    detail = f"offdiag slope={f_off.slope:.3f} (-1.5 +- 0.25), diag/offdiag slope={f_rat.slope:.3f} (0.5 +- 0.25)"
    assert record(10, "chain exponents", ok, detail, dt), detail
