"""Experiment runners behind the CLI subcommands.

Every runner draws sample ``k`` from the counter-based seed
``sample_seed(baseSeed, k)`` and collects per-sample results in ascending
sample order, so output files do not depend on the thread count.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..cumulants import band_cumulant_scaling, expansion_check, fourth_roots, joint_cumulants, law_of, rademacher
from ..diffusion import (
    control_phi, diffusion_constant, theta_exact, theta_profile_exponential,
    theta_profile_fourier, upsilon,
)
from ..domination import DominationProbe, exceedance, scaling_fit
from ..errors import ConfigurationError
from ..errorlab import (
    build_Q, chain_Y, fourier_coefficients, loop_Z, mode_split, momentum_norm,
    project_decompose, split_PR, x_stat,
)
from ..resolvent import resolvent, t_matrices
from ..rng import generator, sample_seeds
from ..semicircle import SpectralPoint
from ..spectral import deloc_metrics, eigh, localized_set
from ..torus import _canonical, build_model, sample
from .io import Timer, write_csv, write_json, write_manifest


def ordered_map(fn, items, threads):
    """``list(map(fn, items))`` on a thread pool, results in input order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def model_of(cfg):
    m = cfg.model
    return build_model(m.d, m.L, m.W, m.profile, m.dist)


def z_grid(cfg):
    return [SpectralPoint(E, eta, cfg.spectral.kappa, cfg.spectral.gamma)
            for E in cfg.spectral.E for eta in cfg.spectral.eta]


def _seeds(cfg):
    return sample_seeds(cfg.run.baseSeed, cfg.run.samples)


def _finish(out_dir, command, cfg, seeds, files, timer):
    files = list(files)
    return files + [write_manifest(out_dir, command, cfg, seeds, files, timer.seconds)]


# -- profile ----------------------------------------------------------------

def run_profile(cfg, out_dir):
    """Deterministic diffusion profile: exact ``Theta`` column and closed forms."""
    os.makedirs(out_dir, exist_ok=True)
    with Timer() as t:
        model = model_of(cfg)
        D, _ = diffusion_constant(model)
        rows = []
        for sp in z_grid(cfg):
            col = theta_exact(model, sp)[:, 0]
            if model.d == 1:
                x = _canonical(np.arange(model.L), model.L)
                four = theta_profile_fourier(x, sp, model.L, model.W, D)
                expo = theta_profile_exponential(x, sp, model.L, model.W, D)
                ups = upsilon(x, 0, sp, model.L, model.W, D)
            else:
                x = np.arange(model.N)
                four = expo = ups = np.full(model.N, np.nan)
            for k in range(len(x)):
                rows.append((sp.E, sp.eta, int(x[k]), float(four[k]), float(expo[k]),
                             float(col[k]), float(ups[k])))
        f = write_csv(os.path.join(out_dir, "profile.csv"),
                      ["E", "eta", "x", "theta_fourier", "theta_exp", "theta_exact", "upsilon"], rows)
    return _finish(out_dir, "profile", cfg, [], [f], t)


# -- local law --------------------------------------------------------------

def _locallaw_sample(model, zs, seed):
    H = sample(model, seed).H
    out = []
    for sp in zs:
        b = resolvent(H, sp)
        out.append((sp.E, sp.eta, b.lam, control_phi(sp, model.L, model.W, model.d, model.M),
                    b.ward_residual, b.solve_residual))
    return out


def _locallaw_rows(cfg, model):
    zs = z_grid(cfg)
    seeds = _seeds(cfg)
    res = ordered_map(lambda s: _locallaw_sample(model, zs, s), seeds, cfg.run.threads)
    rows = []
    for k, (seed, per) in enumerate(zip(seeds, res)):
        for r in per:
            rows.append((k, seed) + r)
    return rows, seeds


def _exceedance_tables(rows, N, eps_grid):
    tables = []
    keys = sorted({(r[2], r[3]) for r in rows})
    for E, eta in keys:
        sel = [r for r in rows if r[2] == E and r[3] == eta]
        probe = DominationProbe(name="Lambda^2 vs Phi^2", samples=np.array([r[4] ** 2 for r in sel]),
                                bound=sel[0][5], N=N, epsilon_grid=tuple(eps_grid))
        tables.append({"E": E, "eta": eta, "Phi2": sel[0][5],
                       "rows": [vars(x) for x in exceedance(probe)]})
    return tables


LOCALLAW_HEADER = ["sample", "seed", "E", "eta", "Lambda", "Phi2", "ward_residual", "solve_residual"]


def run_locallaw(cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    with Timer() as t:
        model = model_of(cfg)
        rows, seeds = _locallaw_rows(cfg, model)
        f1 = write_csv(os.path.join(out_dir, "locallaw.csv"), LOCALLAW_HEADER, rows)
        eps = cfg.block("domination").get("epsilon", [0.05, 0.1, 0.2])
        f2 = write_json(os.path.join(out_dir, "exceedance.json"), _exceedance_tables(rows, model.N, eps))
    return _finish(out_dir, "locallaw", cfg, seeds, [f1, f2], t)


def run_sweep(cfg, out_dir):
    """Local-law statistics over a grid of band widths (and sizes), with the
    median ``Lambda`` against ``M eta`` fitted on log-log scale."""
    os.makedirs(out_dir, exist_ok=True)
    block = cfg.block("sweep")
    Ws = block.get("W", [cfg.model.W])
    Ls = block.get("L", [cfg.model.L])
    if not Ws:
        raise ConfigurationError("sweep.W", "list must be non-empty")
    if not Ls:
        raise ConfigurationError("sweep.L", "list must be non-empty")
    with Timer() as t:
        rows = []
        groups = {}
        for L in Ls:
            for W in Ws:
                if W > L:
                    raise ConfigurationError("sweep.W", f"W = {W} exceeds L = {L}")
                m = cfg.model
                model = build_model(m.d, L, W, m.profile, m.dist)
                r, seeds = _locallaw_rows(cfg, model)
                for x in r:
                    rows.append((L, W, model.M) + x)
                    groups.setdefault((L, x[2], x[3]), []).append((model.M * x[3], x[4]))
        f1 = write_csv(os.path.join(out_dir, "sweep.csv"), ["L", "W", "M"] + LOCALLAW_HEADER, rows)
        fits = []
        for (L, E, eta), pts in sorted(groups.items()):
            xs = sorted({p[0] for p in pts})
            if len(xs) < 2:
                continue
            samples = [[p[1] for p in pts if p[0] == x] for x in xs]
            try:
                fit = scaling_fit(xs, samples, observable="Lambda", min_points=2, min_samples=1)
            except ValueError:
                continue
            d = fit.to_dict()
            d.update({"L": L, "E": E, "eta": eta})
            fits.append(d)
        f2 = write_json(os.path.join(out_dir, "fits.json"), fits)
    return _finish(out_dir, "sweep", cfg, seeds, [f1, f2], t)


# -- diffusion --------------------------------------------------------------

def run_diffusion(cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    with Timer() as t:
        model = model_of(cfg)
        zs = z_grid(cfg)
        lo = (model.W / model.L) ** 2
        for sp in zs:
            if not lo <= sp.eta <= 1:
                warnings.warn(f"eta = {sp.eta} outside [(W/L)^2, 1] = [{lo:.4g}, 1]", stacklevel=2)
        thetas = [theta_exact(model, sp) for sp in zs]
        seeds = _seeds(cfg)

        def one(seed):
            H = sample(model, seed).H
            out = []
            for sp, Th in zip(zs, thetas):
                T = t_matrices(resolvent(H, sp), model).T
                out.append((float(np.max(np.abs(T - Th))), T[:, 0].copy()))
            return out

        res = ordered_map(one, seeds, cfg.run.threads)
        rows = []
        Lscale = model.N
        for k, per in enumerate(res):
            for sp, (sup, _) in zip(zs, per):
                rows.append((k, seeds[k], sp.E, sp.eta, sup, sup * Lscale * sp.eta))
        f1 = write_csv(os.path.join(out_dir, "diffusion.csv"),
                       ["sample", "seed", "E", "eta", "sup_T_minus_Theta", "scaled"], rows)
        D, _ = diffusion_constant(model)
        prof = []
        summary = []
        for j, (sp, Th) in enumerate(zip(zs, thetas)):
            Tmean = np.mean([per[j][1] for per in res], axis=0)
            if model.d == 1:
                x = _canonical(np.arange(model.L), model.L)
                ups = upsilon(x, 0, sp, model.L, model.W, D)
            else:
                x = np.arange(model.N)
                ups = np.full(model.N, np.nan)
            for k in range(len(x)):
                prof.append((sp.E, sp.eta, int(x[k]), float(Tmean[k]), float(Th[k, 0]), float(ups[k])))
            sups = np.array([per[j][0] for per in res])
            summary.append({"E": sp.E, "eta": sp.eta, "median_sup": float(np.median(sups)),
                            "median_scaled": float(np.median(sups) * Lscale * sp.eta)})
        f2 = write_csv(os.path.join(out_dir, "profile.csv"),
                       ["E", "eta", "x", "T_x0", "Theta_x0", "Upsilon_x0"], prof)
        f3 = write_json(os.path.join(out_dir, "diffusion_summary.json"), summary)
    return _finish(out_dir, "diffusion", cfg, seeds, [f1, f2, f3], t)


# -- error lab --------------------------------------------------------------

def run_errorlab(cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    block = cfg.block("errorlab")
    with Timer() as t:
        model = model_of(cfg)
        zs = z_grid(cfg)
        W, N = model.W, model.N
        a = int(block.get("a", 0)) % N
        b = int(block.get("b", a + W)) % N
        u = int(block.get("u", a)) % N
        alpha = block.get("alpha")
        seeds = _seeds(cfg)
        S = model.S

        def one(seed):
            H = sample(model, seed).H
            obs, ids, ehat = [], [], []
            for sp in zs:
                bnd = resolvent(H, sp)
                T = t_matrices(bnd, model).T
                pr = split_PR(bnd, model)
                proj = project_decompose(pr.E, model, sp, T)
                ms = mode_split(pr.E, model, sp, alpha)
                ids.append((sp.E, sp.eta, bnd.ward_residual, bnd.solve_residual, pr.residual,
                            proj.reconstruction_residual, ms.partition_residual,
                            proj.commutation_residual, float(np.max(np.abs(pr.E.imag)))))
                vals = [
                    ("Y", 1, a, b, chain_Y(bnd, S, a, b, [u], 1, W=W)),
                    ("Y", 1, a, a, chain_Y(bnd, S, a, a, [u], 1, W=W)),
                    ("Y", 2, a, b, chain_Y(bnd, S, a, b, [u, u], 2, W=W)),
                    ("Z", 2, a, b, loop_Z(bnd, S, a, b, [], 2, W=W)),
                    ("Z", 3, a, b, loop_Z(bnd, S, a, b, [u], 3, W=W)),
                    ("X", 1, a, a, x_stat(bnd, S).Xi[a]),
                    ("P", 0, a, b, pr.P[a, b]),
                    ("R", 0, a, b, pr.R[a, b]),
                ]
                obs.append([(sp.E, sp.eta) + v for v in vals])
                coef = fourier_coefficients(pr.E, model.L, model.d)
                ehat.append(np.max(np.abs(coef), axis=-1).ravel())
            return obs, ids, ehat

        res = ordered_map(one, seeds, cfg.run.threads)
        orows, irows = [], []
        for k, (obs, ids, _) in enumerate(res):
            for per in obs:
                for (E, eta, name, n, aa, bb, v) in per:
                    orows.append((k, E, eta, name, n, aa, bb, float(v.real), float(v.imag)))
            for r in ids:
                irows.append((k,) + r)
        f1 = write_csv(os.path.join(out_dir, "observables.csv"),
                       ["sample", "E", "eta", "name", "n", "a", "b", "value_re", "value_im"], orows)
        f2 = write_csv(os.path.join(out_dir, "identities.csv"),
                       ["sample", "E", "eta", "ward", "solve", "E_minus_PR", "reconstruction",
                        "mode_partition", "projector_commutation", "max_imag_E"], irows)
        ft = build_Q(model, alpha)
        pn = momentum_norm(model.L, model.d).ravel()
        mrows = []
        for j, sp in enumerate(zs):
            mean_hat = np.mean([r[2][j] for r in res], axis=0)
            for k in range(pn.size):
                mrows.append((sp.E, sp.eta, float(pn[k]), float(ft.s_hat.ravel()[k]),
                              float(ft.q_hat.ravel()[k]), float(mean_hat[k])))
        f3 = write_csv(os.path.join(out_dir, "modes.csv"), ["E", "eta", "p", "sHat", "qHat", "absEHat"], mrows)
    return _finish(out_dir, "errorlab", cfg, seeds, [f1, f2, f3], t)


# -- spectrum ---------------------------------------------------------------

def run_spectrum(cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    block = cfg.block("spectrum")
    with Timer() as t:
        model = model_of(cfg)
        ell = int(block.get("ell", max(1, model.L // 4)))
        epsilons = block.get("epsilon", [0.1])
        if isinstance(epsilons, (int, float)):
            epsilons = [epsilons]
        if not epsilons:
            raise ConfigurationError("spectrum.epsilon", "list must be non-empty")
        metric = block.get("metric", "periodic")
        method = block.get("method", "householder-ql")
        kappa = cfg.spectral.kappa
        seeds = _seeds(cfg)

        def one(seed):
            es = eigh(sample(model, seed).H, method=method)
            return es, deloc_metrics(es, ell, model.L, model.d, metric)

        res = ordered_map(one, seeds, cfg.run.threads)
        rows = []
        fractions = {float(e): [] for e in epsilons}
        for k, (es, mets) in enumerate(res):
            lam = es.eigenvalues
            bulk = (lam >= -2 + kappa) & (lam <= 2 - kappa)
            for al in range(len(lam)):
                rows.append((k, al, float(lam[al]), float(mets[al]), bool(bulk[al])))
            for e in fractions:
                fractions[e].append(localized_set(es, kappa, e, ell, model.L, model.d, metric, mets).fraction)
        f1 = write_csv(os.path.join(out_dir, "spectrum.csv"),
                       ["sample", "alpha", "lambda", "deloc_metric", "in_bulk"], rows)
        f2 = write_json(os.path.join(out_dir, "deloc.json"), {
            "ell": ell, "kappa": kappa, "metric": metric,
            "fractions": [{"epsilon": e, "per_sample": v, "mean": float(np.mean(v))} for e, v in fractions.items()],
        })
    return _finish(out_dir, "spectrum", cfg, seeds, [f1, f2], t)


# -- cumulants --------------------------------------------------------------

EXPANSION_CASES = (
    ("z", {(1, 0): 1.0}, 1),
    ("z^2", {(2, 0): 1.0}, 2),
    ("z^3", {(3, 0): 1.0}, 4),
    ("z zbar^2 + 2 z^2 zbar", {(1, 2): 1.0, (2, 1): 2.0}, 3),
)


def run_cumulants(cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    block = cfg.block("cumulants")
    k_max = int(block.get("kMax", 4))
    draws = int(block.get("draws", 100000))
    with Timer() as t:
        model = model_of(cfg)
        seeds = _seeds(cfg)
        per = max(1, math.ceil(draws / len(seeds)))
        chunks = ordered_map(lambda s: model.dist.draw_offdiag(generator(s), per), seeds, cfg.run.threads)
        h = np.concatenate(chunks)[:draws]
        try:
            table = joint_cumulants(h, k_max)
        except ValueError as exc:
            raise ConfigurationError("cumulants.draws", str(exc)) from exc
        f1 = os.path.join(out_dir, "cumulants.json")
        table.to_json(f1)
        sc = band_cumulant_scaling(model, k_max)
        f2 = write_json(os.path.join(out_dir, "scaling.json"), {
            "k_max": k_max, "max_defect": sc.max_defect,
            "slopes": [{"p": p, "q": q, "slope": s} for (p, q), s in sorted(sc.slopes.items())],
        })
        laws = {"model": law_of(model.dist), "rademacher": rademacher(), "complex-fourth-roots": fourth_roots()}
        checks = []
        for lname, law in laws.items():
            for fname, coeffs, ell in EXPANSION_CASES:
                r = expansion_check(law, coeffs, ell)
                checks.append({"law": lname, "f": fname, "ell": ell, "lhs": r.lhs, "rhs": r.rhs,
                               "remainder_abs": abs(r.remainder), "exact": r.exact})
        f3 = write_json(os.path.join(out_dir, "expansion.json"), checks)
    return _finish(out_dir, "cumulants", cfg, seeds, [f1, f2, f3], t)


RUNNERS = {
    "profile": run_profile,
    "locallaw": run_locallaw,
    "diffusion": run_diffusion,
    "errorlab": run_errorlab,
    "spectrum": run_spectrum,
    "cumulants": run_cumulants,
    "sweep": run_sweep,
}

__all__ = ["ordered_map", "RUNNERS"] + [f"run_{k}" for k in RUNNERS]
