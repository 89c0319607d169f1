"""Local semicircle law scan: Lambda_d, off-diagonal maximum, averaged law, delocalization."""
from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from ..ensembles import sample_matrix
from ..semicircle import control_g, kappa, msc
from .common import ExperimentReport, Timer, bootstrap_slope, derive_seed, fit_loglog, parallel_map

EXP_ID = "local_law"


def envelope(n: int, m_param: float, e: float, eta: float, delta_plus: float, alpha: float = 1.0) -> float:
    """(log N)^{11+6 alpha} (kappa+eta)^{1/4} / (sqrt(M eta) g(z))."""
    z = complex(e, eta)
    return (math.log(n) ** (11 + 6 * alpha) * (kappa(e) + eta) ** 0.25
            / (math.sqrt(m_param * eta) * control_g(z, delta_plus)))


def admissible(m_param: float, e: float, eta: float, threshold: float) -> bool:
    return 1.0 / math.sqrt(m_param * eta) <= kappa(e) ** 2 * threshold


def _green_stats(lam, u, z):
    """(Lambda_d, off-diagonal max, m_N) at z from one eigendecomposition."""
    w = 1.0 / (lam - z)
    if np.iscomplexobj(u):
        g = (u * w) @ u.conj().T
    else:
        g = (u * w.real) @ u.T + 1j * ((u * w.imag) @ u.T)
    diag = np.diag(g).copy()
    a = np.abs(g)
    np.fill_diagonal(a, 0.0)
    return float(np.max(np.abs(diag - msc(z)))), float(a.max()), complex(diag.mean())


def _sample_task(profile, law, cls, cells, window, seed, with_green):
    h = sample_matrix(profile, law, cls, seed)
    lam, u = np.linalg.eigh(h.entries)
    out = {}
    if with_green:
        out["cells"] = [_green_stats(lam, u, complex(e, eta)) for e, eta in cells]
    sel = (lam >= window[0]) & (lam <= window[1])
    out["deloc"] = float(np.max(np.abs(u[:, sel]))) if np.any(sel) else float("nan")
    return out


def local_law_scan(profile, law, cls="ComplexHermitian", e_grid: Sequence[float] = (0.0,),
                   eta_grid: Optional[Sequence[float]] = None, samples: int = 25, master_seed: int = 0,
                   threads: Optional[int] = None, admissibility_threshold: float = 1.0,
                   deloc_seeds: int = 0, deloc_window=(-1.0, 1.0), deloc_factor: float = 10.0,
                   slope_band=(-0.7, -0.3), deloc_rate: float = 0.99, label: str = "") -> ExperimentReport:
    """Per (E, eta) cell: median Lambda_d, median off-diagonal max, averaged-law error.

    Slopes of the medians against eta are fitted at each fixed E.  deloc_seeds
    extra eigendecompositions (beyond ``samples``) feed the delocalization rate.
    """
    n = profile.n
    if eta_grid is None:
        eta_grid = [n ** (-p) for p in np.linspace(0.5, 0.9, 9)]
    dm, dp, _ = profile.gap()
    m_param = profile.m_param
    exp_id = EXP_ID + (":" + label if label else "")
    report = ExperimentReport(EXP_ID, {
        "profile": profile.to_json(), "law": law.to_json(), "class": str(getattr(cls, "value", cls)),
        "e_grid": list(e_grid), "eta_grid": list(eta_grid), "samples": samples, "label": label,
        "admissibility_threshold": admissibility_threshold, "deloc_seeds": deloc_seeds,
        "deloc_window": list(deloc_window)}, master_seed)
    cells = []
    for e in e_grid:
        for eta in eta_grid:
            if admissible(m_param, e, eta, admissibility_threshold):
                cells.append((float(e), float(eta)))
            else:
                report.skipped.append({"e": e, "eta": eta, "reason": "inadmissible"})
    total = max(samples, deloc_seeds)
    tasks = [(derive_seed(master_seed, exp_id, i), i < samples) for i in range(total)]
    with Timer() as timer:
        results = parallel_map(lambda t: _sample_task(profile, law, cls, cells, deloc_window, *t), tasks, threads)
    green_rows = [r["cells"] for r in results if "cells" in r]
    ld = np.array([[c[0] for c in row] for row in green_rows]).reshape(len(green_rows), len(cells))
    od = np.array([[c[1] for c in row] for row in green_rows]).reshape(len(green_rows), len(cells))
    mn = np.array([[c[2] for c in row] for row in green_rows]).reshape(len(green_rows), len(cells))
    for c, (e, eta) in enumerate(cells):
        key = f"N={n};E={e:.6g};eta={eta:.6g}"
        ref = msc(complex(e, eta))
        report.add_cell(key, "lambda_d", ld[:, c])
        report.add_cell(key, "offdiag_max", od[:, c])
        report.add_cell(key, "abs_m_minus_msc", np.abs(mn[:, c] - ref))
        report.add_scalar(key, "abs_mean_m_minus_msc", abs(mn[:, c].mean() - ref), count=len(mn))
        report.add_scalar(key, "envelope", envelope(n, m_param, e, eta, dp))
    for e in e_grid:
        idx = [c for c, (ee, _) in enumerate(cells) if ee == e]
        if len(idx) < 2:
            continue
        etas = [cells[c][1] for c in idx]
        for name, arr in (("lambda_d", ld), ("offdiag_max", od)):
            slope, se = bootstrap_slope(etas, [arr[:, c] for c in idx], np.median,
                                        seed=derive_seed(master_seed, exp_id + ":boot:" + name, 0))
            _, intercept = fit_loglog(etas, [np.median(arr[:, c]) for c in idx])
            fit_key = f"slope_{name}_E={e:.6g}"
            report.fits[fit_key] = {"slope": slope, "se": se, "constant": math.exp(intercept)}
            report.add_scalar(f"N={n};E={e:.6g}", f"slope_{name}", slope, count=len(ld))
            report.add_rule(fit_key, slope_band[0] <= slope <= slope_band[1], slope, list(slope_band))
    deloc = np.array([r["deloc"] for r in results])
    bound = deloc_factor * math.sqrt(math.log(n) / n)
    frac = float(np.mean(deloc <= bound))
    report.add_cell(f"N={n};window={deloc_window[0]:.6g}:{deloc_window[1]:.6g}", "max_sup_norm", deloc)
    report.add_scalar(f"N={n}", "deloc_fraction", frac, count=len(deloc))
    if deloc_seeds:
        report.add_rule("delocalization", frac >= deloc_rate, frac, deloc_rate,
                        f"max |u(i)| <= {deloc_factor} sqrt(log N / N) = {bound:.4g}")
    report.extra.update({"M": m_param, "delta_minus": dm, "delta_plus": dp, "compute_seconds": timer.elapsed})
    return report
