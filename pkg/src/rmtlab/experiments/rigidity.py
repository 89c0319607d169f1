"""Rigidity and counting-function scaling in N."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..ensembles import sample_matrix
from ..entrylaws import Gaussian
from ..profiles import wigner_profile
from ..spectra import counting_stats, rigidity_stat
from .common import ExperimentReport, Timer, bootstrap_slope, derive_seed, fit_loglog, parallel_map

EXP_ID = "rigidity"


def _one(n, law, cls, seed, bulk):
    lam = np.linalg.eigvalsh(sample_matrix(wigner_profile(n), law, cls, seed).entries)
    cs = counting_stats(lam, grid=np.array([-3.0, 3.0]))
    return (rigidity_stat(lam), rigidity_stat(lam, bulk=bulk), cs["l1"],
            float(cs["n_emp"][0] == 0.0 and cs["n_emp"][1] == 1.0))


def rigidity_scaling(n_list: Sequence[int] = (250, 500, 1000), samples: int = 50, master_seed: int = 0,
                     law=None, cls="ComplexHermitian", bulk: float = 0.5, threads: Optional[int] = None,
                     slope_band=(-2.4, -1.6), bulk_max: float = 1e-4, l1_factor: float = 10.0) -> ExperimentReport:
    """Mean of (1/N) sum (lambda_j - gamma_j)^2 over samples, fitted against N.

    The bulk-restricted variant keeps indices with |gamma_j| <= 2 - bulk.
    The counting-function L1 distance over [-3, 3] is recorded alongside.
    """
    law = law or Gaussian()
    n_list = [int(v) for v in n_list]
    report = ExperimentReport(EXP_ID, {"n_list": n_list, "samples": samples, "law": law.to_json(),
                                       "class": str(getattr(cls, "value", cls)), "bulk": bulk}, master_seed)
    full, inner, l1s = [], [], []
    with Timer() as timer:
        for n in n_list:
            seeds = [derive_seed(master_seed, EXP_ID, i, n) for i in range(samples)]
            res = np.array(parallel_map(lambda s: _one(n, law, cls, s, bulk), seeds, threads))
            full.append(res[:, 0])
            inner.append(res[:, 1])
            l1s.append(res[:, 2])
            cell = f"N={n}"
            report.add_cell(cell, "rigidity", res[:, 0])
            report.add_cell(cell, "rigidity_bulk", res[:, 1])
            report.add_cell(cell, "counting_l1", res[:, 2])
            report.add_scalar(cell, "support_in_minus3_3_fraction", float(res[:, 3].mean()), samples)
    slope, se = bootstrap_slope(n_list, full, np.mean, seed=derive_seed(master_seed, EXP_ID + ":boot", 0))
    _, icpt = fit_loglog(n_list, [np.mean(v) for v in full])
    report.fits["rigidity_slope"] = {"slope": slope, "se": se, "constant": float(np.exp(icpt))}
    slope_b, se_b = bootstrap_slope(n_list, inner, np.mean, seed=derive_seed(master_seed, EXP_ID + ":boot", 1))
    report.fits["rigidity_bulk_slope"] = {"slope": slope_b, "se": se_b}
    report.add_scalar("all", "rigidity_slope", slope, samples)
    report.add_rule("rigidity_slope", slope_band[0] <= slope <= slope_band[1], slope, list(slope_band))
    nmax = max(n_list)
    bulk_val = float(np.mean(inner[n_list.index(nmax)]))
    report.add_rule("rigidity_bulk_at_max_n", bulk_val < bulk_max, bulk_val, bulk_max)
    l1_means = [float(np.mean(v)) for v in l1s]
    l1_ok = l1_means[n_list.index(nmax)] <= l1_factor / nmax
    report.extra.update({"counting_l1_means": l1_means,
                         "counting_l1_decreasing": bool(np.all(np.diff(l1_means) < 0)),
                         "counting_l1_within_factor": bool(l1_ok), "compute_seconds": timer.elapsed})
    return report
