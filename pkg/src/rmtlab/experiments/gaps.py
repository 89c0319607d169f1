"""Bulk gap statistics of two ensembles compared by a two-sample KS test."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy import stats

from ..ensembles import sample_matrix
from ..errors import InsufficientGaps
from ..spectra import check_bulk_window, gap_statistics, moving_averages
from .common import ExperimentReport, Timer, derive_seed, parallel_map

EXP_ID = "gap_universality"
MIN_GAPS = 1000


def _one(profile, law, cls, seed, window, k_avg):
    lam = np.linalg.eigvalsh(sample_matrix(profile, law, cls, seed).entries)
    mid = lam.size // 2 - k_avg // 2
    return gap_statistics(lam, window), float(moving_averages(lam, k_avg)[mid])


def gap_universality(profile_a, profile_b, law_a, law_b, window=(-1.0, 1.0), samples: int = 17,
                     master_seed: int = 0, cls="ComplexHermitian", threads: Optional[int] = None,
                     ks_max: float = 0.05, p_min: float = 0.01, k_avg: int = 10,
                     conc_delta: float = 0.1) -> ExperimentReport:
    """Pooled unfolded gaps of ensembles a and b, KS distance and asymptotic p-value.

    Also records, for each ensemble, how often the moving average of K middle
    eigenvalues deviates from its sample mean by more than N^{-1/2+delta} K^{-1/2}.
    """
    window = check_bulk_window(window)
    n = profile_a.n
    if profile_b.n != n:
        raise ValueError("profiles must share N")
    report = ExperimentReport(EXP_ID, {
        "profile_a": profile_a.to_json(), "profile_b": profile_b.to_json(), "law_a": law_a.to_json(),
        "law_b": law_b.to_json(), "window": list(window), "samples": samples,
        "class": str(getattr(cls, "value", cls)), "k_avg": k_avg, "conc_delta": conc_delta}, master_seed)
    warnings = []
    for tag, law in (("a", law_a), ("b", law_b)):
        _, _, m3, m4 = law.moments
        if not m4 - m3 * m3 > 1:
            warnings.append(f"law_{tag} has m4 - m3^2 <= 1 (two-point law)")
    pooled = {}
    with Timer() as timer:
        for tag, prof, law in (("a", profile_a, law_a), ("b", profile_b, law_b)):
            seeds = [derive_seed(master_seed, EXP_ID + ":" + tag, i) for i in range(samples)]
            res = parallel_map(lambda s: _one(prof, law, cls, s, window, k_avg), seeds, threads)
            gaps = np.concatenate([r[0] for r in res])
            if gaps.size < MIN_GAPS:
                raise InsufficientGaps(f"ensemble {tag}: {gaps.size} gaps < {MIN_GAPS}")
            pooled[tag] = gaps
            avgs = np.array([r[1] for r in res])
            thr = n ** (-0.5 + conc_delta) * k_avg ** -0.5
            frac = float(np.mean(np.abs(avgs - avgs.mean()) >= thr))
            cell = f"N={n};ensemble={tag}"
            report.add_cell(cell, "unfolded_gap", gaps)
            report.add_cell(cell, "moving_average", avgs)
            report.add_scalar(cell, "moving_average_exceed_fraction", frac, len(avgs))
    ks = stats.ks_2samp(pooled["a"], pooled["b"], method="asymp")
    cell = f"N={n};window={window[0]:g}:{window[1]:g}"
    report.add_scalar(cell, "ks_distance", ks.statistic, pooled["a"].size + pooled["b"].size)
    report.add_scalar(cell, "ks_pvalue", ks.pvalue, pooled["a"].size + pooled["b"].size)
    report.fits["ks"] = {"distance": float(ks.statistic), "pvalue": float(ks.pvalue),
                         "n_a": int(pooled["a"].size), "n_b": int(pooled["b"].size)}
    report.add_rule("ks_distance", ks.statistic <= ks_max, float(ks.statistic), ks_max)
    report.add_rule("ks_pvalue", ks.pvalue >= p_min, float(ks.pvalue), p_min)
    report.extra.update({"warnings": warnings, "compute_seconds": timer.elapsed})
    return report
