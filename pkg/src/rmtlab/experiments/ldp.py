"""Monte-Carlo tails of linear and quadratic forms in subexponential variables."""
from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
from scipy.special import erfc

from ..entrylaws import EntryLaw
from .common import ExperimentReport, Timer, derive_seed

EXP_ID = "ldp_tails"
MODES = ("linear", "quadratic-diag", "quadratic-offdiag")
CHUNK = 100_000


def tail_exponent(mode: str, alpha: float) -> float:
    if mode == "linear":
        return 2.0 / (2.0 + alpha)
    if mode == "quadratic-diag":
        return 1.0 / (1.0 + alpha)
    if mode == "quadratic-offdiag":
        return 1.0 / (2.0 * (1.0 + alpha))
    raise ValueError(f"unknown mode {mode!r}")


def default_coefficients(mode: str, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    if mode == "linear":
        return rng.standard_normal(n)
    b = rng.standard_normal((n, n))
    b = 0.5 * (b + b.T)
    if mode == "quadratic-diag":
        return np.diag(np.diag(b))
    np.fill_diagonal(b, 0.0)
    return b


def normalized_statistic(mode: str, coeffs: np.ndarray, a: np.ndarray) -> np.ndarray:
    """|form| divided by its natural scale; rows of ``a`` are independent draws."""
    if mode == "linear":
        return np.abs(a @ coeffs) / np.linalg.norm(coeffs)
    if mode == "quadratic-diag":
        d = np.diag(coeffs)
        return np.abs((a * a - 1.0) @ d) / np.linalg.norm(d)
    off = coeffs - np.diag(np.diag(coeffs))
    vals = np.einsum("si,ij,sj->s", a, off, a)
    return np.abs(vals) / np.linalg.norm(off)


def fit_envelope(d_grid, tails, p: float):
    """Least squares of log tail on D^p, then C raised so every point is dominated.

    With fewer than two nonzero tail points the rate is fixed at c = 1 and
    only C is fitted; an all-zero tail gets C = 0.
    """
    d = np.asarray(d_grid, dtype=float)
    t = np.asarray(tails, dtype=float)
    use = t > 0
    if not use.any():
        return {"C": 0.0, "c": 1.0, "p": p, "ls_intercept": None}
    x = d[use] ** p
    y = np.log(t[use])
    if use.sum() < 2:
        c, intercept = 1.0, None
    else:
        slope, intercept = np.polyfit(x, y, 1)
        c = -slope
        intercept = float(intercept)
    log_c = float(np.max(y + c * x))
    return {"C": math.exp(log_c), "c": float(c), "p": p, "ls_intercept": intercept}


def ldp_tails(law: EntryLaw, mode: str = "linear", coefficients=None, d_grid: Sequence[float] = (1, 2, 3, 4, 5, 6),
              samples: int = 200_000, master_seed: int = 0, n: int = 10,
              oracle_d: Optional[float] = 3.0, n_se: float = 4.0) -> ExperimentReport:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if coefficients is None:
        coefficients = default_coefficients(mode, n, derive_seed(master_seed, EXP_ID + ":coef", 0))
    coeffs = np.asarray(coefficients, dtype=float)
    n = coeffs.shape[0]
    p = tail_exponent(mode, law.alpha)
    report = ExperimentReport(EXP_ID, {"law": law.to_json(), "mode": mode, "coefficients": coeffs,
                                       "d_grid": list(d_grid), "samples": samples}, master_seed)
    stats = np.empty(samples)
    with Timer() as timer:
        for c0 in range(0, samples, CHUNK):
            m = min(CHUNK, samples - c0)
            rng = np.random.default_rng(derive_seed(master_seed, EXP_ID, c0 // CHUNK))
            a = law.sample(rng, m * n).reshape(m, n)
            stats[c0:c0 + m] = normalized_statistic(mode, coeffs, a)
    tails = np.array([np.mean(stats >= dd) for dd in d_grid])
    cell = f"law={law.kind};mode={mode}"
    for dd, tv in zip(d_grid, tails):
        report.add_scalar(f"{cell};D={dd:g}", "tail", tv, samples)
    env = fit_envelope(d_grid, tails, p)
    report.fits["envelope"] = env
    bound = env["C"] * np.exp(-env["c"] * np.asarray(d_grid, dtype=float) ** p)
    ok = env["c"] > 0 and bool(np.all(tails <= bound * (1 + 1e-12)))
    report.add_rule("envelope", ok, env["c"], 0.0, f"tail <= C exp(-c D^{p:.4g})")
    report.extra["compute_seconds"] = timer.elapsed
    if oracle_d is not None and mode == "linear" and law.kind == "Gaussian":
        ref = float(erfc(oracle_d / math.sqrt(2)))
        emp = float(np.mean(stats >= oracle_d))
        se = math.sqrt(ref * (1 - ref) / samples)
        report.add_scalar(f"{cell};D={oracle_d:g}", "gaussian_tail_oracle", ref)
        report.add_rule("gaussian_oracle", abs(emp - ref) <= n_se * se, abs(emp - ref) / se, n_se,
                        f"empirical {emp:.4g} vs erfc(D/sqrt 2) = {ref:.4g}")
    return report
