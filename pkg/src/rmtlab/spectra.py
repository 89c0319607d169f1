"""Eigenvalue and eigenvector statistics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .ensembles import RandomMatrix
from .errors import EmptyWindow, WindowNotInBulk
from .semicircle import classical_locations, n_sc, rho_sc

DIRECT_K3_MAX_N = 300
K3_SAMPLES = 1_000_000


@dataclass
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    provenance: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @classmethod
    def of(cls, h, vectors: bool = True) -> "SpectralData":
        if isinstance(h, RandomMatrix):
            if vectors:
                lam, u = h.eigh()
                return cls(lam, u, dict(h.provenance))
            return cls(h.eigvalsh(), None, dict(h.provenance))
        h = np.asarray(h)
        if vectors:
            lam, u = np.linalg.eigh(h)
            return cls(lam, u)
        return cls(np.linalg.eigvalsh(h))


def _eigs(s) -> np.ndarray:
    return s.eigenvalues if isinstance(s, SpectralData) else np.sort(np.asarray(s, dtype=float))


# ---------------------------------------------------------------------------
# counting function

def counting_function(eigs: np.ndarray, grid) -> np.ndarray:
    """(1/N) #{j : lambda_j <= E} for every E in grid."""
    eigs = np.sort(eigs)
    return np.searchsorted(eigs, np.asarray(grid, dtype=float), side="right") / eigs.size


def counting_stats(s, grid=None, l1_points: int = 6001) -> dict:
    """Empirical counting function against n_sc on a grid, plus L1 and sup distances.

    The L1 distance uses the trapezoid rule on a uniform grid over [-3, 3];
    the sup distance is exact (checked at both one-sided limits of every jump).
    """
    eigs = np.sort(_eigs(s))
    if grid is None:
        grid = np.linspace(-3.0, 3.0, 61)
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted")
    n_emp = counting_function(eigs, grid)
    xs = np.linspace(-3.0, 3.0, l1_points)
    l1 = float(np.trapezoid(np.abs(counting_function(eigs, xs) - n_sc(xs)), xs))
    nn = eigs.size
    right = np.arange(1, nn + 1) / nn
    left = np.arange(0, nn) / nn
    ref = n_sc(eigs)
    sup = float(max(np.max(np.abs(right - ref)), np.max(np.abs(left - ref))))
    return {"e": grid, "n_emp": n_emp, "diff": n_emp - n_sc(grid), "l1": l1, "sup": sup}


# ---------------------------------------------------------------------------
# rigidity and delocalization

def rigidity_stat(s, bulk: Optional[float] = None) -> float:
    """(1/N) sum_j (lambda_j - gamma_j)^2, optionally restricted to |gamma_j| <= 2 - bulk."""
    eigs = np.sort(_eigs(s))
    gam = classical_locations(eigs.size)
    d2 = (eigs - gam) ** 2
    if bulk is not None:
        d2 = d2[np.abs(gam) <= 2.0 - bulk]
        if d2.size == 0:
            raise EmptyWindow("no classical location inside the bulk restriction")
    return float(d2.mean())


def delocalization_stat(s: SpectralData, window=(-2.0, 2.0)) -> dict:
    lo, hi = window
    if lo < -2.0 or hi > 2.0 or lo > hi:
        raise ValueError("window must lie inside [-2, 2]")
    if s.eigenvectors is None:
        raise ValueError("eigenvectors required")
    lam = s.eigenvalues
    sel = (lam >= lo) & (lam <= hi)
    if not np.any(sel):
        raise EmptyWindow(f"no eigenvalue in [{lo}, {hi}]")
    n = lam.size
    sup = np.max(np.abs(s.eigenvectors[:, sel]), axis=0)
    kap = np.abs(np.abs(lam[sel]) - 2.0)
    edge = sup * np.sqrt(n) * np.sqrt(kap + 1.0 / n)
    return {"max_sup": float(sup.max()), "max_sup_sqrt_n": float(sup.max() * np.sqrt(n)),
            "max_edge_weighted": float(edge.max()), "count": int(sel.sum())}


# ---------------------------------------------------------------------------
# smoothed correlations

def theta(x, eta: float):
    """Im 1/(x - i eta) = eta / (x^2 + eta^2)."""
    x = np.asarray(x, dtype=float)
    return eta / (x * x + eta * eta)


def _falling(n: int, k: int) -> float:
    out = 1.0
    for r in range(k):
        out *= n - r
    return out


def smoothed_correlation(s, e: float, alphas: Sequence[float], eta: float, seed: int = 0,
                         n_samples: int = K3_SAMPLES) -> float:
    """Average over distinct index tuples of prod_k theta_eta(lambda_{j_k} - e - alpha_k / N).

    Direct masked sums for k <= 2 and for k = 3 up to N = 300; beyond that a
    seeded sample of distinct triples.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    alphas = list(alphas)
    k = len(alphas)
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    lam = _eigs(s)
    n = lam.size
    if n < k:
        raise ValueError("need at least k eigenvalues")
    rows = [theta(lam - e - a / n, eta) for a in alphas]
    if k == 1:
        return float(rows[0].mean())
    if k == 2:
        outer = np.outer(rows[0], rows[1])
        np.fill_diagonal(outer, 0.0)
        return float(outer.sum() / _falling(n, 2))
    if n <= DIRECT_K3_MAX_N:
        total = 0.0
        bc = np.outer(rows[1], rows[2])
        np.fill_diagonal(bc, 0.0)
        for i in range(n):
            row = bc.copy()
            row[i, :] = 0.0
            row[:, i] = 0.0
            total += rows[0][i] * row.sum()
        return float(total / _falling(n, 3))
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, n_samples)
    j = rng.integers(0, n - 1, n_samples)
    j = j + (j >= i)
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    kk = rng.integers(0, n - 2, n_samples)
    kk = kk + (kk >= lo)
    kk = kk + (kk >= hi)
    return float(np.mean(rows[0][i] * rows[1][j] * rows[2][kk]))


# ---------------------------------------------------------------------------
# gaps

def sine_kernel(x):
    """sin(pi x) / (pi x) with value 1 at 0."""
    out = np.sinc(np.asarray(x, dtype=float))
    return out[()] if out.ndim == 0 else out


def check_bulk_window(window) -> tuple:
    lo, hi = float(window[0]), float(window[1])
    if not (-2.0 < lo < hi < 2.0):
        raise WindowNotInBulk(f"window [{lo}, {hi}] must lie strictly inside (-2, 2)")
    return lo, hi


def gap_statistics(s, window) -> np.ndarray:
    """N rho_sc(lambda_j) (lambda_{j+1} - lambda_j) for consecutive pairs inside the window."""
    lo, hi = check_bulk_window(window)
    lam = np.sort(_eigs(s))
    sel = np.nonzero((lam >= lo) & (lam <= hi))[0]
    if sel.size < 2:
        raise EmptyWindow(f"fewer than two eigenvalues in [{lo}, {hi}]")
    a = lam[sel[:-1]]
    b = lam[sel[:-1] + 1]
    return lam.size * rho_sc(a) * (b - a)


def moving_averages(s, k: int) -> np.ndarray:
    """lambda_{j,K} = K^{-1} sum_{i=1..K} lambda_{j+i} for every admissible j."""
    lam = np.sort(_eigs(s))
    if not 1 <= k <= lam.size:
        raise ValueError("window length K out of range")
    c = np.concatenate([[0.0], np.cumsum(lam)])
    return (c[k:] - c[:-k]) / k
