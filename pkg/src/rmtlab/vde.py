"""Vector self-consistent equation m_i = -1/(z + sum_j s_ij m_j) and its linear stability."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoContraction, NonConvergence, NotOrthogonal
from .profiles import VarianceProfile
from .semicircle import msc

THETA = 0.5
MAX_ITER = 10_000
GRID = 10_000


@dataclass
class VdeSolution:
    z: complex
    m_vec: np.ndarray
    residual: float
    iterations: int
    zeta: complex
    tau: float
    contraction: float

    def to_csv_rows(self):
        return [(i, float(m.real), float(m.imag)) for i, m in enumerate(self.m_vec)]


def _sigma2(profile):
    return np.asarray(getattr(profile, "sigma2", profile), dtype=float)


def vde_residual(sigma2: np.ndarray, z: complex, m: np.ndarray, forcing=0.0) -> float:
    return float(np.max(np.abs(m + 1.0 / (z + sigma2 @ m - forcing))))


def solve_vde(profile: VarianceProfile, z: complex, tol: float = 1e-13,
              theta: float = THETA, max_iter: int = MAX_ITER, init=None,
              forcing=None) -> VdeSolution:
    """Damped fixed-point solve started at m_sc(z) unless ``init`` is given.

    ``forcing`` adds a fixed error vector: m_i = -1/(z + (Bm)_i - forcing_i).
    """
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("solve_vde requires Im z > 0")
    if tol < 1e-13:
        raise ValueError("tol must be at least 1e-13")
    b = _sigma2(profile)
    f = 0.0 if forcing is None else np.asarray(forcing, dtype=complex)
    if init is None:
        m = np.full(b.shape[0], msc(z), dtype=complex)
    else:
        m = np.array(init, dtype=complex)
    res = vde_residual(b, z, m, f)
    best = res
    it = 0
    while res > tol and it < max_iter:
        m = (1 - theta) * m + theta * (-1.0 / (z + b @ m - f))
        it += 1
        res = vde_residual(b, z, m, f)
        best = min(best, res)
    if res > tol:
        raise NonConvergence(f"residual {best:.3g} after {it} iterations", best_residual=best)
    try:
        tau, bound = contraction_certificate(profile, z)
    except (NoContraction, AttributeError):
        tau, bound = float("nan"), float("nan")
    return VdeSolution(z=z, m_vec=m, residual=res, iterations=it, zeta=complex(msc(z) ** 2),
                       tau=tau, contraction=bound)


def _gap_of(profile):
    if hasattr(profile, "gap"):
        dm, dp, _ = profile.gap()
        return dm, dp
    from .profiles import VarianceProfile as VP
    return _gap_of(VP(len(profile), profile))


def case_tau(profile, z: complex) -> float:
    """tau from the two-case rule: 0 when max{d+, |1 - Re zeta|} = d+, else d-/10."""
    dm, dp = _gap_of(profile)
    zeta = msc(complex(z)) ** 2
    g_hat = max(dp, abs(1 - zeta.real))
    return 0.0 if g_hat == dp else dm / 10


def contraction_bound(zeta: complex, tau: float, dm: float, dp: float, grid: int = GRID) -> float:
    """max over x in [-1+dm, 1-dp] of |tau + x zeta| / (1 + tau)."""
    lo, hi = -1.0 + dm, 1.0 - dp
    xs = np.linspace(lo, hi, grid)
    pts = [lo, hi]
    a2 = abs(zeta) ** 2
    if a2 > 0:
        vertex = -tau * zeta.real / a2
        if lo <= vertex <= hi:
            pts.append(vertex)
    xs = np.concatenate([xs, pts])
    return float(np.max(np.abs(tau + xs * zeta)) / (1 + tau))


def contraction_certificate(profile, z: complex):
    """(tau, bound) with bound < 1 certifying that (zeta B + tau)/(1 + tau) contracts on e-perp.

    Both candidate shifts 0 and d-/10 are evaluated and the smaller bound is
    returned; ties go to the two-case rule.
    """
    z = complex(z)
    dm, dp = _gap_of(profile)
    if dm <= 0:
        raise NoContraction("delta_minus must be positive")
    zeta = complex(msc(z) ** 2)
    rule = case_tau(profile, z)
    cands = sorted({0.0, dm / 10}, key=lambda t: (contraction_bound(zeta, t, dm, dp), t != rule))
    tau = cands[0]
    bound = contraction_bound(zeta, tau, dm, dp)
    if not bound < 1:
        raise NoContraction(f"bound {bound:.6g} >= 1 at z = {z}")
    return float(tau), bound


def neumann_solve(profile, z: complex, w, tol: float = 1e-14, max_terms: int = 1_000_000,
                  return_norms: bool = False):
    """u = (I - zeta B)^{-1} w on the mean-zero subspace by a shifted Neumann series."""
    b = _sigma2(profile)
    w = np.asarray(w, dtype=complex)
    n = w.size
    if abs(w.sum()) > 1e-12 * max(1.0, float(np.linalg.norm(w))) * np.sqrt(n):
        raise NotOrthogonal("w must have zero sum")
    w = w - w.mean()
    tau, _ = contraction_certificate(profile, z)
    zeta = complex(msc(complex(z)) ** 2)
    term = w / (1 + tau)
    u = term.copy()
    norms = [float(np.linalg.norm(term))]
    k = 0
    while norms[-1] >= tol:
        term = (zeta * (b @ term) + tau * term) / (1 + tau)
        term -= term.mean()
        u += term
        norms.append(float(np.linalg.norm(term)))
        k += 1
        if k > max_terms:
            raise NonConvergence("Neumann series did not reach tolerance", best_residual=norms[-1])
    u -= u.mean()
    return (u, np.array(norms)) if return_norms else u
