"""Closed-form semicircle quantities.

Stieltjes transform, density, integrated density, classical eigenvalue
locations, the control function g(z) and the stable root of the
perturbed self-consistent equation s + 1/(z+s) = t.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BranchAmbiguous, DomainError


def _sqrt_z2m4(z):
    # branch cut on [-2, 2], behaves like z at infinity
    return np.sqrt(z - 2.0) * np.sqrt(z + 2.0)


def msc(z):
    """Stieltjes transform of the semicircle law, Im z > 0.

    Uses m = -2 / (z + sqrt(z^2 - 4)), which avoids the cancellation in
    (-z + sqrt(z^2 - 4)) / 2 for large |z|.  Accepts scalars or arrays.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise DomainError("msc requires Im z > 0")
    m = -2.0 / (z + _sqrt_z2m4(z))
    return m[()] if m.ndim == 0 else m


def rho_sc(e):
    e = np.asarray(e, dtype=float)
    r = np.sqrt(np.maximum(4.0 - e * e, 0.0)) / (2.0 * np.pi)
    return r[()] if r.ndim == 0 else r


def n_sc(e):
    """Integrated semicircle density, exact 0 and 1 outside (-2, 2)."""
    e = np.asarray(e, dtype=float)
    x = np.clip(e, -2.0, 2.0)
    val = 0.5 + x * np.sqrt(4.0 - x * x) / (4.0 * np.pi) + np.arcsin(x / 2.0) / np.pi
    val = np.clip(val, 0.0, 1.0)
    val = np.where(e <= -2.0, 0.0, np.where(e >= 2.0, 1.0, val))
    return val[()] if val.ndim == 0 else val


def classical_locations(n: int) -> np.ndarray:
    """gamma_j with n * n_sc(gamma_j) = j, j = 1..n, by vectorized bisection."""
    if n < 1:
        raise ValueError("n must be positive")
    target = np.arange(1, n + 1, dtype=float) / n
    lo = np.full(n, -2.0)
    hi = np.full(n, 2.0)
    # 64 halvings of an interval of length 4 is far below 1e-12
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = n_sc(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    gam = 0.5 * (lo + hi)
    gam[-1] = 2.0
    return gam


def kappa(e: float) -> float:
    return abs(abs(e) - 2.0)


def control_g(z: complex, delta_plus: float) -> float:
    z = complex(z)
    m = msc(z)
    root = np.sqrt(kappa(z.real) + z.imag)
    return float(min(root, max(delta_plus, abs((m * m).real - 1.0))))


@dataclass(frozen=True)
class ControlPoint:
    e: float
    eta: float
    z: complex
    kappa: float
    g: float

    @classmethod
    def at(cls, e: float, eta: float, delta_plus: float) -> "ControlPoint":
        if eta <= 0:
            raise DomainError("eta must be positive")
        z = complex(e, eta)
        return cls(e=float(e), eta=float(eta), z=z, kappa=kappa(e), g=control_g(z, delta_plus))


def _perturbed_roots(z: complex, t: complex):
    disc = np.sqrt(complex((z + t) ** 2 - 4.0))
    base = (t - z) / 2.0
    return base + disc / 2.0, base - disc / 2.0


def stable_branch(z: complex, t: complex, steps: int = 10) -> complex:
    """Root of s + 1/(z+s) = t connected to m_sc(z) at t = 0.

    Both roots of s^2 + (z-t)s + 1 - tz = 0 are tracked along t_k = k t / steps
    and at every step the one nearest the previous iterate is kept.
    """
    z = complex(z)
    t = complex(t)
    if z.imag <= 0:
        raise DomainError("stable_branch requires Im z > 0")
    r1, r2 = _perturbed_roots(z, t)
    if t != 0 and abs(r1 - r2) < 10.0 * abs(t):
        raise BranchAmbiguous(f"roots {r1} and {r2} closer than 10|t|")
    s = complex(msc(z))
    if t == 0:
        return s
    for k in range(1, steps + 1):
        a, b = _perturbed_roots(z, t * k / steps)
        s = a if abs(a - s) <= abs(b - s) else b
    return s
