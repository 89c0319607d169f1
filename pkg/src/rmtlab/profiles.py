"""Variance profiles B = (sigma^2_ij) and their spectral parameters."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EigFailure, SinkhornDivergence, SupportTooWide

ROW_SUM_TOL = 1e-12
SIMPLE_TOP_TOL = 1e-9


# shape registry: symmetric densities with integral 1 and compact support [-h, h]

def _uniform(h=0.5):
    return (lambda x: np.where(np.abs(x) <= h, 1.0 / (2 * h), 0.0)), h, 1.0 / (2 * h)


def _triangular(h=1.0):
    return (lambda x: np.maximum(1.0 - np.abs(x) / h, 0.0) / h), h, 1.0 / h


def _truncated_gaussian(h=3.0):
    from scipy.special import erf
    mass = erf(h / math.sqrt(2))
    norm = 1.0 / (math.sqrt(2 * math.pi) * mass)
    return (lambda x: np.where(np.abs(x) <= h, norm * np.exp(-np.asarray(x) ** 2 / 2), 0.0)), h, norm


SHAPES: dict[str, Callable] = {
    "uniform": _uniform,
    "triangular": _triangular,
    "truncated_gaussian": _truncated_gaussian,
}


@dataclass
class VarianceProfile:
    n: int
    sigma2: np.ndarray
    spec: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.sigma2, dtype=float)
        s.setflags(write=False)
        self.sigma2 = s
        self._gap = None

    @property
    def m_param(self) -> float:
        return 1.0 / float(self.sigma2.max())

    @property
    def c_inf(self) -> float:
        return self.n * float(self.sigma2.min())

    @property
    def c_sup(self) -> float:
        return self.n * float(self.sigma2.max())

    @property
    def is_circulant(self) -> bool:
        return self.spec.get("type") in ("wigner", "band")

    def gap(self):
        if self._gap is None:
            self._gap = spectral_gap(self)
        return self._gap

    @property
    def delta_minus(self) -> float:
        return self.gap()[0]

    @property
    def delta_plus(self) -> float:
        return self.gap()[1]

    def summary(self) -> dict:
        dm, dp, simple = self.gap()
        out = {"n": self.n, "M": self.m_param, "c_inf": self.c_inf, "c_sup": self.c_sup,
               "delta_minus": dm, "delta_plus": dp, "simple_top": simple}
        out.update(self.meta)
        return out

    def to_json(self) -> dict:
        return dict(self.spec)

    def to_csv(self, path) -> None:
        np.savetxt(path, self.sigma2, delimiter=",", fmt="%.17g")


def wigner_profile(n: int) -> VarianceProfile:
    if n < 1:
        raise ValueError("n must be positive")
    return VarianceProfile(n, np.full((n, n), 1.0 / n), spec={"type": "wigner", "n": n, "params": {}})


def generalized_profile(n: int, weights, max_iter: int = 10_000) -> VarianceProfile:
    """Symmetric Sinkhorn scaling D W D of a positive symmetric weight matrix."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (n, n):
        raise ValueError(f"weights must be {n}x{n}")
    if not np.array_equal(w, w.T):
        raise ValueError("weights must be symmetric")
    if not np.all(w > 0):
        raise ValueError("weights must be strictly positive")
    d = 1.0 / np.sqrt(w.sum(axis=1))
    for it in range(max_iter):
        s = d[:, None] * w * d[None, :]
        s = 0.5 * (s + s.T)
        if np.max(np.abs(s.sum(axis=1) - 1.0)) <= ROW_SUM_TOL:
            break
        # geometric-mean update keeps the scaling symmetric
        d = np.sqrt(d / (w @ d))
    else:
        raise SinkhornDivergence(f"no convergence in {max_iter} iterations")
    spec = {"type": "generalized", "n": n, "params": {"weights": w.tolist()}}
    return VarianceProfile(n, s, spec=spec, meta={"sinkhorn_iterations": it})


def two_block_weights(n: int, low: float = 0.5, high: float = 1.5) -> np.ndarray:
    """Block weights: `high` inside the two diagonal blocks, `low` across them."""
    half = n // 2
    idx = np.arange(n) < half
    same = idx[:, None] == idx[None, :]
    return np.where(same, high, low).astype(float)


def periodic_distance(n: int) -> np.ndarray:
    """[i-j]_N in (-N/2, N/2] for all pairs."""
    i = np.arange(n)
    diff = (i[:, None] - i[None, :]) % n
    return np.where(diff > n / 2, diff - n, diff)


def band_profile(n: int, w: float, f: str = "uniform", **shape_params) -> VarianceProfile:
    if n < 1 or w <= 0:
        raise ValueError("need n >= 1 and w > 0")
    if f not in SHAPES:
        raise ValueError(f"unknown shape {f!r}; choose from {sorted(SHAPES)}")
    func, half_width, sup = SHAPES[f](**shape_params)
    if half_width > n / (2 * w) + 1e-12:
        raise SupportTooWide(f"support half-width {half_width} exceeds N/(2W) = {n / (2 * w)}")
    row = np.arange(n)
    row = np.where(row > n / 2, row - n, row)
    raw_row = func(row / w) / w
    total = raw_row.sum()
    first = raw_row / total
    # circulant: entry (i, j) is first[(j - i) mod n]
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    s = first[idx]
    s = 0.5 * (s + s.T)
    spec = {"type": "band", "n": n, "params": {"w": w, "f": f, **shape_params}}
    meta = {"raw_max": float(raw_row.max()), "raw_M": float(1.0 / raw_row.max()),
            "raw_M_bound": float(w / sup), "raw_row_sum": float(total)}
    prof = VarianceProfile(n, s, spec=spec, meta=meta)
    prof._first_row = first
    return prof


def circulant_spectrum(first_row: np.ndarray) -> np.ndarray:
    """Eigenvalues of the symmetric circulant with the given first row, via DFT."""
    return np.real(np.fft.fft(first_row))


def spectral_gap(profile: VarianceProfile):
    """(delta_minus, delta_plus, simple_top) from the dense spectrum of B."""
    try:
        ev = np.linalg.eigvalsh(profile.sigma2)
    except np.linalg.LinAlgError as exc:
        raise EigFailure(str(exc)) from exc
    if profile.n == 1:
        # Spec(B) = {1}; the gap condition is vacuous
        return 1.0, 1.0, True
    dm = 1.0 + ev[0]
    dp = 1.0 - ev[-2]
    simple = abs(ev[-1] - 1.0) <= SIMPLE_TOP_TOL and (ev[-1] - ev[-2]) > SIMPLE_TOP_TOL
    return float(dm), float(dp), bool(simple)


def dft_spectral_check(profile: VarianceProfile) -> float:
    """Max gap between the dense spectrum and the DFT spectrum of a circulant profile."""
    first = profile.sigma2[0]
    a = np.sort(circulant_spectrum(first))
    b = np.linalg.eigvalsh(profile.sigma2)
    return float(np.max(np.abs(a - b)))


def profile_from_spec(spec: dict) -> VarianceProfile:
    kind = spec.get("type")
    n = int(spec["n"])
    params = dict(spec.get("params", {}))
    if kind == "wigner":
        return wigner_profile(n)
    if kind == "band":
        w = params.pop("w")
        f = params.pop("f", "uniform")
        return band_profile(n, w, f, **params)
    if kind == "generalized":
        if "weights" in params:
            return generalized_profile(n, np.asarray(params["weights"], dtype=float))
        if params.get("weights_kind", "two_block") == "two_block":
            prof = generalized_profile(n, two_block_weights(n, params.get("low", 0.5), params.get("high", 1.5)))
            prof.spec = {"type": "generalized", "n": n, "params": dict(spec.get("params", {}))}
            return prof
        raise ValueError(f"unknown weights_kind {params.get('weights_kind')!r}")
    raise ValueError(f"unknown profile type {kind!r}")


def dumps(profile: VarianceProfile) -> str:
    return json.dumps(profile.to_json(), sort_keys=True)
