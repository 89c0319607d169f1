"""Standardized entry distributions and the four-moment matching constructions.

Every law has mean 0 and variance 1, exact (or quadrature) first four
moments cached at construction, and a subexponential tail envelope
(alpha, beta_tail) with P(|xi| >= x**alpha) <= beta_tail * exp(-x).

All envelopes here use alpha = 1 and beta_tail >= E exp(|xi|), which makes the
tail bound an instance of Markov's inequality.
"""
from __future__ import annotations

import functools
import math
from typing import Optional

import numpy as np
from scipy import integrate, special

from .errors import InfeasibleMoments, QuadratureFailure, RootNotBracketed

QUAD_TOL = 1e-10
ROOT_TOL = 1e-12
DEFAULT_TAU = 1e-4

# the fixed helper mixture used by the small-|m3| family: a=2, b=1, variance 1
H_A, H_B = 2.0, 1.0


def _phi_cdf(x):
    return 0.5 * special.erfc(-x / math.sqrt(2.0))


def _gauss_abs_exp(mu: float, var: float) -> float:
    """E exp(|X|) for X ~ N(mu, var)."""
    s = math.sqrt(var)
    return (math.exp(mu + var / 2) * _phi_cdf((mu + var) / s)
            + math.exp(-mu + var / 2) * _phi_cdf((var - mu) / s))


def _mixture_moments(a: float, b: float, var: float):
    """Moments of b/(a+b) N(a, var) + a/(a+b) N(-b, var)."""
    ab = a * b
    return (0.0, ab + var, ab * (a - b), ab * (a * a - ab + b * b) + 6 * ab * var + 3 * var * var)


def _mixture_pdf(x, a, b, var):
    x = np.asarray(x, dtype=float)
    p = b / (a + b)
    norm = 1.0 / math.sqrt(2 * math.pi * var)
    return norm * (p * np.exp(-(x - a) ** 2 / (2 * var))
                   + (1 - p) * np.exp(-(x + b) ** 2 / (2 * var)))


def _mixture_sample(rng, n, a, b, var):
    p = b / (a + b)
    pick = rng.random(n) < p
    centers = np.where(pick, a, -b)
    return centers + math.sqrt(var) * rng.standard_normal(n)


# ---------------------------------------------------------------------------
# mollifier: c * exp(-1 / (1 - x^2)) on (-1, 1)

def _bump_raw(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def _quad(f, lo, hi, **kw):
    val, err = integrate.quad(f, lo, hi, epsabs=kw.pop("epsabs", 1e-13), epsrel=kw.pop("epsrel", 1e-12),
                              limit=kw.pop("limit", 200), **kw)
    if not np.isfinite(val) or err > 10 * QUAD_TOL:
        raise QuadratureFailure(f"quadrature error {err:.3g} above tolerance")
    return val


@functools.lru_cache(maxsize=1)
def mollifier_constants():
    """(normalizer, second moment, fourth moment) of the unit bump."""
    z = _quad(lambda t: float(_bump_raw(t)), -1, 1)
    s2 = _quad(lambda t: t * t * float(_bump_raw(t)), -1, 1) / z
    s4 = _quad(lambda t: t ** 4 * float(_bump_raw(t)), -1, 1) / z
    return z, s2, s4


def mollifier_pdf(x):
    return _bump_raw(x) / mollifier_constants()[0]


def _mollifier_sample(rng, n):
    peak = math.exp(-1.0) / mollifier_constants()[0]
    out = np.empty(n)
    filled = 0
    while filled < n:
        need = n - filled
        batch = max(16, int(need * 1.8))
        t = rng.uniform(-1.0, 1.0, batch)
        u = rng.uniform(0.0, peak, batch)
        keep = t[u < mollifier_pdf(t)][:need]
        out[filled:filled + keep.size] = keep
        filled += keep.size
    return out


# ---------------------------------------------------------------------------

class EntryLaw:
    """Base class.  Subclasses set ``kind`` and implement the hooks."""

    kind = "abstract"

    def __init__(self):
        self.moments = tuple(float(v) for v in self._compute_moments())
        self.subexp = (1.0, float(self._abs_exp_bound()))

    # hooks
    def _compute_moments(self):
        raise NotImplementedError

    def _abs_exp_bound(self):
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def pdf(self, x):
        """Density, or None for laws without one."""
        return None

    # shared
    @property
    def alpha(self):
        return self.subexp[0]

    @property
    def beta_tail(self):
        return self.subexp[1]

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params(), "subexp": list(self.subexp)}

    def __eq__(self, other):
        return isinstance(other, EntryLaw) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(repr(self.to_json()))

    def __repr__(self):
        return f"{type(self).__name__}({self.params()})"


class Gaussian(EntryLaw):
    kind = "Gaussian"

    def _compute_moments(self):
        return (0.0, 1.0, 0.0, 3.0)

    def _abs_exp_bound(self):
        return _gauss_abs_exp(0.0, 1.0)

    def params(self):
        return {}

    def sample(self, rng, n):
        return rng.standard_normal(n)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-x * x / 2) / math.sqrt(2 * math.pi)


class Bernoulli(EntryLaw):
    kind = "Bernoulli"

    def _compute_moments(self):
        return (0.0, 1.0, 0.0, 1.0)

    def _abs_exp_bound(self):
        return math.e

    def params(self):
        return {}

    def sample(self, rng, n):
        return np.where(rng.random(n) < 0.5, -1.0, 1.0)


class TwoGaussianMixture(EntryLaw):
    """Weight b/(a+b) on N(a, sigma) and a/(a+b) on N(-b, sigma); sigma is a variance."""

    kind = "TwoGaussianMixture"

    def __init__(self, a: float, b: float, sigma: float):
        if not (a > 0 and b > 0 and 0 < sigma < 1):
            raise ValueError("need a > 0, b > 0, 0 < sigma < 1")
        self.a, self.b, self.sigma = float(a), float(b), float(sigma)
        super().__init__()

    def _compute_moments(self):
        return _mixture_moments(self.a, self.b, self.sigma)

    def _abs_exp_bound(self):
        p = self.b / (self.a + self.b)
        return p * _gauss_abs_exp(self.a, self.sigma) + (1 - p) * _gauss_abs_exp(-self.b, self.sigma)

    def params(self):
        return {"a": self.a, "b": self.b, "sigma": self.sigma}

    def sample(self, rng, n):
        return _mixture_sample(rng, n, self.a, self.b, self.sigma)

    def pdf(self, x):
        return _mixture_pdf(x, self.a, self.b, self.sigma)


class SmoothedBetaMixture(EntryLaw):
    """(1 - eps) * (mollified |x|^beta law on [-d, d]) + eps * helper mixture.

    The symmetric component is Y + tau*T with |Y| = d U^{1/(beta+1)}, random
    sign, and T drawn from the unit bump.  The helper mixture has variance 1
    and centers (a, -b); a=2, b=1 gives third moment +2, a=1, b=2 gives -2.
    """

    kind = "SmoothedBetaMixture"

    def __init__(self, d: float, beta: float, eps: float, tau: float = DEFAULT_TAU,
                 a: float = H_A, b: float = H_B):
        if not (d > 0 and beta > -1 and 0 <= eps < 1 and tau >= 0 and a > 0 and b > 0):
            raise ValueError("invalid SmoothedBetaMixture parameters")
        self.d, self.beta, self.eps, self.tau = float(d), float(beta), float(eps), float(tau)
        self.a, self.b = float(a), float(b)
        super().__init__()

    def _compute_moments(self):
        d, beta, tau = self.d, self.beta, self.tau
        c = (beta + 1) / d ** (beta + 1)
        # half-line moments of c x^beta on (0, d), weight x^beta handled by quad
        y = {}
        for k in (2, 4):
            val, err = integrate.quad(lambda x: x ** k, 0.0, d, weight="alg", wvar=(beta, 0.0),
                                      epsabs=1e-13, epsrel=1e-13)
            if err > QUAD_TOL:
                raise QuadratureFailure(f"moment quadrature error {err:.3g}")
            y[k] = c * val
        _, s2, s4 = mollifier_constants()
        m2_smooth = y[2] + tau ** 2 * s2
        m4_smooth = y[4] + 6 * tau ** 2 * s2 * y[2] + tau ** 4 * s4
        _, h2, h3, h4 = _mixture_moments(self.a, self.b, 1.0)
        e = self.eps
        return (0.0, (1 - e) * m2_smooth + e * h2, e * h3, (1 - e) * m4_smooth + e * h4)

    def _abs_exp_bound(self):
        p = self.b / (self.a + self.b)
        h = p * _gauss_abs_exp(self.a, 1.0) + (1 - p) * _gauss_abs_exp(-self.b, 1.0)
        return (1 - self.eps) * math.exp(self.d + self.tau) + self.eps * h

    def params(self):
        return {"d": self.d, "beta": self.beta, "eps": self.eps, "tau": self.tau,
                "a": self.a, "b": self.b}

    def sample(self, rng, n):
        helper = rng.random(n) < self.eps
        mag = self.d * rng.random(n) ** (1.0 / (self.beta + 1))
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        smooth = sign * mag
        if self.tau > 0:
            smooth = smooth + self.tau * _mollifier_sample(rng, n)
        mix = _mixture_sample(rng, n, self.a, self.b, 1.0)
        return np.where(helper, mix, smooth)

    def _g(self, y):
        y = np.abs(np.asarray(y, dtype=float))
        c = (self.beta + 1) / (2 * self.d ** (self.beta + 1))
        with np.errstate(divide="ignore"):
            return np.where(y <= self.d, c * y ** self.beta, 0.0)

    def _smooth_pdf_scalar(self, x: float) -> float:
        if self.tau == 0:
            return float(self._g(x))
        tau = self.tau
        # integrate g(x - tau t) * bump(t) over t in (-1, 1), splitting at kinks
        pts = sorted(p for p in ((x) / tau, (x - self.d) / tau, (x + self.d) / tau) if -1 < p < 1)
        edges = [-1.0] + pts + [1.0]
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi - lo <= 0:
                continue
            total += integrate.quad(lambda t: float(self._g(x - tau * t) * mollifier_pdf(t)),
                                    lo, hi, limit=200)[0]
        return total

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.array([self._smooth_pdf_scalar(v) for v in x.ravel()]).reshape(x.shape)
        out = (1 - self.eps) * flat + self.eps * _mixture_pdf(x, self.a, self.b, 1.0)
        return out[()] if out.ndim == 0 else out


class GaussianDivisible(EntryLaw):
    """sqrt(1 - gamma) * base + sqrt(gamma) * N(0, 1), independent."""

    kind = "GaussianDivisible"

    def __init__(self, base: EntryLaw, gamma: float):
        if not 0 <= gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        self.base, self.gamma = base, float(gamma)
        super().__init__()

    def _compute_moments(self):
        _, _, m3, m4 = self.base.moments
        g = self.gamma
        return (0.0, 1.0, (1 - g) ** 1.5 * m3, (1 - g) ** 2 * m4 + 6 * g - 3 * g * g)

    def _abs_exp_bound(self):
        g = self.gamma
        return self.base.beta_tail ** math.sqrt(1 - g) * _gauss_abs_exp(0.0, g) if g > 0 \
            else self.base.beta_tail

    def params(self):
        return {"base": self.base.to_json(), "gamma": self.gamma}

    def sample(self, rng, n):
        x = self.base.sample(rng, n)
        return math.sqrt(1 - self.gamma) * x + math.sqrt(self.gamma) * rng.standard_normal(n)

    def pdf(self, x):
        g = self.gamma
        if g == 0:
            return self.base.pdf(x)
        x = np.asarray(x, dtype=float)
        s = math.sqrt(1 - g)
        if g == 1:
            out = np.exp(-x * x / 2) / math.sqrt(2 * math.pi)
        elif isinstance(self.base, Bernoulli):
            out = 0.5 * (np.exp(-(x - s) ** 2 / (2 * g)) + np.exp(-(x + s) ** 2 / (2 * g))) \
                / math.sqrt(2 * math.pi * g)
        elif isinstance(self.base, Gaussian):
            out = np.exp(-x * x / 2) / math.sqrt(2 * math.pi)
        elif isinstance(self.base, TwoGaussianMixture):
            b = self.base
            out = _mixture_pdf(x, s * b.a, s * b.b, (1 - g) * b.sigma + g)
        else:
            def one(v):
                f = lambda y: float(self.base.pdf((v - math.sqrt(g) * y) / s)) / s \
                    * math.exp(-y * y / 2) / math.sqrt(2 * math.pi)
                return integrate.quad(f, -12, 12, limit=400)[0]
            out = np.array([one(v) for v in x.ravel()]).reshape(x.shape)
        return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# module-level operations

def sample(law: EntryLaw, rng: np.random.Generator, n: int) -> np.ndarray:
    return law.sample(rng, int(n))


def exact_moments(law: EntryLaw):
    return law.moments


def gaussian_divisible(base: EntryLaw, gamma: float) -> EntryLaw:
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    if gamma == 0:
        return base
    return GaussianDivisible(base, gamma)


def _bisect(f, lo, hi, increasing, tol=ROOT_TOL, expand=None, max_iter=400):
    """Bisection for a monotone f with optional bracket expansion."""
    flo, fhi = f(lo), f(hi)
    tries = 0
    while expand is not None and np.sign(flo) == np.sign(fhi) and tries < 60:
        lo, hi = expand(lo, hi)
        flo, fhi = f(lo), f(hi)
        tries += 1
    if np.sign(flo) == np.sign(fhi) or not (np.isfinite(flo) and np.isfinite(fhi)):
        raise RootNotBracketed(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == increasing:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def solve_mixture_sigma(m3: float, m4: float) -> float:
    """Unique sigma in (0, 1) with m4 = 1 + m3^2/(1-sigma) + 4 sigma - 2 sigma^2."""
    f = lambda s: 1 + m3 * m3 / (1 - s) + 4 * s - 2 * s * s - m4
    lo, hi = 0.0, 1.0 - 1e-15
    if f(lo) >= 0:
        raise RootNotBracketed("m4 <= 1 + m3^2 leaves no sigma in (0, 1)")
    return _bisect(f, lo, hi, increasing=True, tol=1e-15)


def _two_gaussian_for(m3: float, m4: float) -> TwoGaussianMixture:
    m3a = abs(m3)
    sigma = solve_mixture_sigma(m3a, m4)
    ab = 1 - sigma
    diff = m3a / (1 - sigma)
    a = 0.5 * (diff + math.sqrt(diff * diff + 4 * ab))
    b = a - diff
    # the mirror image of the mixture swaps the centers
    return TwoGaussianMixture(a, b, sigma) if m3 >= 0 else TwoGaussianMixture(b, a, sigma)


def _beta_ratio(beta):
    return (beta + 3) ** 2 / ((beta + 1) * (beta + 5))


def _smoothed_family_for(m3: float, m4: float, tau: float) -> SmoothedBetaMixture:
    eps = abs(m3) / 2
    _, s2, s4 = mollifier_constants()
    _, h2, _, h4 = _mixture_moments(H_A, H_B, 1.0)
    # second moment of the unmollified |x|^beta part so the total variance is 1
    a_y = (1 - h2 * eps) / (1 - eps) - tau * tau * s2
    if a_y <= 0:
        raise InfeasibleMoments("third moment too large for the smoothed family")
    target = ((m4 - h4 * eps) / (1 - eps) - 6 * tau * tau * s2 * a_y - tau ** 4 * s4) / (a_y * a_y)
    if not target > 1:
        raise InfeasibleMoments("fourth moment too small for the smoothed family")
    # the ratio (beta+3)^2/((beta+1)(beta+5)) decreases from +inf to 1 on (-1, inf)
    beta = _bisect(lambda bt: _beta_ratio(bt) - target, -1 + 1e-12, 1.0, increasing=False,
                   expand=lambda lo, hi: (lo, 2 * hi + 1))
    d = math.sqrt(a_y * (beta + 3) / (beta + 1))
    a, b = (H_A, H_B) if m3 >= 0 else (H_B, H_A)
    return SmoothedBetaMixture(d=d, beta=beta, eps=eps, tau=tau, a=a, b=b)


def build_matching_law(m3: float, m4: float, delta: Optional[float] = None,
                       c1: Optional[float] = None, c2: Optional[float] = None,
                       tau: float = DEFAULT_TAU) -> EntryLaw:
    """Standardized law with third and fourth moments (m3, m4).

    |m3| >= delta gives a two-Gaussian mixture; smaller |m3| gives the smoothed
    |x|^beta family plus a small helper-mixture component.  ``c1`` defaults to
    m4 - m3^2 - 1 and ``delta`` to min(1, c1)/100.
    """
    gap = m4 - m3 * m3 - 1
    if c1 is None:
        c1 = gap
    if not c1 > 0 or gap < c1:
        raise InfeasibleMoments(f"m4 - m3^2 - 1 = {gap:.6g} must be positive and at least c1")
    if c2 is not None and m4 > c2:
        raise InfeasibleMoments(f"m4 = {m4} exceeds c2 = {c2}")
    if delta is None:
        delta = min(1.0, c1) / 100
    if abs(m3) >= delta:
        return _two_gaussian_for(m3, m4)
    return _smoothed_family_for(m3, m4, tau)


def matched_gaussian_divisible(m3: float, m4: float, gamma: float, **kw) -> EntryLaw:
    """Gaussian-divisible law sqrt(1-g) xi_g + sqrt(g) G with moments (m3, m4).

    The inner law xi_g is solved from the Gaussian-divisible moment relations
    so both moments match exactly.  When the required inner moments are not
    feasible the inner fourth moment falls back to m3_g^2 + (m4 - m3^2), which
    matches m4 only up to O(gamma).
    """
    if gamma == 0:
        return build_matching_law(m3, m4, **kw)
    m3g = m3 * (1 - gamma) ** -1.5
    m4g = (m4 - 6 * gamma + 3 * gamma * gamma) / (1 - gamma) ** 2
    try:
        inner = build_matching_law(m3g, m4g, **kw)
    except InfeasibleMoments:
        inner = build_matching_law(m3g, m3g * m3g + (m4 - m3 * m3), **kw)
    return GaussianDivisible(inner, gamma)


_KINDS = {cls.kind: cls for cls in (Gaussian, Bernoulli, TwoGaussianMixture,
                                     SmoothedBetaMixture, GaussianDivisible)}


def law_from_json(obj: dict) -> EntryLaw:
    kind = obj["kind"]
    params = dict(obj.get("params", {}))
    if kind not in _KINDS:
        raise ValueError(f"unknown law kind {kind!r}")
    if kind == "GaussianDivisible":
        law = GaussianDivisible(law_from_json(params["base"]), params["gamma"])
    else:
        law = _KINDS[kind](**params)
    if "subexp" in obj and [float(v) for v in obj["subexp"]] != list(law.subexp):
        raise ValueError("stored subexp envelope does not match the law")
    return law


LAW_KINDS = tuple(_KINDS)
