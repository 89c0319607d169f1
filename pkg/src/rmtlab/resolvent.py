"""Green's functions, minors and the exact resolvent identities.

Conventions: G = (H - z)^{-1}; for an index set T, H^(T) deletes the rows and
columns in T and G^(T) = (H^(T) - z)^{-1}, indexed by the original labels.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .ensembles import RandomMatrix
from .errors import DomainError, EigFailure
from .semicircle import msc


def _entries(h) -> np.ndarray:
    return h.entries if isinstance(h, RandomMatrix) else np.asarray(h)


def _spectral(h):
    if isinstance(h, RandomMatrix):
        return h.eigh()
    try:
        return np.linalg.eigh(np.asarray(h))
    except np.linalg.LinAlgError as exc:
        raise EigFailure(str(exc)) from exc


@dataclass
class GreenEvaluation:
    z: complex
    g_diag: np.ndarray
    m_n: complex
    offdiag_max: Optional[float]
    lambda_d: float
    g: Optional[np.ndarray] = None

    def csv_row(self):
        return [self.z.real, self.z.imag, self.m_n.real, self.m_n.imag, self.lambda_d,
                np.nan if self.offdiag_max is None else self.offdiag_max]


CSV_HEADER = ["z_re", "z_im", "m_re", "m_im", "lambda_d", "offdiag_max"]


def green_matrix(h, z: complex) -> np.ndarray:
    lam, u = _spectral(h)
    return (u * (1.0 / (lam - z))) @ u.conj().T


def green(h, z: complex, full: bool = True, offdiag: bool = True) -> GreenEvaluation:
    """Resolvent statistics at z from the cached eigendecomposition of h.

    With full=False only the diagonal is formed (O(N^2) per z); the
    off-diagonal maximum then needs the full matrix and is skipped unless
    offdiag is requested.
    """
    z = complex(z)
    if z.imag == 0:
        raise DomainError("green requires Im z != 0")
    lam, u = _spectral(h)
    w = 1.0 / (lam - z)
    g = None
    off = None
    if full or offdiag:
        g = (u * w) @ u.conj().T
        diag = np.diag(g).copy()
        a = np.abs(g)
        np.fill_diagonal(a, 0.0)
        off = float(a.max()) if g.shape[0] > 1 else 0.0
    else:
        diag = (np.abs(u) ** 2) @ w
    lam_d = float(np.max(np.abs(diag - msc(z)))) if z.imag > 0 else float("nan")
    return GreenEvaluation(z=z, g_diag=diag, m_n=complex(diag.mean()), offdiag_max=off,
                           lambda_d=lam_d, g=g if full else None)


def stieltjes(eigenvalues: np.ndarray, z) -> np.ndarray:
    """m_N(z) = mean of 1/(lambda - z) for one z or an array of z."""
    z = np.asarray(z, dtype=complex)
    out = np.mean(1.0 / (eigenvalues[:, None] - z.ravel()[None, :]), axis=0).reshape(z.shape)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# minors

@dataclass
class MinorQuantities:
    index_set: tuple
    complement: np.ndarray
    g_minor: np.ndarray          # (N-|T|) x (N-|T|) resolvent of H^(T)
    z_mat: np.ndarray            # Z^(T)_ij for i, j in T
    k_mat: np.ndarray            # K^(T)_ij for i, j in T

    @property
    def g_minor_diag(self) -> np.ndarray:
        return np.diag(self.g_minor)

    def entry(self, i: int, j: int) -> complex:
        """G^(T)_ij by original labels (i, j outside T)."""
        pos = {int(k): p for p, k in enumerate(self.complement)}
        return self.g_minor[pos[i], pos[j]]

    def schur_residual(self, g_full: np.ndarray) -> float:
        """max |inv(K^(T)) - G restricted to T x T|."""
        t = list(self.index_set)
        if not t:
            return 0.0
        return float(np.max(np.abs(np.linalg.inv(self.k_mat) - g_full[np.ix_(t, t)])))


def _minor_resolvent(hm: np.ndarray, keep: np.ndarray, z: complex) -> np.ndarray:
    sub = hm[np.ix_(keep, keep)]
    return np.linalg.inv(sub - z * np.eye(len(keep)))


def _k_block(hm: np.ndarray, t: Sequence[int], z: complex) -> np.ndarray:
    """K^(T) on T x T; with nothing left outside T it is h - z."""
    t = list(t)
    if len(t) < hm.shape[0]:
        return minor_green(hm, t, z).k_mat
    return hm[np.ix_(t, t)] - z * np.eye(len(t))


def minor_green(h, t: Sequence[int], z: complex) -> MinorQuantities:
    """Resolvent of H^(T) and the Z/K matrices on T x T.

    Z^(T)_ij = sum over k, l outside T of h_ik G^(T)_kl h_lj and
    K^(T)_ij = h_ij - z delta_ij - Z^(T)_ij.
    """
    hm = _entries(h)
    n = hm.shape[0]
    tt = tuple(sorted(set(int(i) for i in t)))
    if len(tt) >= n:
        raise ValueError("|T| must be smaller than N")
    keep = np.array([k for k in range(n) if k not in tt], dtype=int)
    gm = _minor_resolvent(hm, keep, complex(z))
    if tt:
        a_rows = hm[np.ix_(list(tt), keep)]
        a_cols = hm[np.ix_(keep, list(tt))]
        zm = a_rows @ gm @ a_cols
        km = hm[np.ix_(list(tt), list(tt))] - complex(z) * np.eye(len(tt)) - zm
    else:
        zm = np.zeros((0, 0), dtype=complex)
        km = np.zeros((0, 0), dtype=complex)
    return MinorQuantities(tt, keep, gm, zm, km)


def _embedded_minor(hm: np.ndarray, removed: Sequence[int], z: complex) -> np.ndarray:
    """G^(T) placed in an N x N array, zero on removed rows and columns."""
    n = hm.shape[0]
    keep = np.array([k for k in range(n) if k not in set(removed)], dtype=int)
    out = np.zeros((n, n), dtype=complex)
    out[np.ix_(keep, keep)] = _minor_resolvent(hm, keep, z)
    return out


def minor_identity_residuals(h, z: complex, n_tuples: int = 100, seed: int = 0,
                             exhaustive_max: int = 16) -> dict:
    """Max deviation of the four minor identities.

    (a) G_ii = 1/K^(i)_ii
    (b) G_ij = -G_jj G^(j)_ii K^(ij)_ij = -G_ii G^(i)_jj K^(ij)_ij
    (c) G_ii - G^(j)_ii = G_ij G_ji / G_jj
    (d) G_ij - G^(k)_ij = G_ik G_kj / G_kk
    Every side is computed from its own inversion.  Tuples are exhaustive for
    N <= exhaustive_max and otherwise a seeded sample of n_tuples.
    """
    hm = _entries(h).astype(complex)
    n = hm.shape[0]
    z = complex(z)
    g = green_matrix(h, z)
    exhaustive = n <= exhaustive_max
    rng = np.random.default_rng(seed)

    def pick(k):
        if exhaustive:
            return list(itertools.permutations(range(n), k))
        return [tuple(int(v) for v in rng.choice(n, size=k, replace=False)) for _ in range(n_tuples)]

    single = {}

    def gk(k):
        if k not in single:
            single[k] = _embedded_minor(hm, [k], z)
        return single[k]

    res = {"GiiHii": 0.0, "GijHij": 0.0, "GiiGjii": 0.0, "GijGkij": 0.0}

    idx1 = range(n) if exhaustive else sorted({t[0] for t in pick(1)})
    for i in idx1:
        res["GiiHii"] = max(res["GiiHii"], abs(g[i, i] - 1.0 / _k_block(hm, [i], z)[0, 0]))

    if n >= 2:
        for i, j in pick(2):
            if exhaustive and i > j:
                continue
            km = _k_block(hm, [i, j], z)
            kij = km[0, 1] if i < j else km[1, 0]
            lhs = g[i, j]
            r1 = -g[j, j] * gk(j)[i, i] * kij
            r2 = -g[i, i] * gk(i)[j, j] * kij
            res["GijHij"] = max(res["GijHij"], abs(lhs - r1), abs(lhs - r2))
            if exhaustive:
                kji = km[1, 0] if i < j else km[0, 1]
                lhs2 = g[j, i]
                res["GijHij"] = max(res["GijHij"], abs(lhs2 - (-g[i, i] * gk(i)[j, j] * kji)))
        for i, j in pick(2):
            res["GiiGjii"] = max(res["GiiGjii"], abs(g[i, i] - gk(j)[i, i] - g[i, j] * g[j, i] / g[j, j]))

    if n >= 3:
        if exhaustive:
            ks = np.arange(n)
            stack = np.stack([gk(k) for k in ks])            # [k, i, j]
            # G_ik G_kj / G_kk as an array indexed [k, i, j]
            prod = g[:, ks].T[:, :, None] * g[ks, :][:, None, :] / np.diag(g)[:, None, None]
            diff = g[None, :, :] - stack - prod
            mask = np.ones((n, n, n), dtype=bool)
            mask[ks, ks, :] = False
            mask[ks, :, ks] = False
            res["GijGkij"] = float(np.max(np.abs(diff[mask])))
        else:
            for i, j, k in pick(3):
                val = g[i, j] - gk(k)[i, j] - g[i, k] * g[k, j] / g[k, k]
                res["GijGkij"] = max(res["GijGkij"], abs(val))
    return {k: float(v) for k, v in res.items()}


def ward_residual(h, z: complex) -> float:
    """max_l | sum_k |G_kl|^2 - Im G_ll / eta | relative to Im G_ll / eta."""
    g = green_matrix(h, z)
    lhs = np.sum(np.abs(g) ** 2, axis=0)
    rhs = np.diag(g).imag / complex(z).imag
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))


def schur_residual(h, t: Sequence[int], z: complex) -> float:
    return minor_green(h, t, z).schur_residual(green_matrix(h, z))


def upsilon(h, sigma2: np.ndarray, z: complex, i: int):
    """Error term of the self-consistent equation at index i, two ways.

    upsilon_a = 1/G_ii + z + sum_j s_ij G_jj, from the equation
    G_ii = 1/(-z - sum_j s_ij G_jj + upsilon_i).
    upsilon_b = s_ii G_ii + sum_{j != i} s_ij G_ij G_ji / G_ii
                + K^(i)_ii + z + sum_{j != i} s_ij G^(i)_jj,
    with K^(i)_ii and G^(i) from their own inversions.
    """
    hm = _entries(h).astype(complex)
    s = np.asarray(getattr(sigma2, "sigma2", sigma2), dtype=float)
    z = complex(z)
    g = green_matrix(h, z)
    gd = np.diag(g)
    ua = 1.0 / gd[i] + z + s[i] @ gd
    if hm.shape[0] == 1:
        others = np.zeros(0, dtype=int)
        gi_diag = np.zeros(0, dtype=complex)
        k_ii = hm[0, 0] - z
    else:
        mq = minor_green(hm, [i], z)
        others = mq.complement
        gi_diag = np.diag(mq.g_minor)
        k_ii = mq.k_mat[0, 0]
    ub = (s[i, i] * gd[i]
          + np.sum(s[i, others] * g[i, others] * g[others, i]) / gd[i]
          + k_ii + z
          + np.sum(s[i, others] * gi_diag))
    return complex(ua), complex(ub)


def upsilon_all(h, sigma2: np.ndarray, z: complex) -> np.ndarray:
    """Definitional upsilon_a for every index at once."""
    s = np.asarray(getattr(sigma2, "sigma2", sigma2), dtype=float)
    ge = green(h, z, full=False, offdiag=False)
    return 1.0 / ge.g_diag + complex(z) + s @ ge.g_diag


def swap_expansion_residual(q, i: int, j: int, v: complex, z: complex, order: int = 5,
                            scale: Optional[float] = None) -> float:
    """Residual of the resolvent expansion of S = (Q + c V - z)^{-1} around R = (Q - z)^{-1}.

    V = v E_ij + conj(v) E_ji, c = N^{-1/2} unless ``scale`` is given.
    For order < 5 the sum keeps m = 0..order terms of (-c)^m (RV)^m R and the
    return value is the truncation error; order 5 adds the exact tail
    (-c)^5 (RV)^5 S, so the residual is rounding only.
    """
    if not 1 <= order <= 5:
        raise ValueError("order must be in 1..5")
    qm = np.array(_entries(q), dtype=complex)
    n = qm.shape[0]
    if qm[i, j] != 0 or qm[j, i] != 0:
        raise ValueError("q must have a zero (i, j) entry")
    c = n ** -0.5 if scale is None else float(scale)
    z = complex(z)
    vm = np.zeros((n, n), dtype=complex)
    vm[i, j] = v
    vm[j, i] = np.conj(v)
    eye = np.eye(n)
    r = np.linalg.inv(qm - z * eye)
    s = np.linalg.inv(qm + c * vm - z * eye)
    rv = r @ vm
    term = r.copy()
    total = r.copy()
    for m in range(1, min(order, 4) + 1):
        term = (-c) * (rv @ term)
        total = total + term
    if order == 5:
        tail = (-c) ** 5 * np.linalg.matrix_power(rv, 5) @ s
        total = total + tail
    return float(np.max(np.abs(s - total)))


def interlacing_holds(h, k: int) -> bool:
    """Eigenvalues of H^(k) interlace those of H."""
    hm = _entries(h)
    lam = np.linalg.eigvalsh(hm)
    keep = [t for t in range(hm.shape[0]) if t != k]
    mu = np.linalg.eigvalsh(hm[np.ix_(keep, keep)])
    tol = 1e-10 * max(1.0, float(np.max(np.abs(lam))))
    return bool(np.all(lam[:-1] <= mu + tol) and np.all(mu <= lam[1:] + tol))
