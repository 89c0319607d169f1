"""Moment method: ordered closed walks, their counting bound, and trace moments."""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Optional

import numpy as np

from ..ensembles import sample_matrix
from ..entrylaws import Gaussian
from ..profiles import wigner_profile
from .common import ExperimentReport, Timer, derive_seed, parallel_map

EXP_ID = "trace_moment_bound"


def _restricted_growth(k: int):
    """Sequences w_1..w_k over 1, 2, ... where each new vertex is the next unused one."""
    def rec(prefix, top):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for v in range(1, top + 2):
            prefix.append(v)
            yield from rec(prefix, max(top, v))
            prefix.pop()
    yield from rec([1], 1)


def is_closed_walk_valid(w) -> bool:
    """Every undirected edge of the cyclic walk (self-loops included) appears at least twice."""
    counts = {}
    k = len(w)
    for t in range(k):
        a, b = w[t], w[(t + 1) % k]
        e = (a, b) if a <= b else (b, a)
        counts[e] = counts.get(e, 0) + 1
    return all(c >= 2 for c in counts.values())


@lru_cache(maxsize=None)
def ordered_closed_walks(k: int, p: int) -> tuple:
    if k < 1 or p < 1:
        return ()
    return tuple(w for w in _restricted_growth(k) if max(w) == p and is_closed_walk_valid(w))


def walk_count(k: int, p: int) -> int:
    return len(ordered_closed_walks(k, p))


def walk_bound(k: int, p: int) -> float:
    """binom(k, 2p-2) p^{2(k-2p+2)} 2^{2p-2}."""
    if 2 * p - 2 > k:
        return 0.0
    return float(math.comb(k, 2 * p - 2) * p ** (2 * (k - 2 * p + 2)) * 2 ** (2 * p - 2))


def s_term(k: int, p: int, n: float, delta: float) -> float:
    """binom(k, 2p-2) p^{2(k-2p+2)} 2^{2p-2} N^{1 + (-1/2 + delta)(k - 2(p-1))}."""
    return walk_bound(k, p) * n ** (1 + (-0.5 + delta) * (k - 2 * (p - 1)))


def s_ratio_bound(k: int, n: float, delta: float) -> float:
    """N^{2 delta} k^6 / (4N), the factor bounding S(k, p-1) / S(k, p)."""
    return n ** (2 * delta) * k ** 6 / (4 * n)


def catalan(m: int) -> int:
    return math.comb(2 * m, m) // (m + 1)


def _trace_moments(profile, law, cls, seed, ks):
    h = sample_matrix(profile, law, cls, seed).entries
    n = h.shape[0]
    out = []
    power = np.eye(n, dtype=h.dtype)
    kmax = max(ks)
    half = {}
    for k in range(1, kmax // 2 + 1):
        power = power @ h
        half[k] = power
    for k in ks:
        if k % 2 == 0:
            a = half[k // 2]
            out.append(float(np.sum(np.abs(a) ** 2).real) / n)
        else:
            a, b = half[k // 2], half[k // 2 + 1]
            out.append(float(np.real(np.sum(a.T * b))) / n)
    return out


def trace_moment_bound(k_max: int = 8, n: int = 500, samples: int = 200, master_seed: int = 0,
                       cls="ComplexHermitian", law=None, mc_ks=(2, 4), delta: float = 0.05,
                       threads: Optional[int] = None, n_se: float = 4.0) -> ExperimentReport:
    law = law or Gaussian()
    report = ExperimentReport(EXP_ID, {"k_max": k_max, "n": n, "samples": samples, "law": law.to_json(),
                                       "class": str(getattr(cls, "value", cls)), "mc_ks": list(mc_ks),
                                       "delta": delta}, master_seed)
    bound_ok = True
    for k in range(1, k_max + 1):
        for p in range(1, k // 2 + 2):
            w = walk_count(k, p)
            b = walk_bound(k, p)
            report.add_scalar(f"k={k};p={p}", "walk_count", w)
            report.add_scalar(f"k={k};p={p}", "walk_bound", b)
            bound_ok &= w <= b
            if p >= 2:
                report.add_scalar(f"k={k};p={p};N={n}", "s_ratio",
                                  s_term(k, p - 1, n, delta) / s_term(k, p, n, delta))
    report.add_rule("walk_bound", bound_ok, detail=f"all k <= {k_max}")
    fixed = {"W(2,1)": (walk_count(2, 1), 1), "W(2,2)": (walk_count(2, 2), 1), "W(4,3)": (walk_count(4, 3), 2)}
    report.add_rule("walk_values", all(a == b for a, b in fixed.values()), {k: v[0] for k, v in fixed.items()})
    if samples > 0:
        prof = wigner_profile(n)
        seeds = [derive_seed(master_seed, EXP_ID, i) for i in range(samples)]
        with Timer() as timer:
            vals = np.array(parallel_map(lambda s: _trace_moments(prof, law, cls, s, mc_ks), seeds, threads))
        for c, k in enumerate(mc_ks):
            row = report.add_cell(f"N={n};k={k}", "trace_moment", vals[:, c])
            if k % 2 == 0:
                target = catalan(k // 2)
                se = row["std"] / math.sqrt(samples)
                z = abs(row["mean"] - target) / se if se > 0 else 0.0
                report.add_rule(f"catalan_k={k}", z <= n_se, z, n_se,
                                f"mean {row['mean']:.6g} vs Catalan {target}")
        report.extra["compute_seconds"] = timer.elapsed
    return report
