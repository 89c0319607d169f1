"""Shared experiment plumbing: seeds, worker pool, cell summaries, fits, reports."""
from __future__ import annotations

import csv
import io
import json
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

CSV_COLUMNS = ["experiment", "cell", "statistic", "count", "mean", "std", "median", "q05", "q95"]
QUANTILES = (0.05, 0.95)
BOOTSTRAP_RESAMPLES = 200


def stable_id(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def derive_seed(master: int, experiment: str, index: int, *extra: int) -> int:
    """64-bit seed for one sample, a pure function of its coordinates."""
    ss = np.random.SeedSequence(int(master), spawn_key=(stable_id(experiment), int(index), *map(int, extra)))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        env = os.environ.get("RMT_LAB_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def parallel_map(fn: Callable, items: Sequence, threads: Optional[int] = None) -> list:
    """Map in a worker pool; results always come back in input order."""
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def summarize(values) -> dict:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return {"count": 0, "mean": np.nan, "std": np.nan, "median": np.nan, "q05": np.nan, "q95": np.nan}
    q = np.quantile(v, QUANTILES)
    return {"count": int(v.size), "mean": float(v.mean()),
            "std": float(v.std(ddof=1)) if v.size > 1 else 0.0,
            "median": float(np.median(v)), "q05": float(q[0]), "q95": float(q[1])}


def fit_loglog(x, y) -> tuple:
    """Least-squares slope and intercept of log y against log x."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


def bootstrap_slope(xs, samples_per_x: Sequence[np.ndarray], reducer: Callable, seed: int,
                    resamples: int = BOOTSTRAP_RESAMPLES) -> tuple:
    """Slope of log reducer(samples) vs log x, with a seeded bootstrap standard error."""
    point = fit_loglog(xs, [reducer(s) for s in samples_per_x])[0]
    rng = np.random.default_rng(seed)
    slopes = []
    for _ in range(resamples):
        ys = [reducer(s[rng.integers(0, len(s), len(s))]) for s in samples_per_x]
        slopes.append(fit_loglog(xs, ys)[0])
    return point, float(np.std(slopes, ddof=1))


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    master_seed: int
    cells: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    rules: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    def add_cell(self, cell: str, statistic: str, values) -> dict:
        row = {"experiment": self.experiment, "cell": cell, "statistic": statistic}
        row.update(summarize(values))
        self.cells.append(row)
        return row

    def add_scalar(self, cell: str, statistic: str, value: float, count: int = 1) -> dict:
        row = {"experiment": self.experiment, "cell": cell, "statistic": statistic, "count": int(count),
               "mean": float(value), "std": np.nan, "median": float(value), "q05": np.nan, "q95": np.nan}
        self.cells.append(row)
        return row

    def add_rule(self, name: str, passed: bool, value=None, threshold=None, detail: str = "") -> None:
        self.rules[name] = {"passed": bool(passed), "value": _plain(value), "threshold": _plain(threshold),
                            "detail": detail}

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.rules.values())

    def cells_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.cells:
            w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"experiment": self.experiment, "params": _plain(self.params), "master_seed": self.master_seed,
                "cells": _plain(self.cells), "fits": _plain(self.fits), "rules": _plain(self.rules),
                "skipped": _plain(self.skipped), "extra": _plain(self.extra), "passed": self.passed,
                "wall_clock": self.wall_clock}


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _plain(obj):
    """Recursively convert numpy types into JSON-friendly Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False
