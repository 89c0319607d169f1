"""Config-driven entry points for every experiment."""
from __future__ import annotations

from typing import Callable

import numpy as np

from ..entrylaws import (Bernoulli, Gaussian, build_matching_law, law_from_json,
                         matched_gaussian_divisible)
from ..errors import ConfigInvalid
from ..profiles import profile_from_spec
from .gaps import gap_universality
from .ldp import ldp_tails
from .locallaw import local_law_scan
from .moments import trace_moment_bound
from .rigidity import rigidity_scaling
from .swap import four_moment_swap


def law_from_spec(spec, key: str = "law"):
    """Law JSON, or one of the shortcuts {kind: matching | matched_gaussian_divisible, m3, m4[, gamma]}."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    try:
        kind = spec["kind"]
        if kind == "matching":
            return build_matching_law(float(spec["m3"]), float(spec["m4"]))
        if kind == "matched_gaussian_divisible":
            return matched_gaussian_divisible(float(spec["m3"]), float(spec["m4"]), float(spec["gamma"]))
        return law_from_json(spec)
    except ConfigInvalid:
        raise
    except Exception as exc:
        raise ConfigInvalid(key, str(exc)) from exc


def _profile(cfg, key="profile"):
    try:
        return profile_from_spec(cfg[key])
    except KeyError as exc:
        raise ConfigInvalid(key, f"missing {exc}") from exc
    except Exception as exc:
        raise ConfigInvalid(key, str(exc)) from exc


def _z_list(cfg):
    zs = cfg.get("z_list", [[0.5, 0.01]])
    return [complex(a, b) for a, b in zs]


def run_local_law(cfg, seed, threads):
    prof = _profile(cfg)
    return local_law_scan(prof, law_from_spec(cfg.get("law", "Gaussian")), cls=cfg.get("class", "ComplexHermitian"),
                          e_grid=cfg.get("e_grid", [0.0]), eta_grid=cfg.get("eta_grid"),
                          samples=cfg.get("samples", 25), master_seed=seed, threads=threads,
                          admissibility_threshold=cfg.get("admissibility_threshold", 1.0),
                          deloc_seeds=cfg.get("deloc_seeds", 0), label=cfg.get("label", ""))


def run_swap(cfg, seed, threads):
    prof = _profile(cfg)
    control = (law_from_spec(cfg["control_v"], "control_v") if "control_v" in cfg else None,
               law_from_spec(cfg["control_w"], "control_w") if "control_w" in cfg else None)
    return four_moment_swap(prof, law_from_spec(cfg.get("law_v", "Gaussian"), "law_v"),
                            law_from_spec(cfg.get("law_w", "Gaussian"), "law_w"), _z_list(cfg),
                            statistic_name=cfg.get("statistic", "im_m"), samples=cfg.get("samples", 2000),
                            master_seed=seed, cls=cfg.get("class", "RealSymmetric"), control=control,
                            threads=threads)


def run_moments(cfg, seed, threads):
    n_list = cfg.get("n_list", [500])
    return trace_moment_bound(k_max=cfg.get("k_max", 8), n=n_list[0], samples=cfg.get("samples", 200),
                              master_seed=seed, cls=cfg.get("class", "ComplexHermitian"),
                              law=law_from_spec(cfg.get("law", "Gaussian")), threads=threads)


def run_ldp(cfg, seed, threads):
    coeffs = cfg.get("coefficients")
    return ldp_tails(law_from_spec(cfg.get("law", "Gaussian")), mode=cfg.get("mode", "linear"),
                     coefficients=None if coeffs is None else np.asarray(coeffs, dtype=float),
                     d_grid=cfg.get("d_grid", [1, 2, 3, 4, 5, 6]), samples=cfg.get("samples", 200_000),
                     master_seed=seed)


def run_gaps(cfg, seed, threads):
    return gap_universality(_profile(cfg), _profile(cfg, "profile_b"),
                            law_from_spec(cfg.get("law", "Gaussian")),
                            law_from_spec(cfg.get("law_b", "Gaussian"), "law_b"),
                            window=cfg.get("window", [-1.0, 1.0]), samples=cfg.get("samples", 17),
                            master_seed=seed, cls=cfg.get("class", "ComplexHermitian"), threads=threads)


def run_rigidity(cfg, seed, threads):
    return rigidity_scaling(n_list=cfg.get("n_list", [250, 500, 1000]), samples=cfg.get("samples", 50),
                            master_seed=seed, law=law_from_spec(cfg.get("law", "Gaussian")),
                            cls=cfg.get("class", "ComplexHermitian"), bulk=cfg.get("bulk", 0.5),
                            threads=threads)


EXPERIMENTS: dict[str, tuple[Callable, str]] = {
    "local_law": (run_local_law, "Lambda_d, off-diagonal and averaged-law scan over (E, eta); delocalization"),
    "four_moment_swap": (run_swap, "Green's-function comparison: matched pair vs control pair"),
    "trace_moment_bound": (run_moments, "ordered closed walks, their bound, Catalan trace moments"),
    "ldp_tails": (run_ldp, "tails of linear and quadratic forms vs a subexponential envelope"),
    "gap_universality": (run_gaps, "KS comparison of unfolded bulk gaps between two ensembles"),
    "rigidity": (run_rigidity, "rigidity statistic and counting-function distance vs N"),
}
