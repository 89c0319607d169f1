"""Seeded Monte-Carlo experiments with pass/fail reports."""
from .common import ExperimentReport, derive_seed
from .gaps import gap_universality
from .ldp import ldp_tails
from .locallaw import local_law_scan
from .moments import trace_moment_bound, walk_bound, walk_count
from .registry import EXPERIMENTS, law_from_spec
from .rigidity import rigidity_scaling
from .swap import four_moment_swap, telescoping_terms

__all__ = ["EXPERIMENTS", "ExperimentReport", "derive_seed", "four_moment_swap", "gap_universality",
           "law_from_spec", "ldp_tails", "local_law_scan", "rigidity_scaling", "telescoping_terms",
           "trace_moment_bound", "walk_bound", "walk_count"]
