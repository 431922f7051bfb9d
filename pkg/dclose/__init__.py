from dclose.baseline import baseline_fk, exact_baseline, ordering_baseline, rand_test
from dclose.closure import (
    closure_profile,
    closure_trajectory,
    detect_closure,
    exhibits_closure_lists,
    follower_indegree_sums,
    k_linked_partition,
)
from dclose.config import CONFIG_PATH, DEFAULT_CONFIG, load_config
from dclose.errors import DcloseError
from dclose.graph import TemporalDigraph
from dclose.heuristic import approx_final_ratios, c_t, s_t
from dclose.io import emit_edge_csv, emit_list_file, parse_edge_csv, parse_list_file
from dclose.models import generate, generate_pa, generate_pa_communities, generate_pa_fitness
from dclose.report import run_experiment
from dclose.stats import correlate

__all__ = [
    "CONFIG_PATH",
    "DEFAULT_CONFIG",
    "DcloseError",
    "TemporalDigraph",
    "approx_final_ratios",
    "baseline_fk",
    "c_t",
    "closure_profile",
    "closure_trajectory",
    "correlate",
    "detect_closure",
    "emit_edge_csv",
    "emit_list_file",
    "exact_baseline",
    "exhibits_closure_lists",
    "follower_indegree_sums",
    "generate",
    "generate_pa",
    "generate_pa_communities",
    "generate_pa_fitness",
    "k_linked_partition",
    "load_config",
    "ordering_baseline",
    "parse_edge_csv",
    "parse_list_file",
    "rand_test",
    "run_experiment",
    "s_t",
]
