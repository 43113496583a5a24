"""Estimate the distribution of radius-k neighbourhood types of a bounded-degree
graph from one pass over a randomly ordered edge stream."""

from .applications import (
    DiscFamily,
    MatchingEstimate,
    TesterVerdict,
    connectivity_test,
    cyclefree_test,
    empirical_frequency,
    family_test,
    match_prob,
    matching_estimate,
    true_frequency,
)
from .disc import (
    DiscCatalog,
    DiscType,
    RootedDisc,
    build_catalog,
    canonicalize,
    enumerate_full_catalog,
    is_geq,
)
from .errors import DiscStreamError, InputError, InvariantError
from .estimator import DistributionEstimate, estimate_single_pass, estimate_two_pass, paper_sample_size
from .graph import BoundedGraph, Params, generate_graph, load_edge_list, serialize, true_disc
from .lam import LambdaMatrix, LambdaPolicy, build_matrix, lambda_exact, lambda_monte_carlo, observable_closure
from .oracle import (
    ExactDistribution,
    enumerate_all_streams,
    exact_distribution,
    expected_greedy_matching,
    far_from_connected,
    far_from_cyclefree,
)
from .stream import EdgeStream, observe_disc, observe_multi, second_pass_verify, uniform_stream

__all__ = [name for name in dir() if not name.startswith("_")]
