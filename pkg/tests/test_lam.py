import collections
import itertools
import math
from fractions import Fraction

import pytest

from discstream.disc import RootedDisc, build_catalog, canonicalize, enumerate_full_catalog, is_geq, isolated_root
from discstream.errors import RealizabilityViolation, TooManyEdges
from discstream.graph import BoundedGraph, generate_graph, true_disc
from discstream.lam import (
    LambdaMatrix,
    LambdaPolicy,
    Row,
    build_matrix,
    lambda_exact,
    lambda_monte_carlo,
    observable_closure,
)
from discstream.stream import observe_disc, replayed_stream, uniform_stream


def t_of(k, root, edges):
    return canonicalize(RootedDisc.from_global_edges(root, edges, k))


TRI = t_of(1, 0, [(0, 1), (0, 2), (1, 2)])
STAR = t_of(1, 0, [(0, 1), (0, 2)])
EDGE = t_of(1, 0, [(0, 1)])


def brute_lambda(t):
    """Tally observed types over every ordering of the disc's own edges."""
    counts = collections.Counter()
    for order in itertools.permutations(t.edges):
        counts[canonicalize(observe_disc(replayed_stream(order, t.num_vertices, 3), 0, t.k))] += 1
    total = math.factorial(t.num_edges)
    return {x: Fraction(c, total) for x, c in counts.items()}


def test_triangle_row():
    row = lambda_exact(TRI)
    assert row == {TRI: Fraction(1, 3), STAR: Fraction(2, 3)}


def test_single_edge_and_path_rows():
    for k in (1, 2, 3):
        e = t_of(k, 0, [(0, 1)])
        assert lambda_exact(e) == {e: 1}
    path = t_of(2, 0, [(0, 1), (1, 2)])
    assert lambda_exact(path) == {path: Fraction(1, 2), t_of(2, 0, [(0, 1)]): Fraction(1, 2)}


def test_exact_cap():
    big = t_of(2, 0, [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (2, 6), (2, 7), (3, 8), (3, 9)])
    assert big.num_edges == 9
    lambda_exact(big)
    bigger = t_of(2, 0, [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (2, 6), (2, 7), (3, 8), (3, 9), (4, 5)])
    with pytest.raises(TooManyEdges):
        lambda_exact(bigger)
    assert sum(lambda_exact(bigger, cap=10).values()) == 1


@pytest.mark.parametrize("d,k", [(2, 1), (3, 1), (2, 2)])
def test_exact_rows_match_brute_force(d, k):
    for t in enumerate_full_catalog(d, k):
        if t.num_edges <= 7:
            assert lambda_exact(t) == brute_lambda(t)


def test_exact_rows_on_random_discs():
    g = generate_graph("random_d_bounded", 40, 3, seed=11, m=45)
    seen = set()
    for v in range(g.n):
        t = canonicalize(true_disc(g, v, 2))
        if t.num_edges <= 7 and t not in seen:
            seen.add(t)
            assert lambda_exact(t) == brute_lambda(t)
    assert len(seen) >= 5


def test_monte_carlo_examples():
    est = lambda_monte_carlo(TRI, 1, 60_000, seed=3)
    p, se = est[TRI]
    assert abs(p - 1 / 3) <= 0.006 and abs(p - 1 / 3) <= 3 * se
    assert lambda_monte_carlo(EDGE, 1, 500, 0) == {EDGE: (1.0, 0.0)}
    assert math.isclose(sum(p for p, _ in est.values()), 1.0)
    assert lambda_monte_carlo(TRI, 1, 1000, 7) == lambda_monte_carlo(TRI, 1, 1000, 7)
    with pytest.raises(ValueError):
        lambda_monte_carlo(TRI, 1, 50, 0)


def test_monte_carlo_converges_to_exact():
    types = [t for t in enumerate_full_catalog(2, 2) if 2 <= t.num_edges <= 6]
    for t in types:
        exact = lambda_exact(t)
        ok = 0
        for seed in range(100):
            est = lambda_monte_carlo(t, None, 400, seed)
            ok += all(
                abs(est.get(x, (0.0, 0.0))[0] - float(p)) <= max(4 * est.get(x, (0.0, 0.0))[1], 4 * math.sqrt(float(p * (1 - p)) / 400))
                for x, p in exact.items()
            )
        assert ok >= 99


def test_triangle_matrix():
    mat = build_matrix(build_catalog([TRI]), d=2)
    assert mat.exact(TRI, TRI) == Fraction(1, 3)
    assert mat.exact(STAR, TRI) == Fraction(2, 3)
    for t in (STAR, EDGE, isolated_root(1)):
        assert mat.rows[t.encoding].values == {t.encoding: 1}
    assert mat.kappa == 1.0  # diagonal pairs count, so kappa >= 1
    assert math.isclose(mat.kappa_offdiagonal, 2 / 3)
    assert mat.lambda_min_exact == Fraction(1, 3)
    d, k = 2, 1
    assert mat.kappa <= 2 ** (2 * d ** (k + 1))
    assert mat.lambda_min >= 1 / math.factorial(2 * d ** (k + 1))


def test_support_is_within_sub_discs():
    cat = enumerate_full_catalog(3, 1)
    mat = build_matrix(cat, d=3)
    for j in cat:
        for i in mat.rows[j.encoding].values:
            assert is_geq(j, cat.types[cat.position(i)])


def test_validation_catches_bad_rows():
    cat = build_catalog([EDGE])
    rows = {EDGE.encoding: Row({EDGE.encoding: Fraction(1, 2)}, "exact"),
            isolated_root(1).encoding: Row({isolated_root(1).encoding: Fraction(1)}, "exact")}
    with pytest.raises(RealizabilityViolation):
        LambdaMatrix(cat, rows).validate()


def test_json_round_trip_is_stable():
    mat = build_matrix(build_catalog([TRI]), d=2)
    text = mat.to_json()
    again = LambdaMatrix.from_json(text)
    assert again.to_json() == text
    assert again.exact(STAR, TRI) == Fraction(2, 3)
    mc = build_matrix(build_catalog([TRI]), LambdaPolicy(exact_cap=2, mc_samples=3000, seed=1), d=2)
    assert mc.rows[TRI.encoding].method == "monte_carlo"
    assert LambdaMatrix.from_json(mc.to_json()).to_json() == mc.to_json()


def test_observable_closure_is_closed():
    g = generate_graph("random_d_bounded", 300, 3, seed=2)
    types = {canonicalize(true_disc(g, v, 2)) for v in range(g.n)}
    mat = observable_closure(types, LambdaPolicy(exact_cap=12), d=3)
    for row in mat.rows.values():
        assert set(row.values) <= set(mat.catalog.encodings)
    assert set(mat.catalog.encodings) <= set(build_catalog(types).encodings)


def test_context_free_in_a_larger_graph():
    # Root 0 of a triangle with a pendant path hanging off vertex 2: its
    # radius-1 disc is the triangle; the extra edges must not matter.
    g = BoundedGraph.from_edges(6, 3, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5)])
    trials = 10_000
    counts = collections.Counter(
        canonicalize(observe_disc(uniform_stream(g, seed), 0, 1)) for seed in range(trials)
    )
    for t, p in lambda_exact(TRI).items():
        freq = counts[t] / trials
        se = math.sqrt(float(p * (1 - p)) / trials)
        assert abs(freq - float(p)) <= 4 * se
