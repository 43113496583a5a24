import collections
import itertools
import math
import random

import pytest

from discstream.disc import RootedDisc, canonicalize, is_geq
from discstream.errors import DuplicateRoot, EmptyGraph, ParseError, VertexOutOfRange
from discstream.graph import BoundedGraph, generate_graph, true_disc
from discstream.stream import (
    EdgeStream,
    MemoryMeter,
    load_replay,
    observe_disc,
    observe_multi,
    replayed_stream,
    second_pass_verify,
    uniform_stream,
)

def small_graphs():
    yield BoundedGraph.from_edges(3, 2, [(0, 1), (0, 2), (1, 2)])
    yield BoundedGraph.from_edges(4, 2, [(0, 1), (1, 2), (2, 3)])
    yield BoundedGraph.from_edges(4, 3, [(0, 1), (0, 2), (1, 2), (2, 3)])
    yield BoundedGraph.from_edges(5, 3, [(0, 1), (0, 2), (0, 3), (3, 4), (1, 2)])
    yield BoundedGraph.from_edges(5, 2, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])


def test_uniform_stream_basics():
    one = BoundedGraph.from_edges(2, 1, [(0, 1)])
    assert uniform_stream(one, 5).order == ((0, 1),)
    g = generate_graph("random_d_bounded", 30, 3, seed=1)
    assert uniform_stream(g, 9).order == uniform_stream(g, 9).order
    assert sorted(uniform_stream(g, 9).order) == sorted(g.edges)
    with pytest.raises(EmptyGraph):
        uniform_stream(BoundedGraph.from_edges(0, 1, []), 0)


def test_uniform_stream_orderings_are_balanced():
    g = BoundedGraph.from_edges(4, 2, [(0, 1), (1, 2), (2, 3)])
    counts = collections.Counter(uniform_stream(g, seed).order for seed in range(6000))
    assert len(counts) == 6
    assert all(880 <= c <= 1120 for c in counts.values())
    chi2 = sum((c - 1000) ** 2 / 1000 for c in counts.values())
    assert chi2 < 20.5  # p ~ 0.001 with 5 degrees of freedom


def test_observe_disc_traces():
    s = replayed_stream([(0, 1), (0, 2), (1, 2)], 3, 2)
    assert observe_disc(s, 0, 1).num_edges == 3
    s = replayed_stream([(1, 2), (0, 1), (0, 2)], 3, 2)
    d = observe_disc(s, 0, 1)
    assert d.global_edges() == {(0, 1), (0, 2)}
    s = replayed_stream([(1, 2), (0, 1)], 3, 2)
    assert observe_disc(s, 0, 2).global_edges() == {(0, 1)}
    with pytest.raises(VertexOutOfRange):
        observe_disc(s, 3, 1)


def test_observe_multi_triangle_all_roots():
    s = replayed_stream([(0, 1), (0, 2), (1, 2)], 3, 2)
    out = observe_multi(s, [0, 1, 2], 1)
    assert out[0].num_edges == 3
    # Root 1 drops (0,2): vertex 0 already sits at level k. Root 2 drops (0,1):
    # neither endpoint is collected yet when it arrives.
    assert out[1].global_edges() == {(0, 1), (1, 2)}
    assert out[2].global_edges() == {(0, 2), (1, 2)}
    with pytest.raises(DuplicateRoot):
        observe_multi(s, [0, 0], 1)


def test_observe_multi_matches_single_root_runs():
    g = generate_graph("random_d_bounded", 200, 3, seed=3)
    for seed in range(3):
        s = uniform_stream(g, seed)
        roots = random.Random(seed).sample(range(200), 40)
        multi = observe_multi(s, roots, 2)
        for r in roots:
            assert multi[r].global_edges() == observe_disc(s, r, 2).global_edges()


def test_far_apart_roots_observe_disjoint_edges():
    g = generate_graph("path", 30, 2)
    out = observe_multi(uniform_stream(g, 1), [0, 10], 2)
    assert not (out[0].global_edges() & out[10].global_edges())


def test_observed_is_sub_disc_of_true_exhaustively():
    violations = 0
    for g in small_graphs():
        for k in (1, 2):
            truth = {v: canonicalize(true_disc(g, v, k)) for v in range(g.n)}
            for order in itertools.permutations(g.edges):
                obs = observe_multi(replayed_stream(order, g.n, g.d), range(g.n), k)
                violations += sum(not is_geq(truth[v], canonicalize(obs[v])) for v in range(g.n))
    assert violations == 0


def test_observed_disc_depends_only_on_disc_edge_order():
    for g, k in itertools.product(small_graphs(), (1, 2)):
        for v in range(g.n):
            own = true_disc(g, v, k).global_edges()
            for order in itertools.permutations(g.edges):
                full = observe_disc(replayed_stream(order, g.n, g.d), v, k)
                local = observe_disc(replayed_stream([e for e in order if e in own], g.n, g.d), v, k)
                assert full.global_edges() == local.global_edges()


def test_disjoint_discs_observed_independently():
    # Two disjoint triangles; roots in different components.
    g = BoundedGraph.from_edges(6, 2, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])
    trials = 12_000
    table = collections.Counter()
    for seed in range(trials):
        obs = observe_multi(uniform_stream(g, seed), [0, 3], 1)
        table[(obs[0].num_edges, obs[3].num_edges)] += 1
    rows = collections.Counter()
    cols = collections.Counter()
    for (a, b), c in table.items():
        rows[a] += c
        cols[b] += c
    chi2 = sum(
        (table[(a, b)] - rows[a] * cols[b] / trials) ** 2 / (rows[a] * cols[b] / trials)
        for a in rows for b in cols
    )
    assert chi2 < 10.8  # 1 degree of freedom, p ~ 0.001
    assert abs(rows[3] / trials - 1 / 3) < 4 * math.sqrt(2 / 9 / trials)


def test_second_pass_verify():
    g = generate_graph("random_d_bounded", 80, 3, seed=5)
    truth = {v: true_disc(g, v, 2) for v in range(g.n)}
    assert all(second_pass_verify(truth, uniform_stream(g, 1), 2).values())

    partial = dict(truth)
    r = next(v for v in range(g.n) if truth[v].num_edges >= 2)
    edges = sorted(truth[r].global_edges())
    for drop in edges:
        try:
            partial[r] = RootedDisc.from_global_edges(r, [e for e in edges if e != drop], 2)
            break
        except Exception:
            continue
    res = second_pass_verify(partial, uniform_stream(g, 2), 2)
    assert res[r] is False
    assert sum(res.values()) == g.n - 1
    assert second_pass_verify({}, uniform_stream(g, 2), 2) == {}


def test_second_pass_verify_agrees_with_truth_on_observed_discs():
    g = generate_graph("random_d_bounded", 150, 3, seed=8)
    roots = list(range(0, 150, 3))
    for seed in range(4):
        obs = observe_multi(uniform_stream(g, seed), roots, 2)
        res = second_pass_verify(obs, uniform_stream(g, seed + 100), 2)
        for r in roots:
            assert res[r] == (obs[r].global_edges() == true_disc(g, r, 2).global_edges())


def test_memory_meter_bound():
    g = generate_graph("random_d_bounded", 500, 3, seed=2)
    meter = MemoryMeter()
    roots = list(range(0, 500, 5))
    observe_multi(uniform_stream(g, 0), roots, 2, meter)
    assert 0 < meter.peak <= len(roots) * 2 * 3**3


def test_replay_round_trip():
    g = generate_graph("cycle", 8, 2)
    s = uniform_stream(g, 4)
    back = load_replay(s.to_replay())
    assert back.order == s.order and back.n == 8 and back.d == 2
    assert isinstance(back, EdgeStream) and back.kind == "replayed"
    with pytest.raises(ParseError):
        load_replay("8 2\n0 1\n")
