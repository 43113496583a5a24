"""Brute-force ground truth: exact disc distributions, every stream order, greedy matchings, farness."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .disc import DiscCatalog, DiscType, build_catalog, canonicalize
from .errors import TooManyEdges
from .graph import BoundedGraph, true_disc
from .lam import LambdaMatrix, LambdaPolicy, build_matrix
from .stream import observe_multi, replayed_stream

ORACLE_EDGE_CAP = 8


@dataclass
class ExactDistribution:
    catalog: DiscCatalog
    counts: dict[str, int]
    n: int

    @property
    def f(self) -> dict[str, Fraction]:
        return {enc: Fraction(c, self.n) for enc, c in self.counts.items()}

    def report(self) -> dict:
        return {
            "n": self.n,
            "types": [
                {"encoding": enc, "count": self.counts[enc], "f": self.counts[enc] / self.n}
                for enc in self.catalog.encodings
            ],
        }


def exact_distribution(g: BoundedGraph, k: int) -> ExactDistribution:
    counts: dict[str, int] = {}
    types = {}
    for v in range(g.n):
        t = canonicalize(true_disc(g, v, k))
        types[t.encoding] = t
        counts[t.encoding] = counts.get(t.encoding, 0) + 1
    return ExactDistribution(build_catalog(types.values(), closure="none"), counts, g.n)


@dataclass
class StreamOutcome:
    order: tuple[tuple[int, int], ...]
    types: dict[int, DiscType]
    X: dict[str, Fraction]


def enumerate_all_streams(
    g: BoundedGraph, k: int, roots=None, cap: int = ORACLE_EDGE_CAP, lam: LambdaMatrix | None = None
) -> Iterator[StreamOutcome]:
    """Every ordering of ``g``'s edges with the observed types and exact unbiased ``X``.

    ``X`` uses the exact matrix over the sub-disc closure of the roots' true
    types unless ``lam`` is supplied.
    """
    from .estimator import raw_frequencies, unbias

    if g.m > cap:
        raise TooManyEdges(g.m, cap)
    roots = list(range(g.n)) if roots is None else list(roots)
    if lam is None:
        true_types = {canonicalize(true_disc(g, v, k)) for v in roots}
        lam = build_matrix(build_catalog(true_types), LambdaPolicy(exact_cap=cap), g.d)
    for order in itertools.permutations(g.edges):
        observed = observe_multi(replayed_stream(order, g.n, g.d), roots, k)
        types = {r: canonicalize(disc) for r, disc in observed.items()}
        Y = raw_frequencies(types, lam.catalog, exact=True)
        yield StreamOutcome(order, types, unbias(Y, lam, exact=True))


def greedy_matching_size(g: BoundedGraph, ranking) -> int:
    """Size of the greedy maximal matching that scans edges in ``ranking`` order."""
    matched = [False] * g.n
    size = 0
    for u, v in ranking:
        if not matched[u] and not matched[v]:
            matched[u] = matched[v] = True
            size += 1
    return size


def expected_greedy_matching(g: BoundedGraph, trials: int = 100, seed: int = 0, exact: bool = False):
    """Mean greedy matching size under uniform rankings, with its standard error.

    ``exact=True`` averages over every ranking (small graphs only) and returns
    ``(Fraction, 0.0)``.
    """
    if exact:
        if g.m > ORACLE_EDGE_CAP:
            raise TooManyEdges(g.m, ORACLE_EDGE_CAP)
        total = sum(greedy_matching_size(g, order) for order in itertools.permutations(g.edges))
        return Fraction(total, math.factorial(g.m)), 0.0
    if trials < 100:
        raise ValueError("need at least 100 trials")
    rng = random.Random(seed)
    order = list(g.edges)
    sizes = []
    for _ in range(trials):
        rng.shuffle(order)
        sizes.append(greedy_matching_size(g, order))
    mean = sum(sizes) / trials
    var = sum((x - mean) ** 2 for x in sizes) / (trials - 1)
    return mean, math.sqrt(var / trials)


def far_from_connected(g: BoundedGraph, epsilon: float, d: int | None = None) -> bool:
    d = g.d if d is None else d
    return len(g.components()) - 1 > epsilon * d * g.n


def far_from_cyclefree(g: BoundedGraph, epsilon: float, d: int | None = None) -> bool:
    d = g.d if d is None else d
    return g.m - g.n + len(g.components()) > epsilon * d * g.n
