"""Bounded-degree graphs: parsing, validation, true k-discs and corpus generators."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .disc import RootedDisc
from .errors import (
    DegreeBoundViolated,
    DuplicateEdge,
    InvalidModelParams,
    InvalidParams,
    ParseError,
    SelfLoop,
    VertexOutOfRange,
)

MODELS = (
    "cycle",
    "path",
    "disjoint_triangles",
    "random_d_bounded",
    "spanning_tree_plus_random",
    "disjoint_edges",
    "empty",
)


def _norm(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class BoundedGraph:
    """Immutable simple graph on vertices ``0..n-1`` with max degree ``d``.

    Construct through :meth:`from_edges`, which validates the invariants.
    """

    n: int
    d: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, d: int, edges: Iterable[Sequence[int]]) -> "BoundedGraph":
        if n < 0:
            raise InvalidParams(f"vertex count must be >= 0, got {n}")
        if d < 1:
            raise InvalidParams(f"degree bound must be >= 1, got {d}")
        seen = set()
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            for x in (u, v):
                if not 0 <= x < n:
                    raise VertexOutOfRange(x, n)
            if u == v:
                raise SelfLoop(u)
            e = _norm(u, v)
            if e in seen:
                raise DuplicateEdge(*e)
            seen.add(e)
            adj[u].append(v)
            adj[v].append(u)
            for x in (u, v):
                if len(adj[x]) > d:
                    raise DegreeBoundViolated(x, len(adj[x]), d)
        return cls(n, d, tuple(sorted(seen)), tuple(tuple(sorted(a)) for a in adj))

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise VertexOutOfRange(v, self.n)

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [s], deque([s])
            while queue:
                x = queue.popleft()
                for y in self.adjacency[x]:
                    if not seen[y]:
                        seen[y] = True
                        comp.append(y)
                        queue.append(y)
            comps.append(comp)
        return comps

    def serialize(self) -> str:
        return serialize(self)


@dataclass(frozen=True)
class Params:
    d: int
    k: int
    epsilon: float = 0.1
    delta: float = 0.1
    s: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.d < 1:
            raise InvalidParams(f"need k >= 1 and d >= 1 (got k={self.k}, d={self.d})")
        if not 0 < self.epsilon < 1:
            raise InvalidParams(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise InvalidParams(f"delta must lie in (0, 1), got {self.delta}")
        if self.s < 1:
            raise InvalidParams(f"s must be >= 1, got {self.s}")


def load_edge_list(text: str | Iterable[str]) -> BoundedGraph:
    """Parse the ``"n d"`` header + ``"u v"`` lines format."""
    lines = text.splitlines() if isinstance(text, str) else [ln.rstrip("\n") for ln in text]
    rows = [(i + 1, ln.split()) for i, ln in enumerate(lines) if ln.strip()]
    if not rows:
        raise ParseError("empty input: expected header 'n d'")
    lineno, header = rows[0]
    try:
        n, d = (int(x) for x in header)
    except ValueError:
        raise ParseError(f"line {lineno}: expected header 'n d', got {' '.join(header)!r}") from None
    edges = []
    for lineno, parts in rows[1:]:
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'u v', got {' '.join(parts)!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer vertex id in {' '.join(parts)!r}") from None
    return BoundedGraph.from_edges(n, d, edges)


def serialize(g: BoundedGraph) -> str:
    out = [f"{g.n} {g.d}"]
    out.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(out) + "\n"


def bfs_levels(adjacency, root: int, k: int) -> dict[int, int]:
    """Distances from ``root`` up to ``k`` hops; ``adjacency`` maps vertex -> neighbours."""
    levels = {root: 0}
    frontier = [root]
    for depth in range(1, k + 1):
        nxt = []
        for x in frontier:
            for y in adjacency[x]:
                if y not in levels:
                    levels[y] = depth
                    nxt.append(y)
        if not nxt:
            break
        frontier = nxt
    return levels


def true_disc(g: BoundedGraph, v: int, k: int) -> RootedDisc:
    """The subgraph induced by all vertices within distance ``k`` of ``v``."""
    g.check_vertex(v)
    if k < 1:
        raise InvalidParams(f"k must be >= 1, got {k}")
    levels = bfs_levels(g.adjacency, v, k)
    edges = [(x, y) for x in levels for y in g.adjacency[x] if x < y and y in levels]
    return RootedDisc.from_global_edges(v, edges, k)


def generate_graph(model: str, n: int, d: int, seed: int = 0, m: int | None = None) -> BoundedGraph:
    """Deterministic corpus generator.

    ``m`` is the edge-count target for the random models; when omitted,
    ``random_d_bounded`` aims for ``n*d//3`` edges and
    ``spanning_tree_plus_random`` for ``n - 1 + n//10``.
    """
    if model not in MODELS:
        raise InvalidModelParams(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
    if n < 1 or d < 1:
        raise InvalidModelParams(f"need n >= 1 and d >= 1 (got n={n}, d={d})")
    rng = random.Random(seed)

    if model == "empty":
        edges = []
    elif model == "cycle":
        if n < 3 or d < 2:
            raise InvalidModelParams("cycle requires n >= 3 and d >= 2")
        edges = [(i, (i + 1) % n) for i in range(n)]
    elif model == "path":
        if n > 2 and d < 2:
            raise InvalidModelParams("path on more than 2 vertices requires d >= 2")
        edges = [(i, i + 1) for i in range(n - 1)]
    elif model == "disjoint_triangles":
        if n % 3 or d < 2:
            raise InvalidModelParams("disjoint_triangles requires n divisible by 3 and d >= 2")
        edges = []
        for b in range(0, n, 3):
            edges += [(b, b + 1), (b, b + 2), (b + 1, b + 2)]
    elif model == "disjoint_edges":
        if n % 2:
            raise InvalidModelParams("disjoint_edges requires even n")
        edges = [(i, i + 1) for i in range(0, n, 2)]
    elif model == "random_d_bounded":
        target = n * d // 3 if m is None else m
        edges = _random_fill(n, d, target, rng, [], [0] * n)
    else:  # spanning_tree_plus_random
        if d < 2 and n > 2:
            raise InvalidModelParams("spanning_tree_plus_random requires d >= 2")
        target = n - 1 + n // 10 if m is None else m
        if target < n - 1:
            raise InvalidModelParams(f"edge target {target} below spanning tree size {n - 1}")
        order = list(range(n))
        rng.shuffle(order)
        deg = [0] * n
        edges = []
        open_slots = [order[0]]  # placed vertices with spare degree
        for v in order[1:]:
            i = rng.randrange(len(open_slots))
            u = open_slots[i]
            edges.append(_norm(u, v))
            deg[u] += 1
            deg[v] += 1
            if deg[u] == d:
                open_slots[i] = open_slots[-1]
                open_slots.pop()
            if deg[v] < d:
                open_slots.append(v)
        edges = _random_fill(n, d, target, rng, edges, deg)
    return BoundedGraph.from_edges(n, d, edges)


def _random_fill(n, d, target, rng, edges, deg):
    """Rejection-sample extra edges until ``target`` edges or ``100*n*d`` attempts."""
    present = set(edges)
    edges = list(edges)
    if n < 2:
        return edges
    for _ in range(100 * n * d):
        if len(edges) >= target:
            break
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v or deg[u] >= d or deg[v] >= d:
            continue
        e = _norm(u, v)
        if e in present:
            continue
        present.add(e)
        edges.append(e)
        deg[u] += 1
        deg[v] += 1
    return edges
