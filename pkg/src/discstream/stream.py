"""Edge streams and observed-disc collection from a single pass."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

from .disc import RootedDisc
from .errors import DuplicateRoot, EmptyGraph, ParseError, VertexOutOfRange
from .graph import BoundedGraph, bfs_levels


@dataclass(frozen=True)
class EdgeStream:
    """A materialized edge ordering.

    Consumers read it through :meth:`reader`, which only moves forward.
    """

    order: tuple[tuple[int, int], ...]
    n: int
    d: int
    seed: int | None = None
    kind: str = "uniform"

    def reader(self) -> Iterator[tuple[int, int]]:
        return iter(self.order)

    def __len__(self):
        return len(self.order)

    def to_replay(self) -> str:
        lines = [f"{self.n} {self.d} {self.seed if self.seed is not None else -1}"]
        lines += [f"{u} {v}" for u, v in self.order]
        return "\n".join(lines) + "\n"


def uniform_stream(g: BoundedGraph, seed: int) -> EdgeStream:
    """Fisher-Yates shuffle of the edge list, deterministic per seed."""
    if g.n == 0:
        raise EmptyGraph("graph has no vertices")
    order = list(g.edges)
    random.Random(seed).shuffle(order)
    return EdgeStream(tuple(order), g.n, g.d, seed, "uniform")


def replayed_stream(order: Iterable[tuple[int, int]], n: int, d: int, seed=None) -> EdgeStream:
    return EdgeStream(tuple((int(u), int(v)) for u, v in order), n, d, seed, "replayed")


def load_replay(text: str) -> EdgeStream:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 3:
        raise ParseError("replay file must start with 'n d seed'")
    try:
        n, d, seed = (int(x) for x in rows[0])
        order = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise ParseError(f"malformed replay file: {exc}") from None
    return replayed_stream(order, n, d, None if seed < 0 else seed)


class ObserveState:
    """Per-root state of the observed-disc procedure: collected vertices with levels and edges."""

    __slots__ = ("root", "k", "level", "adj", "edges")

    def __init__(self, root: int, k: int):
        self.root = root
        self.k = k
        self.level = {root: 0}
        self.adj = {root: []}
        self.edges: list[tuple[int, int]] = []

    def offer(self, u: int, w: int):
        """Feed one stream edge; return the newly collected vertex, ``True`` or ``None``.

        ``True`` means the edge was kept without adding a vertex, ``None``
        means it was discarded.
        """
        level = self.level
        iu, iw = u in level, w in level
        if iu and iw:
            self._add(u, w)
            return True
        if iu or iw:
            x, y = (u, w) if iu else (w, u)
            if level[x] <= self.k - 1:
                self.adj[y] = []
                level[y] = -1
                self._add(x, y)
                return y
        return None

    def _add(self, u, w):
        self.adj[u].append(w)
        self.adj[w].append(u)
        self.edges.append((u, w))
        # Distances to every collected vertex, recomputed from scratch.
        level = {self.root: 0}
        queue = deque([self.root])
        while queue:
            x = queue.popleft()
            for y in self.adj[x]:
                if y not in level:
                    level[y] = level[x] + 1
                    queue.append(y)
        self.level = level

    def disc(self) -> RootedDisc:
        return RootedDisc.from_global_edges(self.root, self.edges, self.k)


class MemoryMeter:
    """Counts edges retained across all per-root states during a pass."""

    def __init__(self):
        self.retained = 0
        self.peak = 0

    def add(self, count: int = 1):
        self.retained += count
        if self.retained > self.peak:
            self.peak = self.retained


def observe_disc(stream: EdgeStream, v: int, k: int) -> RootedDisc:
    if not 0 <= v < stream.n:
        raise VertexOutOfRange(v, stream.n)
    state = ObserveState(v, k)
    for u, w in stream.reader():
        state.offer(u, w)
    return state.disc()


def observe_multi(
    stream: EdgeStream, roots: Iterable[int], k: int, meter: MemoryMeter | None = None
) -> dict[int, RootedDisc]:
    """Run one observed-disc state per root in a single pass over ``stream``."""
    roots = list(roots)
    if len(set(roots)) != len(roots):
        raise DuplicateRoot("roots must be distinct")
    for r in roots:
        if not 0 <= r < stream.n:
            raise VertexOutOfRange(r, stream.n)
    states = {r: ObserveState(r, k) for r in roots}
    members: dict[int, list[int]] = {r: [r] for r in roots}  # vertex -> roots whose U holds it
    for u, w in stream.reader():
        mu, mw = members.get(u), members.get(w)
        if mu is None and mw is None:
            continue
        if mu is None or mw is None:
            interested = mu or mw
        else:
            interested = set(mu)
            interested.update(mw)
        for r in list(interested):
            got = states[r].offer(u, w)
            if got is None:
                continue
            if meter is not None:
                meter.add()
            if got is not True:
                members.setdefault(got, []).append(r)
    return {r: st.disc() for r, st in states.items()}


def second_pass_verify(
    collected: dict[int, RootedDisc], stream: EdgeStream, k: int, meter: MemoryMeter | None = None
) -> dict[int, bool]:
    """Check in a second pass whether each collected disc is the root's true disc.

    Keeps every stream edge incident to a vertex of the collected disc and
    compares the collected edge set with the radius-``k`` disc of the root in
    the gathered subgraph.
    """
    watch: dict[int, list[int]] = {}
    for r, disc in collected.items():
        for x in disc.labels:
            watch.setdefault(x, []).append(r)
    gathered: dict[int, dict[int, list[int]]] = {r: {} for r in collected}
    for u, w in stream.reader():
        rs = set(watch.get(u, ()))
        rs.update(watch.get(w, ()))
        for r in rs:
            adj = gathered[r]
            adj.setdefault(u, []).append(w)
            adj.setdefault(w, []).append(u)
            if meter is not None:
                meter.add()
    out = {}
    for r, disc in collected.items():
        adj = gathered[r]
        adj.setdefault(r, [])
        levels = bfs_levels(_Missing(adj), r, k)
        rebuilt = {
            (x, y) if x < y else (y, x)
            for x in levels for y in adj.get(x, ()) if y in levels
        }
        out[r] = rebuilt == disc.global_edges()
    return out


class _Missing(dict):
    """Adjacency view returning no neighbours for vertices outside the gathered set."""

    def __init__(self, adj):
        super().__init__(adj)

    def __missing__(self, key):
        return ()
