"""Rooted discs, their canonical forms, the sub-disc order and type catalogs.

A disc is a connected rooted graph whose vertices carry their distance from
the root (the *level*); all levels are at most the radius ``k``.  Two discs
have the same type when a root-preserving isomorphism maps one onto the
other.  Types are identified by a canonical encoding string::

    k=<k>;v=<m>;L=<l0,l1,...>;E=<a-b,c-d,...>
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

from .errors import CatalogTooLarge, DiscInvariantViolated, MismatchedRadius, ParseError


@dataclass(frozen=True)
class RootedDisc:
    """Concrete disc with local vertex ids; the root is local id 0.

    ``labels`` optionally maps local ids back to vertex ids of a host graph.
    """

    k: int
    levels: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    labels: tuple[int, ...] | None = None

    @classmethod
    def from_global_edges(cls, root: int, edges: Iterable[tuple[int, int]], k: int) -> "RootedDisc":
        """Relabel a rooted edge set of some host graph into local BFS order."""
        adj: dict[int, list[int]] = {root: []}
        for u, v in edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        local = {root: 0}
        order = [root]
        levels = [0]
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in sorted(adj[x]):
                if y not in local:
                    local[y] = len(order)
                    order.append(y)
                    levels.append(levels[local[x]] + 1)
                    queue.append(y)
        if len(order) != len(adj):
            raise DiscInvariantViolated(f"edge set is not connected to root {root}")
        ledges = set()
        for u, v in edges:
            a, b = local[u], local[v]
            ledges.add((a, b) if a < b else (b, a))
        return cls(k, tuple(levels), tuple(sorted(ledges)), tuple(order))

    @property
    def num_vertices(self) -> int:
        return len(self.levels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def global_edges(self) -> frozenset:
        if self.labels is None:
            raise ValueError("disc carries no host-graph labels")
        lab = self.labels
        return frozenset(
            (lab[a], lab[b]) if lab[a] < lab[b] else (lab[b], lab[a]) for a, b in self.edges
        )

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.levels]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj


def _distances(m: int, adj: Sequence[Sequence[int]]) -> list[int]:
    dist = [-1] * m
    dist[0] = 0
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def check_disc(disc: RootedDisc) -> None:
    """Raise :class:`DiscInvariantViolated` unless ``disc`` is a valid disc."""
    m = len(disc.levels)
    if m == 0:
        raise DiscInvariantViolated("disc has no root")
    seen = set()
    for a, b in disc.edges:
        if not (0 <= a < b < m) or (a, b) in seen:
            raise DiscInvariantViolated(f"bad edge {a}-{b}")
        seen.add((a, b))
    dist = _distances(m, disc.adjacency())
    if -1 in dist:
        raise DiscInvariantViolated("disc is not connected")
    if list(disc.levels) != dist:
        raise DiscInvariantViolated(f"levels {disc.levels} differ from distances {tuple(dist)}")
    if max(dist) > disc.k:
        raise DiscInvariantViolated(f"vertex at level {max(dist)} exceeds radius {disc.k}")


class DiscType:
    """Isomorphism class of rooted discs, held in canonical form."""

    __slots__ = ("encoding", "k", "levels", "edges", "__dict__")

    def __init__(self, k: int, levels: tuple[int, ...], edges: tuple[tuple[int, int], ...]):
        self.k = k
        self.levels = levels
        self.edges = edges
        self.encoding = _encode(k, levels, edges)

    @property
    def num_vertices(self) -> int:
        return len(self.levels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def __eq__(self, other):
        return isinstance(other, DiscType) and self.encoding == other.encoding

    def __hash__(self):
        return hash(self.encoding)

    def __repr__(self):
        return f"DiscType({self.encoding!r})"

    def sort_key(self):
        return (-len(self.edges), -len(self.levels), self.encoding)

    def to_disc(self) -> RootedDisc:
        return RootedDisc(self.k, self.levels, self.edges)

    @cached_property
    def adj(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(x) for x in self.to_disc().adjacency())

    @property
    def root_degree(self) -> int:
        return len(self.adj[0])

    @property
    def has_cycle(self) -> bool:
        return len(self.edges) >= len(self.levels)

    @property
    def is_closed(self) -> bool:
        """No vertex sits at level ``k``: the disc is a whole connected component."""
        return max(self.levels) < self.k

    @classmethod
    def from_encoding(cls, text: str) -> "DiscType":
        try:
            parts = dict(p.split("=", 1) for p in text.strip().split(";"))
            k = int(parts["k"])
            m = int(parts["v"])
            levels = tuple(int(x) for x in parts["L"].split(","))
            edges = []
            if parts["E"]:
                for pair in parts["E"].split(","):
                    a, b = pair.split("-")
                    edges.append((int(a), int(b)))
        except (KeyError, ValueError) as exc:
            raise ParseError(f"malformed disc encoding {text!r}") from exc
        if len(levels) != m:
            raise ParseError(f"encoding {text!r}: v={m} but {len(levels)} levels")
        disc = RootedDisc(k, levels, tuple(edges))
        try:
            t = canonicalize(disc)
        except DiscInvariantViolated as exc:
            raise ParseError(f"encoding {text!r} is not a valid disc: {exc}") from exc
        if t.encoding != text.strip():
            raise ParseError(f"encoding {text!r} is not canonical (expected {t.encoding!r})")
        return t


def _encode(k, levels, edges) -> str:
    return "k={};v={};L={};E={}".format(
        k,
        len(levels),
        ",".join(map(str, levels)),
        ",".join(f"{a}-{b}" for a, b in edges),
    )


# --- canonical labelling -------------------------------------------------


def _refine(colors: list[int], adj) -> list[int]:
    """Colour refinement to the coarsest equitable partition finer than ``colors``.

    Colours are dense ranks; the old colour is the leading sort key, so the
    cell order is preserved and the result is isomorphism-invariant.
    """
    ncolors = len(set(colors))
    while True:
        sigs = [(colors[v], tuple(sorted([colors[u] for u in nb]))) for v, nb in enumerate(adj)]
        uniq = sorted(set(sigs))
        if len(uniq) == ncolors:
            return colors
        rank = {s: i for i, s in enumerate(uniq)}
        colors = [rank[s] for s in sigs]
        ncolors = len(uniq)


def _canonical_labelling(m: int, levels, edges, adj) -> tuple:
    """Return the minimal edge certificate over the individualization-refinement tree."""
    if m == 1:
        return ()
    start = _refine(list(levels), adj)
    best = [None]
    seen: dict[tuple, tuple] = {}
    autos: list[tuple] = []

    def leaf(colors):
        cert = tuple(sorted((a, b) if a < b else (b, a) for a, b in ((colors[x], colors[y]) for x, y in edges)))
        prev = seen.get(cert)
        if prev is None:
            seen[cert] = tuple(colors)
            if best[0] is None or cert < best[0]:
                best[0] = cert
        else:
            inv = [0] * m
            for v, c in enumerate(colors):
                inv[c] = v
            gamma = tuple(inv[prev[v]] for v in range(m))
            if any(gamma[v] != v for v in range(m)):
                autos.append(gamma)

    def orbit_root(parent, x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def search(colors, prefix):
        if len(set(colors)) == m:
            leaf(colors)
            return
        counts: dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = min(c for c, n in counts.items() if n > 1)
        cell = [v for v in range(m) if colors[v] == target]
        explored: list[int] = []
        for v in cell:
            if explored and autos:
                parent = list(range(m))
                for g in autos:
                    if all(g[p] == p for p in prefix):
                        for x in range(m):
                            a, b = orbit_root(parent, x), orbit_root(parent, g[x])
                            if a != b:
                                parent[a] = b
                rv = orbit_root(parent, v)
                if any(orbit_root(parent, u) == rv for u in explored):
                    continue
            keyed = [(c, 0 if x == v else 1) for x, c in enumerate(colors)]
            uniq = sorted(set(keyed))
            rank = {s: i for i, s in enumerate(uniq)}
            search(_refine([rank[s] for s in keyed], adj), prefix + (v,))
            explored.append(v)

    search(start, ())
    return best[0]


@lru_cache(maxsize=1 << 18)
def _canonicalize_cached(k: int, m: int, edges: tuple) -> DiscType:
    adj = [[] for _ in range(m)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    levels = _distances(m, adj)
    cert = _canonical_labelling(m, levels, edges, adj)
    return DiscType(k, tuple(sorted(levels)), cert)


def canonicalize(disc: RootedDisc) -> DiscType:
    """Map a disc to its isomorphism type (root-preserving)."""
    check_disc(disc)
    return _canonicalize_cached(disc.k, len(disc.levels), disc.edges)


# --- the sub-disc order ----------------------------------------------------


def is_geq(a: DiscType, b: DiscType) -> bool:
    """Decide ``a`` ⪰ ``b``: ``b`` embeds into ``a`` as a subgraph with the root fixed."""
    if a.k != b.k:
        raise MismatchedRadius(f"cannot compare radius {a.k} with radius {b.k}")
    return _is_geq(a, b)


@lru_cache(maxsize=1 << 20)
def _is_geq(a: DiscType, b: DiscType) -> bool:
    if a.encoding == b.encoding:
        return True
    if b.num_edges > a.num_edges or b.num_vertices > a.num_vertices:
        return False
    if b.num_edges == a.num_edges and b.num_vertices == a.num_vertices:
        return False  # same size and not isomorphic
    adj_a, adj_b = a.adj, b.adj
    if len(adj_b[0]) > len(adj_a[0]):
        return False
    lev_a, lev_b = a.levels, b.levels
    mb = len(lev_b)
    # Each non-root vertex of b is attached to an earlier vertex one level up.
    parent = [0] * mb
    for x in range(1, mb):
        parent[x] = min(y for y in adj_b[x] if lev_b[y] == lev_b[x] - 1)
    earlier = [[y for y in adj_b[x] if y < x] for x in range(mb)]
    sets_a = [set(nb) for nb in adj_a]
    phi = [0] * mb
    used = {0}

    def extend(x):
        if x == mb:
            return True
        for y in adj_a[phi[parent[x]]]:
            if y in used or len(adj_a[y]) < len(adj_b[x]) or lev_a[y] > lev_b[x]:
                continue
            if all(phi[z] in sets_a[y] for z in earlier[x]):
                phi[x] = y
                used.add(y)
                if extend(x + 1):
                    return True
                used.discard(y)
        return False

    return extend(1)


# --- sub-disc enumeration ---------------------------------------------------


def connected_edge_subsets(num_vertices: int, edges: Sequence[tuple[int, int]]):
    """Yield every edge subset (as a tuple of edge indices) that is connected and touches vertex 0.

    The empty subset (the isolated root) is included.  Each subset is produced
    exactly once by the usual frontier-extension scheme.
    """
    incident: list[list[int]] = [[] for _ in range(num_vertices)]
    for i, (a, b) in enumerate(edges):
        incident[a].append(i)
        incident[b].append(i)

    def grow(chosen, verts, frontier, blocked):
        yield chosen
        for pos, e in enumerate(frontier):
            a, b = edges[e]
            new_blocked = blocked | set(frontier[:pos])
            rest = frontier[pos + 1:]
            new_verts = verts
            if a not in verts or b not in verts:
                w = b if a in verts else a
                new_verts = verts | {w}
                rest_set = set(rest)
                chosen_set = set(chosen)
                extra = [
                    f for f in incident[w]
                    if f != e and f not in new_blocked and f not in rest_set and f not in chosen_set
                ]
                rest = rest + extra
            yield from grow(chosen + (e,), new_verts, rest, new_blocked)

    yield from grow((), frozenset([0]), list(incident[0]), frozenset())


def sub_disc_types(t: DiscType) -> set[DiscType]:
    """All types ``b`` with ``t`` ⪰ ``b`` (connected rooted subgraphs of radius <= k)."""
    return set(_sub_disc_types(t))


@lru_cache(maxsize=4096)
def _sub_disc_types(t: DiscType) -> frozenset:
    out = set()
    for subset in connected_edge_subsets(t.num_vertices, t.edges):
        if not subset:
            out.add(isolated_root(t.k))
            continue
        es = [t.edges[i] for i in subset]
        try:
            disc = RootedDisc.from_global_edges(0, es, t.k)
        except DiscInvariantViolated:
            continue
        if max(disc.levels) <= t.k:
            out.add(canonicalize(disc))
    return frozenset(out)


def isolated_root(k: int) -> DiscType:
    return DiscType(k, (0,), ())


# --- catalogs ---------------------------------------------------------------


class DiscCatalog:
    """Ordered type list; order is a linear extension of ⪰ (larger types first)."""

    def __init__(self, types: Iterable[DiscType]):
        uniq = {t.encoding: t for t in types}
        ks = {t.k for t in uniq.values()}
        if len(ks) > 1:
            raise MismatchedRadius(f"catalog mixes radii {sorted(ks)}")
        self.k = ks.pop() if ks else None
        self.types: list[DiscType] = sorted(uniq.values(), key=DiscType.sort_key)
        self.index: dict[str, int] = {t.encoding: i for i, t in enumerate(self.types)}

    def __len__(self):
        return len(self.types)

    def __iter__(self):
        return iter(self.types)

    def __contains__(self, t):
        enc = t.encoding if isinstance(t, DiscType) else t
        return enc in self.index

    def position(self, t) -> int:
        return self.index[t.encoding if isinstance(t, DiscType) else t]

    @property
    def encodings(self) -> list[str]:
        return [t.encoding for t in self.types]

    @cached_property
    def ancestors(self) -> list[list[int]]:
        """``ancestors[j]`` = positions ``i != j`` with ``types[i]`` ⪰ ``types[j]``."""
        out = []
        for j, tj in enumerate(self.types):
            out.append([i for i in range(j) if _is_geq(self.types[i], tj)])
        return out


def build_catalog(observed: Iterable[DiscType], closure: str = "subdisc") -> DiscCatalog:
    """Catalog of ``observed`` types closed downward.

    ``closure="subdisc"`` adds every root-preserving sub-disc (the full ⪰
    down-set); ``closure="none"`` keeps the inputs only.  The closure under
    observable sub-discs, which is all the unbiasing recurrence needs, is
    produced by :func:`discstream.lam.observable_closure`.
    """
    observed = list(observed)
    ks = {t.k for t in observed}
    if len(ks) > 1:
        raise MismatchedRadius(f"observed types mix radii {sorted(ks)}")
    if closure == "none":
        return DiscCatalog(observed)
    if closure != "subdisc":
        raise ValueError(f"unknown closure {closure!r}")
    types: set[DiscType] = set()
    for t in observed:
        if t not in types:
            types |= _sub_disc_types(t)
    return DiscCatalog(types)


def enumerate_full_catalog(d: int, k: int, cap: int = 10_000) -> DiscCatalog:
    """Every connected rooted graph with max degree ``d`` and radius <= ``k``."""
    root = isolated_root(k)
    found = {root.encoding: root}
    queue = deque([root])
    while queue:
        t = queue.popleft()
        m = t.num_vertices
        deg = [len(nb) for nb in t.adj]
        present = set(t.edges)
        candidates = []
        for x in range(m):
            if deg[x] < d and t.levels[x] < k:
                candidates.append(t.edges + ((x, m),))
        for x in range(m):
            for y in range(x + 1, m):
                if deg[x] < d and deg[y] < d and (x, y) not in present:
                    candidates.append(t.edges + ((x, y),))
        for es in candidates:
            nm = m + 1 if es[-1][1] == m else m
            new = _canonicalize_cached(k, nm, tuple(sorted(es)))
            if new.encoding not in found:
                found[new.encoding] = new
                if len(found) > cap:
                    raise CatalogTooLarge(f"H_(d={d},k={k}) has more than {cap} types")
                queue.append(new)
    return DiscCatalog(found.values())
