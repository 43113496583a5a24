"""Observation probabilities lambda(i|j) for uniformly random edge orders.

``lambda(i|j)`` is the probability that a root whose true disc has type
``j`` ends up with an observed disc of type ``i``.  The observed disc only
depends on the relative order of the true disc's own edges, so a row is
computed on the disc in isolation: exactly (every ordering is accounted
for) or by sampling orderings.
"""

from __future__ import annotations

import json
import math
import random
import zlib
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .disc import DiscCatalog, DiscType, RootedDisc, _is_geq, canonicalize
from .errors import RealizabilityViolation, TooManyEdges, UnknownType

DEFAULT_EXACT_CAP = 9


class _DiscSimulator:
    """Runs the observed-disc procedure on a disc's own edges, states as bitmasks."""

    def __init__(self, t: DiscType):
        self.t = t
        self.k = t.k
        self.edges = t.edges
        self._levels: dict[int, dict[int, int]] = {0: {0: 0}}
        self._types: dict[int, DiscType] = {}

    def levels(self, fmask: int) -> dict[int, int]:
        lev = self._levels.get(fmask)
        if lev is None:
            adj: dict[int, list[int]] = {0: []}
            for i, (a, b) in enumerate(self.edges):
                if fmask >> i & 1:
                    adj.setdefault(a, []).append(b)
                    adj.setdefault(b, []).append(a)
            lev = {0: 0}
            frontier = [0]
            while frontier:
                nxt = []
                for x in frontier:
                    for y in adj.get(x, ()):
                        if y not in lev:
                            lev[y] = lev[x] + 1
                            nxt.append(y)
                frontier = nxt
            self._levels[fmask] = lev
        return lev

    def step(self, fmask: int, e: int) -> int:
        a, b = self.edges[e]
        lev = self.levels(fmask)
        la, lb = lev.get(a), lev.get(b)
        if la is not None and lb is not None:
            return fmask | 1 << e
        if la is not None or lb is not None:
            if (la if la is not None else lb) <= self.k - 1:
                return fmask | 1 << e
        return fmask

    def type_of(self, fmask: int) -> DiscType:
        t = self._types.get(fmask)
        if t is None:
            es = [self.edges[i] for i in range(len(self.edges)) if fmask >> i & 1]
            t = canonicalize(RootedDisc.from_global_edges(0, es, self.k))
            self._types[fmask] = t
        return t


def observation_counts(t: DiscType, cap: int = DEFAULT_EXACT_CAP) -> tuple[dict[DiscType, int], int]:
    """Number of orderings of ``t``'s edges yielding each observed type, and ``|E|!``.

    Orderings sharing the same processed-edge set and collected-edge set are
    merged, so the work is bounded by the number of such prefix states
    rather than by ``|E|!``; the counts are exact integers.
    """
    m = t.num_edges
    if m > cap:
        raise TooManyEdges(m, cap)
    return _observation_counts(t)


@lru_cache(maxsize=None)
def _observation_counts(t: DiscType):
    sim = _DiscSimulator(t)
    m = t.num_edges
    layer = {(0, 0): 1}
    for _ in range(m):
        nxt: dict[tuple[int, int], int] = {}
        for (done, fmask), count in layer.items():
            for e in range(m):
                if done >> e & 1:
                    continue
                key = (done | 1 << e, sim.step(fmask, e))
                nxt[key] = nxt.get(key, 0) + count
        layer = nxt
    tally: dict[DiscType, int] = {}
    for (_, fmask), count in layer.items():
        ty = sim.type_of(fmask)
        tally[ty] = tally.get(ty, 0) + count
    return tally, math.factorial(m)


def lambda_exact(dj: DiscType, k: int | None = None, cap: int = DEFAULT_EXACT_CAP) -> dict[DiscType, Fraction]:
    if k is not None and k != dj.k:
        dj = _with_radius(dj, k)
    counts, total = observation_counts(dj, cap)
    return {t: Fraction(c, total) for t, c in counts.items()}


def lambda_monte_carlo(dj: DiscType, k: int | None, samples: int, seed: int) -> dict[DiscType, tuple[float, float]]:
    """Sampled row: ``{type: (frequency, binomial standard error)}``."""
    if samples < 100:
        raise ValueError("need at least 100 samples")
    if k is not None and k != dj.k:
        dj = _with_radius(dj, k)
    counts = _mc_counts(dj, samples, seed)
    out = {}
    for t, c in counts.items():
        p = c / samples
        out[t] = (p, math.sqrt(p * (1 - p) / samples))
    return out


@lru_cache(maxsize=None)
def _mc_counts(dj: DiscType, samples: int, seed: int) -> dict[DiscType, int]:
    sim = _DiscSimulator(dj)
    rng = random.Random(seed)
    order = list(range(dj.num_edges))
    by_mask: dict[int, int] = {}
    for _ in range(samples):
        rng.shuffle(order)
        fmask = 0
        for e in order:
            fmask = sim.step(fmask, e)
        by_mask[fmask] = by_mask.get(fmask, 0) + 1
    counts: dict[DiscType, int] = {}
    for fmask, c in by_mask.items():
        t = sim.type_of(fmask)
        counts[t] = counts.get(t, 0) + c
    return counts


def _with_radius(t: DiscType, k: int) -> DiscType:
    return canonicalize(RootedDisc(k, t.levels, t.edges))


@dataclass(frozen=True)
class LambdaPolicy:
    exact_cap: int = DEFAULT_EXACT_CAP
    mc_samples: int = 20_000
    seed: int = 0

    def row_seed(self, t: DiscType) -> int:
        return (self.seed * 1_000_003 + zlib.crc32(t.encoding.encode())) & 0x7FFFFFFF


@dataclass
class Row:
    """One column of the matrix: the observed-type distribution for a true type."""

    values: dict[str, float | Fraction]
    method: str  # "exact" or "monte_carlo"
    samples: int | None = None
    stderr: dict[str, float] | None = None


def compute_row(t: DiscType, policy: LambdaPolicy) -> Row:
    if t.num_edges <= policy.exact_cap:
        probs = lambda_exact(t, cap=policy.exact_cap)
        _TYPE_BY_ENCODING.update((x.encoding, x) for x in probs)
        return Row({x.encoding: p for x, p in probs.items()}, "exact")
    est = lambda_monte_carlo(t, None, policy.mc_samples, policy.row_seed(t))
    _TYPE_BY_ENCODING.update((x.encoding, x) for x in est)
    return Row(
        {x.encoding: p for x, (p, _) in est.items()},
        "monte_carlo",
        policy.mc_samples,
        {x.encoding: se for x, (_, se) in est.items()},
    )


class LambdaMatrix:
    """Rows ``lambda(.|j)`` for every catalog type ``j``, plus kappa and lambda_min."""

    def __init__(self, catalog: DiscCatalog, rows: dict[str, Row], d: int | None = None):
        self.catalog = catalog
        self.rows = rows
        self.d = d if d is not None else max((max((len(a) for a in t.adj), default=0) for t in catalog), default=0)
        self._float_rows = {j: {i: float(p) for i, p in r.values.items()} for j, r in rows.items()}
        self.kappa, self.lambda_min = self._constants()

    @property
    def k(self):
        return self.catalog.k

    def get(self, i, j) -> float:
        i = i.encoding if isinstance(i, DiscType) else i
        j = j.encoding if isinstance(j, DiscType) else j
        return self._float_rows[j].get(i, 0.0)

    def exact(self, i, j) -> Fraction:
        i = i.encoding if isinstance(i, DiscType) else i
        j = j.encoding if isinstance(j, DiscType) else j
        row = self.rows[j]
        if row.method != "exact":
            raise ValueError(f"row {j} is Monte Carlo")
        return row.values.get(i, Fraction(0))

    def row(self, j) -> dict[str, float]:
        return self._float_rows[j.encoding if isinstance(j, DiscType) else j]

    @property
    def all_exact(self) -> bool:
        return all(r.method == "exact" for r in self.rows.values())

    @property
    def kappa_exact(self) -> Fraction:
        """kappa as a rational; exact when every row is exact."""
        if not self.all_exact:
            return Fraction(self.kappa)
        best = Fraction(0)
        for j, row in self.rows.items():
            for i, p in row.values.items():
                best = max(best, p / self.rows[i].values[i])
        return best

    @property
    def kappa_offdiagonal(self) -> float:
        """Largest ``lambda(i|j) / lambda(i|i)`` over ``i != j`` (0 when there are no such pairs)."""
        best = 0.0
        for j, row in self._float_rows.items():
            for i, p in row.items():
                if i != j:
                    best = max(best, p / self._float_rows[i][i])
        return best

    @property
    def lambda_min_exact(self) -> Fraction:
        if not self.all_exact:
            return Fraction(self.lambda_min)
        return min(r.values[j] for j, r in self.rows.items())

    def _constants(self):
        kappa = 0.0
        lam_min = math.inf
        for j, row in self._float_rows.items():
            lam_min = min(lam_min, row.get(j, 0.0))
            for i, p in row.items():
                diag = self._float_rows.get(i, {}).get(i, 0.0)
                if diag > 0:
                    kappa = max(kappa, p / diag)
        return kappa, (lam_min if self._float_rows else 0.0)

    def validate(self, check_support: bool = True) -> None:
        for t in self.catalog:
            if t.encoding not in self.rows:
                raise RealizabilityViolation(f"no row for type {t.encoding}")
        for j, row in self.rows.items():
            vals = row.values
            for i, p in vals.items():
                if not 0 <= p <= 1:
                    raise RealizabilityViolation(f"lambda({i}|{j}) = {p} outside [0, 1]")
                if i not in self.catalog:
                    raise UnknownType(f"row {j} reaches {i}, which is missing from the catalog")
            total = sum(vals.values())
            if row.method == "exact":
                if total != 1:
                    raise RealizabilityViolation(f"row {j} sums to {total}")
            else:
                se = math.sqrt(sum(s * s for s in row.stderr.values()))
                if abs(float(total) - 1) > max(4 * se, 1e-9):
                    raise RealizabilityViolation(f"row {j} sums to {total}")
            if vals.get(j, 0) <= 0:
                raise RealizabilityViolation(f"lambda({j}|{j}) is not positive")
            if check_support:
                tj = self.catalog.types[self.catalog.position(j)]
                for i in vals:
                    if not _is_geq(tj, self.catalog.types[self.catalog.position(i)]):
                        raise RealizabilityViolation(f"{i} is not a sub-disc of {j}")

    def to_json(self) -> str:
        rows = {}
        for j in self.catalog.encodings:
            row = self.rows[j]
            out = {}
            for i in sorted(row.values):
                p = row.values[i]
                if row.method == "exact":
                    out[i] = {"num": p.numerator, "den": p.denominator}
                else:
                    out[i] = {"p": p, "stderr": row.stderr[i], "samples": row.samples}
            rows[j] = out
        doc = {
            "d": self.d,
            "k": self.k,
            "types": self.catalog.encodings,
            "rows": rows,
            "kappa": self.kappa,
            "lambda_min": self.lambda_min,
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "LambdaMatrix":
        doc = json.loads(text)
        catalog = DiscCatalog(DiscType.from_encoding(e) for e in doc["types"])
        rows = {}
        for j, entries in doc["rows"].items():
            if all("num" in v for v in entries.values()):
                rows[j] = Row({i: Fraction(v["num"], v["den"]) for i, v in entries.items()}, "exact")
            else:
                samples = next(iter(entries.values()))["samples"]
                rows[j] = Row(
                    {i: v["p"] for i, v in entries.items()},
                    "monte_carlo",
                    samples,
                    {i: v["stderr"] for i, v in entries.items()},
                )
        return cls(catalog, rows, doc.get("d"))


def build_matrix(
    catalog: DiscCatalog, policy: LambdaPolicy = LambdaPolicy(), d: int | None = None, check_support: bool = True
) -> LambdaMatrix:
    if not len(catalog):
        raise ValueError("catalog is empty")
    rows = {t.encoding: compute_row(t, policy) for t in catalog}
    mat = LambdaMatrix(catalog, rows, d)
    mat.validate(check_support)
    return mat


def observable_closure(
    types, policy: LambdaPolicy = LambdaPolicy(), d: int | None = None, check_support: bool = False
) -> LambdaMatrix:
    """Matrix over the closure of ``types`` under observable sub-discs.

    Every type reached by some row gets a row of its own, so the catalog is
    closed for the unbiasing recurrence.  With Monte Carlo rows the closure
    is the set of types actually sampled.
    """
    todo = list({t.encoding: t for t in types}.values())
    known = {t.encoding: t for t in todo}
    rows: dict[str, Row] = {}
    while todo:
        t = todo.pop()
        row = compute_row(t, policy)
        rows[t.encoding] = row
        for enc in row.values:
            if enc not in known:
                known[enc] = _type_from_row_key(enc, t)
                todo.append(known[enc])
    mat = LambdaMatrix(DiscCatalog(known.values()), rows, d)
    mat.validate(check_support)
    return mat


_TYPE_BY_ENCODING: dict[str, DiscType] = {}


def _type_from_row_key(enc: str, parent: DiscType) -> DiscType:
    t = _TYPE_BY_ENCODING.get(enc)
    if t is None:
        t = DiscType.from_encoding(enc)
        _TYPE_BY_ENCODING[enc] = t
    return t
