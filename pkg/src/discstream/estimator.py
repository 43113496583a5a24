"""Single-pass (and two-pass) estimation of the disc-type distribution."""

from __future__ import annotations

import math
import random
import zlib
from dataclasses import dataclass, field
from fractions import Fraction

from .disc import DiscCatalog, DiscType, RootedDisc, canonicalize
from .errors import SampleTooLarge, SingularLambda, UnknownType
from .graph import BoundedGraph, Params, bfs_levels
from .lam import LambdaMatrix, LambdaPolicy, observable_closure
from .stream import MemoryMeter, observe_multi, second_pass_verify, uniform_stream

VARIANTS = ("single_pass_per_root", "single_pass_union", "two_pass")

# Exact rows up to 24 edges: every disc with d <= 3, k <= 3 gets an exact row.
# Sampled rows at that size would miss diagonals as small as 1/3600.
PRACTICAL_POLICY = LambdaPolicy(exact_cap=24, mc_samples=20_000, seed=0)


def derive_seed(seed: int, tag: str) -> int:
    return zlib.crc32(f"{seed}:{tag}".encode()) & 0x7FFFFFFF


@dataclass(frozen=True)
class SampleSet:
    roots: tuple[int, ...]
    s: int
    seed: int


def sample_roots(n: int, s: int, seed: int) -> SampleSet:
    """``s`` distinct vertices, uniformly without replacement."""
    if s > n:
        raise SampleTooLarge(f"cannot sample {s} roots from {n} vertices")
    if s < 1:
        raise SampleTooLarge(f"sample size must be >= 1, got {s}")
    return SampleSet(tuple(random.Random(seed).sample(range(n), s)), s, seed)


def observed_types(observed: dict[int, RootedDisc], variant: str = "single_pass_per_root") -> dict[int, DiscType]:
    """Type of each root's disc; the union variant re-reads discs from the union of all collected edges."""
    if variant != "single_pass_union":
        return {r: canonicalize(disc) for r, disc in observed.items()}
    adj: dict[int, set[int]] = {}
    for disc in observed.values():
        for u, v in disc.global_edges():
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
    out = {}
    for r, disc in observed.items():
        k = disc.k
        levels = bfs_levels(_Adj(adj), r, k)
        edges = [(x, y) for x in levels for y in adj.get(x, ()) if x < y and y in levels]
        out[r] = canonicalize(RootedDisc.from_global_edges(r, edges, k))
    return out


class _Adj(dict):
    def __missing__(self, key):
        return ()


def raw_frequencies(types: dict[int, DiscType], catalog: DiscCatalog, exact: bool = False) -> dict[str, float]:
    """``Y_i`` = fraction of roots whose observed type is ``i``, for every catalog type."""
    s = len(types)
    counts = {enc: 0 for enc in catalog.encodings}
    for t in types.values():
        if t.encoding not in counts:
            raise UnknownType(f"observed type {t.encoding} missing from catalog")
        counts[t.encoding] += 1
    if exact:
        return {enc: Fraction(c, s) for enc, c in counts.items()}
    return {enc: c / s for enc, c in counts.items()}


def unbias(Y: dict[str, float], lam: LambdaMatrix, exact: bool = False) -> dict[str, float]:
    """Solve the triangular system ``Y = Lambda X`` in catalog order.

    ``X_i = (Y_i - sum_{j above i} X_j lambda(i|j)) / lambda(i|i)``.  Only the
    ancestors with ``lambda(i|j) > 0`` contribute, so the sum is accumulated
    from each row as soon as its ``X_j`` is known.
    """
    pending: dict[str, float] = {}
    X = {}
    for t in lam.catalog:
        j = t.encoding
        row = lam.rows[j].values if exact else lam.row(j)
        diag = row.get(j, 0)
        if diag == 0:
            raise SingularLambda(f"lambda({j}|{j}) = 0")
        xj = (Y.get(j, 0) - pending.pop(j, 0)) / diag
        X[j] = xj
        if xj:
            for i, p in row.items():
                if i != j:
                    pending[i] = pending.get(i, 0) + xj * p
    return X


def clamp_normalize(X: dict[str, float]) -> dict[str, float]:
    pos = {i: max(float(x), 0.0) for i, x in X.items()}
    total = sum(pos.values())
    if total == 0:
        return pos
    return {i: x / total for i, x in pos.items()}


def paper_sample_size(d: int, k: int, delta, lam: LambdaMatrix | None = None, *, N=None, kappa=None, lambda_min=None) -> int:
    """``ceil(8 kappa^(2N) d^(2k+1) 3^(3N+1) / (delta^2 lambda_min))`` as an exact integer."""
    if lam is not None:
        N = len(lam.catalog) if N is None else N
        kappa = lam.kappa_exact if kappa is None else kappa
        lambda_min = lam.lambda_min_exact if lambda_min is None else lambda_min
    kappa, lambda_min, delta = Fraction(kappa), Fraction(lambda_min), Fraction(delta)
    value = 8 * kappa ** (2 * N) * d ** (2 * k + 1) * 3 ** (3 * N + 1) / (delta ** 2 * lambda_min)
    return math.ceil(value)


@dataclass
class DistributionEstimate:
    catalog: DiscCatalog
    Y: dict[str, float]
    X: dict[str, float]
    X_clamped: dict[str, float]
    s: int
    seed: int
    variant: str
    lam: LambdaMatrix = field(repr=False)
    n: int = 0
    peak_memory_edges: int = 0
    paper_s: int | None = None

    @property
    def k(self):
        return self.catalog.k

    def report(self, params: Params | None = None) -> dict:
        doc = {
            "variant": self.variant,
            "s": self.s,
            "seed": self.seed,
            "n": self.n,
            "peak_memory_edges": self.peak_memory_edges,
            "paper_s": str(self.paper_s) if self.paper_s is not None else None,
            "kappa": self.lam.kappa,
            "lambda_min": self.lam.lambda_min,
            "types": [
                {
                    "encoding": enc,
                    "Y": float(self.Y.get(enc, 0)),
                    "X": float(self.X.get(enc, 0)),
                    "X_clamped": self.X_clamped.get(enc, 0.0),
                }
                for enc in self.catalog.encodings
            ],
        }
        if params is not None:
            doc["params"] = vars(params).copy()
        return doc


def _matrix_for(types, lam, policy, d):
    if lam is None:
        return observable_closure(types, policy, d)
    for t in types:
        if t not in lam.catalog:
            raise UnknownType(f"observed type {t.encoding} missing from the supplied matrix")
    return lam


def estimate_single_pass(
    g: BoundedGraph,
    params: Params,
    lam: LambdaMatrix | None = None,
    variant: str = "single_pass_per_root",
    policy: LambdaPolicy = PRACTICAL_POLICY,
    with_paper_s: bool = False,
) -> DistributionEstimate:
    """Sample roots, collect observed discs in one pass, then unbias.

    With ``lam=None`` the matrix is built after the pass over the observable
    closure of the observed types.
    """
    if variant not in VARIANTS[:2]:
        raise ValueError(f"unknown single-pass variant {variant!r}")
    sample = sample_roots(g.n, params.s, derive_seed(params.seed, "roots"))
    stream = uniform_stream(g, derive_seed(params.seed, "stream"))
    meter = MemoryMeter()
    observed = observe_multi(stream, sample.roots, params.k, meter)
    types = observed_types(observed, variant)
    lam = _matrix_for(set(types.values()), lam, policy, g.d)
    Y = raw_frequencies(types, lam.catalog)
    X = unbias(Y, lam)
    est = DistributionEstimate(
        lam.catalog, Y, X, clamp_normalize(X), params.s, params.seed, variant, lam, g.n, meter.peak
    )
    if with_paper_s:
        est.paper_s = paper_sample_size(params.d, params.k, params.delta, lam)
    return est


def estimate_two_pass(
    g: BoundedGraph,
    params: Params,
    lam: LambdaMatrix | None = None,
    policy: LambdaPolicy = PRACTICAL_POLICY,
) -> DistributionEstimate:
    """First pass collects discs, second pass certifies which are complete.

    ``X_i`` = (roots certified with type ``i``) / (``s * lambda(i|i)``).
    """
    sample = sample_roots(g.n, params.s, derive_seed(params.seed, "roots"))
    first = uniform_stream(g, derive_seed(params.seed, "stream"))
    second = uniform_stream(g, derive_seed(params.seed, "stream2"))
    meter = MemoryMeter()
    observed = observe_multi(first, sample.roots, params.k, meter)
    verified = second_pass_verify(observed, second, params.k, meter)
    types = observed_types(observed)
    lam = _matrix_for(set(types.values()), lam, policy, g.d)
    Y = raw_frequencies(types, lam.catalog)
    counts = {enc: 0 for enc in lam.catalog.encodings}
    for r, ok in verified.items():
        if ok:
            counts[types[r].encoding] += 1
    X = {enc: (c / (params.s * lam.get(enc, enc)) if c else 0.0) for enc, c in counts.items()}
    return DistributionEstimate(
        lam.catalog, Y, X, clamp_normalize(X), params.s, params.seed, "two_pass", lam, g.n, meter.peak
    )
