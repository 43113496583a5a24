"""Property testers built on disc statistics and the greedy-matching size estimator."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .disc import DiscType
from .errors import InvalidParams, RadiusTooSmall, TooManyEdges
from .estimator import DistributionEstimate
from .graph import Params

MATCH_EXACT_CAP = 24  # edges
MATCH_MC_SAMPLES = 4000

# Tester constants (engineering choices, see README).
CONNECTIVITY_SIZE_FACTOR = 8
CONNECTIVITY_THRESHOLD_DIV = 16


@dataclass(frozen=True)
class DiscFamily:
    """A set of multisets F, each a ``{encoding: count}`` map with ``k`` discs in total."""

    members: tuple[tuple[tuple[str, int], ...], ...]
    k: int

    def __init__(self, members, k: int):
        norm = []
        for F in members:
            items = F.items() if isinstance(F, Mapping) else F
            F = tuple(sorted((enc.encoding if isinstance(enc, DiscType) else enc, int(x)) for enc, x in items))
            if sum(x for _, x in F) != k or any(x < 0 for _, x in F):
                raise InvalidParams(f"family member {F} does not hold exactly {k} discs")
            norm.append(F)
        object.__setattr__(self, "members", tuple(norm))
        object.__setattr__(self, "k", k)

    def __len__(self):
        return len(self.members)


@dataclass
class TesterVerdict:
    property: str
    accept: bool
    statistic: float
    threshold: float
    details: dict = field(default_factory=dict)

    def report(self) -> dict:
        return {
            "property": self.property,
            "accept": self.accept,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "details": self.details,
        }


def _floor_count(x, n: int) -> int:
    if isinstance(x, (int, Fraction)):
        return max(math.floor(x * n), 0)
    # Tolerance for values like 0.3 * 10 landing just under an integer.
    return max(math.floor(float(x) * n + 1e-9), 0)


def empirical_frequency(F, X: Mapping[str, float], n: int, k: int) -> float:
    """``prod_i binom(floor(X_i n), x_i) / binom(n, k)``; ``binom(L, M) = 0`` when ``L < M``."""
    if n < k:
        raise InvalidParams(f"need n >= k, got n={n}, k={k}")
    items = F.items() if isinstance(F, Mapping) else F
    num = 1
    for enc, x in items:
        num *= math.comb(_floor_count(X.get(enc, 0), n), x)
        if num == 0:
            return 0.0
    return float(Fraction(num, math.comb(n, k)))


def true_frequency(F, counts: Mapping[str, int], n: int, k: int) -> Fraction:
    """Exact probability that ``k`` distinct uniform vertices have disc multiset ``F``."""
    items = F.items() if isinstance(F, Mapping) else F
    num = 1
    for enc, x in items:
        num *= math.comb(counts.get(enc, 0), x)
    return Fraction(num, math.comb(n, k))


def family_delta(k: int, N: int) -> Fraction:
    """Accuracy the family tester asks of the distribution estimate."""
    return Fraction(1, 48 * (2 * k * N) ** k)


def family_test(family: DiscFamily, X: Mapping[str, float], n: int, k: int, N: int | None = None) -> TesterVerdict:
    """Accept iff the summed empirical frequency of the family is below 1/2."""
    if not len(family):
        raise InvalidParams("family is empty")
    table = {}
    total = 0.0
    for F in family.members:
        psi = empirical_frequency(F, X, n, k)
        table[";".join(f"{x}x[{enc}]" for enc, x in F)] = psi
        total += psi
    N = len(X) if N is None else N
    details = {"psi": table, "required_delta": float(family_delta(k, N)), "N": N}
    return TesterVerdict("family", total < 0.5, total, 0.5, details)


def _statistics_source(est) -> tuple[Mapping[str, float], dict[str, DiscType]]:
    """Values and types behind a tester.

    An estimate contributes its raw ``X``: the tester statistics are linear
    in ``X``, so the raw values keep them unbiased, while clamping and
    renormalizing would push spurious mass onto small closed types.
    """
    if isinstance(est, DistributionEstimate):
        return est.X, {t.encoding: t for t in est.catalog}
    values = dict(est)
    return values, {enc: DiscType.from_encoding(enc) for enc in values}


def _check_radius(types, params: Params):
    k = params.k
    if k < 2:
        raise RadiusTooSmall(f"testers need k >= 2, got {k}")
    for t in types.values():
        if t.k != k:
            raise RadiusTooSmall(f"statistics at radius {t.k} but params.k = {k}")


def connectivity_test(est, params: Params) -> TesterVerdict:
    """Reject when too many vertices sit in small closed discs (whole small components).

    ``est`` is a :class:`DistributionEstimate` or a ``{encoding: value}`` map.
    """
    values, types = _statistics_source(est)
    _check_radius(types, params)
    eps, d, k = params.epsilon, params.d, params.k
    size_bound = CONNECTIVITY_SIZE_FACTOR / (eps * d)
    threshold = eps * d / CONNECTIVITY_THRESHOLD_DIV
    stat = float(sum(values[e] for e, t in types.items() if t.is_closed and t.num_vertices < size_bound))
    recommended = math.ceil(size_bound) + 1
    details = {
        "size_bound": size_bound,
        "recommended_k": recommended,
        "radius_sufficient": k >= recommended,
    }
    return TesterVerdict("connectivity", stat <= threshold, stat, threshold, details)


def cyclefree_test(est, params: Params, n: int | None = None) -> TesterVerdict:
    """Reject on a visible cycle fraction above ``eps/2`` or an average degree above a forest's."""
    values, types = _statistics_source(est)
    _check_radius(types, params)
    if n is None:
        n = est.n if isinstance(est, DistributionEstimate) else None
    eps, d = params.epsilon, params.d
    cycle_frac = float(sum(values[e] for e, t in types.items() if t.has_cycle))
    avg_deg = float(sum(values[e] * t.root_degree for e, t in types.items()))
    forest_deg = 2 * (1 - 1 / n) if n else 2.0
    deg_threshold = forest_deg + eps * d / 2
    accept = cycle_frac <= eps / 2 and avg_deg <= deg_threshold
    details = {
        "cycle_fraction": cycle_frac,
        "cycle_threshold": eps / 2,
        "average_degree": avg_deg,
        "degree_threshold": deg_threshold,
    }
    return TesterVerdict("cyclefree", accept, cycle_frac, eps / 2, details)


# ---- matching ---------------------------------------------------------------

def _match_fraction(t: DiscType) -> Fraction:
    """Exact probability that greedy matching under a uniform ranking matches the root.

    Only the set of matched vertices matters: edges touching it are dead, and
    the next live edge in a uniform ranking is uniform among the live edges.
    """
    edges = t.edges
    memo: dict[int, Fraction] = {}

    def prob(matched: int) -> Fraction:
        if matched & 1:
            return Fraction(1)
        if matched in memo:
            return memo[matched]
        live = [(a, b) for a, b in edges if not (matched >> a & 1 or matched >> b & 1)]
        if not live:
            out = Fraction(0)
        else:
            out = sum((prob(matched | (1 << a) | (1 << b)) for a, b in live), Fraction(0)) / len(live)
        memo[matched] = out
        return out

    return prob(0)


_match_cache: dict[DiscType, Fraction] = {}


def _greedy_root_matched(edges, order) -> bool:
    matched = set()
    for e in order:
        a, b = edges[e]
        if a not in matched and b not in matched:
            matched.add(a)
            matched.add(b)
            if a == 0 or b == 0:
                return True
    return False


def match_prob(t: DiscType, mode: str = "exact", samples: int = MATCH_MC_SAMPLES, seed: int = 0,
               cap: int = MATCH_EXACT_CAP):
    """Probability that greedy matching inside the disc (uniform ranks) matches the root.

    ``mode="exact"`` returns a Fraction; ``mode="mc"`` returns ``(p, stderr)``.
    """
    if mode == "exact":
        if t.num_edges > cap:
            raise TooManyEdges(t.num_edges, cap)
        if t not in _match_cache:
            _match_cache[t] = _match_fraction(t)
        return _match_cache[t]
    if mode != "mc":
        raise InvalidParams(f"unknown match_prob mode {mode!r}")
    rng = random.Random(seed)
    order = list(range(t.num_edges))
    hits = 0
    for _ in range(samples):
        rng.shuffle(order)
        hits += _greedy_root_matched(t.edges, order)
    p = hits / samples
    return p, math.sqrt(p * (1 - p) / samples)


@dataclass
class MatchingEstimate:
    q: int
    n: int
    m_hat: float
    mode: str
    p_match: dict[str, float]
    method: dict[str, str]
    weights: dict[str, float]

    def report(self) -> dict:
        return {
            "q": self.q,
            "n": self.n,
            "mode": self.mode,
            "m_hat": self.m_hat,
            "types": [
                {
                    "encoding": enc,
                    "X": self.weights[enc],
                    "p_match": self.p_match[enc],
                    "method": self.method[enc],
                }
                for enc in self.weights
            ],
            "note": "greedy matching is simulated inside each radius-q disc; "
                    "interactions across the disc boundary are cut",
        }


MATCHING_MODES = ("corrected", "clamped", "raw")


def matching_estimate(est: DistributionEstimate, n: int | None = None, q: int | None = None,
                      mode: str = "corrected", cap: int = MATCH_EXACT_CAP,
                      samples: int = MATCH_MC_SAMPLES, seed: int = 0) -> MatchingEstimate:
    """``m_hat = (n/2) sum_i w_i p_match(i)``, clipped to ``[0, n/2]``.

    The weights ``w`` are the unbiased ``X`` ("corrected", default), the
    clamped and renormalized ``X`` ("clamped") or the observed ``Y`` ("raw").
    ``m_hat`` is linear in ``w``, so the unclamped ``X`` keeps it unbiased;
    clamping at radius 3 discards large negative mass and biases it upward.
    """
    n = est.n if n is None else n
    q = est.k if q is None else q
    if q != est.k:
        raise InvalidParams(f"estimate has radius {est.k}, asked for q={q}")
    if q < 2:
        raise InvalidParams("matching needs q >= 2")
    if mode not in MATCHING_MODES:
        raise InvalidParams(f"unknown matching mode {mode!r}")
    weights_src = {"corrected": est.X, "clamped": est.X_clamped, "raw": est.Y}[mode]
    p_match, method, weights = {}, {}, {}
    total = 0.0
    for t in est.catalog:
        w = float(weights_src.get(t.encoding, 0.0))
        if w == 0:
            continue
        if t.num_edges <= cap:
            p = float(match_prob(t, "exact", cap=cap))
            method[t.encoding] = "exact"
        else:
            p, _ = match_prob(t, "mc", samples=samples, seed=seed)
            method[t.encoding] = "monte_carlo"
        p_match[t.encoding] = p
        weights[t.encoding] = w
        total += w * p
    m_hat = min(max(n / 2 * total, 0.0), n / 2)
    return MatchingEstimate(q, n, m_hat, mode, p_match, method, weights)
