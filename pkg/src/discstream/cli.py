"""Command-line entry point: ``discstream <subcommand> ...``.

Exit codes: 0 ok, 1 usage, 2 invalid input, 3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .applications import (
    DiscFamily,
    MATCHING_MODES,
    connectivity_test,
    cyclefree_test,
    family_test,
    matching_estimate,
)
from .disc import DiscType, build_catalog, canonicalize
from .errors import InputError, InvariantError, ParseError, TooManyEdges
from .estimator import estimate_single_pass, estimate_two_pass
from .graph import MODELS, BoundedGraph, Params, generate_graph, load_edge_list, true_disc
from .lam import LambdaPolicy, build_matrix
from .oracle import exact_distribution

VARIANT_FLAGS = {
    "single": "single_pass_per_root",
    "single-union": "single_pass_union",
    "two-pass": "two_pass",
}
BENCH_HEADER = ["s", "trial", "max_err", "peak_mem_edges", "wall_ms"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    subcommand: str
    input: str | None = None
    gen: str | None = None
    params: dict = field(default_factory=dict)
    out: str | None = None
    trials: int | None = None
    format: str = "json"
    extra: dict = field(default_factory=dict)


# ---- helpers ----------------------------------------------------------------

def _parse_gen(spec: str, seed: int) -> BoundedGraph:
    """``model:n:d[:graph_seed]``; the graph seed defaults to ``--seed``."""
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"--gen expects model:n:d[:seed], got {spec!r}")
    try:
        n, d = int(parts[1]), int(parts[2])
        gseed = int(parts[3]) if len(parts) == 4 else seed
    except ValueError:
        raise UsageError(f"--gen expects integers for n, d and seed, got {spec!r}") from None
    return generate_graph(parts[0], n, d, gseed)


def _load_graph(args) -> BoundedGraph:
    if (args.input is None) == (args.gen is None):
        raise UsageError("give exactly one of --input or --gen")
    if args.input is not None:
        try:
            text = Path(args.input).read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {args.input}: {exc.strerror}") from None
        return load_edge_list(text)
    return _parse_gen(args.gen, args.seed)


def _params(args, g: BoundedGraph, k: int) -> Params:
    d = args.d if args.d is not None else g.d
    return Params(d=d, k=k, epsilon=args.epsilon, delta=args.delta, s=args.s if args.s else g.n, seed=args.seed)


def _config(args, params: Params | None = None, **extra) -> RunConfig:
    return RunConfig(
        subcommand=args.command,
        input=getattr(args, "input", None),
        gen=getattr(args, "gen", None),
        params=asdict(params) if params is not None else {"seed": args.seed},
        out=args.out,
        trials=getattr(args, "trials", None),
        format=args.format,
        extra=extra,
    )


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# ---- subcommands ------------------------------------------------------------

def cmd_gen(args) -> int:
    g = generate_graph(args.model, args.n, args.d, args.seed, args.m)
    _emit(g.serialize(), args.out)
    return 0


def cmd_lambda(args) -> int:
    g = _load_graph(args)
    types = {canonicalize(true_disc(g, v, args.k)) for v in range(g.n)}
    catalog = build_catalog(types)
    if args.policy == "exact":
        biggest = max(t.num_edges for t in catalog)
        if biggest > args.exact_cap:
            raise TooManyEdges(biggest, args.exact_cap)
    policy = LambdaPolicy(exact_cap=args.exact_cap, mc_samples=args.mc_samples, seed=args.seed)
    mat = build_matrix(catalog, policy, g.d)
    _emit(mat.to_json(), args.out)
    return 0


def _estimate(args, g, k):
    params = _params(args, g, k)
    variant = VARIANT_FLAGS[args.variant]
    if variant == "two_pass":
        return params, estimate_two_pass(g, params)
    return params, estimate_single_pass(g, params, variant=variant)


def cmd_estimate(args) -> int:
    g = _load_graph(args)
    params, est = _estimate(args, g, args.k)
    cfg = _config(args, params, variant=args.variant)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["encoding", "Y", "X", "X_clamped"])
        for enc in est.catalog.encodings:
            w.writerow([enc, repr(float(est.Y[enc])), repr(float(est.X[enc])), repr(est.X_clamped[enc])])
        _emit(buf.getvalue(), args.out)
        return 0
    doc = est.report()
    doc["config"] = asdict(cfg)
    _emit(_dump_json(doc), args.out)
    return 0


def _load_family(path: str) -> DiscFamily:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"family file is not valid JSON: {exc}") from None
    try:
        k = int(doc["k"])
        members = doc["members"]
    except (KeyError, TypeError, ValueError):
        raise ParseError("family file needs 'k' and 'members'") from None
    for F in members:
        if not isinstance(F, dict):
            raise ParseError("each family member must map encodings to counts")
        for enc in F:
            t = DiscType.from_encoding(enc)
            if t.k != k:
                raise ParseError(f"member type {enc} has radius {t.k}, family has k={k}")
    return DiscFamily(members, k)


def cmd_test(args) -> int:
    g = _load_graph(args)
    prop = args.property
    if prop.startswith("family:"):
        family = _load_family(prop[len("family:"):])
        params, est = _estimate(args, g, family.k)
        verdict = family_test(family, est.X_clamped, g.n, family.k, len(est.catalog))
    elif prop in ("connectivity", "cyclefree"):
        params, est = _estimate(args, g, args.k)
        verdict = connectivity_test(est, params) if prop == "connectivity" else cyclefree_test(est, params)
    else:
        raise UsageError(f"unknown property {prop!r}; use connectivity, cyclefree or family:<file>")
    doc = verdict.report()
    doc["config"] = asdict(_config(args, params, property=prop, variant=args.variant))
    _emit(_dump_json(doc), args.out)
    return 0


def cmd_matching(args) -> int:
    g = _load_graph(args)
    if args.q < 2:
        raise UsageError("--q must be at least 2")
    params, est = _estimate(args, g, args.q)
    me = matching_estimate(est, g.n, args.q, mode=args.mode, seed=args.seed)
    doc = me.report()
    doc["config"] = asdict(_config(args, params, q=args.q, mode=args.mode, variant=args.variant))
    _emit(_dump_json(doc), args.out)
    return 0


def cmd_bench(args) -> int:
    g = _load_graph(args)
    try:
        grid = [int(x) for x in args.s_grid.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--s-grid expects comma-separated integers, got {args.s_grid!r}") from None
    truth = {enc: float(f) for enc, f in exact_distribution(g, args.k).f.items()}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_HEADER)
    d = args.d if args.d is not None else g.d
    for s in grid:
        for trial in range(args.trials):
            params = Params(d=d, k=args.k, epsilon=args.epsilon, delta=args.delta, s=s, seed=args.seed ^ trial)
            t0 = time.perf_counter()
            est = estimate_single_pass(g, params)
            wall = 0 if args.no_timing else round((time.perf_counter() - t0) * 1000)
            keys = set(truth) | set(est.X)
            err = max(abs(float(est.X.get(e, 0.0)) - truth.get(e, 0.0)) for e in keys)
            w.writerow([s, trial, f"{err:.6f}", est.peak_memory_edges, wall])
    _emit(buf.getvalue(), args.out)
    return 0


# ---- parser -----------------------------------------------------------------

def _common(p, k_default=None, need_k=True):
    src = p.add_argument_group("input")
    src.add_argument("--input", help="edge-list file ('n d' header, then 'u v' lines)")
    src.add_argument("--gen", help="generate instead: model:n:d[:graph_seed]")
    if need_k:
        p.add_argument("--k", type=int, default=k_default, required=k_default is None, help="disc radius")
    p.add_argument("--d", type=int, help="degree bound (default: from the graph)")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--s", type=int, help="number of sampled roots (default: n)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", choices=sorted(VARIANT_FLAGS), default="single")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="discstream", description="Disc-type estimation from random-order edge streams.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("gen", help="generate a corpus graph")
    p.add_argument("model", choices=MODELS)
    p.add_argument("n", type=int)
    p.add_argument("d", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, help="edge target for the random models")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("lambda", help="lambda matrix over the sub-disc closure of a graph's disc types")
    _common(p)
    p.add_argument("--policy", choices=("exact", "auto"), default="auto",
                   help="exact: fail on discs above --exact-cap; auto: sample those rows")
    p.add_argument("--exact-cap", type=int, default=9)
    p.add_argument("--mc-samples", type=int, default=20_000)

    p = sub.add_parser("estimate", help="estimate the disc-type distribution")
    _common(p)

    p = sub.add_parser("test", help="run a property tester")
    p.add_argument("property", help="connectivity, cyclefree or family:<file>")
    _common(p, k_default=2)

    p = sub.add_parser("matching", help="estimate the greedy maximal matching size")
    _common(p, need_k=False)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--mode", choices=MATCHING_MODES, default="corrected")

    p = sub.add_parser("bench", help="accuracy and memory versus s, as CSV")
    _common(p)
    p.add_argument("--s-grid", default="500,2000")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 for byte-identical output")
    return parser


COMMANDS = {
    "gen": cmd_gen,
    "lambda": cmd_lambda,
    "estimate": cmd_estimate,
    "test": cmd_test,
    "matching": cmd_matching,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "bench" and args.trials < 0:
            raise UsageError("--trials must be >= 0")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
