"""Command-line interface."""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import bounds
from . import field as gf
from . import graph as gc
from .adversarial import PlantedGraph, defiance_params, plant_pattern, sample_clique_partition
from .errors import KwigError
from .experiment import SUITES as EXPERIMENT_SUITES
from .experiment import CONSTRUCTIONS, parse_pattern, read_config, run_experiment, spec_from_settings
from .kwise import DyadicProb
from .rng import RngStream
from .selftest import FAULTS, run_selftest
from .verify.report import SUITES as REPORT_SUITES
from .verify.report import run_suite

LABELS = """\
Vertex labels: 0-based internally, in seed files, edge-list files and
pattern files; 1-based (1..N, as in the literature) in human-facing output:
query arguments, reports, witnesses and CSV witness columns.
"""


def _prob(text: str) -> DyadicProb:
    try:
        return DyadicProb.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def cmd_gen(args) -> int:
    g = gc.generate(args.n, args.p, args.k, RngStream.from_seed(args.seed, "graph"))
    gc.save_graph(g, args.out)
    print(f"N={args.n} p={args.p} k={args.k} field GF(2^{g.scheme.field.m}) -> {args.out}")
    return 0


def cmd_query(args) -> int:
    g = gc.load_graph(args.graph)
    shift = 0 if args.zero_based else 1
    print(int(g.has_edge(args.u - shift, args.v - shift)))
    return 0


def cmd_export(args) -> int:
    g = gc.load_graph(args.graph).materialize()
    with open(args.out, "w", encoding="utf-8") as fh:
        gc.write_edge_list(g, fh)
    print(f"{g.edge_count} edges -> {args.out}")
    return 0


def cmd_intersect(args) -> int:
    g = gc.intersect(gc.load_graph(args.a), gc.load_graph(args.b))
    gc.save_graph(g, args.out)
    print(f"N={g.N} p={g.params.p} k={g.params.k} -> {args.out}")
    return 0


def cmd_adversarial(args) -> int:
    rng = RngStream.from_seed(args.seed, "adversarial")
    if args.kind == "clique-partition":
        g = sample_clique_partition(args.n, rng)
        gc.save_graph(g, args.out)
        print(f"N={args.n} |V1|={int(g.membership.sum())} -> {args.out}")
        return 0
    if not args.pattern:
        raise SystemExit("error: plant needs --pattern")
    H = parse_pattern(args.pattern)
    if args.p is None or args.k is None:
        params = defiance_params(H, args.n)
        # a power of two at most p*/16, well inside the regime G(N,p) lacks H
        p = args.p or DyadicProb(1, math.ceil(math.log2(16 / params.p_star)))
        k = args.k or params.k_defy
        print(f"rho={params.rho} p*={params.p_star:.6g} k_defy={params.k_defy}")
    else:
        p, k = args.p, args.k
    g: PlantedGraph = plant_pattern(args.n, H, k, p, rng)
    gc.save_graph(g, args.out)
    print(f"N={args.n} S={g.design.S} q={g.design.q} blocks={g.design.block_count} p={p} k={k} -> {args.out}")
    if args.find:
        b = g.find_planted_block()
        if b is None:
            print("no block induces the pattern")
            return 1
        vs = g.design.block_vertices(b)
        print(f"block {b} induces the pattern on vertices {' '.join(str(int(v) + 1) for v in vs)}")
    return 0


def cmd_bound(args) -> int:
    name = args.name
    if name == "tail":
        res = bounds.tail(args.M, args.k, args.mu, args.delta)
    elif name == "degree":
        res = bounds.degree_failure_bound(args.N, args.k, args.p, args.eps)
    elif name == "codegree":
        res = bounds.codegree_failure_bound(args.N, args.k, args.p, args.gamma)
    elif name == "s-star":
        print(bounds.s_star(args.N, args.p))
        print("max S with C(N,S)(1-p)^C(S,2) >= 1")
        return 0
    elif name == "chromatic":
        lower, upper = bounds.chromatic_targets(args.N, args.p, args.c)
        print(f"lower {float(lower):.10g}  [{lower.formula}]")
        print(f"upper {float(upper):.10g}  [{upper.formula}; {upper.note}]")
        return 0
    elif name == "k-sufficient":
        print(bounds.subgraph_k_sufficient(args.v))
        print("2*C(ceil(v^2/4)+v, 2)")
        return 0
    elif name == "threshold":
        res = bounds.subgraph_threshold(parse_pattern(args.pattern), args.N)
    else:
        raise SystemExit(f"error: unknown bound {name!r}")
    print(f"{float(res.value):.12g}")
    print(f"[{res.formula}]" + (f" {res.note}" if res.note else ""))
    if res.vacuous:
        print("note: value >= 1, the bound is vacuous here")
    return 0


def cmd_verify(args) -> int:
    g = gc.load_graph(args.graph)
    rep = run_suite(g.materialize(), args.suite, float(g.params.p), g.params.k,
                    RngStream.from_seed(args.seed, "verify"))
    text = rep.to_json()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    for e in rep.entries:
        print(f"{e.name}: {e.verdict} (measured {e.measured}; target {e.target})")
    return 1 if rep.failed and args.strict else 0


def cmd_experiment(args) -> int:
    settings: dict = {}
    if args.config:
        settings.update(read_config(Path(args.config).read_text(encoding="utf-8")))
    flags = {"n": args.n, "p": args.p, "k": args.k, "construction": args.construction, "trials": args.trials,
             "suite": args.suite, "seed": args.seed, "out": args.out, "pattern": args.pattern,
             "intersect_factor": args.intersect_factor, "threads": args.threads, "time_limit": args.time_limit}
    settings.update({key: value for key, value in flags.items() if value is not None})
    spec = spec_from_settings(settings)
    result = run_experiment(spec)
    sys.stdout.write(result.summary_text())
    if spec.out:
        print(f"rows -> {spec.out}")
    return 0


def cmd_selftest(args) -> int:
    results = run_selftest(args.inject)
    for r in results:
        line = f"{r.status:4s} {r.name}" + (f": {r.detail}" if r.detail else "")
        if r.status == "skip":
            print(f"warning: skipped {r.name}: {r.detail}", file=sys.stderr)
        print(line)
    failed = [r for r in results if r.status == "fail"]
    if failed:
        print(f"selftest failed: {failed[0].name}: {failed[0].detail}", file=sys.stderr)
        return 1
    return 0


def cmd_field_table(args) -> int:
    for line in gf.table_lines():
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kwig", description="k-wise independent random graphs: generate, query, verify.",
        epilog=LABELS, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text, epilog=LABELS,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(func=fn)
        return p

    p = add("gen", cmd_gen, "sample a k-wise independent graph and write its seed file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=_prob, required=True, help="a/2^b, a/b with b a power of 2, or a decimal")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("query", cmd_query, "print 1 if {u, v} is an edge, else 0")
    p.add_argument("--graph", required=True)
    p.add_argument("--u", type=int, required=True, help="vertex label, 1..N")
    p.add_argument("--v", type=int, required=True, help="vertex label, 1..N")
    p.add_argument("--zero-based", action="store_true", help="read --u/--v as 0..N-1")

    p = add("export", cmd_export, "write the edge list (0-based 'u v' lines, sorted by edge index)")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)

    p = add("intersect", cmd_intersect, "AND two seed files on the same N (densities multiply)")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", required=True)

    p = add("adversarial", cmd_adversarial, "constructions that defy G(N,p) behaviour")
    p.add_argument("kind", choices=["clique-partition", "plant"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pattern", help="0-based edge-list file, or clique:v / empty:v / path:v / cycle:v")
    p.add_argument("--p", type=_prob, help="plant density (default: a power of two <= p*/16)")
    p.add_argument("--k", type=int, help="plant independence (default the defiance k)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--find", action="store_true", help="search the blocks for one inducing the pattern")

    p = add("bound", cmd_bound, "evaluate a closed-form bound or target")
    p.add_argument("name", choices=["tail", "degree", "codegree", "s-star", "chromatic", "k-sufficient", "threshold"])
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=str)
    p.add_argument("--mu", type=str)
    p.add_argument("--delta", type=str)
    p.add_argument("--eps", type=str)
    p.add_argument("--gamma", type=str)
    p.add_argument("--v", type=int)
    p.add_argument("--c", type=str, default="1", help="unnamed constant for the chromatic upper target")
    p.add_argument("--pattern")

    p = add("verify", cmd_verify, "run a property suite on a seed file and write a JSON report")
    p.add_argument("--graph", required=True)
    p.add_argument("--suite", choices=sorted(REPORT_SUITES), default="all")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0, help="verification randomness (sampling, restarts)")
    p.add_argument("--strict", action="store_true", help="exit 1 if any verdict is fail")

    p = add("experiment", cmd_experiment, "run a (N, p, k) grid of trials and write a CSV")
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--n", help="comma-separated vertex counts")
    p.add_argument("--p", help="comma-separated densities")
    p.add_argument("--k", help="comma-separated independence parameters")
    p.add_argument("--construction", choices=CONSTRUCTIONS)
    p.add_argument("--trials", type=int)
    p.add_argument("--suite", choices=sorted(EXPERIMENT_SUITES))
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--pattern")
    p.add_argument("--intersect-factor", dest="intersect_factor")
    p.add_argument("--threads", type=int, help="worker threads (capped by KWIG_THREADS)")
    p.add_argument("--time-limit", dest="time_limit", type=float)

    p = add("selftest", cmd_selftest, "run the exhaustive small-instance checks")
    p.add_argument("--inject", choices=FAULTS, help="fault injection for testing the checks themselves")

    add("field-table", cmd_field_table, "print the reduction polynomial table as 'm 0x...' lines")
    return parser


BOUND_PARAMS = {
    "tail": ("M", "k", "mu", "delta"),
    "degree": ("N", "k", "p", "eps"),
    "codegree": ("N", "k", "p", "gamma"),
    "s-star": ("N", "p"),
    "chromatic": ("N", "p"),
    "k-sufficient": ("v",),
    "threshold": ("N", "pattern"),
}


def _number(text: str) -> Fraction:
    """Exact rational from a decimal, a/b, or a/2^b."""
    if "^" in text:
        return DyadicProb.parse(text).value
    return Fraction(text)


def _convert_bound_args(args) -> None:
    if args.command != "bound":
        return
    missing = [f"--{name}" for name in BOUND_PARAMS[args.name] if getattr(args, name) is None]
    if missing:
        raise SystemExit(f"error: bound {args.name} needs {' '.join(missing)}")
    for name in ("p", "mu", "delta", "eps", "gamma", "c"):
        value = getattr(args, name)
        if value is not None:
            setattr(args, name, _number(value))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _convert_bound_args(args)
    try:
        return args.func(args)
    except (KwigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
