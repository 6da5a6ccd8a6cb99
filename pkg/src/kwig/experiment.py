"""Experiment grids: constructions x property suites x trials -> CSV.

Each trial draws everything from ``trial_stream(master, cell, trial)``, so a
row depends only on (spec, cell, trial).  Rows are gathered from the worker
pool and sorted before writing; thread count cannot change a byte of the CSV.
Wall times go to a separate ``.timing.csv`` sidecar for the same reason.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import graph as gc
from .adversarial import PlantedGraph, plant_pattern, sample_clique_partition
from .bounds import s_star
from .errors import BudgetExceededError, ConvergenceError, require
from .graph import ExplicitGraph, ImplicitGraph
from .kwise import DyadicProb
from .rng import RngStream, trial_stream
from .verify.connectivity import components, is_separator, vertex_connectivity
from .verify.hamilton import hamiltonian_certificate, is_hamiltonian_cycle
from .verify.independent import independence_number, is_independent_set
from .verify.matching import has_perfect_matching, is_matching
from .verify.profile import has_induced_copy, is_induced_copy
from .verify.spectral import jumbledness_check, spectral_radius_shifted

SCHEMA_VERSION = 1
CONSTRUCTIONS = ("plain", "intersect", "clique-partition", "plant", "gnp")
COMMON_COLUMNS = ["schema_version", "cell", "trial", "N", "p", "k", "construction", "suite", "status"]


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("KWIG_THREADS", "") or os.cpu_count() or 1))
    except ValueError:
        return 1


def parse_pattern(text: str) -> ExplicitGraph:
    """``clique:v``, ``empty:v``, ``path:v``, ``cycle:v`` or an edge-list file
    (zero-based ``u v`` lines, optional ``# N=<v>`` header)."""
    kind, _, arg = text.partition(":")
    if kind in ("clique", "empty", "path", "cycle") and arg.isdigit():
        v = int(arg)
        if kind == "clique":
            return ExplicitGraph.complete(v)
        if kind == "empty":
            return ExplicitGraph.empty(v)
        edges = [(i, i + 1) for i in range(v - 1)]
        if kind == "cycle":
            edges.append((v - 1, 0))
        return ExplicitGraph.from_edges(v, edges)
    return gc.read_edge_list(Path(text).read_text())


@dataclass(frozen=True)
class ExperimentSpec:
    Ns: tuple[int, ...]
    ps: tuple[str, ...]
    ks: tuple[int, ...]
    construction: str = "plain"
    trials: int = 1
    suite: str = "connectivity"
    seed: int = 0
    out: str | None = None
    pattern: str | None = None  # plant construction only
    intersect_factor: str = "1/2"  # intersect: p = factor * (p / factor)
    threads: int = 1
    time_limit: float = 120.0  # per exact oracle call

    def validate(self) -> None:
        if self.construction not in CONSTRUCTIONS:
            raise ValueError(f"construction must be one of {CONSTRUCTIONS}")
        if self.suite not in SUITES:
            raise ValueError(f"suite must be one of {sorted(SUITES)}")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        if self.construction == "plant" and not self.pattern:
            raise ValueError("plant construction needs a pattern")
        for p in self.ps:
            DyadicProb.parse(p)

    def cells(self) -> list[tuple[int, DyadicProb, int]]:
        return [(N, DyadicProb.parse(p), k) for N, p, k in itertools.product(self.Ns, self.ps, self.ks)]


# ------------------------------------------------------------------ building


@dataclass
class Instance:
    N: int
    p: DyadicProb
    k: int
    implicit: ImplicitGraph | None
    explicit: ExplicitGraph | None = None

    def graph(self) -> ExplicitGraph:
        if self.explicit is None:
            self.explicit = self.implicit.materialize()
        return self.explicit


def build(spec: ExperimentSpec, N: int, p: DyadicProb, k: int, rng: RngStream) -> Instance:
    c = spec.construction
    if c == "plain":
        return Instance(N, p, k, gc.generate(N, p, k, rng.child("graph")))
    if c == "intersect":
        factor = DyadicProb.parse(spec.intersect_factor)
        rest = p.value / factor.value
        if rest >= 1:
            raise ValueError(f"p={p} is not below the intersect factor {factor}")
        other = DyadicProb.parse(str(rest))
        g = gc.intersect(gc.generate(N, factor, k, rng.child("left")), gc.generate(N, other, k, rng.child("right")))
        return Instance(N, g.params.p, g.params.k, g)
    if c == "clique-partition":
        g = sample_clique_partition(N, rng.child("partition"))
        return Instance(N, g.params.p, g.params.k, g)
    if c == "plant":
        H = parse_pattern(spec.pattern)
        return Instance(N, p, k, plant_pattern(N, H, k, p, rng.child("plant")))
    # independent baseline
    return Instance(N, p, k, None, gc.gnp_graph(N, float(p), rng.child("gnp")))


# ------------------------------------------------------------------ suites


class TrialFlag(Exception):
    """A per-trial oracle limit; the row is kept with status set."""


def _connectivity(inst: Instance, rng: RngStream, spec: ExperimentSpec) -> dict[str, Any]:
    count, _ = components(inst.graph())
    return {"connected": int(count == 1), "components": count}


def _kappa(inst: Instance, rng: RngStream, spec: ExperimentSpec) -> dict[str, Any]:
    g = inst.graph()
    try:
        res = vertex_connectivity(g)
    except BudgetExceededError as exc:
        raise TrialFlag(str(exc)) from exc
    if res.separator is not None and res.kappa > 0:
        require(is_separator(g, res.separator), "separator certificate failed its check")
    min_deg = int(g.degrees.min())
    pN = float(inst.p) * inst.N
    return {"kappa": res.kappa, "min_degree": min_deg, "kappa_over_pN": res.kappa / pN,
            "kappa_le_min_degree": int(res.kappa <= min_deg), "flows": res.flows}


def _hamilton(inst: Instance, rng: RngStream, spec: ExperimentSpec) -> dict[str, Any]:
    g = inst.graph()
    res = hamiltonian_certificate(g, rng.child("hamilton"))
    found = res.found and is_hamiltonian_cycle(g, res.cycle)
    ok, m = has_perfect_matching(g)
    require(is_matching(g, m), "matching certificate failed its check")
    return {"hamiltonian": int(found), "perfect_matching": int(ok), "matching_size": len(m)}


def _spectral(inst: Instance, rng: RngStream, spec: ExperimentSpec) -> dict[str, Any]:
    g = inst.graph()
    p = float(inst.p)
    try:
        lam = spectral_radius_shifted(g, p, rng=rng.child("lanczos"))
    except ConvergenceError as exc:
        raise TrialFlag(f"{exc} (best {exc.estimate})") from exc
    jr = jumbledness_check(g, p, lam, rng=rng.child("jumbled"), lam=lam)
    return {"lambda": lam, "lambda_over_sqrt_pN": lam / math.sqrt(p * inst.N),
            "sampled_deviation": jr.worst_deviation, "deviation_le_lambda": int(jr.worst_deviation <= lam + 1e-6)}


def _independence(inst: Instance, rng: RngStream, spec: ExperimentSpec) -> dict[str, Any]:
    g = inst.graph()
    res = independence_number(g, spec.time_limit)
    require(is_independent_set(g, res.vertices), "independent-set certificate failed its check")
    s = s_star(inst.N, float(inst.p))
    row = {"alpha": res.size, "alpha_upper": res.upper, "exact": int(res.exact), "s_star": s,
           "deviation": res.size - s, "within_one": int(res.exact and abs(res.size - s) <= 1)}
    if not res.exact:
        raise TrialFlag("independence search timed out", row)
    return row


def _planted(inst: Instance, rng: RngStream, spec: ExperimentSpec) -> dict[str, Any]:
    """Block-guided search for the planted pattern, certified through the
    graph's own edge oracle."""
    g = inst.implicit
    if not isinstance(g, PlantedGraph):
        raise ValueError("planted suite needs the plant construction")
    block = g.find_planted_block()
    if block is None:
        return {"found": 0, "block": -1, "blocks": g.design.block_count, "witness": ""}
    vs = g.design.block_vertices(block)
    require(g.induces(vs), "planted block failed the edge-oracle check")
    witness = " ".join(str(int(v) + 1) for v in vs)
    return {"found": 1, "block": block, "blocks": g.design.block_count, "witness": witness}


def _triangles(inst: Instance, rng: RngStream, spec: ExperimentSpec) -> dict[str, Any]:
    """Induced triangle search: block-guided for planted graphs, exhaustive
    otherwise."""
    if isinstance(inst.implicit, PlantedGraph) and inst.implicit.H == ExplicitGraph.complete(3):
        row = _planted(inst, rng, spec)
        return {"triangle": row["found"], "edges": -1, "witness": row["witness"]}
    g = inst.graph()
    K3 = ExplicitGraph.complete(3)
    found, witness = has_induced_copy(g, K3)
    if found:
        require(is_induced_copy(g, K3, witness), "triangle witness failed its check")
    return {"triangle": int(found), "edges": g.edge_count,
            "witness": " ".join(str(v + 1) for v in witness) if found else ""}


@dataclass(frozen=True)
class Suite:
    run: Callable[[Instance, RngStream, ExperimentSpec], dict[str, Any]]
    columns: tuple[str, ...]
    success: str  # 0/1 column summarized as a success fraction


SUITES: dict[str, Suite] = {
    "connectivity": Suite(_connectivity, ("connected", "components"), "connected"),
    "kappa": Suite(_kappa, ("kappa", "min_degree", "kappa_over_pN", "kappa_le_min_degree", "flows"),
                   "kappa_le_min_degree"),
    "hamilton": Suite(_hamilton, ("hamiltonian", "perfect_matching", "matching_size"), "hamiltonian"),
    "spectral": Suite(_spectral, ("lambda", "lambda_over_sqrt_pN", "sampled_deviation", "deviation_le_lambda"),
                      "deviation_le_lambda"),
    "independence": Suite(_independence, ("alpha", "alpha_upper", "exact", "s_star", "deviation", "within_one"),
                          "within_one"),
    "planted": Suite(_planted, ("found", "block", "blocks", "witness"), "found"),
    "triangles": Suite(_triangles, ("triangle", "edges", "witness"), "triangle"),
}


# ------------------------------------------------------------------ running


def columns(suite: str) -> list[str]:
    return COMMON_COLUMNS + list(SUITES[suite].columns) + ["note"]


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


@dataclass
class TrialResult:
    cell: int
    trial: int
    row: dict[str, Any]
    seconds: float


def run_trial(spec: ExperimentSpec, cell: int, trial: int, N: int, p: DyadicProb, k: int) -> TrialResult:
    start = time.perf_counter()
    rng = trial_stream(spec.seed, cell, trial)
    suite = SUITES[spec.suite]
    row: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "cell": cell, "trial": trial, "N": N,
                           "p": str(p), "k": k, "construction": spec.construction, "suite": spec.suite,
                           "status": "ok", "note": ""}
    try:
        inst = build(spec, N, p, k, rng)
        row["p"], row["k"] = str(inst.p), inst.k
        row.update(suite.run(inst, rng, spec))
    except TrialFlag as flag:
        row["status"] = "flagged"
        row["note"] = flag.args[0]
        if len(flag.args) > 1:
            row.update(flag.args[1])
    except BudgetExceededError as exc:
        row["status"] = "flagged"
        row["note"] = str(exc)
    return TrialResult(cell, trial, row, time.perf_counter() - start)


@dataclass
class CellSummary:
    cell: int
    N: int
    p: str
    k: int
    trials: int
    successes: int
    flagged: int

    @property
    def fraction(self) -> float:
        return self.successes / self.trials if self.trials else float("nan")

    @property
    def half_width(self) -> float:
        """95% normal-approximation half-width of the success fraction."""
        if not self.trials:
            return float("nan")
        f = self.fraction
        return 1.96 * math.sqrt(f * (1 - f) / self.trials)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list[dict[str, Any]]
    seconds: list[float]
    summaries: list[CellSummary] = field(default_factory=list)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = columns(self.spec.suite)
        w.writerow(cols)
        for row in self.rows:
            w.writerow([_format(row.get(c, "")) for c in cols])
        return buf.getvalue()

    def summary_text(self) -> str:
        suite = SUITES[self.spec.suite]
        lines = [f"suite={self.spec.suite} construction={self.spec.construction} success column={suite.success}"]
        for s in self.summaries:
            lines.append(f"cell {s.cell} N={s.N} p={s.p} k={s.k}: {s.successes}/{s.trials} "
                         f"= {s.fraction:.4f} +- {s.half_width:.4f} (flagged {s.flagged})")
        return "\n".join(lines) + "\n"

    def timing_text(self) -> str:
        lines = ["cell,trial,seconds"]
        lines += [f"{r['cell']},{r['trial']},{t:.3f}" for r, t in zip(self.rows, self.seconds)]
        return "\n".join(lines) + "\n"


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    spec.validate()
    cells = spec.cells()
    jobs = [(c, t, *cell) for c, cell in enumerate(cells) for t in range(spec.trials)]
    workers = max(1, min(spec.threads, thread_cap(), len(jobs) or 1))
    if workers == 1:
        results = [run_trial(spec, *job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: run_trial(spec, *job), jobs))
    results.sort(key=lambda r: (r.cell, r.trial))
    out = ExperimentResult(spec, [r.row for r in results], [r.seconds for r in results])
    success = SUITES[spec.suite].success
    for c, (N, p, k) in enumerate(cells):
        rows = [r for r in out.rows if r["cell"] == c]
        out.summaries.append(CellSummary(
            c, N, str(p), k, len(rows),
            sum(1 for r in rows if int(r.get(success, 0) or 0) == 1),
            sum(1 for r in rows if r["status"] != "ok")))
    if spec.out:
        path = Path(spec.out)
        path.write_text(out.csv_text(), encoding="utf-8")
        path.with_suffix(".summary.txt").write_text(out.summary_text(), encoding="utf-8")
        path.with_suffix(".timing.csv").write_text(out.timing_text(), encoding="utf-8")
    return out


# ------------------------------------------------------------------ config


CONFIG_KEYS = {"n", "p", "k", "construction", "trials", "suite", "seed", "out", "pattern",
               "intersect_factor", "threads", "time_limit"}


def read_config(text: str) -> dict[str, str]:
    """``key=value`` lines; blank lines and ``#`` comments ignored."""
    conf: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if not sep or key not in CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: expected one of {sorted(CONFIG_KEYS)} as key=value")
        conf[key] = value.strip()
    return conf


def _split(value: str) -> list[str]:
    return [v for v in value.replace(",", " ").split() if v]


def spec_from_settings(settings: dict[str, Any]) -> ExperimentSpec:
    """Build a spec from merged config/flag settings (strings or typed)."""
    def listed(key, cast):
        v = settings.get(key)
        if v is None:
            return ()
        if isinstance(v, str):
            return tuple(cast(x) for x in _split(v))
        return tuple(cast(x) for x in v)

    spec = ExperimentSpec(Ns=listed("n", int), ps=listed("p", str), ks=listed("k", int))
    typed = {"construction": str, "trials": int, "suite": str, "seed": int, "out": str,
             "pattern": str, "intersect_factor": str, "threads": int, "time_limit": float}
    changes = {key: cast(settings[key]) for key, cast in typed.items() if settings.get(key) is not None}
    spec = replace(spec, **changes)
    if spec.construction == "clique-partition":
        spec = replace(spec, ps=spec.ps or ("1/2",), ks=spec.ks or (2,))
    if not (spec.Ns and spec.ps and spec.ks):
        raise ValueError("experiment needs N, p and k values")
    spec.validate()
    return spec
