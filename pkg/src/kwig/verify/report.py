"""Property reports: named suites of oracles run on one graph.

Verdicts are "pass"/"fail" where a concrete target exists and "report-only"
where the target is asymptotic with an unnamed constant.  Every certificate
put into a report has been re-checked by its independent checker first.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

from ..bounds import chromatic_targets, s_star
from ..errors import BudgetExceededError, ConvergenceError, require
from ..graph import ExplicitGraph
from ..rng import RngStream
from .connectivity import components, is_separator, vertex_connectivity
from .hamilton import hamiltonian_certificate, is_hamiltonian_cycle
from .independent import independence_number, is_independent_set
from .matching import has_perfect_matching, is_matching
from .profile import check_pair_violation, chromatic_bounds, degree_codegree_profile, hks_conditions_probe, outer_boundary
from .spectral import jumbledness_check, spectral_radius_shifted

PASS, FAIL, REPORT_ONLY = "pass", "fail", "report-only"
REPORT_VERSION = 1


@dataclass
class PropertyEntry:
    name: str
    measured: Any
    target: str
    verdict: str
    certificate: Any = None
    note: str = ""


@dataclass
class PropertyReport:
    N: int
    p: float
    k: int | None
    edges: int
    suite: str
    entries: list[PropertyEntry] = field(default_factory=list)

    def add(self, *args, **kwargs) -> PropertyEntry:
        entry = PropertyEntry(*args, **kwargs)
        self.entries.append(entry)
        return entry

    def entry(self, name: str) -> PropertyEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def failed(self) -> list[str]:
        return [e.name for e in self.entries if e.verdict == FAIL]

    def to_json(self) -> str:
        doc = {"report_version": REPORT_VERSION, **asdict(self)}
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _one_based(vertices) -> list[int]:
    return [int(v) + 1 for v in vertices]


def _connectivity(g: ExplicitGraph, rep: PropertyReport, rng: RngStream) -> None:
    count, _ = components(g)
    rep.add("connected", count == 1, "connected", PASS if count == 1 else FAIL, note=f"{count} components")
    try:
        res = vertex_connectivity(g)
    except BudgetExceededError as exc:
        rep.add("kappa", None, "(1 +- o(1)) pN", REPORT_ONLY, note=str(exc))
    else:
        cert = None
        if res.separator is not None and res.kappa > 0:
            require(is_separator(g, res.separator), "separator certificate failed its check")
            cert = _one_based(res.separator)
        min_deg = int(g.degrees.min()) if g.N else 0
        verdict = FAIL if res.kappa > min_deg else REPORT_ONLY
        rep.add("kappa", res.kappa, f"(1 +- o(1)) pN, pN={rep.p * g.N:.6g}; kappa <= min degree {min_deg}",
                verdict, cert, note=f"kappa/pN={res.kappa / (rep.p * g.N):.6g}" if rep.p > 0 else "")
    ok, m = has_perfect_matching(g)
    require(is_matching(g, m), "matching certificate failed its check")
    rep.add("perfect_matching", ok, "perfect matching (even N)", PASS if ok else FAIL,
            [_one_based(e) for e in m] if ok else None, note=f"maximum matching size {len(m)}")


def _hamilton(g: ExplicitGraph, rep: PropertyReport, rng: RngStream) -> None:
    res = hamiltonian_certificate(g, rng.child("hamilton"))
    if res.found:
        require(is_hamiltonian_cycle(g, res.cycle), "Hamiltonian cycle certificate failed its check")
        rep.add("hamiltonian", True, "Hamiltonian cycle", PASS, _one_based(res.cycle), note=res.method)
    else:
        rep.add("hamiltonian", False if res.exact else None, "Hamiltonian cycle",
                FAIL if res.exact else REPORT_ONLY, note=f"{res.method}: {'proved absent' if res.exact else 'not found'}")
    probe = hks_conditions_probe(g, rng=rng.child("hks"))
    if probe.small_violation is not None:
        V = probe.small_violation
        require(len(outer_boundary(g, V)) < 12 * len(V), "small-set expansion certificate failed its check")
        rep.add("expansion_small_sets", False, f"|outer boundary(V)| >= 12|V| for |V| <= {probe.small_limit}",
                FAIL, _one_based(V))
    else:
        rep.add("expansion_small_sets", None, f"|outer boundary(V)| >= 12|V| for |V| <= {probe.small_limit}",
                REPORT_ONLY, note=f"no violation among {probe.sets_tested} sampled sets")
    if probe.pair_violation is not None:
        U, W = probe.pair_violation
        require(check_pair_violation(g, U, W), "large-pair violation certificate failed its check")
        rep.add("edge_between_large_sets", False, f"e(U,W) >= 1 for disjoint |U|=|W|={probe.pair_size}",
                FAIL, [_one_based(U), _one_based(W)])
    else:
        rep.add("edge_between_large_sets", None, f"e(U,W) >= 1 for disjoint |U|=|W|={probe.pair_size}",
                REPORT_ONLY, note="no violation found by sampling")


def _spectral(g: ExplicitGraph, rep: PropertyReport, rng: RngStream) -> None:
    scale = math.sqrt(rep.p * g.N) if rep.p > 0 else 1.0
    try:
        lam = spectral_radius_shifted(g, rep.p, rng=rng.child("lanczos"))
    except (BudgetExceededError, ConvergenceError) as exc:
        rep.add("lambda", getattr(exc, "estimate", None), "O(sqrt(pN))", REPORT_ONLY, note=str(exc))
        return
    rep.add("lambda", lam, f"O(sqrt(pN)), sqrt(pN)={scale:.6g}", REPORT_ONLY,
            note=f"calibration constant lambda/sqrt(pN)={lam / scale:.6g}")
    jr = jumbledness_check(g, rep.p, lam, rng=rng.child("jumbled"), lam=lam)
    ok = jr.worst_deviation <= lam + 1e-6
    rep.add("sampled_deviation", jr.worst_deviation, "<= lambda (spectral certificate)", PASS if ok else FAIL,
            note=f"{jr.pairs_checked} sampled set pairs")


def _independence(g: ExplicitGraph, rep: PropertyReport, rng: RngStream, time_limit: float = 60.0) -> None:
    res = independence_number(g, time_limit)
    require(is_independent_set(g, res.vertices), "independent set certificate failed its check")
    if 0 < rep.p < 1 and g.N >= 2:
        s = s_star(g.N, rep.p)
        lo, hi = s - 1, s + 1
        if res.exact:
            verdict = PASS if lo <= res.size <= hi else FAIL
        else:
            verdict = FAIL if res.size > hi else REPORT_ONLY
        rep.add("independence_number", res.size if res.exact else [res.size, res.upper],
                f"s_star +- 1 = [{lo}, {hi}]", verdict, _one_based(res.vertices), note=f"deviation {res.size - s:+d}")
    else:
        rep.add("independence_number", res.size, "", REPORT_ONLY, _one_based(res.vertices))
    cb = chromatic_bounds(g, time_limit)
    target = ""
    if rep.p * g.N > 1 and rep.p < 1:
        lower, upper = chromatic_targets(g.N, rep.p)
        target = f"lower {float(lower):.6g}, upper c*{float(upper):.6g}"
    rep.add("chromatic_interval", [cb.lower, cb.upper], target, REPORT_ONLY,
            note="" if cb.exact_inputs else "lower end from timed-out searches")


def _degree(g: ExplicitGraph, rep: PropertyReport, rng: RngStream) -> None:
    prof = degree_codegree_profile(g, rep.p)
    rep.add("degree_deviation", prof.eps_obs, "degrees p(N-1)(1 +- eps)", REPORT_ONLY,
            note=f"min {prof.min_degree}, max {prof.max_degree}")
    rep.add("codegree_deviation", prof.gamma_obs, "co-degrees p^2(N-2)(1 +- gamma)", REPORT_ONLY)
    rep.add("neighborhood_edges", prof.max_neighborhood_edges, "at most d^(2-beta)", REPORT_ONLY)


SUITES: dict[str, list[Callable]] = {
    "connectivity": [_connectivity],
    "hamilton": [_hamilton],
    "spectral": [_spectral],
    "independence": [_independence],
    "degree": [_degree],
}
SUITES["all"] = [f for name in ("degree", "connectivity", "hamilton", "spectral", "independence") for f in SUITES[name]]


def run_suite(g: ExplicitGraph, suite: str, p: float, k: int | None = None,
              rng: RngStream | None = None) -> PropertyReport:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    rng = rng or RngStream.from_seed(0, "verify")
    rep = PropertyReport(g.N, float(p), k, g.edge_count, suite)
    for check in SUITES[suite]:
        check(g, rep, rng)
    return rep
