"""Closed-form bounds and targets, evaluated in 50-digit arithmetic.

Asymptotic statements carry unnamed constants and (1 +- o(1)) factors; where
a number is needed they are fixed explicitly and the choice is recorded in the
result's ``note`` so reports never pass off a chosen constant as a given one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .adversarial import min_density_ratio
from .errors import PreconditionError
from .graph import ExplicitGraph
from .kwise import tail_bound, to_mpf

DPS = 50

CLOSED_FORM = "closed-form"
FIRST_MOMENT_SCAN = "first-moment-scan"


@dataclass(frozen=True)
class BoundResult:
    value: mpmath.mpf
    tag: str = CLOSED_FORM
    formula: str = ""
    note: str = ""

    def __float__(self) -> float:
        return float(self.value)

    @property
    def vacuous(self) -> bool:
        """A probability bound of at least 1 says nothing."""
        return self.value >= 1


def degree_failure_bound(N: int, k: int, p, eps) -> BoundResult:
    """Union bound N [3k / (eps^2 p N)]^floor(k/2) on some vertex having degree
    outside p(N-1)(1 +- eps)."""
    with mpmath.workdps(DPS):
        p, eps = to_mpf(p), to_mpf(eps)
        if not 0 < eps <= 1:
            raise PreconditionError("need 0 < eps <= 1")
        base = 3 * k / (eps**2 * p * N)
        value = N * base ** (k // 2)
    return BoundResult(+value, CLOSED_FORM, f"{N}*[3*{k}/(eps^2*p*{N})]^{k // 2}")


def codegree_failure_bound(N: int, k: int, p, gamma) -> BoundResult:
    """C(N,2) times the tail bound for one pair's co-degree, a sum of N-2
    floor(k/2)-wise independent Bernoulli(p^2) variables."""
    kk = k // 2
    kk -= kk % 2
    if kk < 2:
        raise PreconditionError(f"k={k} leaves no even independence order >= 2 for co-degrees")
    with mpmath.workdps(DPS):
        mu = to_mpf(p) ** 2
        single = tail_bound(N - 2, kk, mu, gamma)
        value = mpmath.binomial(N, 2) * single
    return BoundResult(+value, CLOSED_FORM, f"C({N},2)*tail(M={N - 2}, k={kk}, mu=p^2, delta={gamma})")


def tail(M: int, k: int, mu, delta) -> BoundResult:
    return BoundResult(tail_bound(M, k, mu, delta), CLOSED_FORM, f"[2*{k}(1-mu)/(delta^2*mu*{M})]^{k // 2}")


def log_expected_independent_sets(N: int, S: int, p) -> float:
    """ln( C(N,S) (1-p)^C(S,2) )."""
    p = float(p)
    return (math.lgamma(N + 1) - math.lgamma(S + 1) - math.lgamma(N - S + 1)
            + S * (S - 1) / 2 * math.log1p(-p))


def s_star(N: int, p) -> int:
    """Largest S with C(N,S)(1-p)^C(S,2) >= 1 (first-moment crossing)."""
    p = float(p)
    if not 0 < p < 1:
        raise ValueError("need 0 < p < 1")
    best = 1
    for S in range(1, N + 1):
        if log_expected_independent_sets(N, S, p) >= 0:
            best = S
        elif S > best + 2:
            # log-expectation is concave in S; once it has dropped below zero
            # past the crossing it stays there
            break
    return best


def chromatic_targets(N: int, p, c=1) -> tuple[BoundResult, BoundResult]:
    """Lower N log(1/(1-p)) / (2 log(pN)); upper c N log(1/(1-p)) / log(pN)."""
    with mpmath.workdps(DPS):
        p = to_mpf(p)
        if p * N <= 1:
            raise PreconditionError("need pN > 1")
        ratio = N * mpmath.log(1 / (1 - p)) / mpmath.log(p * N)
        lower = BoundResult(+(ratio / 2), CLOSED_FORM, "N log(1/(1-p)) / (2 log(pN))")
        upper = BoundResult(+(to_mpf(c) * ratio), CLOSED_FORM, "c N log(1/(1-p)) / log(pN)",
                            note=f"c={c} chosen by caller; no value is given for it")
    return lower, upper


def subgraph_threshold(H: ExplicitGraph, N: int) -> BoundResult:
    rho = min_density_ratio(H)
    with mpmath.workdps(DPS):
        value = mpmath.mpf(N) ** (-to_mpf(rho))
    return BoundResult(+value, CLOSED_FORM, f"N^-rho, rho={rho}")


def subgraph_k_sufficient(v: int) -> int:
    """2 C(v'', 2) with v'' = ceil(v^2/4) + v standing in for (1+o(1)) v^2/4."""
    if v < 2:
        raise ValueError("need v >= 2")
    vv = -(-v * v // 4) + v
    return 2 * (vv * (vv - 1) // 2)


def jumbledness_scale(N: int, p) -> float:
    """sqrt(pN), the optimal order of the jumbledness parameter."""
    return math.sqrt(float(p) * N)


def planting_failure_bound(delta: Fraction | float, blocks: int) -> BoundResult:
    """(1 - Delta)^M: no block of M independent ones realizes the pattern."""
    with mpmath.workdps(DPS):
        value = (1 - to_mpf(delta)) ** blocks
    return BoundResult(+value, CLOSED_FORM, f"(1-Delta)^{blocks}")


NAMES = {
    "tail": tail,
    "degree": degree_failure_bound,
    "codegree": codegree_failure_bound,
    "s-star": s_star,
    "chromatic": chromatic_targets,
    "k-sufficient": subgraph_k_sufficient,
}
