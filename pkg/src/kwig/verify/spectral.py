"""Spectral radius of the shifted matrix A - pJ and jumbledness sampling.

The shifted matrix has 1-p on edges and -p everywhere else, diagonal
included.  For characteristic vectors x_U, x_W we have
x_U' (A - pJ) x_W = e(U, W) - p|U||W|, so by Cauchy-Schwarz every pair
satisfies |e(U, W) - p|U||W|| <= lambda sqrt(|U||W|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from ..errors import BudgetExceededError, ConvergenceError
from ..graph import ExplicitGraph
from ..rng import RngStream
from .connectivity import components

SPECTRAL_BUDGET = 8192
DENSE_LIMIT = 64


class ShiftedMatrixView(LinearOperator):
    """A - pJ applied in O(edges + N) per product."""

    def __init__(self, g: ExplicitGraph, p: float) -> None:
        super().__init__(dtype=np.float64, shape=(g.N, g.N))
        self.adjacency = g.csr.astype(np.float64)
        self.p = float(p)

    def _matvec(self, x):
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        return self.adjacency @ x - self.p * x.sum()

    def _rmatvec(self, x):
        return self._matvec(x)

    def todense(self) -> np.ndarray:
        return self.adjacency.toarray() - self.p


def spectral_radius_shifted(g: ExplicitGraph, p: float, tol: float = 1e-6,
                            rng: RngStream | None = None, restarts: int = 3) -> float:
    """Largest |eigenvalue| of A - pJ, by Lanczos on the implicit operator
    (dense solver below DENSE_LIMIT vertices)."""
    N = g.N
    if N > SPECTRAL_BUDGET:
        raise BudgetExceededError(f"N={N} exceeds spectral budget {SPECTRAL_BUDGET}")
    if tol < 1e-6:
        raise ValueError("tolerance below 1e-6 is not supported")
    op = ShiftedMatrixView(g, p)
    if N <= DENSE_LIMIT:
        return float(np.max(np.abs(np.linalg.eigvalsh(op.todense()))))
    gen = (rng or RngStream.from_seed(0, "spectral")).generator()
    best = 0.0
    for _ in range(restarts):
        v0 = gen.standard_normal(N)
        try:
            vals = eigsh(op, k=1, which="LM", v0=v0, tol=tol, maxiter=20 * N, return_eigenvectors=False)
        except ArpackNoConvergence as exc:
            partial = np.abs(exc.eigenvalues)
            best = max(best, float(partial.max()) if partial.size else 0.0)
            continue
        return float(np.abs(vals).max())
    raise ConvergenceError("Lanczos did not converge", best)


def power_radius(g: ExplicitGraph, p: float, tol: float = 1e-6, max_iter: int = 20000,
                 rng: RngStream | None = None) -> float:
    """Independent route to lambda: plain power iteration on B^2.

    B^2 is positive semidefinite, so a +lambda/-lambda pair cannot make the
    iterate oscillate; sqrt of the converged Rayleigh quotient is lambda.
    """
    op = ShiftedMatrixView(g, p)
    gen = (rng or RngStream.from_seed(0, "power")).generator()
    x = gen.standard_normal(g.N)
    x /= np.linalg.norm(x)
    prev = 0.0
    for _ in range(max_iter):
        y = op.matvec(op.matvec(x))
        est = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0
        x = y / norm
        if abs(est - prev) <= tol * tol * max(est, 1e-300):
            return math.sqrt(max(est, 0.0))
        prev = est
    raise ConvergenceError("power iteration hit its iteration cap", math.sqrt(max(prev, 0.0)))


def edge_count_between(g: ExplicitGraph, U, W) -> int:
    """e(U, W) with edges inside U and W counted twice."""
    xu = np.zeros(g.N)
    xw = np.zeros(g.N)
    xu[np.asarray(U, dtype=np.int64)] = 1
    xw[np.asarray(W, dtype=np.int64)] = 1
    return int(round(xu @ (g.csr @ xw)))


@dataclass
class JumbledReport:
    p: float
    alpha: float
    lam: float
    worst_deviation: float  # max |e(U,W) - p|U||W|| / sqrt(|U||W|) over samples
    worst_pair: tuple[tuple[int, ...], tuple[int, ...]] | None
    pairs_checked: int
    sampled_ok: bool  # every sampled pair within alpha
    spectral_ok: bool  # lambda <= alpha, which covers all pairs
    notes: list[str] = field(default_factory=list)


def _candidate_sets(g: ExplicitGraph, gen: np.random.Generator, budget: int) -> list[np.ndarray]:
    N = g.N
    sets: list[np.ndarray] = []
    count, labels = components(g)
    for c in range(min(count, 8)):
        sets.append(np.nonzero(labels == c)[0])
    for v in gen.choice(N, size=min(N, max(1, budget // 4)), replace=False):
        nb = g.neighbors(int(v))
        if nb.size:
            sets.append(nb)
        sets.append(np.setdiff1d(np.arange(N), np.append(nb, v)))
    while len(sets) < budget:
        size = int(gen.integers(1, N + 1))
        sets.append(np.sort(gen.choice(N, size=size, replace=False)))
    return sets


def jumbledness_check(g: ExplicitGraph, p: float, alpha: float, sample_budget: int = 200,
                      rng: RngStream | None = None, lam: float | None = None) -> JumbledReport:
    """Sample structured and random set pairs and measure the worst normalized
    deviation; report the spectral certificate alongside."""
    gen = (rng or RngStream.from_seed(0, "jumbled")).generator()
    if lam is None:
        lam = spectral_radius_shifted(g, p)
    sets = _candidate_sets(g, gen, max(2, sample_budget // 4))
    worst, worst_pair, checked = 0.0, None, 0
    for _ in range(sample_budget):
        U = sets[int(gen.integers(len(sets)))]
        W = sets[int(gen.integers(len(sets)))]
        if not U.size or not W.size:
            continue
        dev = abs(edge_count_between(g, U, W) - p * U.size * W.size) / math.sqrt(U.size * W.size)
        checked += 1
        if dev > worst:
            worst, worst_pair = dev, (tuple(U.tolist()), tuple(W.tolist()))
    return JumbledReport(p, alpha, lam, worst, worst_pair, checked, worst <= alpha, lam <= alpha)
