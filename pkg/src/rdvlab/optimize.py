"""Anderson-Weber theta search and symmetric-strategy descent at tiny n."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from . import exact
from .model import GameError, Strategy, Tactic, all_tactics, canonical_pattern, from_weights
from .montecarlo import estimate_expected_waiting
from .zoo import AW_TABLE_MAX_N, AWConfig, BlockMode, anderson_weber

GOLDEN = (math.sqrt(5) - 1) / 2
SYMMETRIC_MAX_N = 4


# -- theta ------------------------------------------------------------------------

def aw_exact_coefficients(n: int) -> tuple[Fraction, Fraction, Fraction]:
    """E W(AW(t), AW(t)) = c0 + c1 t + c2 t^2 exactly (table weights are affine in t)."""
    if n > AW_TABLE_MAX_N:
        raise exact.CapExceeded(f"exact AW tables need n <= {AW_TABLE_MAX_N}")
    vals = []
    for t in (Fraction(0), Fraction(1, 2), Fraction(1)):
        s = anderson_weber(AWConfig(n, t))
        vals.append(exact.bilinear_phi(s, s))
    f0, fh, f1 = vals
    c2 = 2 * f1 - 4 * fh + 2 * f0
    c1 = f1 - f0 - c2
    return f0, c1, c2


def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-6,
                   max_iter: int = 60) -> float:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return c if fc <= fd else d


def grid_then_golden(f: Callable[[float], float], resolution: int, **kw) -> float:
    """Best point of an even grid on [0, 1], refined by golden section when it is interior."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    grid = [i / (resolution - 1) for i in range(resolution)]
    vals = [f(t) for t in grid]
    i = min(range(resolution), key=lambda k: (vals[k], k))
    best, fbest = grid[i], vals[i]
    if 0 < i < resolution - 1:
        t = golden_section(f, grid[i - 1], grid[i + 1], **kw)
        if f(t) < fbest:
            best = t
    return best


def optimize_theta(n: int, mode: str = "exact", resolution: int = 21, *, trials: int = 20_000,
                   horizon: Optional[int] = None, seed: int = 0,
                   workers: int = 1) -> tuple[Union[Fraction, float], Union[Fraction, float]]:
    """Minimise the symmetric AW waiting time over theta.

    ``exact`` uses the truncated n-round game (n <= 5) and returns theta and the
    value as exact rationals (theta snapped to a small denominator when that is
    no worse);
    ``mc`` simulates the multi-block game with common random numbers for all theta.
    """
    if mode == "exact":
        c0, c1, c2 = aw_exact_coefficients(n)
        f = lambda t: float(c0) + float(c1) * t + float(c2) * t * t
        theta = grid_then_golden(f, resolution, tol=1e-9)
        exact_f = lambda q: c0 + c1 * q + c2 * q * q
        q = Fraction(theta)
        for den in (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 6):
            snapped = q.limit_denominator(den)
            if exact_f(snapped) <= exact_f(q):
                q = snapped
                break
        return q, exact_f(q)
    if mode == "mc":
        horizon = horizon if horizon is not None else 20 * n
        cache: dict[float, float] = {}

        def f(t):
            if t not in cache:
                s = anderson_weber(AWConfig(n, float(t), BlockMode.MULTIBLOCK, horizon))
                cache[t] = estimate_expected_waiting(s, s, horizon, trials, seed, workers).mean
            return cache[t]

        theta = grid_then_golden(f, resolution, tol=1e-3, max_iter=20)
        return theta, f(theta)
    raise ValueError(f"mode must be 'exact' or 'mc', got {mode!r}")


# -- symmetric strategy -----------------------------------------------------------

@dataclass(frozen=True)
class SimplexPoint:
    tactics: tuple[Tactic, ...]
    weights: tuple[Union[Fraction, float], ...]

    def __post_init__(self):
        if len(self.tactics) != len(self.weights):
            raise ValueError("tactics and weights differ in length")
        if any(w < 0 for w in self.weights):
            raise ValueError("negative weight")
        total = sum(self.weights)
        if isinstance(total, Fraction) and all(isinstance(w, Fraction) for w in self.weights):
            if total != 1:
                raise ValueError(f"weights sum to {total}")
        elif abs(float(total) - 1) > 1e-12:
            raise ValueError(f"weights sum to {float(total)}")

    def items(self):
        return zip(self.tactics, self.weights)

    def to_strategy(self, name: str = "optimized") -> Strategy:
        n = self.tactics[0].n
        return from_weights(n, ((t, Fraction(w)) for t, w in self.items()), name=name)


@dataclass
class DescentTrace:
    start_value: float
    values: list[float]
    iterations: int
    gap: float


def rationalize(x: np.ndarray, max_den: int = 10 ** 9) -> list[Fraction]:
    """Exact simplex weights close to ``x``: round, drop dust, renormalise exactly."""
    q = [Fraction(float(v)).limit_denominator(max_den) if v > 1e-12 else Fraction(0) for v in x]
    total = sum(q)
    return [v / total for v in q]


def _line_min(f0: float, slope: float, curv: float, gmax: float) -> float:
    """argmin over [0, gmax] of f0 + g slope + g^2 curv."""
    if curv > 0:
        return min(max(-slope / (2 * curv), 0.0), gmax)
    return gmax if slope + curv * gmax < 0 else 0.0


def frank_wolfe(W: np.ndarray, x0: np.ndarray, max_iter: int = 20_000, tol: float = 1e-10
                ) -> tuple[np.ndarray, DescentTrace]:
    """Minimise x^T W x over the simplex (W symmetric, not necessarily PSD).

    Each iteration compares the 2/(k+2) step, an exact line search along the
    Frank-Wolfe direction, and a pairwise step moving mass from the worst support
    vertex to the best vertex; the lowest objective is accepted only if it
    decreases. Stops when the Frank-Wolfe gap drops below ``tol``.
    """
    x = x0.astype(float).copy()
    Wx = W @ x
    f = float(x @ Wx)
    trace = DescentTrace(f, [f], 0, math.inf)
    for k in range(max_iter):
        g = 2 * Wx
        s = int(np.argmin(g))
        gap = float(g @ x - g[s])
        trace.gap = gap
        if gap < tol:
            break
        candidates = []
        d = -x.copy()
        d[s] += 1
        Wd = W[:, s] - Wx
        slope, curv = float(g @ d), float(d @ Wd)
        for gamma in (2 / (k + 2), _line_min(f, slope, curv, 1.0)):
            candidates.append((f + gamma * slope + gamma * gamma * curv, gamma, s, None))
        supp = np.flatnonzero(x > 0)
        v = int(supp[np.argmax(g[supp])])
        if v != s:
            slope_p = float(g[s] - g[v])
            curv_p = float(W[s, s] - 2 * W[s, v] + W[v, v])
            gamma = _line_min(f, slope_p, curv_p, float(x[v]))
            candidates.append((f + gamma * slope_p + gamma * gamma * curv_p, gamma, s, v))
        f_new, gamma, s, v = min(candidates, key=lambda c: c[0])
        if not f_new < f or gamma <= 0:
            break
        if v is None:
            x *= 1 - gamma
            x[s] += gamma
            Wx = (1 - gamma) * Wx + gamma * W[:, s]
        else:
            x[s] += gamma
            x[v] -= gamma
            if x[v] < 1e-15:
                x[v] = 0.0
            Wx = Wx + gamma * (W[:, s] - W[:, v])
        f = float(x @ Wx)
        trace.values.append(f)
        trace.iterations = k + 1
    return x, trace


def _objective_matrix(tactics: Sequence[Tactic]) -> tuple[list[list[Fraction]], np.ndarray]:
    Wq = exact.waiting_matrix(tactics)
    return Wq, np.array([[float(v) for v in row] for row in Wq])


@dataclass
class SymmetricResult:
    point: SimplexPoint
    value: Fraction
    value_float: float
    traces: list[DescentTrace]


def optimize_symmetric_strategy(n: int, restarts: int = 32, seed: int = 0,
                                start: Optional[Mapping[Tactic, float]] = None,
                                max_iter: int = 20_000) -> tuple[SimplexPoint, Fraction]:
    res = optimize_symmetric_detailed(n, restarts, seed, start, max_iter)
    return res.point, res.value


def optimize_symmetric_detailed(n: int, restarts: int = 32, seed: int = 0,
                                start: Optional[Mapping[Tactic, float]] = None,
                                max_iter: int = 20_000) -> SymmetricResult:
    """Multistart descent on a -> Phi<a, a> over all n**n tactics.

    The returned value is the exact rational objective of the returned (rounded)
    point. Local minimum only: the form is indefinite.
    """
    if n > SYMMETRIC_MAX_N:
        raise exact.CapExceeded(f"symmetric optimisation needs n <= {SYMMETRIC_MAX_N}")
    tactics = all_tactics(n)
    index = {t: i for i, t in enumerate(tactics)}
    _, W = _objective_matrix(tactics)
    rng = np.random.default_rng([seed, n])
    starts = []
    if start is not None:
        x0 = np.zeros(len(tactics))
        for t, w in start.items():
            x0[index[t]] = float(w)
        if abs(x0.sum() - 1) > 1e-12 or (x0 < 0).any():
            raise GameError("start weights must form a probability vector")
        starts.append(x0)
    starts.extend(rng.dirichlet(np.ones(len(tactics))) for _ in range(restarts))
    if not starts:
        raise ValueError("need at least one start")
    best = None
    traces = []
    for x0 in starts:
        x, trace = frank_wolfe(W, x0, max_iter=max_iter)
        traces.append(trace)
        if best is None or trace.values[-1] < best[1]:
            best = (x, trace.values[-1])
    point, value = _exact_point(tactics, best[0])
    return SymmetricResult(point, value, best[1], traces)


def _exact_point(tactics, x) -> tuple[SimplexPoint, Fraction]:
    """Round the float optimum to an exact simplex point with the lowest exact objective.

    The objective only depends on the total weight of each relabeling pattern, so
    besides the raw weights we also try pattern totals placed on one
    representative tactic each; coarse roundings of those often hit the optimum.
    """
    n = tactics[0].n
    totals: dict[tuple[int, ...], float] = {}
    for t, w in zip(tactics, x):
        key = canonical_pattern(t)
        totals[key] = totals.get(key, 0.0) + float(w)
    reps = [Tactic(n, p) for p in totals]
    candidates = [(list(tactics), x), (reps, np.array(list(totals.values())))]
    best = None
    for support, weights in candidates:
        for den in (10 ** 3, 10 ** 6, 10 ** 9):
            q = rationalize(weights, den)
            items = [(t, w) for t, w in zip(support, q) if w > 0]
            value = exact.phi_weights(items, items)
            if best is None or value < best[1]:
                best = (SimplexPoint(tuple(t for t, _ in items), tuple(w for _, w in items)), value)
    return best
