"""Exact waiting-time statistics over a uniformly random binding.

Two independent engines:

* enumeration: play every one of the n! bindings (numpy, ``n <= max_enum_n``);
* inclusion-exclusion: count bindings avoiding a cell set from the rook numbers
  ``r_j`` (number of j-subsets of cells with no shared row or column),
  ``#avoiding = sum_j (-1)^j r_j (n-j)!``, with ``|cells| <= max_cells``.

Every probability is a ``Fraction`` whose denominator divides n!.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .model import (
    Cell,
    GameError,
    PairSet,
    Strategy,
    Tactic,
    canonical_pattern,
    round_cells,
)

MAX_ENUM_N = 10
MAX_CELLS = 24


class CapExceeded(GameError):
    """Input too large for the requested exact engine."""


class UnsupportedInExactMode(GameError):
    """Strategy has no explicit table, so exact evaluation is impossible."""


ENGINES = ("ie", "enum")


def _check_engine(engine):
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")


# -- inclusion-exclusion ----------------------------------------------------

def _components(cells: Sequence[Cell]) -> list[list[int]]:
    """Group cell indices into connected components (cells linked by a shared row or column)."""
    parent: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for r, c in cells:
        for v in (("r", r), ("c", c)):
            parent.setdefault(v, v)
        ra, rb = find(("r", r)), find(("c", c))
        if ra != rb:
            parent[ra] = rb
    groups: dict = {}
    for i, (r, _) in enumerate(cells):
        groups.setdefault(find(("r", r)), []).append(i)
    return list(groups.values())


def _component_matchings(cells: Sequence[Cell], idx: list[int]) -> dict[tuple[int, int], int]:
    """Count matchings inside one component keyed by (size, largest cell index used)."""
    counts: dict[tuple[int, int], int] = {}
    comp = [(i, 1 << cells[i][0], 1 << cells[i][1]) for i in sorted(idx)]

    def extend(start, rows, cols, size):
        for pos in range(start, len(comp)):
            i, rbit, cbit = comp[pos]
            if rows & rbit or cols & cbit:
                continue
            key = (size + 1, i)
            counts[key] = counts.get(key, 0) + 1
            extend(pos + 1, rows | rbit, cols | cbit, size + 1)

    extend(0, 0, 0, 0)
    return counts


def _poly_mul(p: list[int], q: list[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def rook_numbers_by_prefix(cells: Sequence[Cell]) -> list[list[int]]:
    """``out[c][j]`` = number of j-matchings among the first ``c`` cells, c = 0..len(cells).

    Cells must be distinct. Matchings factor over connected components, so each
    component is enumerated on its own and the polynomials are multiplied.
    """
    m = len(cells)
    if len(set(cells)) != m:
        raise ValueError("cells must be distinct")
    comps = []
    for idx in _components(cells):
        counts = _component_matchings(cells, idx)
        size = max((s for s, _ in counts), default=0)
        # table[s][i]: matchings of size s whose last cell index is i
        table = [[0] * m for _ in range(size + 1)]
        for (s, i), k in counts.items():
            table[s][i] += k
        comps.append(table)
    out = []
    for c in range(m + 1):
        poly = [1]
        for table in comps:
            p = [1] + [sum(row[:c]) for row in table[1:]]
            while len(p) > 1 and p[-1] == 0:
                p.pop()
            poly = _poly_mul(poly, p)
        out.append(poly)
    return out


def rook_numbers(cells: Iterable[Cell]) -> list[int]:
    cells = list(dict.fromkeys(cells))
    return rook_numbers_by_prefix(cells)[-1]


def _avoid_from_rooks(r: Sequence[int], n: int) -> int:
    return sum((-1) ** j * rj * math.factorial(n - j) for j, rj in enumerate(r))


def _validate_cells(cells, n, max_cells):
    cells = list(dict.fromkeys((int(a), int(b)) for a, b in cells))
    for a, b in cells:
        if not (1 <= a <= n and 1 <= b <= n):
            raise GameError(f"cell {(a, b)} outside [1..{n}]x[1..{n}]")
    if len(cells) > max_cells:
        raise CapExceeded(f"{len(cells)} cells exceeds the exact-mode cap of {max_cells}")
    return cells


def count_avoiding_permutations(cells: Iterable[Cell] | PairSet, n: int,
                                max_cells: int = MAX_CELLS) -> int:
    """Number of permutations pi of [1..n] with (i, pi(i)) outside ``cells`` for every i."""
    if isinstance(cells, PairSet):
        cells = cells.cells
    cells = _validate_cells(sorted(cells), n, max_cells)
    return _avoid_from_rooks(rook_numbers(cells), n)


# -- enumeration --------------------------------------------------------------

@functools.lru_cache(maxsize=4)
def permutation_array(n: int) -> np.ndarray:
    """All n! permutations of range(n) as rows (0-based), built by insertion."""
    perms = np.zeros((1, 1), dtype=np.int8)
    for k in range(1, n):
        perms = np.concatenate(
            [np.insert(perms, pos, k, axis=1) for pos in range(k + 1)], axis=0)
    perms.setflags(write=False)
    return perms


def _check_enum(n, max_n):
    if n > max_n:
        raise CapExceeded(f"enumeration over {n}! bindings exceeds the cap n <= {max_n}")


def enumerate_waiting_counts(tA: Tactic, tB: Tactic, max_n: int = MAX_ENUM_N) -> np.ndarray:
    """``counts[w]`` = number of bindings on which play() returns w (index 0 unused)."""
    n = tA.n
    if tB.n != n:
        raise GameError("location counts differ")
    _check_enum(n, max_n)
    perms = permutation_array(n)
    a = np.array(tA.itinerary) - 1
    b = np.array(tB.itinerary) - 1
    hits = perms[:, a] == b
    first = np.where(hits.any(axis=1), hits.argmax(axis=1) + 1, n + 1)
    return np.bincount(first, minlength=n + 2)


def enumerate_hit_counts(cells: Iterable[Cell], n: int, max_n: int = MAX_ENUM_N) -> np.ndarray:
    """``counts[x]`` = number of bindings hitting exactly x of the (distinct) cells."""
    _check_enum(n, max_n)
    cells = sorted(set(cells))
    perms = permutation_array(n)
    if not cells:
        return np.bincount(np.zeros(len(perms), dtype=np.int64), minlength=n + 1)
    rows = np.array([a for a, _ in cells]) - 1
    cols = np.array([b for _, b in cells]) - 1
    x = (perms[:, rows] == cols).sum(axis=1)
    return np.bincount(x, minlength=n + 1)


# -- distributional quantities ----------------------------------------------

@dataclass(frozen=True)
class SurvivalCurve:
    n: int
    values: tuple[Fraction, ...]

    def expectation(self) -> Fraction:
        return sum(self.values, Fraction(0))


def _ie_survival(tA: Tactic, tB: Tactic, max_cells: int) -> SurvivalCurve:
    n = tA.n
    cells = round_cells(tA, tB)
    if len(cells) > max_cells:
        raise CapExceeded(f"{len(cells)} cells exceeds the exact-mode cap of {max_cells}")
    rooks = rook_numbers_by_prefix(cells)
    nfact = math.factorial(n)
    seen: set = set()
    values = [Fraction(1)]
    for a, b in zip(tA.itinerary, tB.itinerary):
        seen.add((a, b))
        values.append(Fraction(_avoid_from_rooks(rooks[len(seen)], n), nfact))
    return SurvivalCurve(n, tuple(values))


def _enum_survival(tA: Tactic, tB: Tactic, max_n: int) -> SurvivalCurve:
    counts = enumerate_waiting_counts(tA, tB, max_n)
    total = int(counts.sum())
    n = tA.n
    # P(Z > k) = #{w > k} / n!
    tail = np.cumsum(counts[::-1])[::-1]
    return SurvivalCurve(n, tuple(Fraction(int(tail[k + 1]), total) for k in range(n + 1)))


def survival_curve(tA: Tactic, tB: Tactic, engine: str = "ie",
                   max_cells: int = MAX_CELLS, max_n: int = MAX_ENUM_N) -> SurvivalCurve:
    """Exact P(Z > k), k = 0..n, where Z is the waiting time over a uniform binding."""
    _check_engine(engine)
    if tA.n != tB.n:
        raise GameError("location counts differ")
    if engine == "enum":
        return _enum_survival(tA, tB, max_n)
    return _ie_survival(tA, tB, max_cells)


def expected_waiting_time(tA: Tactic, tB: Tactic, engine: str = "ie", **caps) -> Fraction:
    if engine == "enum":
        counts = enumerate_waiting_counts(tA, tB, caps.get("max_n", MAX_ENUM_N))
        return Fraction(int(np.dot(np.arange(len(counts)), counts)), int(counts.sum()))
    return survival_curve(tA, tB, engine, **caps).expectation()


def prob_no_rendezvous(tA: Tactic, tB: Tactic, engine: str = "ie", **caps) -> Fraction:
    """P(pi(tA(i)) != tB(i) for every round i), i.e. P(X = 0)."""
    _check_engine(engine)
    n = tA.n
    if engine == "enum":
        counts = enumerate_waiting_counts(tA, tB, caps.get("max_n", MAX_ENUM_N))
        return Fraction(int(counts[n + 1]), int(counts.sum()))
    cells = round_cells(tA, tB)
    avoid = count_avoiding_permutations(cells, n, caps.get("max_cells", MAX_CELLS))
    return Fraction(avoid, math.factorial(n))


# -- moments of X -------------------------------------------------------------

@dataclass(frozen=True)
class MomentReport:
    n: int
    m: int
    mean: Fraction
    variance: Fraction
    fourth_moment: Fraction
    fourth_central: Fraction
    distribution: tuple[Fraction, ...]  # P(X = x), x = 0..m

    @property
    def p_zero(self) -> Fraction:
        return self.distribution[0]


@functools.lru_cache(maxsize=None)
def _stirling2(k: int, j: int) -> int:
    if k == j:
        return 1
    if j == 0 or j > k:
        return 0
    return j * _stirling2(k - 1, j) + _stirling2(k - 1, j - 1)


def _report_from_raw(n, m, raw: Sequence[Fraction], dist) -> MomentReport:
    mu = raw[1]
    var = raw[2] - mu ** 2
    central4 = raw[4] - 4 * mu * raw[3] + 6 * mu ** 2 * raw[2] - 3 * mu ** 4
    return MomentReport(n, m, mu, var, raw[4], central4, tuple(dist))


def moments_from_rooks(r: Sequence[int], n: int) -> MomentReport:
    """Moments and law of X from rook numbers: E[C(X, j)] = r_j (n-j)!/n!."""
    nfact = math.factorial(n)
    binom_moments = [Fraction(rj * math.factorial(n - j), nfact) for j, rj in enumerate(r)]
    raw = [sum((_stirling2(k, j) * math.factorial(j) * binom_moments[j]
                for j in range(1, min(k, len(r) - 1) + 1)), Fraction(0))
           for k in range(5)]
    raw[0] = Fraction(1)
    top = len(r) - 1
    dist = [sum(((-1) ** (j - x) * math.comb(j, x) * binom_moments[j]
                 for j in range(x, top + 1)), Fraction(0))
            for x in range(top + 1)]
    m = r[1] if len(r) > 1 else 0
    dist += [Fraction(0)] * (m + 1 - len(dist))
    return _report_from_raw(n, m, raw, dist)


def moments(tA: Tactic, tB: Tactic, engine: str = "ie", **caps) -> MomentReport:
    """Moments of X = number of cells of F hit by the binding."""
    _check_engine(engine)
    cells = round_cells(tA, tB)
    n = tA.n
    if engine == "enum":
        counts = enumerate_hit_counts(cells, n, caps.get("max_n", MAX_ENUM_N))
        total = int(counts.sum())
        dist = [Fraction(int(c), total) for c in counts[: len(cells) + 1]]
        raw = [sum((Fraction(x ** k) * p for x, p in enumerate(dist)), Fraction(0))
               for k in range(5)]
        return _report_from_raw(n, len(cells), raw, dist)
    cells = _validate_cells(cells, n, caps.get("max_cells", MAX_CELLS))
    return moments_from_rooks(rook_numbers(cells), n)


# -- cell-level quantities ------------------------------------------------------

def cells_disjoint(e: Cell, f: Cell) -> bool:
    return e[0] != f[0] and e[1] != f[1]


def joint_hit_probability(cells: Sequence[Cell], n: int) -> Fraction:
    """P(pi(i) = j for every (i, j) in cells): (n-k)!/n! for a matching, else 0."""
    cells = list(set(cells))
    k = len(cells)
    if len({a for a, _ in cells}) < k or len({b for _, b in cells}) < k:
        return Fraction(0)
    return Fraction(math.factorial(n - k), math.factorial(n))


def pairwise_product_expectation(e: Cell, f: Cell, n: int) -> Fraction:
    """E[X_e X_f] for distinct cells e, f."""
    if tuple(e) == tuple(f):
        raise ValueError("cells must differ")
    if cells_disjoint(e, f):
        return Fraction(1, n * (n - 1))
    return Fraction(0)


def disjoint_pair_count(F: PairSet | Iterable[Cell]) -> int:
    """Unordered pairs of cells sharing neither row nor column."""
    cells = list(F.cells if isinstance(F, PairSet) else set(F))
    m = len(cells)
    rows: dict[int, int] = {}
    cols: dict[int, int] = {}
    for a, b in cells:
        rows[a] = rows.get(a, 0) + 1
        cols[b] = cols.get(b, 0) + 1
    # distinct cells share at most one coordinate
    shared = sum(math.comb(d, 2) for d in rows.values()) + sum(math.comb(d, 2) for d in cols.values())
    return math.comb(m, 2) - shared


# -- strategies ---------------------------------------------------------------

@functools.lru_cache(maxsize=1 << 18)
def _pattern_waiting_time(pa: tuple[int, ...], pb: tuple[int, ...]) -> Fraction:
    n = len(pa)
    return expected_waiting_time(Tactic(n, pa), Tactic(n, pb))


def waiting_time_cached(tA: Tactic, tB: Tactic) -> Fraction:
    """expected_waiting_time memoised on the relabeling-invariant pattern pair."""
    return _pattern_waiting_time(canonical_pattern(tA), canonical_pattern(tB))


@functools.lru_cache(maxsize=1 << 16)
def _pattern_no_meet(pa, pb) -> Fraction:
    n = len(pa)
    return prob_no_rendezvous(Tactic(n, pa), Tactic(n, pb))


def no_meet_cached(tA: Tactic, tB: Tactic) -> Fraction:
    return _pattern_no_meet(canonical_pattern(tA), canonical_pattern(tB))


def pattern_weights(support: Iterable[tuple[Tactic, Fraction]]) -> dict[tuple[int, ...], Fraction]:
    out: dict[tuple[int, ...], Fraction] = {}
    for t, w in support:
        key = canonical_pattern(t)
        out[key] = out.get(key, Fraction(0)) + w
    return out


def phi_weights(x: Iterable[tuple[Tactic, Fraction]], y: Iterable[tuple[Tactic, Fraction]]) -> Fraction:
    """sum_{tA, tB} w(tA, tB) x[tA] y[tB] for arbitrary (not necessarily normalised) weights."""
    px, py = pattern_weights(x), pattern_weights(y)
    total = Fraction(0)
    for pa, wa in px.items():
        if wa == 0:
            continue
        for pb, wb in py.items():
            if wb:
                total += wa * wb * _pattern_waiting_time(pa, pb)
    return total


def bilinear_phi(sA: Strategy, sB: Strategy) -> Fraction:
    """Exact E W(sA, sB) for two table strategies."""
    for s in (sA, sB):
        if s.support is None:
            raise UnsupportedInExactMode(f"strategy {s.name or s!r} has no explicit table")
    if sA.n != sB.n:
        raise GameError("location counts differ")
    return phi_weights(sA.support, sB.support)


def waiting_matrix(tactics: Sequence[Tactic]) -> list[list[Fraction]]:
    """Exact w(t_i, t_j) for every ordered pair of the given tactics."""
    pats = [canonical_pattern(t) for t in tactics]
    return [[_pattern_waiting_time(a, b) for b in pats] for a in pats]


def all_patterns(n: int) -> list[tuple[int, ...]]:
    """Restricted growth strings of length n (one per tactic relabeling class)."""
    out = []

    def grow(prefix, top):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for v in range(1, top + 2):
            grow(prefix + [v], max(top, v))

    grow([], 0)
    return out


def pattern_class_size(pattern: Sequence[int], n: int) -> int:
    """Number of tactics relabeling to ``pattern``: n (n-1) ... (n-k+1) for k distinct labels."""
    return math.perm(n, max(pattern))



# -- engine cross-check --------------------------------------------------------

def random_pairs(n: int, samples: int, seed: int):
    """Pairs of independent uniformly random tactics."""
    rng = np.random.default_rng([seed, n, 7])
    for _ in range(samples):
        a, b = rng.integers(1, n + 1, size=(2, n)).tolist()
        yield Tactic(n, tuple(a)), Tactic(n, tuple(b))


def engine_disagreements(tA: Tactic, tB: Tactic) -> list[str]:
    """Quantities on which enumeration and inclusion-exclusion differ (empty if none)."""
    out = []
    s_enum = survival_curve(tA, tB, "enum")
    s_ie = survival_curve(tA, tB, "ie")
    if s_enum != s_ie:
        out.append("survival")
    if expected_waiting_time(tA, tB, "enum") != s_ie.expectation():
        out.append("w")
    if prob_no_rendezvous(tA, tB, "enum") != prob_no_rendezvous(tA, tB, "ie"):
        out.append("p_no_meet")
    return out


def scan_engines(n: int, mode: str = "sampled", samples: int = 10_000, seed: int = 0) -> dict:
    """Cross-check both engines over all pairs (exhaustive) or ``samples`` random pairs.

    The same pass also counts pairs breaking w >= (n+1)/2 or the moment caps
    E X = m/n, E X^4 <= 15, E|X - EX|^4 <= 16.
    """
    if mode == "exhaustive":
        from .model import all_tactics

        ts = all_tactics(n)
        pairs = ((a, b) for a in ts for b in ts)
    elif mode == "sampled":
        pairs = random_pairs(n, samples, seed)
    else:
        raise ValueError(f"mode must be 'exhaustive' or 'sampled', got {mode!r}")
    half = Fraction(n + 1, 2)
    count = disagree = floor_bad = moment_bad = 0
    examples = []
    min_gap = max_fourth = max_central = None
    for tA, tB in pairs:
        count += 1
        diff = engine_disagreements(tA, tB)
        gap = expected_waiting_time(tA, tB) - half
        mr = moments(tA, tB)
        moment_ok = mr.mean == Fraction(mr.m, n) and mr.fourth_moment <= 15 and mr.fourth_central <= 16
        disagree += bool(diff)
        floor_bad += gap < 0
        moment_bad += not moment_ok
        if (diff or gap < 0 or not moment_ok) and len(examples) < 10:
            examples.append({"tactic_a": str(tA), "tactic_b": str(tB), "quantities": diff,
                             "gap": gap, "moments_ok": moment_ok})
        min_gap = gap if min_gap is None else min(min_gap, gap)
        max_fourth = mr.fourth_moment if max_fourth is None else max(max_fourth, mr.fourth_moment)
        max_central = mr.fourth_central if max_central is None else max(max_central, mr.fourth_central)
    return {"n": n, "mode": mode, "pairs": count, "seed": seed if mode == "sampled" else None,
            "disagreements": disagree, "floor_violations": floor_bad,
            "moment_violations": moment_bad, "examples": examples,
            "min_w_minus_floor": min_gap, "max_fourth_moment": max_fourth,
            "max_fourth_central": max_central}
