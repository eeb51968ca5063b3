"""Executable checks of the lower-bound chain for symmetric rendezvous.

Each verifier returns a :class:`BoundReport`. A report passes when its
hypotheses fail (vacuous) or every one of its inequalities holds exactly.
All thresholds are compared in rational arithmetic; square roots are squared
away before comparing.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from . import exact
from .model import (
    Cell,
    GameError,
    Strategy,
    Tactic,
    TacticKind,
    all_tactics,
    canonical_pattern,
    classify,
    round_cells,
)

DELTA = Fraction(1, 2 ** 35)
EPSILON = Fraction(1, 2 ** 36)
NO_MEET_FLOOR = Fraction(1, 2 ** 17)
SAME_KIND_VAR_FLOOR = Fraction(1, 32)
MAX_SUBSETS_PER_ORDER = 128


class LemmaViolation(AssertionError):
    """A proved statement failed: always an implementation bug."""


class PreconditionError(GameError):
    pass


@dataclass(frozen=True)
class Check:
    """``lhs >= rhs`` (or ``lhs == rhs``) with an exact margin."""

    label: str
    lhs: Fraction
    rhs: Fraction
    relation: str = ">="

    @property
    def margin(self) -> Fraction:
        return self.lhs - self.rhs

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs if self.relation == "==" else self.lhs >= self.rhs


@dataclass(frozen=True)
class BoundReport:
    name: str
    hypotheses_hold: bool
    lhs: Fraction
    rhs: Fraction
    margin: Fraction
    passed: bool
    context: dict = field(default_factory=dict)
    checks: tuple[Check, ...] = ()

    @property
    def failures(self) -> list[Check]:
        if not self.hypotheses_hold:
            return []
        return [c for c in self.checks if not c.ok]


def make_report(name: str, hypotheses_hold: bool, checks: Sequence[Check],
                context: Optional[dict] = None) -> BoundReport:
    """The first check is the headline inequality."""
    head = checks[0]
    passed = (not hypotheses_hold) or all(c.ok for c in checks)
    return BoundReport(name, hypotheses_hold, head.lhs, head.rhs, head.margin, passed,
                       dict(context or {}), tuple(checks))


# -- shared per-pair facts ------------------------------------------------------

@dataclass(frozen=True)
class PairFacts:
    n: int
    cells: tuple[Cell, ...]
    survival: exact.SurvivalCurve
    moments: exact.MomentReport
    same_kind: bool

    @property
    def m(self) -> int:
        return len(self.cells)

    @property
    def w(self) -> Fraction:
        return self.survival.expectation()

    @property
    def p_zero(self) -> Fraction:
        return self.survival.values[-1]


@functools.lru_cache(maxsize=1 << 16)
def _facts_for_patterns(pa: tuple[int, ...], pb: tuple[int, ...]) -> PairFacts:
    n = len(pa)
    tA, tB = Tactic(n, pa), Tactic(n, pb)
    cells = round_cells(tA, tB)
    if len(cells) > exact.MAX_CELLS:
        raise exact.CapExceeded(f"{len(cells)} cells exceeds the exact-mode cap")
    rooks = exact.rook_numbers_by_prefix(cells)
    nfact = math.factorial(n)
    values = [Fraction(1)]
    seen: set = set()
    for cell in zip(pa, pb):
        seen.add(cell)
        values.append(Fraction(exact._avoid_from_rooks(rooks[len(seen)], n), nfact))
    mom = exact.moments_from_rooks(rooks[-1], n)
    return PairFacts(n, tuple(cells), exact.SurvivalCurve(n, tuple(values)), mom,
                     classify(tA) is classify(tB))


def pair_facts(tA: Tactic, tB: Tactic) -> PairFacts:
    """Survival curve, moments and kind of a tactic pair (memoised up to relabeling)."""
    if tA.n != tB.n:
        raise GameError("location counts differ")
    return _facts_for_patterns(canonical_pattern(tA), canonical_pattern(tB))


# -- single-pair verifiers ------------------------------------------------------

def verify_pb_waiting(tA: Tactic, tB: Tactic) -> BoundReport:
    """w >= (n+1)/2 + beta^2 n / 2 with beta = P(no rendezvous)."""
    f = pair_facts(tA, tB)
    n, beta = f.n, f.p_zero
    half = Fraction(n + 1, 2)
    checks = [Check("w >= (n+1)/2 + beta^2 n/2", f.w, half + beta ** 2 * n / 2)]
    # the survival floor the argument sums over
    floor_margins = [v - max(1 - Fraction(k, n), beta) for k, v in enumerate(f.survival.values)]
    checks.append(Check("min_k P(Z>k) - max(1-k/n, beta) >= 0", min(floor_margins), Fraction(0)))
    checks.append(Check("P(Z>n) == P(X=0)", f.survival.values[-1], f.moments.p_zero, "=="))
    return make_report("pb-waiting", True, checks,
                       {"n": n, "tactic_a": str(tA), "tactic_b": str(tB), "beta": beta})


def _subsets(cells: Sequence[Cell], k: int, rng: np.random.Generator) -> Iterator[tuple[Cell, ...]]:
    total = math.comb(len(cells), k)
    if total <= MAX_SUBSETS_PER_ORDER:
        yield from itertools.combinations(cells, k)
        return
    for _ in range(MAX_SUBSETS_PER_ORDER):
        idx = rng.choice(len(cells), size=k, replace=False)
        yield tuple(cells[i] for i in idx)


def verify_moment_claims(tA: Tactic, tB: Tactic, seed: int = 0) -> BoundReport:
    """E X = m/n, E X^4 <= 15, E|X-EX|^4 <= 16 and the joint-hit caps for 2, 3, 4 cells."""
    f = pair_facts(tA, tB)
    n, mom = f.n, f.moments
    checks = [
        Check("15 >= E X^4", Fraction(15), mom.fourth_moment),
        Check("E X == m/n", mom.mean, Fraction(f.m, n), "=="),
        Check("1 >= E X", Fraction(1), mom.mean),
        Check("16 >= E|X-EX|^4", Fraction(16), mom.fourth_central),
        Check("1 + E X^4 >= E|X-EX|^4", 1 + mom.fourth_moment, mom.fourth_central),
    ]
    rng = np.random.default_rng([seed, n, f.m])
    for k in (2, 3, 4):
        if f.m < k:
            continue
        cap = Fraction(1, math.perm(n, k))
        worst = max(exact.joint_hit_probability(s, n) for s in _subsets(f.cells, k, rng))
        checks.append(Check(f"1/(n)_{k} >= max E[product of {k} indicators]", cap, worst))
    return make_report("moment-claims", True, checks,
                       {"n": n, "m": f.m, "tactic_a": str(tA), "tactic_b": str(tB)})


def paley_zygmund_bound(ez: Fraction, ez2: Fraction, lam: Fraction) -> Fraction:
    """(1 - lam)^2 (E Z)^2 / E Z^2, a lower bound on P(Z >= lam E Z) for Z >= 0."""
    ez, ez2, lam = Fraction(ez), Fraction(ez2), Fraction(lam)
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if ez2 <= 0:
        raise ValueError("E Z^2 must be positive")
    return (1 - lam) ** 2 * ez ** 2 / ez2


def var_pb_hypotheses(m: int, n: int, variance: Fraction, alpha: Fraction) -> bool:
    """m >= (1 - sqrt(alpha/2)) n and Var X >= alpha, decided exactly."""
    gap = 1 - Fraction(m, n)
    return 0 <= gap and gap ** 2 <= alpha / 2 and variance >= alpha


def verify_var_pb(tA: Tactic, tB: Tactic, alpha: Fraction = SAME_KIND_VAR_FLOOR) -> BoundReport:
    """Under the hypotheses, P(X=0) >= alpha^2/128; also checks the intermediate steps."""
    alpha = Fraction(alpha)
    f = pair_facts(tA, tB)
    n, mom = f.n, f.moments
    hyp = var_pb_hypotheses(f.m, n, mom.variance, alpha)
    dist = mom.distribution
    mu = mom.mean
    # Z = (X - EX)^2
    p_z_big = sum((p for x, p in enumerate(dist) if (x - mu) ** 2 >= alpha / 2), Fraction(0))
    p_not_one = 1 - (dist[1] if len(dist) > 1 else 0)
    p_two_plus = sum(dist[2:], Fraction(0))
    checks = [
        Check("P(X=0) >= alpha^2/128", mom.p_zero, alpha ** 2 / 128),
        Check("P(Z >= alpha/2) >= alpha^2/64", p_z_big, alpha ** 2 / 64),
        Check("P(X=0) >= P(X>=2)", mom.p_zero, p_two_plus),
    ]
    # {Z >= alpha/2} misses {X = 1} only when m > (1 - sqrt(alpha/2)) n strictly
    if (1 - Fraction(f.m, n)) ** 2 < alpha / 2:
        checks.append(Check("P(X != 1) >= P(Z >= alpha/2)", p_not_one, p_z_big))
    if mom.variance > 0:
        pz = paley_zygmund_bound(mom.variance, mom.fourth_central, Fraction(1, 2))
        checks.append(Check("P(Z >= EZ/2) >= PZ bound",
                            sum((p for x, p in enumerate(dist) if (x - mu) ** 2 >= mom.variance / 2),
                                Fraction(0)), pz))
    return make_report("var-pb", hyp, checks,
                       {"n": n, "m": f.m, "alpha": alpha, "variance": mom.variance,
                        "tactic_a": str(tA), "tactic_b": str(tB)})


@functools.lru_cache(maxsize=None)
def _joint_two(kind: str, n: int) -> Fraction:
    """P(both cells hit) by inclusion-exclusion on avoidance counts, for a canonical cell pair."""
    e, f = {"disjoint": ((1, 1), (2, 2)), "row": ((1, 1), (1, 2)), "col": ((1, 1), (2, 1))}[kind]
    nfact = math.factorial(n)
    avoid = lambda cells: Fraction(exact.count_avoiding_permutations(cells, n), nfact)
    return 1 - avoid([e]) - avoid([f]) + avoid([e, f])


def _pair_kind(e: Cell, f: Cell) -> str:
    if e[0] == f[0]:
        return "row"
    if e[1] == f[1]:
        return "col"
    return "disjoint"


def verify_dp_var(tA: Tactic, tB: Tactic) -> BoundReport:
    """Var X >= D / C(n, 2) where D counts disjoint cell pairs; plus the covariance formula."""
    f = pair_facts(tA, tB)
    n, cells = f.n, f.cells
    D = exact.disjoint_pair_count(cells)
    alpha = Fraction(D, math.comb(n, 2))
    p1 = Fraction(1, n)
    cov_sum = Fraction(0)
    worst_cov = Fraction(0)
    for e, g in itertools.combinations(cells, 2):
        kind = _pair_kind(e, g)
        cov = _joint_two(kind, n) - p1 * p1
        formula = Fraction(int(kind == "disjoint"), n * (n - 1)) - Fraction(1, n * n)
        worst_cov = max(worst_cov, abs(cov - formula))
        cov_sum += cov
    var_from_cov = f.m * Fraction(n - 1, n * n) + 2 * cov_sum
    checks = [
        Check("Var X >= D/C(n,2)", f.moments.variance, alpha),
        Check("max |Cov - formula| == 0", worst_cov, Fraction(0), "=="),
        Check("Var X == sum Var + 2 sum Cov", f.moments.variance, var_from_cov, "=="),
    ]
    return make_report("dp-var", True, checks,
                       {"n": n, "m": f.m, "disjoint_pairs": D, "alpha": alpha,
                        "tactic_a": str(tA), "tactic_b": str(tB)})


def markov_corner_case(tA: Tactic, tB: Tactic) -> BoundReport:
    """If m <= 11n/12 then P(X=0) >= 1/12."""
    f = pair_facts(tA, tB)
    hyp = 12 * f.m <= 11 * f.n
    checks = [
        Check("P(X=0) >= 1/12", f.p_zero, Fraction(1, 12)),
        Check("P(X=0) >= 1 - m/n", f.p_zero, 1 - Fraction(f.m, f.n)),
    ]
    return make_report("markov-corner", hyp, checks,
                       {"n": f.n, "m": f.m, "tactic_a": str(tA), "tactic_b": str(tB)})


def verify_same_kind_variance(tA: Tactic, tB: Tactic) -> BoundReport:
    """Same-kind pairs with m >= 11n/12 have Var X >= 1/32."""
    f = pair_facts(tA, tB)
    hyp = f.same_kind and 12 * f.m >= 11 * f.n
    checks = [Check("Var X >= 1/32", f.moments.variance, SAME_KIND_VAR_FLOOR)]
    return make_report("same-kind-variance", hyp, checks,
                       {"n": f.n, "m": f.m, "tactic_a": str(tA), "tactic_b": str(tB)})


PAIR_VERIFIERS = {
    "pb-waiting": verify_pb_waiting,
    "moment-claims": verify_moment_claims,
    "var-pb": verify_var_pb,
    "dp-var": verify_dp_var,
    "markov-corner": markov_corner_case,
    "same-kind-variance": verify_same_kind_variance,
}


# -- pair sources ----------------------------------------------------------------

def random_tactic(rng: np.random.Generator, n: int) -> Tactic:
    """A tactic whose image size is itself random, so both kinds turn up often."""
    k = int(rng.integers(1, n + 1))
    support = rng.choice(n, size=k, replace=False) + 1
    return Tactic(n, tuple(int(x) for x in rng.choice(support, size=n)))


def sampled_pairs(n: int, samples: int, seed: int,
                  same_kind: bool = False) -> Iterator[tuple[Tactic, Tactic]]:
    rng = np.random.default_rng([seed, n])
    for _ in range(samples):
        tA = random_tactic(rng, n)
        tB = random_tactic(rng, n)
        while same_kind and classify(tB) is not classify(tA):
            tB = random_tactic(rng, n)
        yield tA, tB


def exhaustive_pattern_pairs(n: int, same_kind: bool = False) -> Iterator[tuple[Tactic, Tactic, int]]:
    """One representative per relabeling class of ordered pairs, with the class size.

    Every quantity checked here is invariant under relabeling either player's
    locations, so covering classes with multiplicity covers all n^n x n^n pairs.
    """
    pats = exact.all_patterns(n)
    for pa in pats:
        for pb in pats:
            tA, tB = Tactic(n, pa), Tactic(n, pb)
            if same_kind and classify(tA) is not classify(tB):
                continue
            yield tA, tB, exact.pattern_class_size(pa, n) * exact.pattern_class_size(pb, n)


def pair_source(n: int, mode: str, samples: int, seed: int,
                same_kind: bool = False) -> Iterator[tuple[Tactic, Tactic, int]]:
    if mode == "exhaustive":
        if n ** n > 10 ** 4:
            raise PreconditionError(f"exhaustive scan at n={n} is infeasible; use sampled mode")
        yield from exhaustive_pattern_pairs(n, same_kind)
    elif mode == "sampled":
        for tA, tB in sampled_pairs(n, samples, seed, same_kind):
            yield tA, tB, 1
    else:
        raise ValueError(f"mode must be 'exhaustive' or 'sampled', got {mode!r}")


# -- scans -------------------------------------------------------------------------

def summarize(name: str, reports: Iterable[tuple[BoundReport, int]], context: dict) -> BoundReport:
    """Fold per-pair reports into one: worst headline margin among non-vacuous pairs."""
    pairs = held = 0
    failures = []
    worst: Optional[BoundReport] = None
    for rep, weight in reports:
        pairs += weight
        if not rep.hypotheses_hold:
            continue
        held += weight
        if not rep.passed:
            failures.append(rep)
        if worst is None or rep.margin < worst.margin:
            worst = rep
    ctx = dict(context, pairs=pairs, hypotheses_held=held, failures=len(failures))
    if failures:
        ctx["first_failure"] = failures[0].context | {
            "failed_checks": [c.label for c in failures[0].failures]}
    if worst is None:
        return BoundReport(name, False, Fraction(0), Fraction(0), Fraction(0), True, ctx)
    ctx["worst_pair"] = {k: v for k, v in worst.context.items() if k in ("tactic_a", "tactic_b")}
    return BoundReport(name, True, worst.lhs, worst.rhs, worst.margin, not failures, ctx,
                       worst.checks[:1])


def scan_lemma(name: str, n: int, mode: str = "exhaustive", samples: int = 10_000,
               seed: int = 0) -> BoundReport:
    fn = PAIR_VERIFIERS[name]
    same = name == "same-kind-variance"
    reps = ((fn(tA, tB), w) for tA, tB, w in pair_source(n, mode, samples, seed, same))
    return summarize(name, reps, {"n": n, "mode": mode, "samples": samples if mode == "sampled" else None,
                                  "seed": seed if mode == "sampled" else None})


def verify_same_kind_gap(n: int, mode: str = "exhaustive", samples: int = 10_000,
                         seed: int = 0) -> BoundReport:
    """Over same-kind pairs: min (w - (n+1)/2) >= 2^-35 n and min P(X=0) >= 2^-17."""
    half = Fraction(n + 1, 2)
    min_gap = min_p0 = None
    gap_pair = p0_pair = None
    count = 0
    for tA, tB, weight in pair_source(n, mode, samples, seed, same_kind=True):
        f = pair_facts(tA, tB)
        count += weight
        gap = f.w - half
        if min_gap is None or gap < min_gap:
            min_gap, gap_pair = gap, (str(tA), str(tB))
        if min_p0 is None or f.p_zero < min_p0:
            min_p0, p0_pair = f.p_zero, (str(tA), str(tB))
    if count == 0:
        raise PreconditionError("no same-kind pairs scanned")
    checks = [
        Check("min gap >= 2^-35 n", min_gap, DELTA * n),
        Check("min P(X=0) >= 2^-17", min_p0, NO_MEET_FLOOR),
    ]
    return make_report("same-kind-gap", True, checks, {
        "n": n, "mode": mode, "pairs": count,
        "samples": samples if mode == "sampled" else None,
        "seed": seed if mode == "sampled" else None,
        "min_gap": min_gap, "min_gap_over_n": min_gap / n, "min_gap_pair": gap_pair,
        "min_p_no_meet": min_p0, "min_p_no_meet_pair": p0_pair,
    })


LEMMA_CHAIN = ("pb-waiting", "moment-claims", "var-pb", "dp-var", "markov-corner",
               "same-kind-variance")


def scan_lemma_chain(n: int, mode: str = "exhaustive", samples: int = 10_000,
                     seed: int = 0) -> list[BoundReport]:
    """Every pair verifier over one pair source, plus the same-kind gap scan."""
    pairs = list(pair_source(n, mode, samples, seed))
    ctx = {"n": n, "mode": mode, "samples": samples if mode == "sampled" else None,
           "seed": seed if mode == "sampled" else None}
    out = []
    for name in LEMMA_CHAIN:
        fn = PAIR_VERIFIERS[name]
        out.append(summarize(name, ((fn(a, b), w) for a, b, w in pairs), ctx))
    out.append(verify_same_kind_gap(n, mode, samples, seed))
    return out


# -- Theorem-1 assembly ---------------------------------------------------------------

def verify_theorem1_assembly(strategy: Strategy) -> BoundReport:
    """Split a table strategy into passive/active parts and check the symmetric bound.

    Checks E W(s, s) >= (n+1)/2 + 2^-36 n, the exact passive/active
    decomposition of the bilinear form, and the three component bounds.
    """
    if strategy.support is None:
        raise exact.UnsupportedInExactMode("theorem-1 assembly needs an explicit table")
    n = strategy.n
    support = strategy.support
    passive = [(t, w) for t, w in support if classify(t) is TacticKind.PASSIVE]
    active = [(t, w) for t, w in support if classify(t) is TacticKind.ACTIVE]
    p = sum((w for _, w in passive), Fraction(0))
    half = Fraction(n + 1, 2)
    same_floor = half + DELTA * n

    total = exact.phi_weights(support, support)
    pp = exact.phi_weights(passive, passive)
    aa = exact.phi_weights(active, active)
    pa = exact.phi_weights(passive, active)
    ap = exact.phi_weights(active, passive)
    checks = [
        Check("Phi<a,a> >= (n+1)/2 + 2^-36 n", total, half + EPSILON * n),
        Check("Phi<a,a> == Phi<P,P> + Phi<A,A> + 2 Phi<P,A>", total, pp + aa + 2 * pa, "=="),
        Check("Phi<P,A> == Phi<A,P>", pa, ap, "=="),
        Check("Phi<P,P> >= p^2 ((n+1)/2 + delta n)", pp, p ** 2 * same_floor),
        Check("Phi<A,A> >= (1-p)^2 ((n+1)/2 + delta n)", aa, (1 - p) ** 2 * same_floor),
        Check("Phi<P,A> >= p(1-p)(n+1)/2", pa, p * (1 - p) * half),
    ]
    return make_report("theorem1-assembly", True, checks,
                       {"n": n, "strategy": strategy.name, "support": len(support),
                        "p_passive": p, "value": total})


# -- disjoint edge splitting --------------------------------------------------------------

@dataclass(frozen=True)
class BipartiteSplit:
    n: int
    A1: frozenset[int]
    A2: frozenset[int]
    B1: frozenset[int]
    B2: frozenset[int]
    E1: frozenset[Cell]
    E2: frozenset[Cell]
    deg_A1: int
    deg_A2: int
    deg_B1: int
    deg_B2: int


def _degrees(edges, side):
    deg: dict[int, int] = {}
    for e in edges:
        deg[e[side]] = deg.get(e[side], 0) + 1
    return deg


def _heavy_prefix(deg: dict[int, int], n: int) -> tuple[frozenset[int], frozenset[int]]:
    # non-increasing degree, ties by ascending vertex; longest prefix with total <= 2n/3
    order = sorted(range(1, n + 1), key=lambda v: (-deg.get(v, 0), v))
    total = 0
    t = 0
    for v in order:
        if 3 * (total + deg.get(v, 0)) > 2 * n:
            break
        total += deg.get(v, 0)
        t += 1
    return frozenset(order[:t]), frozenset(order[t:])


def split_preconditions(edges: Iterable[Cell], n: int) -> list[str]:
    edges = set(edges)
    problems = []
    for a, b in edges:
        if not (1 <= a <= n and 1 <= b <= n):
            problems.append(f"edge {(a, b)} outside [1..{n}]^2")
    m = len(edges)
    if 12 * m < 11 * n:
        problems.append(f"|E| = {m} < 11n/12 = {Fraction(11 * n, 12)}")
    if m > n:
        problems.append(f"|E| = {m} > n = {n}")
    for side, label in ((0, "left"), (1, "right")):
        for v, d in _degrees(edges, side).items():
            if 3 * d > 2 * n:
                problems.append(f"{label} vertex {v} has degree {d} > 2n/3 = {Fraction(2 * n, 3)}")
    return problems


def split_disjoint_edges(edges: Iterable[Cell], n: int) -> BipartiteSplit:
    """Find two large edge sets with every edge of one disjoint from every edge of the other.

    Each side is cut into its heaviest vertices (total degree at most 2n/3) and
    the rest; of the four cross classes, (F11, F22) is used when both reach n/8,
    otherwise (F12, F21).
    """
    edges = frozenset((int(a), int(b)) for a, b in edges)
    problems = split_preconditions(edges, n)
    if problems:
        raise PreconditionError("; ".join(problems))
    degA, degB = _degrees(edges, 0), _degrees(edges, 1)
    A1, A2 = _heavy_prefix(degA, n)
    B1, B2 = _heavy_prefix(degB, n)
    F = {(s, t): frozenset(e for e in edges if (e[0] in (A1, A2)[s - 1]) and (e[1] in (B1, B2)[t - 1]))
         for s in (1, 2) for t in (1, 2)}
    big = lambda k: 8 * len(F[k]) >= n
    if big((1, 1)) and big((2, 2)):
        E1, E2 = F[1, 1], F[2, 2]
    elif big((1, 2)) and big((2, 1)):
        E1, E2 = F[1, 2], F[2, 1]
    else:
        raise LemmaViolation(f"no cross class pair reaches n/8: sizes { {k: len(v) for k, v in F.items()} }")
    degsum = lambda deg, part: sum(deg.get(v, 0) for v in part)
    return BipartiteSplit(n, A1, A2, B1, B2, E1, E2,
                          degsum(degA, A1), degsum(degA, A2), degsum(degB, B1), degsum(degB, B2))


def split_violations(split: BipartiteSplit) -> list[str]:
    """Every broken output invariant (empty when the split is valid)."""
    n = split.n
    out = []
    if split.E1 & split.E2:
        out.append("E1 and E2 intersect")
    for e in split.E1:
        for f in split.E2:
            if not exact.cells_disjoint(e, f):
                out.append(f"edges {e} and {f} share an endpoint")
                break
    for label, E in (("E1", split.E1), ("E2", split.E2)):
        if 8 * len(E) < n:
            out.append(f"|{label}| = {len(E)} < n/8")
    for label, d in (("A1", split.deg_A1), ("B1", split.deg_B1)):
        if 3 * d <= n:
            out.append(f"deg({label}) = {d} <= n/3")
    for label, d in (("A2", split.deg_A2), ("B2", split.deg_B2)):
        if 4 * d < n:
            out.append(f"deg({label}) = {d} < n/4")
    return out


def random_split_graph(rng: np.random.Generator, n: int) -> frozenset[Cell]:
    """A random bipartite graph meeting the splitter's preconditions.

    Half the draws concentrate edges on a few heavy vertices to exercise the
    degree cap; the rest are uniform.
    """
    lo = -(-11 * n // 12)
    while True:
        m = int(rng.integers(lo, n + 1))
        if rng.random() < 0.5:
            rows = rng.integers(1, n + 1, size=4 * m)
            cols = rng.integers(1, n + 1, size=4 * m)
        else:
            hubs = rng.choice(n, size=max(2, n // 6), replace=False) + 1
            rows = np.where(rng.random(4 * m) < 0.7, rng.choice(hubs, size=4 * m),
                            rng.integers(1, n + 1, size=4 * m))
            cols = rng.integers(1, n + 1, size=4 * m)
        edges = list(dict.fromkeys(zip(rows.tolist(), cols.tolist())))[:m]
        if rng.random() < 0.5:
            edges = [(b, a) for a, b in edges]
        if len(edges) == m and not split_preconditions(edges, n):
            return frozenset(edges)


def verify_many_disjoint(n: int, graphs: int = 1000, seed: int = 0) -> BoundReport:
    rng = np.random.default_rng([seed, n])
    bad = 0
    min_e = None
    first = None
    for _ in range(graphs):
        g = random_split_graph(rng, n)
        try:
            split = split_disjoint_edges(g, n)
            problems = split_violations(split)
        except LemmaViolation as exc:
            split, problems = None, [str(exc)]
        if problems:
            bad += 1
            first = first or {"edges": sorted(g), "problems": problems}
            continue
        size = min(len(split.E1), len(split.E2))
        min_e = size if min_e is None else min(min_e, size)
    checks = [Check("min(|E1|, |E2|) >= n/8", Fraction(min_e if min_e is not None else 0), Fraction(n, 8)),
              Check("invalid splits == 0", Fraction(bad), Fraction(0), "==")]
    ctx = {"n": n, "graphs": graphs, "seed": seed, "invalid": bad}
    if first:
        ctx["first_failure"] = first
    return make_report("many-disjoint", True, checks, ctx)
