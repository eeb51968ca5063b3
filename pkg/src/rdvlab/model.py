"""Game domain types: tactics, bindings, strategies, pair sets.

Locations are 1-based everywhere a user can see them. Numpy samplers work on
0-based arrays internally and convert at the boundary.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

Cell = tuple[int, int]


class GameError(ValueError):
    """Invalid game input (bad tactic, mismatched sizes, malformed text)."""


class TacticKind(enum.Enum):
    PASSIVE = "passive"
    ACTIVE = "active"


@dataclass(frozen=True)
class Tactic:
    n: int
    itinerary: tuple[int, ...]

    def __post_init__(self):
        if self.n < 2:
            raise GameError(f"n must be at least 2, got {self.n}")
        if len(self.itinerary) != self.n:
            raise GameError(
                f"itinerary has length {len(self.itinerary)}, expected {self.n}")
        for loc in self.itinerary:
            if not 1 <= loc <= self.n:
                raise GameError(f"location {loc} out of range [1..{self.n}]")

    @property
    def image_size(self) -> int:
        return len(set(self.itinerary))

    def __str__(self):
        return " ".join(map(str, self.itinerary))


def make_tactic(n: int, itinerary: Iterable[int]) -> Tactic:
    try:
        locs = tuple(int(x) for x in itinerary)
    except (TypeError, ValueError) as exc:
        raise GameError(f"itinerary must be integers: {exc}") from None
    return Tactic(int(n), locs)


def classify(t: Tactic) -> TacticKind:
    """Passive iff the tactic visits at most n/2 distinct locations."""
    if 2 * t.image_size <= t.n:
        return TacticKind.PASSIVE
    return TacticKind.ACTIVE


@dataclass(frozen=True)
class Binding:
    """Permutation matching A's numbering to B's: ``mapping[i-1] = pi(i)``."""

    n: int
    mapping: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(1, self.n + 1)):
            raise GameError(f"binding {self.mapping} is not a permutation of [1..{self.n}]")

    def __call__(self, loc: int) -> int:
        return self.mapping[loc - 1]

    def inverse(self) -> "Binding":
        inv = [0] * self.n
        for i, j in enumerate(self.mapping, start=1):
            inv[j - 1] = i
        return Binding(self.n, tuple(inv))


def make_binding(mapping: Iterable[int]) -> Binding:
    mapping = tuple(int(x) for x in mapping)
    return Binding(len(mapping), mapping)


def _check_same_n(*items):
    ns = {x.n for x in items}
    if len(ns) != 1:
        raise GameError(f"location counts differ: {sorted(ns)}")


def play(tA: Tactic, tB: Tactic, binding: Binding) -> int:
    """First round i with pi(tA(i)) == tB(i), or n+1 if the players never meet."""
    _check_same_n(tA, tB, binding)
    for i, (a, b) in enumerate(zip(tA.itinerary, tB.itinerary), start=1):
        if binding(a) == b:
            return i
    return tA.n + 1


@dataclass(frozen=True)
class PairSet:
    n: int
    cells: frozenset[Cell]

    @property
    def m(self) -> int:
        return len(self.cells)


def round_cells(tA: Tactic, tB: Tactic) -> list[Cell]:
    """Cells (tA(i), tB(i)) in round order, keeping only first occurrences."""
    _check_same_n(tA, tB)
    seen = set()
    out = []
    for cell in zip(tA.itinerary, tB.itinerary):
        if cell not in seen:
            seen.add(cell)
            out.append(cell)
    return out


def pair_set(tA: Tactic, tB: Tactic) -> PairSet:
    return PairSet(tA.n, frozenset(round_cells(tA, tB)))


def canonical_pattern(t: Tactic) -> tuple[int, ...]:
    """Relabel locations by order of first visit (restricted growth string, 1-based).

    Waiting-time statistics over a uniform binding only depend on the pair of
    patterns, so this is the cache key for exact computations.
    """
    labels: dict[int, int] = {}
    out = []
    for loc in t.itinerary:
        if loc not in labels:
            labels[loc] = len(labels) + 1
        out.append(labels[loc])
    return tuple(out)


# Samplers produce numpy itinerary streams; see ``ItineraryStream``.
Sampler = Callable[[np.random.Generator, int], "ItineraryStream"]


class ItineraryStream:
    """Lazily generated itineraries for a batch of independent players.

    ``take(k)`` returns the next ``k`` rounds as a ``(rows, k)`` array of 0-based
    locations; ``restrict(rows)`` keeps only the given rows (players that are
    still searching) so later rounds are generated for them alone.
    """

    max_rounds: Optional[int] = None

    def __init__(self, count: int):
        self.count = count
        self.buffer = np.empty((count, 0), dtype=np.int32)
        self.position = 0

    def _generate(self) -> np.ndarray:
        raise NotImplementedError

    def take(self, k: int) -> np.ndarray:
        if self.max_rounds is not None and self.position + k > self.max_rounds:
            raise GameError(
                f"strategy defines only {self.max_rounds} rounds, "
                f"requested {self.position + k}")
        while self.buffer.shape[1] < k:
            self.buffer = np.concatenate([self.buffer, self._generate()], axis=1)
        out, self.buffer = self.buffer[:, :k], self.buffer[:, k:]
        self.position += k
        return out

    def restrict(self, rows: np.ndarray) -> None:
        self.buffer = self.buffer[rows]
        self.count = len(rows)


class TableStream(ItineraryStream):
    def __init__(self, itineraries: np.ndarray):
        super().__init__(itineraries.shape[0])
        self.buffer = itineraries
        self.max_rounds = itineraries.shape[1]


@dataclass(frozen=True)
class Strategy:
    """A distribution over tactics: an exact table, a sampler, or both.

    When both are present the sampler must draw from the table's distribution
    over its first n rounds.
    """

    n: int
    support: Optional[tuple[tuple[Tactic, Fraction], ...]] = None
    sampler: Optional[Sampler] = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise GameError(f"n must be at least 2, got {self.n}")
        if self.support is None and self.sampler is None:
            raise GameError("strategy needs a support table or a sampler")
        if self.support is not None:
            total = Fraction(0)
            for t, w in self.support:
                if t.n != self.n:
                    raise GameError(f"support tactic {t} has n={t.n}, expected {self.n}")
                if w < 0:
                    raise GameError(f"negative weight {w}")
                total += w
            if total != 1:
                raise GameError(f"weights sum to {total}, not 1")

    @property
    def has_table(self) -> bool:
        return self.support is not None

    def stream(self, rng: np.random.Generator, count: int) -> ItineraryStream:
        if self.sampler is not None:
            return self.sampler(rng, count)
        return TableSampler(self.support)(rng, count)

    def sample_tactics(self, rng: np.random.Generator, count: int) -> list[Tactic]:
        """Draw ``count`` n-round tactics from the sampler (or the table)."""
        rows = self.stream(rng, count).take(self.n)
        return [Tactic(self.n, tuple(int(x) + 1 for x in row)) for row in rows]


class TableSampler:
    """Draws whole tactics from an exact table (float weights; n rounds only)."""

    def __init__(self, support: Sequence[tuple[Tactic, Fraction]]):
        self.tactics = np.array([t.itinerary for t, _ in support], dtype=np.int32) - 1
        probs = np.array([float(w) for _, w in support])
        self.probs = probs / probs.sum()

    def __call__(self, rng: np.random.Generator, count: int) -> ItineraryStream:
        idx = rng.choice(len(self.tactics), size=count, p=self.probs)
        return TableStream(self.tactics[idx])


def point_mass(t: Tactic, name: str = "") -> Strategy:
    return Strategy(t.n, ((t, Fraction(1)),), name=name or f"point[{t}]")


def from_weights(n: int, items: Iterable[tuple[Tactic, Fraction]], name: str = "") -> Strategy:
    """Build a table strategy, merging repeated tactics and dropping zero weights."""
    merged: dict[Tactic, Fraction] = {}
    for t, w in items:
        merged[t] = merged.get(t, Fraction(0)) + Fraction(w)
    support = tuple((t, w) for t, w in merged.items() if w != 0)
    return Strategy(n, support, name=name)


def all_tactics(n: int) -> list[Tactic]:
    """Every tactic on n locations (n**n of them), in lexicographic order."""
    if n ** n > 10 ** 6:
        raise GameError(f"refusing to list {n}**{n} tactics")
    return [Tactic(n, it) for it in itertools.product(range(1, n + 1), repeat=n)]


# -- text formats -----------------------------------------------------------

def format_tactics(tactics: Iterable[Tactic]) -> str:
    return "".join(f"{t}\n" for t in tactics)


def parse_tactics(text: str, n: Optional[int] = None) -> list[Tactic]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            locs = [int(x) for x in line.split()]
        except ValueError:
            raise GameError(f"line {lineno}: expected integers, got {line!r}") from None
        out.append(make_tactic(n if n is not None else len(locs), locs))
    return out


def format_strategy(s: Strategy) -> str:
    if s.support is None:
        raise GameError("only table strategies have a text form")
    lines = [f"n={s.n}"]
    for t, w in s.support:
        lines.append(f"{w.numerator}/{w.denominator} : {t}")
    return "\n".join(lines) + "\n"


def parse_strategy(text: str, name: str = "") -> Strategy:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("n="):
        raise GameError("strategy text must start with a 'n=<int>' header")
    try:
        n = int(lines[0][2:])
    except ValueError:
        raise GameError(f"bad header {lines[0]!r}") from None
    items = []
    for ln in lines[1:]:
        if ":" not in ln:
            raise GameError(f"expected '<p>/<q> : <itinerary>', got {ln!r}")
        weight, itin = ln.split(":", 1)
        try:
            w = Fraction(weight.strip())
        except (ValueError, ZeroDivisionError):
            raise GameError(f"bad weight {weight.strip()!r}") from None
        items.append((make_tactic(n, itin.split()), w))
    return Strategy(n, tuple(items), name=name)

