"""Canonical strategies: wait-for-mommy, Anderson-Weber, uniform random."""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .model import (
    GameError,
    ItineraryStream,
    Strategy,
    Tactic,
    all_tactics,
    from_weights,
    point_mass,
)

AW_TABLE_MAX_N = 5
UNIFORM_TABLE_MAX_N = 4


def baby_tactic(n: int) -> Tactic:
    return Tactic(n, (1,) * n)


def mommy_tactic(n: int) -> Tactic:
    return Tactic(n, tuple(range(1, n + 1)))


class _ConstantStream(ItineraryStream):
    """Stays at location 1 forever."""

    def __init__(self, count, n):
        super().__init__(count)
        self.n = n

    def _generate(self):
        return np.zeros((self.count, self.n), dtype=np.int32)


class _SweepStream(ItineraryStream):
    """Visits 1..n in order, then starts over."""

    def __init__(self, count, n):
        super().__init__(count)
        self.n = n

    def _generate(self):
        return np.tile(np.arange(self.n, dtype=np.int32), (self.count, 1))


def _constant_stream(n, rng, count):
    return _ConstantStream(count, n)


def _sweep_stream(n, rng, count):
    return _SweepStream(count, n)


def wait_for_mommy_pair(n: int) -> tuple[Strategy, Strategy]:
    """Point-mass baby (always location 1) and mommy (identity sweep).

    The samplers extend both tactics past round n so they can be simulated at any
    horizon: the baby keeps waiting and the mommy repeats her sweep.
    """
    baby = point_mass(baby_tactic(n), name="baby")
    mommy = point_mass(mommy_tactic(n), name="mommy")
    return (
        Strategy(n, baby.support, functools.partial(_constant_stream, n), "baby"),
        Strategy(n, mommy.support, functools.partial(_sweep_stream, n), "mommy"),
    )


class BlockMode(enum.Enum):
    TRUNCATED = "truncated"
    MULTIBLOCK = "multiblock"


@dataclass(frozen=True)
class AWConfig:
    n: int
    theta: Union[Fraction, float]
    block_mode: BlockMode = BlockMode.TRUNCATED
    horizon: Optional[int] = None

    def __post_init__(self):
        if self.n < 2:
            raise GameError(f"n must be at least 2, got {self.n}")
        if not 0 <= self.theta <= 1:
            raise GameError(f"theta must lie in [0, 1], got {self.theta}")
        if self.block_mode is BlockMode.MULTIBLOCK:
            if self.horizon is None:
                raise GameError("multiblock mode needs a horizon")
            if self.horizon < self.n:
                raise GameError(f"horizon {self.horizon} shorter than n={self.n}")


class _AWStream(ItineraryStream):
    """Blocks of n-1 rounds: stay somewhere (prob theta) or sweep n-1 distinct locations."""

    def __init__(self, rng, count, n, theta, max_rounds):
        super().__init__(count)
        self.rng, self.n, self.theta = rng, n, float(theta)
        self.max_rounds = max_rounds

    def _generate(self):
        n, count, rng = self.n, self.count, self.rng
        stay = rng.random(count) < self.theta
        spot = rng.integers(0, n, size=count, dtype=np.int32)
        sweep = rng.permuted(np.tile(np.arange(n, dtype=np.int32), (count, 1)), axis=1)[:, : n - 1]
        return np.where(stay[:, None], spot[:, None], sweep)


def _aw_stream(n, theta, rounds, rng, count):
    return _AWStream(rng, count, n, theta, rounds)


def _aw_table(n: int, theta: Fraction) -> Strategy:
    # one block of n-1 rounds, then round n opens a fresh block; whichever branch
    # that block takes, its first location is uniform
    stay_w = theta / (n * n)
    sweep_w = (1 - theta) / (math.factorial(n) * n)
    items = []
    for last in range(1, n + 1):
        for loc in range(1, n + 1):
            items.append((Tactic(n, (loc,) * (n - 1) + (last,)), stay_w))
        for seq in itertools.permutations(range(1, n + 1), n - 1):
            items.append((Tactic(n, seq + (last,)), sweep_w))
    return from_weights(n, items, name=f"aw(theta={theta})")


def anderson_weber(cfg: AWConfig) -> Strategy:
    """Anderson-Weber strategy with per-block stay probability ``cfg.theta``.

    In truncated mode the game lasts n rounds: one full block and the first round
    of the next. A table is attached for truncated mode when n <= 5 and theta is
    given exactly (Fraction or int).
    """
    n = cfg.n
    rounds = n if cfg.block_mode is BlockMode.TRUNCATED else cfg.horizon
    theta = cfg.theta
    sample = functools.partial(_aw_stream, n, theta, rounds)
    support = None
    if cfg.block_mode is BlockMode.TRUNCATED and n <= AW_TABLE_MAX_N and not isinstance(theta, float):
        support = _aw_table(n, Fraction(theta)).support
    name = f"aw(theta={theta}, {cfg.block_mode.value})"
    return Strategy(n, support, sample, name)


class _UniformStream(ItineraryStream):
    def __init__(self, rng, count, n):
        super().__init__(count)
        self.rng, self.n = rng, n

    def _generate(self):
        return self.rng.integers(0, self.n, size=(self.count, self.n), dtype=np.int32)


def _uniform_stream(n, rng, count):
    return _UniformStream(rng, count, n)


def uniform_random_strategy(n: int) -> Strategy:
    """Every round an independent uniform location; table attached for n <= 4."""
    if n < 2:
        raise GameError(f"n must be at least 2, got {n}")
    support = None
    if n <= UNIFORM_TABLE_MAX_N:
        w = Fraction(1, n ** n)
        support = tuple((t, w) for t in all_tactics(n))
    return Strategy(n, support, functools.partial(_uniform_stream, n), "uniform")


def all_constant_strategy(n: int) -> Strategy:
    """Uniform over the n tactics that stay put."""
    w = Fraction(1, n)
    return Strategy(n, tuple((Tactic(n, (loc,) * n), w) for loc in range(1, n + 1)),
                    name="all-stay")
