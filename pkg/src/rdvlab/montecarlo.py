"""Seeded Monte Carlo estimates of the waiting time for sampler-backed strategies.

Trials are cut into fixed-size chunks; chunk ``c`` draws from its own Philox
stream keyed by ``(seed, c, role)``. Chunk boundaries do not depend on the
number of workers and integer totals are summed exactly, so results are
identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .model import GameError, Strategy
from .zoo import AWConfig, BlockMode, anderson_weber

CHUNK_TRIALS = 4096
_ROLES = {"binding": 0, "a": 1, "b": 2}


@dataclass(frozen=True)
class MCEstimate:
    trials: int
    horizon: int
    mean: float
    std_error: float
    meet_fraction: float
    seed: int

    def as_dict(self) -> dict:
        return asdict(self)


def chunk_rng(seed: int, chunk: int, role: str) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(chunk, _ROLES[role]))
    return np.random.Generator(np.random.Philox(ss))


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("RDV_WORKERS", "1")))
    except ValueError:
        return 1


def simulate_chunk(sA: Strategy, sB: Strategy, horizon: int, count: int,
                   seed: int, chunk: int) -> np.ndarray:
    """Waiting times (1..horizon+1) for ``count`` independent games."""
    n = sA.n
    pi = chunk_rng(seed, chunk, "binding").permuted(
        np.tile(np.arange(n, dtype=np.int32), (count, 1)), axis=1)
    streams = (sA.stream(chunk_rng(seed, chunk, "a"), count),
               sB.stream(chunk_rng(seed, chunk, "b"), count))
    waits = np.full(count, horizon + 1, dtype=np.int64)
    active = np.arange(count)
    played = 0
    while played < horizon and len(active):
        k = min(n, horizon - played)
        a, b = (s.take(k) for s in streams)
        hits = np.take_along_axis(pi[active], a, axis=1) == b
        met = hits.any(axis=1)
        waits[active[met]] = played + hits[met].argmax(axis=1) + 1
        played += k
        keep = np.flatnonzero(~met)
        if len(keep) < len(active):
            for s in streams:
                s.restrict(keep)
            active = active[keep]
    return waits


def _chunk_totals(args) -> tuple[int, int, int]:
    sA, sB, horizon, count, seed, chunk = args
    w = simulate_chunk(sA, sB, horizon, count, seed, chunk)
    return int(w.sum()), int((w * w).sum()), int((w <= horizon).sum())


def _check(sA: Strategy, sB: Strategy, horizon: int, trials: int):
    if sA.n != sB.n:
        raise GameError("strategies have different location counts")
    if horizon < sA.n:
        raise GameError(f"horizon {horizon} shorter than n={sA.n}")
    if trials < 1:
        raise GameError("need at least one trial")


def _map(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def estimate_expected_waiting(sA: Strategy, sB: Strategy, horizon: int, trials: int,
                              seed: int, workers: int = 1) -> MCEstimate:
    _check(sA, sB, horizon, trials)
    jobs = []
    for chunk, start in enumerate(range(0, trials, CHUNK_TRIALS)):
        jobs.append((sA, sB, horizon, min(CHUNK_TRIALS, trials - start), seed, chunk))
    totals = _map(_chunk_totals, jobs, workers)
    s1 = sum(t[0] for t in totals)
    s2 = sum(t[1] for t in totals)
    met = sum(t[2] for t in totals)
    mean = s1 / trials
    if trials > 1:
        var = (s2 - s1 * s1 / trials) / (trials - 1)
        se = math.sqrt(max(var, 0.0) / trials)
    else:
        se = 0.0
    return MCEstimate(trials, horizon, mean, se, met / trials, seed)


def aw_scan(n: int, thetas: Iterable[float], horizon: int, trials: int, seed: int,
            workers: int = 1) -> list[tuple[float, MCEstimate]]:
    """Symmetric multi-block AW estimates, one row per theta.

    Every theta reuses the same seed (common random numbers), which keeps the
    comparison between neighbouring thetas sharper.
    """
    rows = []
    for theta in thetas:
        s = anderson_weber(AWConfig(n, float(theta), BlockMode.MULTIBLOCK, horizon))
        rows.append((float(theta), estimate_expected_waiting(s, s, horizon, trials, seed, workers)))
    return rows


CSV_FIELDS = ("theta", "trials", "horizon", "mean", "std_error", "meet_fraction", "seed", "mean_over_n")


def scan_to_csv(rows: Sequence[tuple[float, MCEstimate]], n: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for theta, est in rows:
        writer.writerow([repr(theta), est.trials, est.horizon, repr(est.mean), repr(est.std_error),
                         repr(est.meet_fraction), est.seed, repr(est.mean / n)])
    return buf.getvalue()


def best_theta(rows: Sequence[tuple[float, MCEstimate]]) -> tuple[float, MCEstimate]:
    return min(rows, key=lambda r: r[1].mean)


def fresh_seed(explicit: Optional[int] = None) -> int:
    if explicit is not None:
        return int(explicit)
    return int(np.random.SeedSequence().entropy % (1 << 63))
