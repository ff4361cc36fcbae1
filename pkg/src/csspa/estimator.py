"""Renewal-reward revenue estimation.

Cycles between stopping times are i.i.d., so revenue is the ratio
``E[wins per cycle] / E[rounds per cycle]``.  The 95% interval comes from the
delta method applied to cycle-level sums.  Work is split into fixed-size
chunks, each with its own derived seed.  Only integer moments are merged, so
the estimate is bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

from .errors import DomainError
from .game import Engine, GameParams
from .seeding import SeedLike, child_sequences
from .strategies import Strategy, make_strategy

DEFAULT_ROUND_CAP = 10_000
DEFAULT_CHUNK = 50_000
Z95 = 1.959963984540054

StrategySpec = Union[str, Callable[[], Strategy]]


@dataclass(frozen=True)
class CycleMoments:
    """Integer sums over cycles; merging is exact and order-independent."""

    n: int = 0
    wins: int = 0
    rounds: int = 0
    wins_sq: int = 0
    rounds_sq: int = 0
    cross: int = 0

    def add(self, rounds: int, wins: int) -> "CycleMoments":
        return CycleMoments(
            self.n + 1,
            self.wins + wins,
            self.rounds + rounds,
            self.wins_sq + wins * wins,
            self.rounds_sq + rounds * rounds,
            self.cross + wins * rounds,
        )

    def __add__(self, other: "CycleMoments") -> "CycleMoments":
        return CycleMoments(*(a + b for a, b in zip(self.__dict__.values(), other.__dict__.values())))


@dataclass(frozen=True)
class RevenueEstimate:
    point: float
    ci_low: float
    ci_high: float
    cycles_used: int
    mean_cycle_length: float
    std_error: float
    rounds: int
    wins: int

    @property
    def halfwidth(self) -> float:
        return (self.ci_high - self.ci_low) / 2.0


def ratio_estimate(m: CycleMoments) -> RevenueEstimate:
    """Point estimate and delta-method 95% interval from cycle moments."""
    if m.n < 2:
        raise DomainError("need at least two cycles")
    r = m.wins / m.rounds
    mean_len = m.rounds / m.n
    # sample variance of (w_i - r * t_i), whose mean is zero by construction
    ss = m.wins_sq - 2.0 * r * m.cross + r * r * m.rounds_sq
    var = max(ss, 0.0) / (m.n - 1)
    se = math.sqrt(var / m.n) / mean_len
    lo = max(0.0, r - Z95 * se)
    hi = min(1.0, r + Z95 * se)
    return RevenueEstimate(r, min(lo, r), max(hi, r), m.n, mean_len, se, m.rounds, m.wins)


def _resolve(strategy: StrategySpec) -> Strategy:
    if isinstance(strategy, str):
        return make_strategy(strategy)
    if isinstance(strategy, Strategy):
        raise TypeError("pass a strategy name or factory so each chunk gets fresh state")
    return strategy()


def _run_chunk(params: GameParams, strategy: StrategySpec, cycles: int, seed, round_cap: int) -> CycleMoments:
    strat = _resolve(strategy)
    strat.prepare(params)
    engine = Engine(params, seed)
    n = wins = rounds = wsq = rsq = cross = 0
    for _ in range(cycles):
        rec = engine.run_cycle(strat, round_cap)
        n += 1
        wins += rec.wins
        rounds += rec.rounds
        wsq += rec.wins * rec.wins
        rsq += rec.rounds * rec.rounds
        cross += rec.wins * rec.rounds
    return CycleMoments(n, wins, rounds, wsq, rsq, cross)


def estimate_revenue(
    params: GameParams,
    strategy: StrategySpec,
    cycles: int,
    rng: SeedLike = 0,
    *,
    round_cap: int = DEFAULT_ROUND_CAP,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> RevenueEstimate:
    """Estimate the long-run leader fraction of ``strategy`` over ``cycles`` renewal cycles.

    Raises :class:`~csspa.errors.NonRecurrenceError` if any cycle exceeds ``round_cap`` rounds.
    """
    if cycles < 100:
        raise DomainError("at least 100 cycles are needed for a meaningful interval")
    if chunk < 1 or workers < 1:
        raise DomainError("chunk and workers must be >= 1")
    sizes = [chunk] * (cycles // chunk)
    if cycles % chunk:
        sizes.append(cycles % chunk)
    seeds = child_sequences(rng, len(sizes))
    jobs = [(params, strategy, size, seed, round_cap) for size, seed in zip(sizes, seeds)]
    if workers == 1 or len(jobs) == 1:
        parts = [_run_chunk(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, *zip(*jobs)))
    total = CycleMoments()
    for part in parts:
        total = total + part
    return ratio_estimate(total)
