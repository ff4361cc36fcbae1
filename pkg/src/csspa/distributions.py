"""Exponential primitives and the incremental order-statistics sampler.

An adversary who splits stake ``alpha`` over infinitely many wallets is never
materialised wallet by wallet.  Only its smallest scores matter, and those are
generated lazily: the first is ``Exp(alpha)`` and every later one adds a fresh
``Exp(alpha)`` increment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

from .errors import DomainError, TieError

Rate = float


class RandomStream(Protocol):
    def random(self) -> float: ...


def check_rate(rate: Rate, *, allow_zero: bool = False) -> float:
    rate = float(rate)
    if math.isnan(rate) or rate < 0 or (rate == 0 and not allow_zero):
        raise DomainError(f"rate must be {'>= 0' if allow_zero else '> 0'}, got {rate}")
    return rate


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"stake fraction must lie in (0, 1), got {alpha}")
    return alpha


def exp_from_uniform(u: float, rate: Rate) -> float:
    """Inverse-CDF map of one uniform draw ``u`` in (0, 1) to ``Exp(rate)``."""
    rate = check_rate(rate)
    if not 0.0 < u < 1.0:
        raise DomainError(f"uniform draw must lie in (0, 1), got {u}")
    return -math.log(u) / rate


def open_uniform(rng: RandomStream) -> float:
    """One draw from the open interval (0, 1)."""
    while True:
        u = rng.random()
        if 0.0 < u < 1.0:
            return u


def sample_exp(rate: Rate, rng: RandomStream) -> float:
    """One independent ``Exp(rate)`` sample, consuming exactly one uniform.

    ``rate == 0`` stands for the point mass at infinity; it can be compared
    against (see :func:`prob_first_smaller`) but never sampled.
    """
    rate = check_rate(rate)
    return exp_from_uniform(open_uniform(rng), rate)


def prob_first_smaller(rate_x: Rate, rate_y: Rate) -> float:
    """``Pr[X < Y]`` for independent ``X ~ Exp(rate_x)``, ``Y ~ Exp(rate_y)``.

    A zero rate is the point mass at infinity, so the other side is smaller
    with certainty.
    """
    rate_x = check_rate(rate_x, allow_zero=True)
    rate_y = check_rate(rate_y, allow_zero=True)
    if rate_x == 0 and rate_y == 0:
        raise DomainError("both rates are zero; the comparison is undefined")
    return rate_x / (rate_x + rate_y)


def winner_pmf(alpha: float, j: int) -> float:
    """Probability that exactly ``j`` adversary scores beat the best honest score."""
    alpha = check_alpha(alpha)
    if j < 0:
        raise DomainError(f"count must be >= 0, got {j}")
    return alpha**j * (1.0 - alpha)


def winner_cdf(alpha: float, j: int) -> float:
    """``Pr[G <= j]``, i.e. the closed-form partial sum ``1 - alpha**(j+1)``."""
    alpha = check_alpha(alpha)
    if j < 0:
        return 0.0
    return 1.0 - alpha ** (j + 1)


@dataclass
class ScoreSequence:
    """The smallest scores of an infinitely split stake, in increasing order."""

    base_rate: float
    scores: list[float] = field(default_factory=list)
    extendable: bool = True

    def __post_init__(self) -> None:
        self.base_rate = check_rate(self.base_rate)
        for prev, cur in zip(self.scores, self.scores[1:]):
            if not cur > prev:
                raise TieError(f"scores must be strictly increasing: {prev} then {cur}")

    def __len__(self) -> int:
        return len(self.scores)

    def __getitem__(self, i: int) -> float:
        return self.scores[i]

    def append_increments(self, increments: Iterable[float]) -> "ScoreSequence":
        """New sequence with the given positive gaps appended (self is left unchanged)."""
        if not self.extendable:
            raise DomainError("sequence is frozen")
        out = list(self.scores)
        last = out[-1] if out else 0.0
        for inc in increments:
            nxt = last + inc
            if not nxt > last:
                raise TieError(f"increment {inc} does not advance the score past {last}")
            out.append(nxt)
            last = nxt
        return ScoreSequence(self.base_rate, out, self.extendable)

    def count_below(self, threshold: float) -> int:
        """Number of stored scores strictly below ``threshold``."""
        n = 0
        for s in self.scores:
            if s >= threshold:
                break
            n += 1
        return n


def extend_order_stats(seq: ScoreSequence, k: int, rng: RandomStream) -> ScoreSequence:
    """Append ``k`` further order statistics, each previous + ``Exp(base_rate)``."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    return seq.append_increments(sample_exp(seq.base_rate, rng) for _ in range(k))


def sample_min_with_argmin(rates: Sequence[float], rng: RandomStream) -> tuple[float, int]:
    """Draw one ``Exp(rate_i)`` per rate and return ``(min, argmin)``."""
    draws = [sample_exp(r, rng) for r in rates]
    i = min(range(len(draws)), key=draws.__getitem__)
    return draws[i], i
