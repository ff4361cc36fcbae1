"""Closed forms and series for honest play, 1-Lookahead and the universal bounds.

These serve as oracles for the Monte Carlo modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import check_alpha
from .errors import DivergenceError, DomainError

#: Largest stake for which the option tree is subcritical: the root of a^2 - 3a + 1.
RECURRENCE_THRESHOLD = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class SeriesResult:
    value: float
    truncation_index: int
    tail_bound: float


def honest_revenue(alpha: float) -> float:
    return check_alpha(alpha)


def _lookahead_term(alpha: float, i: int) -> float:
    return alpha**i * (1.0 + i * alpha / (1.0 + (i - 1) * alpha))


def lookahead_revenue(alpha: float, tolerance: float = 1e-13) -> SeriesResult:
    """Long-run leader fraction of 1-Lookahead for a fully connected adversary.

    Sums ``(1-a)/(1+a) * sum_i a^i (1 + i a / (1 + (i-1) a))`` until the
    remainder, dominated by ``2 a^(N+1) / (1 + a)``, is below ``tolerance``.
    """
    alpha = check_alpha(alpha)
    if tolerance <= 0:
        raise DomainError("tolerance must be positive")
    scale = (1.0 - alpha) / (1.0 + alpha)
    total = 0.0
    n = 0
    while True:
        n += 1
        total += _lookahead_term(alpha, n)
        tail = 2.0 * alpha ** (n + 1) / (1.0 + alpha)
        if tail < tolerance:
            return SeriesResult(scale * total, n, tail)


def _check_below_threshold(alpha: float, *, inclusive: bool) -> float:
    alpha = check_alpha(alpha)
    ok = alpha <= RECURRENCE_THRESHOLD if inclusive else alpha < RECURRENCE_THRESHOLD
    if not ok:
        raise DomainError(
            f"alpha={alpha} is outside the recurrence regime alpha < (3 - sqrt 5)/2 = {RECURRENCE_THRESHOLD:.6f}"
        )
    return alpha


def offspring_mean(alpha: float) -> float:
    """``a (2 - a) / (1 - a)``, the per-level growth factor of the option tree."""
    alpha = check_alpha(alpha)
    return alpha * (2.0 - alpha) / (1.0 - alpha)


def revenue_upper_bound(alpha: float) -> float:
    """Upper bound on any strategy's revenue, valid up to the threshold (where it equals 1)."""
    return offspring_mean(_check_below_threshold(alpha, inclusive=True))


def expected_stop_bound(alpha: float) -> float:
    """Upper bound ``(1 - a)/(1 - 3a + a^2)`` on the mean time to the first forced stop."""
    alpha = check_alpha(alpha)
    denom = 1.0 - 3.0 * alpha + alpha * alpha
    if alpha >= RECURRENCE_THRESHOLD or denom <= 0.0:
        raise DivergenceError(
            f"bound diverges at alpha={alpha}: 1 - 3a + a^2 = {denom:.3g} "
            f"(threshold (3 - sqrt 5)/2 = {RECURRENCE_THRESHOLD:.6f})"
        )
    return (1.0 - alpha) / denom


def tail_bound(alpha: float, k: int) -> float:
    """``Pr[first forced stop >= k] <= (a (2 - a) / (1 - a))^k``."""
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    return offspring_mean(alpha) ** k
