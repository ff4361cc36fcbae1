"""Balanced scoring rules and minimum-score leader selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Optional

import numpy as np

from .errors import DomainError, TieError


def _check_credential(x: float) -> None:
    if not 0.0 < x < 1.0:
        raise DomainError(f"credential must lie in (0, 1), got {x}")


def _check_stake(stake: float) -> None:
    if not 0.0 < stake <= 1.0:
        raise DomainError(f"stake must lie in (0, 1], got {stake}")


def score_exponential(x: float, stake: float) -> float:
    """The rule the engine uses: ``-ln(x) / stake``, distributed ``Exp(stake)``."""
    _check_credential(x)
    _check_stake(stake)
    return -math.log(x) / stake


@dataclass(frozen=True)
class ScoringRule:
    """A canonical rule ``S(x, a) = g(x ** (1/a))`` built from a decreasing ``g``."""

    generator: Callable[[float], float]
    label: str

    def __post_init__(self) -> None:
        grid = np.linspace(0.01, 0.99, 99)
        values = [self.generator(float(x)) for x in grid]
        if any(not b < a for a, b in zip(values, values[1:])):
            raise DomainError(f"generator of rule {self.label!r} is not strictly decreasing")


NEG_LOG = ScoringRule(lambda x: -math.log(x), "neg-log")
ALGORAND = ScoringRule(lambda x: 1.0 - x, "one-minus")


def score_canonical(rule: ScoringRule, x: float, stake: float) -> float:
    _check_credential(x)
    _check_stake(stake)
    return rule.generator(x ** (1.0 / stake))


@dataclass(frozen=True)
class ScoredEntry:
    account_id: Hashable
    credential: float
    stake: float
    score: float

    @classmethod
    def from_credential(
        cls, account_id: Hashable, credential: float, stake: float, rule: Optional[ScoringRule] = None
    ) -> "ScoredEntry":
        if rule is None:
            score = score_exponential(credential, stake)
        else:
            score = score_canonical(rule, credential, stake)
        return cls(account_id, credential, stake, score)


def select_leader(entries: Iterable[ScoredEntry]) -> Optional[Hashable]:
    """Account holding the strictly smallest broadcast score, or ``None`` if nobody broadcast.

    Equal minimal scores raise :class:`TieError`; the model has no point masses,
    so a tie signals a bug rather than something to break lexicographically.
    """
    best: Optional[ScoredEntry] = None
    tied = False
    for e in entries:
        if best is None or e.score < best.score:
            best, tied = e, False
        elif e.score == best.score:
            tied = True
    if tied:
        raise TieError(f"score tie at {best.score}")
    return None if best is None else best.account_id
