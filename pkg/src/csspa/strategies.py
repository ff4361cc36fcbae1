"""Built-in strategies behind a common interface, plus a name registry for the CLI."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import ProtocolViolation, UnsupportedConfiguration
from .game import WITHHOLD, Decision, GameParams, RoundView
from .vrf import SeedId


class Strategy(ABC):
    """A strategic player's decision rule.

    The engine calls :meth:`decide` once per round and then
    :meth:`declares_stop` to learn whether that round is a stopping time in the
    strategy's own bookkeeping (it has not queried any VRF on the next seed).
    """

    name = "abstract"

    def prepare(self, params: GameParams) -> None:
        """Reject parameters the strategy is not defined for."""

    def reset(self) -> None:
        """Forget all per-cycle state; called at every cycle boundary."""

    @abstractmethod
    def decide(self, view: RoundView) -> Decision: ...

    @abstractmethod
    def declares_stop(self) -> bool: ...


def honest_decide(view: RoundView) -> Decision:
    # Broadcasting only the smallest own score yields the same leader as broadcasting all.
    view.adversary_scores.score(0)
    return Decision.broadcast(0)


class HonestStrategy(Strategy):
    name = "honest"

    def decide(self, view: RoundView) -> Decision:
        return honest_decide(view)

    def declares_stop(self) -> bool:
        return True


@dataclass
class StrategyState:
    pending_broadcast: Optional[tuple[SeedId, int]] = None
    queried: set = field(default_factory=set)
    stop: bool = True
    winner_count: int = 0


def winner_set(view: RoundView) -> range:
    """Ladder indices whose score beats ``B``'s (the only honest score when ``beta == 1``)."""
    return range(view.adversary_scores.count_below(view.score_b))


def lookahead_decide(view: RoundView, state: StrategyState, rng=None) -> Decision:
    """One round of 1-Lookahead; mutates ``state``.

    Without a pending commitment: withhold if no own score beats ``B``.
    Otherwise look one seed ahead under every winning credential, broadcast
    the winner whose seed gives the smallest own score next round, and commit
    to revealing that score in the next round.
    """
    if view.params.beta != 1.0:
        raise UnsupportedConfiguration("1-Lookahead is defined for beta = 1 only")
    if state.pending_broadcast is not None:
        seed, index = state.pending_broadcast
        if seed != view.seed:
            raise ProtocolViolation("pending broadcast refers to a seed that did not materialise")
        state.pending_broadcast = None
        state.queried.clear()
        state.stop = True
        view.adversary_scores.score(index)
        return Decision.broadcast(index)

    winners = winner_set(view)
    state.winner_count = len(winners)
    if not winners:
        state.stop = True
        return WITHHOLD

    best_i, best_next = -1, float("inf")
    for i in winners:
        child = view.query.child(i)
        nxt = view.query.ladder(child).score(0)
        state.queried.add(child)
        if nxt < best_next:
            best_i, best_next = i, nxt
    state.pending_broadcast = (view.query.child(best_i), 0)
    state.stop = False
    return Decision.broadcast(best_i)


class LookaheadStrategy(Strategy):
    name = "lookahead1"

    def __init__(self) -> None:
        self.state = StrategyState()

    def prepare(self, params: GameParams) -> None:
        if params.beta != 1.0:
            raise UnsupportedConfiguration("1-Lookahead is defined for beta = 1 only")

    def reset(self) -> None:
        self.state = StrategyState()

    def decide(self, view: RoundView) -> Decision:
        return lookahead_decide(view, self.state)

    def declares_stop(self) -> bool:
        return self.state.stop


STRATEGIES: dict[str, Callable[[], Strategy]] = {
    HonestStrategy.name: HonestStrategy,
    LookaheadStrategy.name: LookaheadStrategy,
}


def make_strategy(name: str) -> Strategy:
    try:
        return STRATEGIES[name]()
    except KeyError:
        raise UnsupportedConfiguration(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}") from None
