"""Round engine for the refined self-selection game.

One strategic player holds stake ``alpha`` split over infinitely many wallets.
Honest stake is pooled into two aggregate players.  ``B`` holds
``beta * (1 - alpha)``, and the adversary sees its credential before acting.
``C`` holds ``(1 - beta) * (1 - alpha)``, and the adversary does not see it.
Every round the engine does the following:

1. derives ``B``'s and ``C``'s scores and the adversary's score ladder for the
   current seed from the emulated VRF,
2. shows the strategy a :class:`RoundView` (no ``C`` score; no VRF queries if
   ``B`` already beats the adversary's best score),
3. resolves the leader among the broadcast scores,
4. extends the seed path by that leader and reports whether the round was a
   stopping time.

A cycle ends at every stopping time, whether the strategy declares it or it is
forced because an honest score was globally minimal.  At that point the
trial-local ladder cache is dropped and a fresh root seed begins.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Hashable, Optional

from . import vrf
from .distributions import ScoreSequence, check_alpha
from .errors import DomainError, NonRecurrenceError, ProtocolViolation, QueryDisabled, TieError
from .scoring import ScoredEntry, select_leader
from .seeding import SeedLike, generator
from .vrf import AccountSecret, SeedId

if TYPE_CHECKING:
    from .strategies import Strategy

HONEST_B = "B"
HONEST_C = "C"


def adversary_account(index: int) -> str:
    """Synthetic identity of the adversary's ``index``-th smallest score under a seed."""
    return f"A{index}"


def is_adversary_account(account: Hashable) -> bool:
    return isinstance(account, str) and account.startswith("A")


@dataclass(frozen=True)
class GameParams:
    alpha: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        check_alpha(self.alpha)
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"beta must lie in [0, 1], got {self.beta}")

    @property
    def rate_adversary(self) -> float:
        return self.alpha

    @property
    def rate_b(self) -> float:
        return self.beta * (1.0 - self.alpha)

    @property
    def rate_c(self) -> float:
        return (1.0 - self.beta) * (1.0 - self.alpha)


class LeaderClass(enum.Enum):
    ADVERSARY = "adversary"
    HONEST_B = "honest_b"
    HONEST_C = "honest_c"


@dataclass(frozen=True)
class Decision:
    """Broadcast the adversary credential at ``index`` in the ladder, or withhold (``None``)."""

    index: Optional[int] = None

    @classmethod
    def broadcast(cls, index: int) -> "Decision":
        if index < 0:
            raise ProtocolViolation(f"negative ladder index {index}")
        return cls(int(index))

    @property
    def withholds(self) -> bool:
        return self.index is None


WITHHOLD = Decision(None)


class Ladder:
    """The adversary's own scores under one seed, materialised on demand.

    Entry ``k`` is the ``k``-th order statistic of an ``Exp(alpha)`` split
    stake.  It is built as a running sum of VRF-derived ``Exp(alpha)`` gaps.
    """

    __slots__ = ("seed", "rate", "_secret", "_scores")

    def __init__(self, secret: AccountSecret, seed: SeedId, rate: float) -> None:
        self.seed = seed
        self.rate = rate
        self._secret = secret
        self._scores: list[float] = []

    def __len__(self) -> int:
        return len(self._scores)

    def score(self, k: int) -> float:
        scores = self._scores
        while len(scores) <= k:
            i = len(scores)
            gap = -math.log(vrf.evaluate(self._secret, self.seed, i)) / self.rate
            nxt = (scores[-1] if scores else 0.0) + gap
            if scores and not nxt > scores[-1]:
                raise TieError(f"ladder entry {i} ties its predecessor at {nxt}")
            scores.append(nxt)
        return scores[k]

    def count_below(self, threshold: float, cap: Optional[int] = None) -> int:
        """How many entries lie strictly below ``threshold`` (at most ``cap``)."""
        k = 0
        while (cap is None or k < cap) and self.score(k) < threshold:
            k += 1
        return k

    def sequence(self) -> ScoreSequence:
        return ScoreSequence(self.rate, list(self._scores))


class QueryHandle:
    """Lets a strategy evaluate its own VRFs on hypothetical future seeds.

    A reachable seed extends the current seed by one step led by an adversary
    account or ``B`` in the current round, followed by adversary-only steps in
    consecutive rounds.  Honest secrets are never reachable through this
    handle.
    """

    __slots__ = ("_engine", "seed", "round_index", "enabled")

    def __init__(self, engine: "Engine", seed: SeedId, round_index: int, enabled: bool) -> None:
        self._engine = engine
        self.seed = seed
        self.round_index = round_index
        self.enabled = enabled

    def child(self, index: int, parent: Optional[SeedId] = None) -> SeedId:
        """Seed that follows ``parent`` (default: the current seed) if adversary entry ``index`` leads."""
        parent = self.seed if parent is None else parent
        round_index = self.round_index + parent.depth - self.seed.depth
        return parent.extend(round_index, adversary_account(index))

    def ladder(self, seed: SeedId) -> Ladder:
        if not self.enabled:
            raise QueryDisabled("no computation is allowed this round")
        self._check_reachable(seed)
        return self._engine.ladder(seed)

    def _check_reachable(self, seed: SeedId) -> None:
        cur = self.seed
        if not cur.is_prefix_of(seed) or seed.depth == cur.depth:
            raise ProtocolViolation(f"seed {seed} is not a future of the current seed")
        for offset, (rnd, account) in enumerate(seed.path[cur.depth :]):
            if rnd != self.round_index + offset:
                raise ProtocolViolation(f"seed path skips rounds: {seed.path}")
            allowed = is_adversary_account(account) or (offset == 0 and account == HONEST_B)
            if not allowed:
                raise ProtocolViolation(f"cannot evaluate VRFs through account {account!r}")


@dataclass
class RoundView:
    """What the strategic player legally sees before acting."""

    params: GameParams
    seed: SeedId
    round_index: int
    adversary_scores: Ladder
    score_b: float
    query: QueryHandle

    @property
    def best_own(self) -> float:
        return self.adversary_scores.score(0)


@dataclass(frozen=True)
class RoundOutcome:
    leader_class: LeaderClass
    leader: Hashable
    next_seed: SeedId
    forced_stop: bool
    stop: bool
    decision: Decision

    @property
    def adversary_won(self) -> bool:
        return self.leader_class is LeaderClass.ADVERSARY


@dataclass(frozen=True)
class CycleRecord:
    """Rounds and adversary wins between consecutive stopping times."""

    rounds: int
    wins: int

    def __post_init__(self) -> None:
        if self.rounds < 1 or not 0 <= self.wins <= self.rounds:
            raise ValueError(f"invalid cycle record {self}")


class CycleLog(list):
    """Completed cycles, plus the rounds of a trailing cycle cut off by the budget."""

    discarded_rounds: int = 0
    discarded_wins: int = 0


def resolve_round(
    score_b: float, score_c: float, adversary_best: float, decision: Decision, adversary_score: Optional[float]
) -> tuple[LeaderClass, bool]:
    """Leader class and forced-stop flag from already-sampled scores.

    ``adversary_score`` is the broadcast credential's score (ignored on withhold).
    """
    entries = [
        ScoredEntry(HONEST_B, math.nan, 0.0, score_b),
        ScoredEntry(HONEST_C, math.nan, 0.0, score_c),
    ]
    if not decision.withholds:
        if adversary_score is None:
            raise ProtocolViolation("broadcast decision without a score")
        entries.append(ScoredEntry("A", math.nan, 0.0, adversary_score))
    leader = select_leader(entries)
    honest_min = min(score_b, score_c)
    if honest_min == adversary_best:
        raise TieError(f"honest and adversary scores tie at {honest_min}")
    cls = {HONEST_B: LeaderClass.HONEST_B, HONEST_C: LeaderClass.HONEST_C}.get(leader, LeaderClass.ADVERSARY)
    return cls, honest_min < adversary_best


class Engine:
    """One trial: secrets, a trial-local ladder cache and the round counter."""

    def __init__(self, params: GameParams, rng: SeedLike = None) -> None:
        self.params = params
        g = generator(rng)
        self.adversary_secret = AccountSecret.generate(g)
        self._b_secret = AccountSecret.generate(g)
        self._c_secret = AccountSecret.generate(g)
        self._root_base = int(g.integers(0, 2**62))
        self._roots = 0
        self._ladders: dict[SeedId, Ladder] = {}
        self.round_index = 0
        self.total_rounds = 0
        self.total_wins = 0

    def bootstrap(self) -> SeedId:
        """Fresh unbiased root seed; drops every memoised ladder."""
        self._ladders.clear()
        seed = SeedId.bootstrap(self._root_base + self._roots)
        self._roots += 1
        return seed

    def ladder(self, seed: SeedId) -> Ladder:
        lad = self._ladders.get(seed)
        if lad is None:
            lad = self._ladders[seed] = Ladder(self.adversary_secret, seed, self.params.alpha)
        return lad

    def _honest_score(self, secret: AccountSecret, seed: SeedId, rate: float) -> float:
        if rate == 0.0:
            return math.inf
        return -math.log(vrf.evaluate(secret, seed)) / rate

    def play_round(self, seed: SeedId, strategy: "Strategy") -> RoundOutcome:
        p = self.params
        r = self.round_index
        ladder = self.ladder(seed)
        best_own = ladder.score(0)
        score_b = self._honest_score(self._b_secret, seed, p.rate_b)
        score_c = self._honest_score(self._c_secret, seed, p.rate_c)

        query = QueryHandle(self, seed, r, enabled=not score_b < best_own)
        view = RoundView(p, seed, r, ladder, score_b, query)
        decision = strategy.decide(view)
        query.enabled = False
        if not isinstance(decision, Decision):
            raise ProtocolViolation(f"strategy must return one Decision, got {decision!r}")

        adv_score = None
        if not decision.withholds:
            if decision.index >= len(ladder):
                raise ProtocolViolation(f"broadcast of unsampled ladder index {decision.index}")
            adv_score = ladder.score(decision.index)
        leader_class, forced = resolve_round(score_b, score_c, best_own, decision, adv_score)
        if leader_class is LeaderClass.ADVERSARY:
            leader = adversary_account(decision.index)
        else:
            leader = HONEST_B if leader_class is LeaderClass.HONEST_B else HONEST_C

        stop = forced or strategy.declares_stop()
        self.round_index += 1
        self.total_rounds += 1
        won = leader_class is LeaderClass.ADVERSARY
        self.total_wins += won
        return RoundOutcome(leader_class, leader, seed.extend(r, leader), forced, stop, decision)

    def run_cycle(self, strategy: "Strategy", round_cap: Optional[int] = None) -> CycleRecord:
        """Play from a fresh root until the first stopping time."""
        strategy.reset()
        seed = self.bootstrap()
        rounds = wins = 0
        while True:
            out = self.play_round(seed, strategy)
            rounds += 1
            wins += out.adversary_won
            if out.stop:
                return CycleRecord(rounds, wins)
            if round_cap is not None and rounds >= round_cap:
                raise NonRecurrenceError(
                    f"cycle exceeded {round_cap} rounds at alpha={self.params.alpha}: possible non-recurrence"
                )
            seed = out.next_seed


def play_round(
    seed: SeedId, params: GameParams, strategy: "Strategy", rng: SeedLike = None, engine: Optional[Engine] = None
) -> RoundOutcome:
    """Play a single round; builds a throwaway :class:`Engine` unless one is given."""
    if engine is None:
        engine = Engine(params, rng)
    elif engine.params != params:
        raise DomainError("engine was built for different parameters")
    strategy.prepare(params)
    return engine.play_round(seed, strategy)


def run_cycles(
    params: GameParams,
    strategy: "Strategy",
    budget: int,
    rng: SeedLike = None,
    trace: Optional[list] = None,
) -> CycleLog:
    """Play ``budget`` rounds and return the completed cycles.

    A cycle still open when the budget runs out is dropped; its size is kept on
    the returned log.  ``trace``, if given, receives ``(seed, outcome)`` per round.
    """
    log = CycleLog()
    if budget <= 0:
        return log
    strategy.prepare(params)
    engine = Engine(params, rng)
    strategy.reset()
    seed = engine.bootstrap()
    rounds = wins = 0
    for _ in range(budget):
        out = engine.play_round(seed, strategy)
        if trace is not None:
            trace.append((seed, out))
        rounds += 1
        wins += out.adversary_won
        if out.stop:
            log.append(CycleRecord(rounds, wins))
            rounds = wins = 0
            strategy.reset()
            seed = engine.bootstrap()
        else:
            seed = out.next_seed
    log.discarded_rounds, log.discarded_wins = rounds, wins
    return log
