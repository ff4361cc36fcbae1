"""Optimal strategies via value functions on truncated option trees.

For a target revenue ``rho`` the value of a policy is the expected surplus
``sum (X_r - rho)`` over one renewal cycle.  It is zero exactly when ``rho``
is the policy's revenue, so the best achievable revenue is bracketed by a
binary search on the sign of the optimal value.

The infinite game is truncated to ``depth`` rounds with continuation value 0
at the horizon.  Nodes carry the adversary's own-score ladder under a seed.
The visible honest score ``h ~ Exp(1 - alpha)`` is integrated out in closed
form: the node has exactly ``j`` winning credentials with probability
``s_{j-1} - s_j``, where ``s_k = exp(-(1 - alpha) L_k)``.  Each node has three
kinds of action:

* withhold: the honest player leads, reward ``-rho``, then a reset (value 0);
* broadcast winner ``i`` and stop: reward ``1 - rho``, then a reset;
* broadcast winner ``i`` and continue: reward ``1 - rho`` plus the value of
  the subtree under seed ``i``.

The second action is what makes 0 the floor on continuation values.  Deeper
trees can therefore only add options, and ``best_value`` is exactly monotone
in depth and in ``rho`` when scenarios are shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from .analytics import RECURRENCE_THRESHOLD, revenue_upper_bound
from .distributions import check_alpha
from .errors import DomainError, ResourceError, UnsupportedConfiguration
from .game import WITHHOLD, Decision, GameParams, RoundView
from .seeding import SeedLike, child_sequences, generator, seed_sequence
from .strategies import Strategy

DEFAULT_MAX_OPTIONS = 32
#: Winner counts with probability below this are folded into the last option.
OPTION_TAIL_MASS = 1e-12
MAX_ENTRIES = 50_000_000
Z95 = 1.959963984540054


def option_cap(alpha: float, max_options: int = DEFAULT_MAX_OPTIONS) -> int:
    """Ladder entries kept per node: enough that ``alpha^K`` is negligible, at most ``max_options``."""
    alpha = check_alpha(alpha)
    if max_options < 1:
        raise DomainError("max_options must be >= 1")
    needed = math.ceil(math.log(OPTION_TAIL_MASS) / math.log(alpha))
    return max(1, min(max_options, needed))


def _check_rho(rho: float) -> float:
    if not 0.0 <= rho <= 1.0 or math.isnan(rho):
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    return float(rho)


def _check_depth_samples(depth: int, samples: int) -> None:
    if depth < 1:
        raise DomainError("depth must be >= 1")
    if samples < 1:
        raise DomainError("samples must be >= 1")


@dataclass(frozen=True)
class ValueEstimate:
    value: float
    std_error: float
    samples: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.value) or not self.std_error >= 0:
            raise ValueError(f"invalid value estimate {self}")

    @property
    def ci(self) -> tuple[float, float]:
        return self.value - Z95 * self.std_error, self.value + Z95 * self.std_error


def _estimate(values: np.ndarray) -> ValueEstimate:
    n = values.size
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return ValueEstimate(float(values.mean()), se, n)


# ---------------------------------------------------------------------------
# node values shared by the vectorised solver, the trajectory simulator and
# the engine rollout


class _Node(Protocol):
    def score(self, k: int) -> float: ...

    def child(self, i: int) -> "_Node": ...


def _survival(alpha: float, score: float) -> float:
    return math.exp(-(1.0 - alpha) * score)


def subtree_value(node: _Node, remaining: int, alpha: float, rho: float, options: int) -> float:
    """Optimal truncated value of ``node`` with ``remaining`` rounds left, honest score integrated out."""
    s0 = _survival(alpha, node.score(0))
    if remaining <= 1:
        return s0 - rho
    s = [s0] + [_survival(alpha, node.score(k)) for k in range(1, options)]
    total = 0.0
    best = 0.0
    for j in range(1, options + 1):
        best = max(best, subtree_value(node.child(j - 1), remaining - 1, alpha, rho, options))
        p = s[j - 1] - (s[j] if j < options else 0.0)
        total += p * best
    return (s0 - rho) + total


def choose(node: _Node, winners: int, remaining: int, alpha: float, rho: float, options: int) -> tuple[Optional[int], bool]:
    """Greedy action ``(broadcast index or None, stop)`` given the realised winner count."""
    if winners == 0:
        return None, True
    if remaining <= 1:
        return 0, True
    best_i, best_c = 0, 0.0
    for i in range(min(winners, options)):
        c = subtree_value(node.child(i), remaining - 1, alpha, rho, options)
        if c > best_c:
            best_i, best_c = i, c
    if best_c > 0.0:
        return best_i, False
    return 0, True


# ---------------------------------------------------------------------------
# vectorised backward induction over sampled scenario trees


@dataclass
class Scenarios:
    """Sampled own-score ladders, level by level.

    Level ``l`` holds ``options^l`` nodes per sample.  ``first[l]`` is the
    survival of each node's smallest score.  ``full[l]`` is the survival of
    the whole ladder, present only for levels that are not the horizon.
    Every level is drawn from its own stream, so trees of different depths
    from one seed agree on their common levels.
    """

    alpha: float
    depth: int
    samples: int
    options: int
    first: list[np.ndarray] = field(repr=False)
    full: list[Optional[np.ndarray]] = field(repr=False)


def _entries(samples: int, depth: int, options: int) -> int:
    return samples * (sum(options ** (l + 1) for l in range(depth - 1)) + options ** (depth - 1))


def sample_scenarios(
    alpha: float, depth: int, samples: int, rng: SeedLike = None, max_options: int = DEFAULT_MAX_OPTIONS
) -> Scenarios:
    alpha = check_alpha(alpha)
    _check_depth_samples(depth, samples)
    K = option_cap(alpha, max_options)
    if _entries(samples, depth, K) > MAX_ENTRIES:
        raise ResourceError(
            f"depth={depth}, samples={samples}, options={K} needs {_entries(samples, depth, K):.3g} "
            f"ladder entries (cap {MAX_ENTRIES:.3g})"
        )
    streams = child_sequences(seed_sequence(rng), 2 * depth)
    scale = 1.0 / alpha
    first: list[np.ndarray] = []
    full: list[Optional[np.ndarray]] = []
    for level in range(depth):
        nodes = K**level
        l0 = np.random.default_rng(streams[2 * level]).exponential(scale, size=(samples, nodes))
        first.append(np.exp(-(1.0 - alpha) * l0))
        if level < depth - 1:
            gaps = np.random.default_rng(streams[2 * level + 1]).exponential(scale, size=(samples, nodes, K - 1))
            ladder = np.concatenate([l0[..., None], l0[..., None] + np.cumsum(gaps, axis=-1)], axis=-1)
            full.append(np.exp(-(1.0 - alpha) * ladder))
        else:
            full.append(None)
    return Scenarios(alpha, depth, samples, K, first, full)


def backup(scenarios: Scenarios, rho: float) -> np.ndarray:
    """Per-sample optimal root values at ``rho``."""
    rho = _check_rho(rho)
    n, K = scenarios.samples, scenarios.options
    values = scenarios.first[-1] - rho
    for level in range(scenarios.depth - 2, -1, -1):
        s = scenarios.full[level]
        cont = np.maximum(values.reshape(n, K**level, K), 0.0)
        best = np.maximum.accumulate(cont, axis=-1)
        prob = s - np.concatenate([s[..., 1:], np.zeros_like(s[..., :1])], axis=-1)
        values = (s[..., 0] - rho) + np.sum(prob * best, axis=-1)
    return values[:, 0]


@dataclass(frozen=True)
class GreedyPolicy:
    """Acts optimally for the truncated model at a fixed ``rho``.

    Each cycle lasts at most ``depth`` rounds.  The last planned round
    broadcasts the best own credential and stops.
    """

    alpha: float
    rho: float
    depth: int
    options: int

    def __call__(self, state: "TruncatedState") -> "Action":
        idx, stop = choose(state, state.winners, state.depth_remaining, self.alpha, self.rho, self.options)
        return Action(idx, stop)

    def describe(self) -> dict:
        return {
            "kind": "greedy-truncated",
            "alpha": self.alpha,
            "rho": self.rho,
            "depth": self.depth,
            "options_per_node": self.options,
            "horizon_continuation": 0.0,
        }


def best_value(
    rho: float,
    alpha: float,
    depth: int,
    samples: int,
    rng: SeedLike = None,
    *,
    max_options: int = DEFAULT_MAX_OPTIONS,
    scenarios: Optional[Scenarios] = None,
) -> tuple[ValueEstimate, GreedyPolicy]:
    """Sample-average optimal truncated value at ``rho`` and the greedy policy achieving it.

    Passing the same integer seed (or the same ``scenarios``) to several calls
    shares the random numbers between them.
    """
    rho = _check_rho(rho)
    if scenarios is None:
        scenarios = sample_scenarios(alpha, depth, samples, rng, max_options)
    elif (scenarios.alpha, scenarios.depth, scenarios.samples) != (check_alpha(alpha), depth, samples):
        raise DomainError("scenarios were sampled for different parameters")
    est = _estimate(backup(scenarios, rho))
    return est, GreedyPolicy(scenarios.alpha, rho, depth, scenarios.options)


# ---------------------------------------------------------------------------
# trajectory simulation of arbitrary policies


@dataclass(frozen=True)
class Action:
    broadcast: Optional[int]
    stop: bool


class TruncatedState:
    """One round of a sampled trajectory, as seen by a policy.

    ``honest_score`` is the visible honest credential of this round.  Own
    ladders, here and under every child seed, are drawn lazily on access.
    """

    def __init__(self, alpha: float, depth_remaining: int, rng: np.random.Generator, level: int = 0) -> None:
        self.alpha = alpha
        self.depth_remaining = depth_remaining
        self.level = level
        self._rng = rng
        self._scores: list[float] = []
        self._children: dict[int, TruncatedState] = {}
        self._honest: Optional[float] = None

    def score(self, k: int) -> float:
        while len(self._scores) <= k:
            gap = self._rng.exponential(1.0 / self.alpha)
            self._scores.append((self._scores[-1] if self._scores else 0.0) + gap)
        return self._scores[k]

    @property
    def honest_score(self) -> float:
        if self._honest is None:
            self._honest = self._rng.exponential(1.0 / (1.0 - self.alpha))
        return self._honest

    @property
    def winners(self) -> int:
        h = self.honest_score
        k = 0
        while self.score(k) < h:
            k += 1
        return k

    def child(self, i: int) -> "TruncatedState":
        c = self._children.get(i)
        if c is None:
            c = self._children[i] = TruncatedState(self.alpha, self.depth_remaining - 1, self._rng, self.level + 1)
        return c

    def options(self) -> list["TruncatedState"]:
        """Candidate next states, one per winning credential."""
        return [self.child(i) for i in range(self.winners)]


def honest_policy(state: TruncatedState) -> Action:
    return Action(0 if state.winners else None, True)


def lookahead_policy(state: TruncatedState) -> Action:
    """1-Lookahead: commit to the winner whose next seed gives the best own score, reveal it, stop."""
    if state.level > 0:
        return Action(0 if state.winners else None, True)
    w = state.winners
    if w == 0:
        return Action(None, True)
    best = min(range(w), key=lambda i: state.child(i).score(0))
    return Action(best, state.depth_remaining <= 1)


def value_of_policy(
    policy, rho: float, depth: int, samples: int, rng: SeedLike = None, *, alpha: Optional[float] = None
) -> ValueEstimate:
    """Monte Carlo truncated value of ``policy`` (a callable on :class:`TruncatedState`).

    ``alpha`` defaults to ``policy.alpha``.
    """
    rho = _check_rho(rho)
    _check_depth_samples(depth, samples)
    if alpha is None:
        alpha = getattr(policy, "alpha", None)
        if alpha is None:
            raise DomainError("alpha is required for policies without an alpha attribute")
    alpha = check_alpha(alpha)
    g = generator(rng)
    totals = np.empty(samples)
    for t in range(samples):
        state = TruncatedState(alpha, depth, g)
        total = 0.0
        while True:
            act = policy(state)
            w = state.winners
            if act.broadcast is not None and act.broadcast < w:
                total += 1.0 - rho
                if act.stop or state.depth_remaining <= 1:
                    break
                state = state.child(act.broadcast)
            else:
                total -= rho
                break
        totals[t] = total
    return _estimate(totals)


# ---------------------------------------------------------------------------
# binary search on rho


@dataclass(frozen=True)
class ProbeRecord:
    rho: float
    value: float
    std_error: float
    sign: int
    inconclusive: bool


@dataclass
class RhoBracket:
    low: float
    high: float
    tolerance: float
    history: list[ProbeRecord] = field(default_factory=list)
    depth: int = 0
    samples: int = 0
    policy: Optional[GreedyPolicy] = None

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.low + self.high)

    @property
    def inconclusive_steps(self) -> int:
        return sum(r.inconclusive for r in self.history)


def solve_optimal_rho(
    alpha: float,
    depth: int,
    samples: int,
    eps: float,
    rng: SeedLike = None,
    *,
    max_options: int = DEFAULT_MAX_OPTIONS,
) -> RhoBracket:
    """Bracket the optimal truncated revenue to width ``eps``.

    The search starts from ``[alpha, revenue_upper_bound(alpha)]``.  It keeps
    ``low`` where the optimal value is nonnegative and ``high`` where it is
    negative.  Probes whose 95% interval straddles zero follow the point
    estimate and are flagged.  Truncation biases values down, so the bracket
    is conservative.
    """
    alpha = check_alpha(alpha)
    if alpha >= RECURRENCE_THRESHOLD:
        raise DomainError(f"alpha={alpha} must be below {RECURRENCE_THRESHOLD:.6f}")
    if not eps > 0:
        raise DomainError("eps must be positive")
    scen = sample_scenarios(alpha, depth, samples, rng, max_options)
    bracket = RhoBracket(alpha, revenue_upper_bound(alpha), eps, depth=depth, samples=samples)
    while bracket.high - bracket.low > eps:
        mid = bracket.midpoint
        est, policy = best_value(mid, alpha, depth, samples, scenarios=scen)
        lo, hi = est.ci
        record = ProbeRecord(mid, est.value, est.std_error, 1 if est.value >= 0 else -1, lo < 0.0 < hi)
        bracket.history.append(record)
        if est.value >= 0:
            bracket.low = mid
            bracket.policy = policy
        else:
            bracket.high = mid
    if bracket.policy is None:
        bracket.policy = best_value(bracket.low, alpha, depth, samples, scenarios=scen)[1]
    return bracket


# ---------------------------------------------------------------------------
# playing the greedy policy inside the full game


class _EngineNode:
    __slots__ = ("_query", "_seed")

    def __init__(self, query, seed) -> None:
        self._query = query
        self._seed = seed

    def score(self, k: int) -> float:
        return self._query.ladder(self._seed).score(k)

    def child(self, i: int) -> "_EngineNode":
        return _EngineNode(self._query, self._query.child(i, parent=self._seed))


class TreePolicyStrategy(Strategy):
    """Plays the truncated-optimal policy for ``rho`` against the round engine (``beta = 1``).

    Child values are recomputed every round from the player's own VRF outputs
    on reachable seeds.  Cycles last at most ``depth`` rounds.
    """

    name = "mdp"

    def __init__(self, alpha: float, rho: float, depth: int = 2, max_options: int = DEFAULT_MAX_OPTIONS) -> None:
        self.alpha = check_alpha(alpha)
        self.rho = _check_rho(rho)
        if depth < 1:
            raise DomainError("depth must be >= 1")
        self.depth = depth
        self.options = option_cap(alpha, max_options)
        self._level = 0
        self._stop = True

    @classmethod
    def from_policy(cls, policy: GreedyPolicy) -> "TreePolicyStrategy":
        s = cls(policy.alpha, policy.rho, policy.depth)
        s.options = policy.options
        return s

    def prepare(self, params: GameParams) -> None:
        if params.beta != 1.0:
            raise UnsupportedConfiguration("the tree policy is defined for beta = 1 only")
        if params.alpha != self.alpha:
            raise DomainError("policy was built for a different alpha")

    def reset(self) -> None:
        self._level = 0
        self._stop = True

    def decide(self, view: RoundView) -> Decision:
        winners = view.adversary_scores.count_below(view.score_b)
        node = _EngineNode(view.query, view.seed) if winners else None
        idx, stop = choose(node, winners, self.depth - self._level, self.alpha, self.rho, self.options)
        self._stop = stop
        self._level += 1
        return WITHHOLD if idx is None else Decision.broadcast(idx)

    def declares_stop(self) -> bool:
        return self._stop
