import math

import numpy as np
import pytest

from csspa.errors import DomainError, ProtocolViolation, TieError
from csspa.game import (
    WITHHOLD,
    Decision,
    Engine,
    GameParams,
    LeaderClass,
    resolve_round,
    run_cycles,
)
from csspa.strategies import HonestStrategy, LookaheadStrategy, Strategy


class Withhold(Strategy):
    def decide(self, view):
        return WITHHOLD

    def declares_stop(self):
        return True


class Returns(Strategy):
    def __init__(self, value):
        self.value = value

    def decide(self, view):
        return self.value

    def declares_stop(self):
        return True


def test_resolve_examples():
    assert resolve_round(0.2, 0.5, 0.15, WITHHOLD, None) == (LeaderClass.HONEST_B, False)
    cls, forced = resolve_round(0.2, 0.5, 0.1, Decision.broadcast(0), 0.1)
    assert cls is LeaderClass.ADVERSARY and not forced
    assert resolve_round(0.2, 0.05, 0.1, WITHHOLD, None) == (LeaderClass.HONEST_C, True)
    assert resolve_round(0.2, math.inf, 0.1, Decision.broadcast(3), 0.4)[0] is LeaderClass.HONEST_B


def test_resolve_rejects_ties_and_missing_scores():
    with pytest.raises(TieError):
        resolve_round(0.2, 0.5, 0.2, WITHHOLD, None)
    with pytest.raises(ProtocolViolation):
        resolve_round(0.2, 0.5, 0.1, Decision.broadcast(0), None)


def test_params_domain():
    with pytest.raises(DomainError):
        GameParams(0.0)
    with pytest.raises(DomainError):
        GameParams(0.3, 1.2)
    p = GameParams(0.2, 0.25)
    assert p.rate_b == pytest.approx(0.2) and p.rate_c == pytest.approx(0.6)


def test_forced_stop_frequency_for_honest_play():
    trace = []
    run_cycles(GameParams(0.25), HonestStrategy(), 10**5, 41, trace)
    frac = np.mean([out.forced_stop for _, out in trace])
    assert frac == pytest.approx(0.75, abs=0.005)


def test_forced_stop_frequency_for_withholding_play():
    # forced stop iff the best honest score beats the best own score, whatever is broadcast
    trace = []
    log = run_cycles(GameParams(0.3), Withhold(), 50_000, 42, trace)
    frac = np.mean([out.forced_stop for _, out in trace])
    assert abs(frac - 0.7) <= 3 * math.sqrt(0.21 / len(trace))
    assert sum(c.wins for c in log) == 0


@pytest.mark.parametrize("strategy", [HonestStrategy, LookaheadStrategy])
def test_seed_chain_and_cycle_boundaries(strategy):
    trace = []
    run_cycles(GameParams(0.35), strategy(), 5000, 43, trace)
    for (seed, out), (nxt, _) in zip(trace, trace[1:]):
        if out.stop:
            assert nxt.depth == 0 and nxt.root != seed.root
        else:
            assert nxt == out.next_seed
        assert out.next_seed.parent == seed
        assert out.next_seed.path[-1][1] == out.leader


def test_win_accounting_identity():
    trace = []
    log = run_cycles(GameParams(0.3), LookaheadStrategy(), 20_000, 44, trace)
    wins = sum(c.wins for c in log) + log.discarded_wins
    rounds = sum(c.rounds for c in log) + log.discarded_rounds
    assert rounds == len(trace) == 20_000
    assert wins == sum(out.adversary_won for _, out in trace)


def test_zero_budget():
    assert run_cycles(GameParams(0.3), HonestStrategy(), 0, 1) == []


def test_partial_cycle_is_discarded():
    # an odd budget cuts a lookahead cycle somewhere with high probability
    for seed in range(20):
        log = run_cycles(GameParams(0.45), LookaheadStrategy(), 101, seed)
        assert sum(c.rounds for c in log) + log.discarded_rounds == 101
        if log.discarded_rounds:
            assert log.discarded_rounds == 1
            return
    pytest.fail("no truncated cycle observed")


def test_honest_cycles_have_length_one():
    log = run_cycles(GameParams(0.4), HonestStrategy(), 5000, 45)
    assert len(log) == 5000 and all(c.rounds == 1 for c in log)


@pytest.mark.parametrize("beta", [0.0, 1.0])
def test_honest_revenue_is_alpha(beta):
    log = run_cycles(GameParams(0.25, beta), HonestStrategy(), 10**5, 46)
    wins = sum(c.wins for c in log)
    assert abs(wins / 10**5 - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / 10**5)


def test_partial_connectivity_lets_hidden_player_lead():
    trace = []
    run_cycles(GameParams(0.3, 0.5), HonestStrategy(), 20_000, 47, trace)
    classes = [out.leader_class for _, out in trace]
    for cls, p in [(LeaderClass.ADVERSARY, 0.3), (LeaderClass.HONEST_B, 0.35), (LeaderClass.HONEST_C, 0.35)]:
        f = classes.count(cls) / len(classes)
        assert abs(f - p) <= 3 * math.sqrt(p * (1 - p) / len(classes))


def test_strategy_protocol_violations():
    eng = Engine(GameParams(0.3), 48)
    with pytest.raises(ProtocolViolation):
        eng.play_round(eng.bootstrap(), Returns([Decision.broadcast(0), Decision.broadcast(1)]))
    with pytest.raises(ProtocolViolation):
        eng.play_round(eng.bootstrap(), Returns(Decision.broadcast(50)))
    with pytest.raises(ProtocolViolation):
        Decision.broadcast(-1)


def test_queries_disabled_when_honest_beats_best_own():
    eng = Engine(GameParams(0.2), 49)
    states = []

    class Probe(Strategy):
        def decide(self, view):
            states.append((view.score_b < view.best_own, view.query.enabled))
            return Decision.broadcast(0)

        def declares_stop(self):
            return True

    for _ in range(500):
        eng.play_round(eng.bootstrap(), Probe())
    assert all(lost != enabled for lost, enabled in states)
    assert any(enabled for _, enabled in states) and any(not e for _, e in states)


def test_round_cap_diagnostic():
    from csspa.errors import NonRecurrenceError

    class Never(Strategy):
        def decide(self, view):
            return Decision.broadcast(0)

        def declares_stop(self):
            return False

    eng = Engine(GameParams(0.99), 50)
    with pytest.raises(NonRecurrenceError, match="non-recurrence"):
        for _ in range(100):
            eng.run_cycle(Never(), round_cap=3)
