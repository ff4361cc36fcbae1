import math
from functools import partial

import numpy as np
import pytest

from csspa.analytics import lookahead_revenue, revenue_upper_bound
from csspa.errors import DomainError, ResourceError, UnsupportedConfiguration
from csspa.estimator import estimate_revenue
from csspa.game import GameParams, run_cycles
from csspa.mdp import (
    GreedyPolicy,
    TreePolicyStrategy,
    backup,
    best_value,
    honest_policy,
    lookahead_policy,
    option_cap,
    sample_scenarios,
    solve_optimal_rho,
    subtree_value,
    value_of_policy,
)

ALPHA = 0.25
LA = lookahead_revenue(ALPHA).value


def within(est, target, k=3.0):
    return abs(est.value - target) <= k * est.std_error + 1e-12


def test_option_cap():
    assert option_cap(0.25) == 20
    assert option_cap(0.38) == 29
    assert option_cap(0.38, 8) == 8


def test_depth_one_is_myopic():
    est, policy = best_value(0.1, ALPHA, 1, 50_000, 91)
    assert within(est, ALPHA - 0.1)
    assert policy.depth == 1 and policy.describe()["horizon_continuation"] == 0.0


@pytest.mark.parametrize("rho,target", [(ALPHA, 0.0), (0.0, ALPHA)])
def test_honest_policy_value(rho, target):
    est = value_of_policy(honest_policy, rho, 3, 40_000, 92, alpha=ALPHA)
    assert within(est, target)


def test_lookahead_policy_zero_at_its_revenue():
    est = value_of_policy(lookahead_policy, LA, 3, 40_000, 93, alpha=ALPHA)
    assert within(est, 0.0)


def test_depth_two_dominates_lookahead():
    est, _ = best_value(LA, ALPHA, 2, 50_000, 94)
    assert est.value >= -1.96 * est.std_error
    assert est.value > 0


def test_strictly_decreasing_in_rho():
    lo, _ = best_value(0.2, ALPHA, 2, 20_000, 95)
    hi, _ = best_value(0.4, ALPHA, 2, 20_000, 95)
    assert lo.value - 1.96 * lo.std_error > hi.value + 1.96 * hi.std_error


def test_exact_monotonicity_under_shared_scenarios():
    rhos = np.linspace(0.2, 0.6, 9)
    by_depth = []
    for depth in (1, 2, 3):
        sc = sample_scenarios(ALPHA, depth, 3000, 96)
        vals = [backup(sc, r) for r in rhos]
        for a, b in zip(vals, vals[1:]):
            assert np.all(b <= a)
        by_depth.append(vals)
    for shallow, deep in zip(by_depth, by_depth[1:]):
        for a, b in zip(shallow, deep):
            assert np.all(b >= a)


def test_scenarios_share_common_levels():
    a = sample_scenarios(ALPHA, 2, 500, 97)
    b = sample_scenarios(ALPHA, 3, 500, 97)
    assert np.array_equal(a.first[0], b.first[0]) and np.array_equal(a.first[1], b.first[1])
    assert np.array_equal(a.full[0], b.full[0])


class ArrayNode:
    """Reads one sampled scenario tree back as a node object."""

    def __init__(self, sc, sample, level, index):
        self.sc, self.sample, self.level, self.index = sc, sample, level, index

    def score(self, k):
        full = self.sc.full[self.level]
        s = full[self.sample, self.index, k] if full is not None else self.sc.first[self.level][self.sample, self.index]
        return -math.log(s) / (1 - self.sc.alpha)

    def child(self, i):
        return ArrayNode(self.sc, self.sample, self.level + 1, self.index * self.sc.options + i)


def test_scalar_and_vector_backups_agree():
    sc = sample_scenarios(0.3, 3, 20, 98, max_options=6)
    vec = backup(sc, 0.35)
    for n in range(20):
        assert subtree_value(ArrayNode(sc, n, 0, 0), 3, 0.3, 0.35, sc.options) == pytest.approx(vec[n], abs=1e-12)


def test_greedy_policy_achieves_its_value():
    est, policy = best_value(LA, ALPHA, 2, 40_000, 99)
    sim = value_of_policy(policy, LA, 2, 40_000, 100)
    assert abs(sim.value - est.value) <= 3 * math.hypot(sim.std_error, est.std_error)


def test_resource_cap():
    with pytest.raises(ResourceError):
        best_value(0.3, ALPHA, 6, 10_000, 1)


def test_domains():
    with pytest.raises(DomainError):
        best_value(1.5, ALPHA, 2, 10, 1)
    with pytest.raises(DomainError):
        value_of_policy(honest_policy, 0.2, 0, 10, 1, alpha=ALPHA)
    with pytest.raises(DomainError):
        solve_optimal_rho(0.4, 2, 100, 0.01, 1)
    with pytest.raises(DomainError):
        solve_optimal_rho(0.2, 2, 100, 0.0, 1)


def test_bracket():
    br = solve_optimal_rho(ALPHA, 2, 50_000, 0.01, 101)
    assert br.high - br.low <= 0.01
    assert br.low >= LA - 0.01
    assert br.high <= revenue_upper_bound(ALPHA) + 0.01
    for rec in br.history:
        assert (rec.rho <= br.low) == (rec.value >= 0)
    again = solve_optimal_rho(ALPHA, 2, 50_000, 0.01, 101)
    assert again.history == br.history


def test_bracket_for_tiny_stake():
    br = solve_optimal_rho(0.01, 2, 20_000, 0.01, 102)
    assert br.low >= 0.01 and br.high <= 0.01 + 0.01 + 1e-3


def test_policy_rollout_in_engine():
    br = solve_optimal_rho(ALPHA, 2, 50_000, 0.005, 103)
    est = estimate_revenue(GameParams(ALPHA), partial(TreePolicyStrategy, ALPHA, br.midpoint, 2), 40_000, 104)
    assert abs(est.point - br.midpoint) <= 3 * est.std_error + 0.005
    assert est.point > LA - 3 * est.std_error
    assert all(c.rounds <= 2 for c in run_cycles(GameParams(ALPHA), TreePolicyStrategy(ALPHA, br.midpoint, 2), 2000, 105))


def test_rollout_from_policy_object():
    s = TreePolicyStrategy.from_policy(GreedyPolicy(0.3, 0.32, 3, 6))
    log = run_cycles(GameParams(0.3), s, 300, 106)
    assert max(c.rounds for c in log) <= 3
    with pytest.raises(UnsupportedConfiguration):
        s.prepare(GameParams(0.3, 0.5))
