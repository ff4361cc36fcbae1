import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy import stats

from csspa.errors import DomainError, TieError
from csspa.scoring import (
    ALGORAND,
    NEG_LOG,
    ScoredEntry,
    ScoringRule,
    score_canonical,
    score_exponential,
    select_leader,
)

SIG = 0.01


def test_exponential_examples():
    assert score_exponential(math.exp(-0.5), 1.0) == pytest.approx(0.5)
    assert score_exponential(math.exp(-0.5), 0.5) == pytest.approx(1.0)


@pytest.mark.parametrize("x,stake", [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, -0.1), (0.5, 1.5)])
def test_exponential_domain(x, stake):
    with pytest.raises(DomainError):
        score_exponential(x, stake)


def test_canonical_examples():
    assert score_canonical(ALGORAND, 0.25, 0.5) == pytest.approx(0.9375)
    assert score_canonical(NEG_LOG, 0.25, 0.5) == pytest.approx(2 * math.log(4))


def test_increasing_generator_rejected():
    with pytest.raises(DomainError):
        ScoringRule(lambda x: x, "increasing")


def test_exponential_score_distribution():
    rng = np.random.default_rng(21)
    ys = [score_exponential(u, 0.4) for u in rng.random(10**5)]
    assert stats.kstest(ys, lambda y: 1 - np.exp(-0.4 * y)).pvalue > SIG


def test_select_leader_examples():
    entries = [ScoredEntry("A", 0.1, 0.3, 0.7), ScoredEntry("B", 0.2, 0.3, 0.3), ScoredEntry("C", 0.3, 0.4, 0.9)]
    assert select_leader(entries) == "B"
    assert select_leader([]) is None


def test_select_leader_tie():
    with pytest.raises(TieError):
        select_leader([ScoredEntry("A", 0.1, 0.5, 0.3), ScoredEntry("B", 0.2, 0.5, 0.3)])


def test_balancedness():
    rng = np.random.default_rng(22)
    stakes = (0.3, 0.28, 0.42)
    n = 10**6
    u = rng.random((n, 3))
    scores = -np.log(u) / np.array(stakes)
    counts = np.bincount(scores.argmin(axis=1), minlength=3)
    # the vectorised path must agree with select_leader on a subsample
    for row in range(1000):
        ents = [ScoredEntry.from_credential(i, u[row, i], stakes[i]) for i in range(3)]
        assert select_leader(ents) == scores[row].argmin()
    for i, a in enumerate(stakes):
        assert abs(counts[i] / n - a) <= 3 * math.sqrt(a * (1 - a) / n)


def test_canonical_rules_agree_on_leader():
    rng = np.random.default_rng(23)
    stakes = (0.3, 0.28, 0.42)
    cubic = ScoringRule(lambda x: (1 - x) ** 3, "cubic")
    mismatches = 0
    for _ in range(10**4):
        xs = rng.random(3)
        ref = select_leader([ScoredEntry.from_credential(i, xs[i], stakes[i], NEG_LOG) for i in range(3)])
        for rule in (ALGORAND, cubic):
            other = select_leader([ScoredEntry.from_credential(i, xs[i], stakes[i], rule) for i in range(3)])
            mismatches += other != ref
        mismatches += ref != int(np.argmax(xs ** (1 / np.array(stakes))))
    assert mismatches == 0


@given(st.lists(st.floats(0.001, 0.999), min_size=2, max_size=6, unique=True), st.floats(0.05, 1.0))
def test_canonical_order_matches_exponential(xs, stake):
    # 1 - x**(1/a) saturates at 1.0 in floating point for small a; skip such collapsed inputs
    assume(len({score_canonical(ALGORAND, x, stake) for x in xs}) == len(xs))
    a = sorted(range(len(xs)), key=lambda i: score_canonical(ALGORAND, xs[i], stake))
    b = sorted(range(len(xs)), key=lambda i: score_exponential(xs[i], stake))
    assert a == b


def test_splitting_law():
    rng = np.random.default_rng(24)
    n = 10**5
    u = rng.random((n, 2))
    split = np.minimum(-np.log(u[:, 0]) / 0.15, -np.log(u[:, 1]) / 0.15)
    whole = -np.log(rng.random(n)) / 0.3
    assert stats.ks_2samp(split, whole).pvalue > SIG
    assert stats.kstest(split, "expon", args=(0, 1 / 0.3)).pvalue > SIG
