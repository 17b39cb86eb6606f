from fractions import Fraction
from math import sqrt

import numpy as np
import pytest

from vmfair.fairness import Summary
from vmfair.generators import (
    BIASED_TABLE,
    GENERATOR_ID,
    Seed,
    bernoulli_stream,
    group_rate_table,
    loaded_die_demo,
    penguin_colony,
    randomize_for_independence,
    raw_words,
    sample_joint,
    tradeoff_oracle,
)

from oracles import conditional_rate


def test_generator_identifier_is_versioned():
    assert GENERATOR_ID == "pcg64-seedseq-raw64/v1"
    assert Seed(5).algorithm == GENERATOR_ID


def test_raw_words_are_plain_pcg64_output():
    ref = np.random.PCG64(np.random.SeedSequence(42, spawn_key=(3,))).random_raw(5)
    assert np.array_equal(raw_words(42, 3, 5), ref)


def test_streams_are_deterministic_and_independent_of_each_other():
    a = bernoulli_stream(Fraction(1, 2), 1000, seed=7)
    assert a == bernoulli_stream(Fraction(1, 2), 1000, seed=7)
    assert a != bernoulli_stream(Fraction(1, 2), 1000, seed=8)
    assert a != bernoulli_stream(Fraction(1, 2), 1000, seed=7, stream=1)
    # prefixes are stable under a longer horizon
    assert bernoulli_stream(Fraction(1, 2), 2000, seed=7).prefix(1000) == a


def test_degenerate_probabilities():
    assert bernoulli_stream(0, 500, seed=1).ones() == 0
    assert bernoulli_stream(1, 500, seed=1).ones() == 500
    with pytest.raises(ValueError):
        bernoulli_stream(Fraction(3, 2), 10, seed=1)


def test_fair_coin_frequency_band():
    x = bernoulli_stream(Fraction(1, 2), 10**6, seed=0)
    assert 0.4985 <= x.ones() / 10**6 <= 0.5015


def test_sample_joint_matches_table_within_three_sigma():
    n = 10**5
    data = sample_joint(BIASED_TABLE, n, seed=12)
    for g, seq in data.groups:
        mask = seq.bits == 1
        p = float(BIASED_TABLE.mass(group=g))
        assert abs(mask.mean() - p) <= 3 * sqrt(p * (1 - p) / n)
        want = float(conditional_rate(BIASED_TABLE.cells, "y", {"group": g}))
        got = data.labels.bits[mask].mean()
        assert abs(got - want) <= 3 * sqrt(want * (1 - want) / mask.sum())
    assert np.array_equal(data.predictions.bits, data.labels.bits)
    # exactly one group per row
    assert np.all(sum(seq.bits for _, seq in data.groups) == 1)


def test_penguin_colony_streams():
    colony = penguin_colony(Fraction(1, 2), (Fraction(3, 5), Fraction(1, 10)), 10**5, seed=0)
    female = colony.sex.bits == 1
    assert abs(colony.flu.bits[female].mean() - 0.6) < 0.01
    assert abs(colony.flu.bits[~female].mean() - 0.1) < 0.01
    data = colony.as_audit_input()
    assert data.groups.names == ["female", "male"] and data.labels is None


def test_loaded_die_demo_values():
    demo = loaded_die_demo()
    assert (demo.fair_result.p_ab, demo.fair_result.product) == (Fraction(1, 6), Fraction(1, 9))
    assert not demo.fair_result.independent
    r = demo.loaded_result
    assert (r.p_a, r.p_b, r.p_ab, r.product) == (Fraction(1, 2), Fraction(2, 3), Fraction(1, 6), Fraction(1, 3))
    assert not r.independent
    assert demo.balanced_result.independent


def test_tradeoff_oracle_by_enumeration():
    # group_a: 80% of Y=1, group_b: 20%; equal sizes and Y_hat = Y.
    # Equalizing to 1/2 flips 3/8 of group_a's ones (all correct) and
    # 3/8 of group_b's zeros (all correct): accuracy 1 - 1/2*(3/10) - 1/2*(3/10).
    assert BIASED_TABLE.accuracy() == 1
    assert tradeoff_oracle(BIASED_TABLE) == Fraction(7, 10)
    assert tradeoff_oracle(BIASED_TABLE, Fraction(4, 5)) == Fraction(1, 2) + Fraction(1, 2) * Fraction(2, 5)


def test_randomize_for_independence_equalizes_rates():
    data = sample_joint(BIASED_TABLE, 10**5, seed=21)
    out = randomize_for_independence(data, seed=21)
    for _, g in data.groups:
        rate = out.predictions.bits[g.bits == 1].mean()
        assert abs(rate - float(out.target_rate)) < 1e-4
    assert out.audit.summary is Summary.FAIR
    assert abs(float(out.accuracy_after) - 0.7) <= 0.02
    assert out.accuracy_before == 1


def test_randomize_is_seeded():
    data = sample_joint(BIASED_TABLE, 5000, seed=2)
    assert randomize_for_independence(data, 3).predictions == randomize_for_independence(data, 3).predictions


def test_randomize_degenerate_target():
    table = group_rate_table({"a": 1, "b": 1})
    data = sample_joint(table, 1000, seed=0)
    out = randomize_for_independence(data, seed=0)
    assert out.flipped == 0 and "degenerate" in out.note
