import pytest

from vmfair.errors import ConfigError, InputError
from vmfair.rules import (
    all_indices,
    apply_selection,
    combine,
    conditioned_mask,
    evens,
    explicit,
    mask_from_attribute,
    multiples_of,
    odds,
    periodic,
)
from vmfair.sequences import BitSequence


def test_periodic_odd_indices_select_the_ones_of_an_alternating_sequence():
    x = BitSequence([1, 0, 1, 0, 1, 0])
    sub = apply_selection(x, periodic(2, 1))
    assert sub.selected_values.tolist() == [1, 1, 1]
    assert sub.selected_count == 3 and sub.source_length == 6


def test_all_ones_rule_is_identity():
    x = BitSequence([0, 1, 1, 0, 1])
    assert apply_selection(x, all_indices()).selected_values == x


def test_explicit_index_set_is_one_based():
    x = BitSequence([1, 1, 0, 0])
    assert apply_selection(x, explicit({2, 3})).selected_values.tolist() == [1, 0]
    assert explicit({2, 3, 99}).indices(4) == [2, 3]
    with pytest.raises(ValueError):
        explicit({0})


def test_mask_from_attribute():
    assert mask_from_attribute(BitSequence([0, 1, 1])).indices(3) == [2, 3]
    assert mask_from_attribute(BitSequence.constant(0, 5)).indices(5) == []


def test_penguin_sex_stream_selects_female_indices():
    sex = BitSequence([1, 0, 0, 1, 1])
    flu = BitSequence([1, 1, 0, 0, 1])
    rule = mask_from_attribute(sex, "female")
    assert rule.indices(5) == [1, 4, 5]
    assert apply_selection(flu, rule).selected_values.tolist() == [1, 0, 1]


def test_conditioned_mask():
    assert conditioned_mask(BitSequence([1, 0, 1]), 1).indices(3) == [1, 3]
    assert conditioned_mask(BitSequence.constant(0, 4), 1).indices(4) == []
    assert conditioned_mask(BitSequence([1, 0, 1]), 0).indices(3) == [2]


def test_combine_examples():
    n = 36
    assert combine([evens(), multiples_of(3)], "intersect").indices(n) == multiples_of(6).indices(n)
    assert combine([all_indices()], "complement").indices(n) == []
    assert combine([explicit({1, 2}), explicit({2, 3})], "union").indices(5) == [1, 2, 3]


def test_combine_arity_and_operator_errors():
    with pytest.raises(ConfigError) as err:
        combine([evens(), odds()], "complement")
    assert err.value.code == "E_ARITY"
    with pytest.raises(ConfigError):
        combine([], "union")
    with pytest.raises(ConfigError):
        combine([evens()], "xor")


def test_side_stream_too_short_is_an_input_error():
    rule = mask_from_attribute(BitSequence([1, 0]), "g")
    with pytest.raises(InputError) as err:
        apply_selection(BitSequence([1, 1, 1]), rule)
    assert err.value.code == "E_LENGTH_MISMATCH"


def test_rules_are_built_before_the_target_exists():
    # every constructor here runs without any target; only evaluation sees a horizon
    group = BitSequence([1, 0, 1, 1, 0, 0])
    rules = [
        evens(),
        periodic(3, (0, 2)),
        explicit({1, 4}),
        mask_from_attribute(group, "g"),
        ~mask_from_attribute(group, "g") & evens(),
    ]
    assert all(r.ex_ante for r in rules)
    target = BitSequence([0, 1, 1, 0, 1, 1])
    sub = apply_selection(target, rules[-1])
    assert sub.selected_values.tolist() == [1, 1]  # indices 2 and 6


def test_descriptions_are_stable_text():
    rule = combine([periodic(4, (3, 1)), mask_from_attribute(BitSequence([1]), "sex")], "intersect")
    assert rule.describe() == "intersect(periodic(4;1,3),attribute(sex))"
    assert conditioned_mask(BitSequence([1]), 0, "y").describe() == "attribute(y=0)"
