from fractions import Fraction

import numpy as np
import pytest

from vmfair.errors import ConfigError, InputError
from vmfair.fairness import (
    AuditInput,
    GroupFamily,
    Summary,
    adversarial_rule,
    audit_independence,
    audit_separation,
    audit_sufficiency,
    fairness_equals_randomness,
    summarize,
)
from vmfair.generators import BIASED_TABLE, bernoulli_stream, penguin_colony, sample_joint
from vmfair.independence import Verdict
from vmfair.sequences import BitSequence

from oracles import conditional_rate


def test_group_family_validation():
    with pytest.raises(InputError):
        GroupFamily({"a": BitSequence([1, 0]), "b": BitSequence([1])})
    fam = GroupFamily({"a": BitSequence([1, 1, 0]), "b": BitSequence([0, 1, 1])})
    assert fam.names == ["a", "b"] and fam.horizon == 3
    inter = fam.with_intersections()
    assert inter.names == ["a", "b", "a&b"]
    assert inter["a&b"].tolist() == [0, 1, 0]


def test_audit_input_rejects_length_mismatch():
    with pytest.raises(InputError):
        AuditInput(BitSequence([1, 0]), BitSequence([1]), GroupFamily({"a": BitSequence([1, 0])}))


def test_empty_group_family_is_a_config_error():
    data = AuditInput(BitSequence([1, 0]), None, GroupFamily({}))
    with pytest.raises(ConfigError) as err:
        audit_independence(data)
    assert err.value.code == "E_NO_GROUPS"


def test_missing_labels_is_a_config_error():
    data = AuditInput(BitSequence([1, 0]), None, GroupFamily({"a": BitSequence([1, 0])}))
    for audit in (audit_separation, audit_sufficiency):
        with pytest.raises(ConfigError) as err:
            audit(data)
        assert err.value.code == "E_LABELS_REQUIRED"


def test_summary_rules():
    def cell(v):
        return type("C", (), {"verdict": v})()

    assert summarize([cell(Verdict.INDEPENDENT), cell(Verdict.INCONCLUSIVE)]) is Summary.FAIR
    assert summarize([cell(Verdict.INDEPENDENT), cell(Verdict.DEPENDENT)]) is Summary.UNFAIR
    assert summarize([cell(Verdict.INCONCLUSIVE)]) is Summary.INCONCLUSIVE
    assert summarize([]) is Summary.INCONCLUSIVE


def test_penguins_with_equal_flu_rates_are_fair():
    data = penguin_colony(Fraction(1, 2), (Fraction(3, 10), Fraction(3, 10)), 10**5, seed=1).as_audit_input()
    report = audit_independence(data)
    assert report.summary is Summary.FAIR
    assert set(report.verdicts) == {Verdict.INDEPENDENT}


def test_penguins_with_sex_dependent_flu_are_unfair():
    data = penguin_colony(Fraction(1, 2), (Fraction(3, 5), Fraction(1, 10)), 10**5, seed=1).as_audit_input()
    report = audit_independence(data)
    assert report.summary is Summary.UNFAIR
    female = report.cell("female").result
    assert abs(float(female.p_selected) - 0.6) < 0.01


def test_biased_table_dissociates_criteria():
    data = sample_joint(BIASED_TABLE, 10**5, seed=3)
    assert audit_independence(data).summary is Summary.UNFAIR
    sep = audit_separation(data)
    assert sep.summary is Summary.FAIR
    assert sorted(sep.strata) == [0, 1]
    # within a stratum predictions are constant, so every group matches the stratum rate
    for c in sep.cells:
        assert c.result.p_selected == conditional_rate(BIASED_TABLE.cells, "y_hat", {"group": c.group, "y": c.stratum})
    assert audit_sufficiency(data).summary is Summary.FAIR


def test_stratified_cells_use_only_the_stratum():
    # predictions on y=0 rows are junk; separation on y=1 must not see them
    y = BitSequence.periodic((1, 0), 4000)
    g = BitSequence.periodic((1, 1, 0, 0), 4000)
    pred = BitSequence(np.where(y.bits == 1, 1, g.bits))
    data = AuditInput(pred, y, GroupFamily({"g": g}))
    sep = audit_separation(data, min_count=10)
    assert sep.cell("g", 1).verdict is Verdict.INDEPENDENT
    assert sep.cell("g", 0).verdict is Verdict.DEPENDENT


def test_relabeling_groups_only_relabels_cells():
    data = sample_joint(BIASED_TABLE, 20_000, seed=9)
    renamed = AuditInput(
        data.predictions, data.labels, data.groups.renamed({"group_a": "first", "group_b": "second"})
    )
    a, b = audit_independence(data), audit_independence(renamed)
    assert [c.result for c in a.cells] == [c.result for c in b.cells]
    assert [c.group for c in b.cells] == ["first", "second"]


def test_fairness_equals_randomness_on_penguins():
    colony = penguin_colony(Fraction(2, 5), (Fraction(1, 4), Fraction(1, 2)), 30_000, seed=4)
    eq = fairness_equals_randomness(colony.flu, colony.as_audit_input().groups)
    assert eq.equivalent
    assert Verdict.DEPENDENT in eq.fairness_verdicts


def test_adversarial_rule_breaks_any_nontrivial_sequence():
    x = bernoulli_stream(Fraction(1, 2), 10**4, seed=0)
    rule, v = adversarial_rule(x)
    assert not rule.ex_ante and rule.describe().startswith("expost:")
    assert v.p_selected == 1 and v.verdict is Verdict.DEPENDENT


def test_adversarial_rule_on_constant_sequences():
    assert adversarial_rule(BitSequence.constant(1, 10**4))[1].verdict is Verdict.INDEPENDENT
    assert adversarial_rule(BitSequence.constant(0, 10**4))[1].verdict is Verdict.INCONCLUSIVE
