"""Observational fairness criteria as subselection-independence audits.

Each criterion picks the collective under audit and then asks, group by
group, whether selecting the group's members changes its frequency of ones:

* independence: predictions, selected by group;
* separation: predictions within each true-label stratum, selected by group;
* sufficiency: true labels within each prediction stratum, selected by group.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping
from dataclasses import dataclass, field

from .errors import ConfigError, InputError
from .independence import (
    DEFAULT_MIN_COUNT,
    CollectiveReport,
    IndependenceVerdict,
    Tolerance,
    Verdict,
    admissible,
    is_collective,
    vonmises_independent,
)
from .rules import AttributeRule, apply_selection, conditioned_mask, mask_from_attribute
from .sequences import AUTO, DEFAULT_DIAGNOSTIC, BitSequence, DiagnosticParams

CRITERIA = ("independence", "separation", "sufficiency")


@dataclass(frozen=True)
class GroupFamily:
    """Named membership indicators of the sensitive groups, all the same length."""

    groups: Mapping[str, BitSequence]

    def __post_init__(self):
        groups = dict(self.groups)
        lengths = {len(g) for g in groups.values()}
        if len(lengths) > 1:
            raise InputError("E_LENGTH_MISMATCH", f"group streams differ in length: {sorted(lengths)}")
        object.__setattr__(self, "groups", groups)

    @property
    def names(self) -> list[str]:
        return list(self.groups)

    def __len__(self) -> int:
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups.items())

    def __getitem__(self, name: str) -> BitSequence:
        return self.groups[name]

    @property
    def horizon(self) -> int | None:
        for g in self.groups.values():
            return len(g)
        return None

    def with_intersections(self) -> GroupFamily:
        """Adds every pairwise intersection, named ``a&b``."""
        out = dict(self.groups)
        names = self.names
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                out[f"{a}&{b}"] = BitSequence._wrap(self.groups[a].bits & self.groups[b].bits)
        return GroupFamily(out)

    def renamed(self, mapping: Mapping[str, str]) -> GroupFamily:
        return GroupFamily({mapping.get(k, k): v for k, v in self.groups.items()})


@dataclass(frozen=True)
class AuditInput:
    """Predictions, optional true labels and group indicators over the same individuals."""

    predictions: BitSequence
    labels: BitSequence | None
    groups: GroupFamily
    source_digest: str | None = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.predictions)
        if self.labels is not None and len(self.labels) != n:
            raise InputError("E_LENGTH_MISMATCH", f"labels have length {len(self.labels)}, predictions {n}")
        h = self.groups.horizon
        if h is not None and h != n:
            raise InputError("E_LENGTH_MISMATCH", f"groups have length {h}, predictions {n}")

    def __len__(self) -> int:
        return len(self.predictions)


class Summary(str, enum.Enum):
    FAIR = "fair"
    UNFAIR = "unfair"
    INCONCLUSIVE = "inconclusive"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class AuditCell:
    criterion: str
    group: str
    stratum: int | None  # value of the conditioning stream, None for independence
    rule: str
    result: IndependenceVerdict

    @property
    def verdict(self) -> Verdict:
        return self.result.verdict


def summarize(cells) -> Summary:
    """Unfair if any cell is dependent; fair if none is and at least one is conclusive."""
    verdicts = [c.verdict for c in cells]
    if Verdict.DEPENDENT in verdicts:
        return Summary.UNFAIR
    if Verdict.INDEPENDENT in verdicts:
        return Summary.FAIR
    return Summary.INCONCLUSIVE


@dataclass(frozen=True)
class FairnessReport:
    criterion: str
    cells: tuple[AuditCell, ...]

    @property
    def summary(self) -> Summary:
        return summarize(self.cells)

    @property
    def verdicts(self) -> tuple[Verdict, ...]:
        return tuple(c.verdict for c in self.cells)

    def cell(self, group: str, stratum: int | None = None) -> AuditCell:
        for c in self.cells:
            if c.group == group and c.stratum == stratum:
                return c
        raise KeyError((group, stratum))

    @property
    def strata(self) -> list[int | None]:
        return list(dict.fromkeys(c.stratum for c in self.cells))


def _require_groups(data: AuditInput) -> None:
    if len(data.groups) == 0:
        raise ConfigError("E_NO_GROUPS", "the group family is empty")


def audit_independence(
    data: AuditInput,
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> FairnessReport:
    _require_groups(data)
    cells = tuple(
        AuditCell(
            "independence",
            name,
            None,
            mask_from_attribute(g, name).describe(),
            vonmises_independent(data.predictions, g, tol, min_count, params),
        )
        for name, g in data.groups
    )
    return FairnessReport("independence", cells)


def _stratified(
    criterion: str,
    target: BitSequence,
    conditioner: BitSequence,
    conditioner_name: str,
    data: AuditInput,
    tol: Tolerance,
    min_count: int,
    params: DiagnosticParams,
) -> FairnessReport:
    cells = []
    for value in (0, 1):
        stratum = conditioned_mask(conditioner, value, conditioner_name)
        target_v = apply_selection(target, stratum).selected_values
        for name, g in data.groups:
            group_v = apply_selection(g, stratum).selected_values
            rule = f"intersect({stratum.describe()},attribute({name}))"
            cells.append(
                AuditCell(
                    criterion, name, value, rule,
                    vonmises_independent(target_v, group_v, tol, min_count, params),
                )
            )
    return FairnessReport(criterion, tuple(cells))


def _labels(data: AuditInput, criterion: str) -> BitSequence:
    if data.labels is None:
        raise ConfigError("E_LABELS_REQUIRED", f"{criterion} needs a true-label column 'y'")
    return data.labels


def audit_separation(
    data: AuditInput,
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> FairnessReport:
    """Predictions against groups within each true-label stratum."""
    labels = _labels(data, "separation")
    _require_groups(data)
    return _stratified("separation", data.predictions, labels, "y", data, tol, min_count, params)


def audit_sufficiency(
    data: AuditInput,
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> FairnessReport:
    """True labels against groups within each prediction stratum."""
    labels = _labels(data, "sufficiency")
    _require_groups(data)
    return _stratified("sufficiency", labels, data.predictions, "y_hat", data, tol, min_count, params)


AUDITS = {
    "independence": audit_independence,
    "separation": audit_separation,
    "sufficiency": audit_sufficiency,
}


@dataclass(frozen=True)
class EquivalenceReport:
    """Side-by-side fairness (group audit) and randomness (collective check) verdicts."""

    groups: tuple[str, ...]
    fairness: FairnessReport
    randomness: CollectiveReport

    @property
    def fairness_verdicts(self) -> tuple[Verdict, ...]:
        return self.fairness.verdicts

    @property
    def randomness_verdicts(self) -> tuple[Verdict, ...]:
        return tuple(v.verdict for v in self.randomness.verdicts)

    @property
    def equivalent(self) -> bool:
        return self.fairness_verdicts == self.randomness_verdicts


def fairness_equals_randomness(
    x: BitSequence,
    groups: GroupFamily,
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> EquivalenceReport:
    """Audit ``x`` for fairness w.r.t. ``groups`` and, separately, for randomness
    w.r.t. the groups read as selection rules.

    The two sides go through different code paths (stream selectors versus
    rule objects), so agreement is a real check of the implementation.
    """
    fairness = audit_independence(AuditInput(x, None, groups), tol, min_count, params)
    rules = [mask_from_attribute(g, name) for name, g in groups]
    randomness = is_collective(x, rules, tol, min_count, params)
    return EquivalenceReport(tuple(groups.names), fairness, randomness)


def adversarial_rule(
    x: BitSequence,
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> tuple[AttributeRule, IndependenceVerdict]:
    """The rule "select exactly where x is 1", built after looking at ``x``.

    Every selected value is 1, so any ``x`` whose frequency of ones is not
    (close to) 1 fails against it. Flagged ``ex_ante=False``.
    """
    rule = AttributeRule(x, name="x", ex_ante=False)
    return rule, admissible(x, rule, tol, min_count, params)
