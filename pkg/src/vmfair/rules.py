"""Selection rules and subselection.

A rule is a declarative description of which (1-based) indices to pick. No
rule constructor takes the sequence being audited, so a rule's choices are
fixed before that sequence is seen. The one exception, the ex-post rule built
by :func:`vmfair.fairness.adversarial_rule`, is marked ``ex_ante=False``.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .sequences import BitSequence


class SelectionRule:
    """Base class. Subclasses implement :meth:`mask` and :meth:`describe`."""

    ex_ante: bool = True

    def mask(self, n: int) -> np.ndarray:
        """Boolean array of length ``n``; entry ``i-1`` is true iff index ``i`` is selected."""
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def indicator(self, n: int) -> BitSequence:
        return BitSequence._wrap(self.mask(n).astype(np.uint8))

    def indices(self, n: int) -> list[int]:
        return (np.flatnonzero(self.mask(n)) + 1).tolist()

    def __and__(self, other: SelectionRule) -> SelectionRule:
        return combine([self, other], "intersect")

    def __or__(self, other: SelectionRule) -> SelectionRule:
        return combine([self, other], "union")

    def __invert__(self) -> SelectionRule:
        return combine([self], "complement")

    def __str__(self) -> str:
        return self.describe()


@dataclass(frozen=True, eq=False)
class IndexSetRule(SelectionRule):
    """Selects an explicit finite set of 1-based indices."""

    members: frozenset[int]

    def __post_init__(self):
        if any(i < 1 for i in self.members):
            raise ValueError("indices are 1-based")

    def mask(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=bool)
        idx = np.fromiter((i - 1 for i in self.members if i <= n), dtype=np.int64)
        out[idx] = True
        return out

    def describe(self) -> str:
        return "explicit(" + ",".join(map(str, sorted(self.members))) + ")"


@dataclass(frozen=True, eq=False)
class PeriodicRule(SelectionRule):
    """Selects ``i`` iff ``i mod period`` is one of ``residues``."""

    period: int
    residues: frozenset[int]

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("period must be positive")
        if any(not 0 <= r < self.period for r in self.residues):
            raise ValueError(f"residues must lie in 0..{self.period - 1}")

    def mask(self, n: int) -> np.ndarray:
        idx = np.arange(1, n + 1, dtype=np.int64) % self.period
        return np.isin(idx, np.fromiter(self.residues, dtype=np.int64, count=len(self.residues)))

    def describe(self) -> str:
        return f"periodic({self.period};" + ",".join(map(str, sorted(self.residues))) + ")"


@dataclass(frozen=True, eq=False)
class AttributeRule(SelectionRule):
    """Selects ``i`` iff ``side(i) == value``; ``side`` is a stream parallel to the target."""

    side: BitSequence
    name: str = "side"
    value: int = 1
    ex_ante: bool = True

    def mask(self, n: int) -> np.ndarray:
        if len(self.side) < n:
            raise InputError(
                "E_LENGTH_MISMATCH",
                f"side stream {self.name!r} has length {len(self.side)}, need at least {n}",
            )
        return self.side.bits[:n] == self.value

    def describe(self) -> str:
        tag = "" if self.ex_ante else "expost:"
        if self.value == 1:
            return f"{tag}attribute({self.name})"
        return f"{tag}attribute({self.name}={self.value})"


_OPS = ("intersect", "union", "complement")


@dataclass(frozen=True, eq=False)
class CompositeRule(SelectionRule):
    op: str
    rules: tuple[SelectionRule, ...]

    @property
    def ex_ante(self) -> bool:  # type: ignore[override]
        return all(r.ex_ante for r in self.rules)

    def mask(self, n: int) -> np.ndarray:
        masks = [r.mask(n) for r in self.rules]
        if self.op == "complement":
            return ~masks[0]
        if self.op == "intersect":
            return np.logical_and.reduce(masks)
        return np.logical_or.reduce(masks)

    def describe(self) -> str:
        return f"{self.op}(" + ",".join(r.describe() for r in self.rules) + ")"


@dataclass(frozen=True)
class Subselection:
    """Values of the target at the selected indices, in index order."""

    selected_values: BitSequence
    source_length: int

    @property
    def selected_count(self) -> int:
        return len(self.selected_values)


def explicit(indices: Iterable[int]) -> IndexSetRule:
    return IndexSetRule(frozenset(indices))


def periodic(period: int, residues: Iterable[int] | int) -> PeriodicRule:
    if isinstance(residues, int):
        residues = (residues,)
    return PeriodicRule(period, frozenset(residues))


def all_indices() -> PeriodicRule:
    return PeriodicRule(1, frozenset({0}))


def multiples_of(k: int) -> PeriodicRule:
    return PeriodicRule(k, frozenset({0}))


def evens() -> PeriodicRule:
    return multiples_of(2)


def odds() -> PeriodicRule:
    return PeriodicRule(2, frozenset({1}))


def mask_from_attribute(side: BitSequence, name: str = "side") -> AttributeRule:
    return AttributeRule(side, name=name)


def conditioned_mask(labels: BitSequence, value: int, name: str = "y") -> AttributeRule:
    """Stratum rule: selects ``i`` iff ``labels(i) == value``."""
    if value not in (0, 1):
        raise ValueError("value must be 0 or 1")
    return AttributeRule(labels, name=name, value=value)


def combine(rules: Sequence[SelectionRule], op: str) -> CompositeRule:
    if op not in _OPS:
        raise ConfigError("E_BAD_OPERATOR", f"unknown operator {op!r}; expected one of {_OPS}")
    rules = tuple(rules)
    if op == "complement" and len(rules) != 1:
        raise ConfigError("E_ARITY", f"complement takes exactly one rule, got {len(rules)}")
    if not rules:
        raise ConfigError("E_ARITY", f"{op} needs at least one rule")
    return CompositeRule(op, rules)


def apply_selection(x: BitSequence, s: SelectionRule) -> Subselection:
    n = len(x)
    mask = s.mask(n)
    return Subselection(BitSequence._wrap(x.bits[mask]), n)
