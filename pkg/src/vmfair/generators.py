"""Seeded synthetic streams and the worked examples built from them.

Every stochastic stream is derived from raw 64-bit words of numpy's PCG64 bit
generator, seeded through ``SeedSequence(seed, spawn_key=(stream,))``. Only
the raw words are used (never ``Generator`` distribution methods, whose output
numpy does not freeze across releases), and a word ``w`` becomes a bit via the
exact integer comparison ``w < floor(p * 2**64)``.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError
from .fairness import AuditInput, FairnessReport, GroupFamily, audit_independence
from .independence import (
    DEFAULT_MIN_COUNT,
    FinitePMF,
    KolmogorovResult,
    Tolerance,
    kolmogorov_independent,
)
from .sequences import AUTO, DEFAULT_DIAGNOSTIC, BitSequence, DiagnosticParams, Number, to_fraction

GENERATOR_ID = "pcg64-seedseq-raw64/v1"
_TWO64 = 1 << 64
_SEED_MASK = _TWO64 - 1


@dataclass(frozen=True)
class Seed:
    value: int
    algorithm: str = GENERATOR_ID

    def __post_init__(self):
        if not 0 <= self.value <= _SEED_MASK:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.algorithm != GENERATOR_ID:
            raise ValueError(f"unsupported generator {self.algorithm!r}; only {GENERATOR_ID!r}")


def _seed_value(seed: int | Seed) -> int:
    return seed.value if isinstance(seed, Seed) else Seed(seed).value


def raw_words(seed: int | Seed, stream: int, n: int) -> np.ndarray:
    """``n`` raw uint64 words from substream ``stream`` of ``seed``."""
    ss = np.random.SeedSequence(_seed_value(seed), spawn_key=(stream,))
    return np.random.PCG64(ss).random_raw(n).astype(np.uint64, copy=False)


def _bits_below(words: np.ndarray, p: Fraction) -> np.ndarray:
    if p <= 0:
        return np.zeros(words.size, dtype=np.uint8)
    if p >= 1:
        return np.ones(words.size, dtype=np.uint8)
    threshold = np.uint64((p.numerator * _TWO64) // p.denominator)
    return (words < threshold).astype(np.uint8)


def bernoulli_stream(p: Number, n: int, seed: int | Seed, stream: int = 0) -> BitSequence:
    p = to_fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return BitSequence._wrap(_bits_below(raw_words(seed, stream, n), p))


def _categorical(weights: list[Fraction], n: int, seed: int | Seed, stream: int) -> np.ndarray:
    # indices into ``weights`` with exact 2**-64 quantised probabilities
    words = raw_words(seed, stream, n)
    cuts, acc = [], Fraction(0)
    for w in weights[:-1]:
        acc += w
        cuts.append(min((acc.numerator * _TWO64) // acc.denominator, _SEED_MASK))
    edges = np.array(cuts, dtype=np.uint64)
    return np.searchsorted(edges, words, side="right")


def _permutation(seed: int | Seed, stream: int, n: int) -> np.ndarray:
    return np.argsort(raw_words(seed, stream, n), kind="stable")


Cell = tuple[str, int, int]  # (group, y, y_hat)


@dataclass(frozen=True)
class JointTable:
    """Exact joint distribution over (group, label, prediction) cells.

    Each individual belongs to exactly one group; missing cells have mass 0.
    """

    cells: Mapping[Cell, Fraction]

    def __post_init__(self):
        cleaned: dict[Cell, Fraction] = {}
        for (g, y, yh), p in self.cells.items():
            if y not in (0, 1) or yh not in (0, 1):
                raise ValueError(f"labels and predictions must be 0 or 1, got {(g, y, yh)}")
            p = to_fraction(p)
            if p < 0:
                raise ValueError("cell probabilities must be nonnegative")
            cleaned[(str(g), y, yh)] = p
        total = sum(cleaned.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"cells sum to {total}, not 1")
        object.__setattr__(self, "cells", cleaned)

    @property
    def groups(self) -> list[str]:
        return list(dict.fromkeys(g for g, _, _ in self.cells))

    def mass(self, group: str | None = None, y: int | None = None, y_hat: int | None = None) -> Fraction:
        return sum(
            (
                p
                for (g, yy, yh), p in self.cells.items()
                if (group is None or g == group) and (y is None or yy == y) and (y_hat is None or yh == y_hat)
            ),
            Fraction(0),
        )

    def accuracy(self) -> Fraction:
        return self.mass(y=0, y_hat=0) + self.mass(y=1, y_hat=1)


def group_rate_table(rates: Mapping[str, Number], sizes: Mapping[str, Number] | None = None) -> JointTable:
    """Table with ``y_hat == y`` and ``P(y = 1 | group) = rates[group]``."""
    names = list(rates)
    if sizes is None:
        sizes = {g: Fraction(1, len(names)) for g in names}
    cells: dict[Cell, Fraction] = {}
    for g in names:
        w, r = to_fraction(sizes[g]), to_fraction(rates[g])
        cells[(g, 1, 1)] = w * r
        cells[(g, 0, 0)] = w * (1 - r)
    return JointTable(cells)


BIASED_TABLE = group_rate_table({"group_a": Fraction(4, 5), "group_b": Fraction(1, 5)})


def sample_joint(table: JointTable, n: int, seed: int | Seed, stream: int = 0) -> AuditInput:
    keys = list(table.cells)
    idx = _categorical([table.cells[k] for k in keys], n, seed, stream)
    group_of = np.array([k[0] for k in keys], dtype=object)
    y_of = np.array([k[1] for k in keys], dtype=np.uint8)
    yh_of = np.array([k[2] for k in keys], dtype=np.uint8)
    groups = {
        g: BitSequence._wrap((group_of[idx] == g).astype(np.uint8)) for g in table.groups
    }
    return AuditInput(
        predictions=BitSequence._wrap(yh_of[idx]),
        labels=BitSequence._wrap(y_of[idx]),
        groups=GroupFamily(groups),
    )


# -- worked examples -----------------------------------------------------------


@dataclass(frozen=True)
class PenguinColony:
    sex: BitSequence  # 1 = female
    flu: BitSequence

    def as_audit_input(self) -> AuditInput:
        male = BitSequence._wrap(1 - self.sex.bits)
        return AuditInput(self.flu, None, GroupFamily({"female": self.sex, "male": male}))


def penguin_colony(
    p_female: Number,
    p_flu_given_sex: tuple[Number, Number],
    n: int,
    seed: int | Seed,
) -> PenguinColony:
    """Two attribute streams over a colony; ``p_flu_given_sex`` is (female, male)."""
    p_f, p_m = (to_fraction(v) for v in p_flu_given_sex)
    sex = bernoulli_stream(p_female, n, seed, stream=0)
    flu_f = bernoulli_stream(p_f, n, seed, stream=1).bits
    flu_m = bernoulli_stream(p_m, n, seed, stream=2).bits
    flu = np.where(sex.bits == 1, flu_f, flu_m).astype(np.uint8)
    return PenguinColony(sex, BitSequence._wrap(flu))


@dataclass(frozen=True)
class DieDemo:
    fair: FinitePMF
    loaded: FinitePMF
    event_a: frozenset[int]
    event_b: frozenset[int]
    fair_result: KolmogorovResult
    loaded_result: KolmogorovResult
    balanced: FinitePMF
    balanced_result: KolmogorovResult


FAIR_DIE = FinitePMF.uniform(range(1, 7))
LOADED_DIE = FinitePMF(
    {1: Fraction(1, 3), 2: Fraction(1, 6), 3: Fraction(1, 2), 4: Fraction(0), 5: Fraction(0), 6: Fraction(0)}
)
# A loading under which {1,2} and {2,3} really are independent: 1/6 == 1/2 * 1/3.
# LOADED_DIE above gives P(A)P(B) = 1/3 against P(A & B) = 1/6.
BALANCED_DIE = FinitePMF(
    {1: Fraction(1, 3), 2: Fraction(1, 6), 3: Fraction(1, 6), 4: Fraction(1, 3), 5: Fraction(0), 6: Fraction(0)}
)


def loaded_die_demo() -> DieDemo:
    a, b = frozenset({1, 2}), frozenset({2, 3})
    return DieDemo(
        FAIR_DIE,
        LOADED_DIE,
        a,
        b,
        kolmogorov_independent(FAIR_DIE, a, b),
        kolmogorov_independent(LOADED_DIE, a, b),
        BALANCED_DIE,
        kolmogorov_independent(BALANCED_DIE, a, b),
    )


# -- fairness/accuracy trade-off ----------------------------------------------


@dataclass(frozen=True)
class TradeoffReport:
    predictions: BitSequence
    target_rate: Fraction | None
    accuracy_before: Fraction
    accuracy_after: Fraction
    flipped: int
    note: str
    audit: FairnessReport | None = None


def _accuracy(pred: np.ndarray, labels: np.ndarray) -> Fraction:
    if pred.size == 0:
        return Fraction(0)
    return Fraction(int(np.count_nonzero(pred == labels)), int(pred.size))


def randomize_for_independence(
    data: AuditInput,
    seed: int | Seed,
    target_rate: Number | None = None,
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> TradeoffReport:
    """Re-randomize predictions so every group accepts at the same rate.

    Individuals are partitioned by their pattern of group memberships; in each
    part a seeded random choice of individuals has its prediction flipped
    until the part's acceptance rate equals ``target_rate`` (default: the
    global rate). Every group is a union of parts, so every group ends at the
    target rate. Only the surplus outcome is flipped, which is the cheapest
    way to reach the target in accuracy.
    """
    if data.labels is None:
        raise ConfigError("E_LABELS_REQUIRED", "the trade-off needs true labels to measure accuracy")
    pred = data.predictions.bits
    labels = data.labels.bits
    n = pred.size
    before = _accuracy(pred, labels)
    if target_rate is None:
        target = Fraction(int(np.count_nonzero(pred)), n) if n else None
    else:
        target = to_fraction(target_rate)
    notes = []
    if n and np.all(labels == labels[0]):
        notes.append("labels are constant; the trade-off is degenerate")
    if target is None or target in (0, 1) or len(data.groups) == 0:
        notes.append("target rate is 0 or 1 (or no groups); predictions left unchanged")
        audit = audit_independence(data, tol, min_count, params) if len(data.groups) else None
        return TradeoffReport(data.predictions, target, before, before, 0, "; ".join(notes), audit)

    membership = np.stack([g.bits for _, g in data.groups], axis=1)
    _, part_of = np.unique(membership, axis=0, return_inverse=True)
    part_of = part_of.reshape(-1)
    order = _permutation(seed, 0, n)
    new = pred.copy()
    flipped = 0
    for part in np.unique(part_of):
        members = order[part_of[order] == part]  # seeded random order within the part
        size = members.size
        ones = int(np.count_nonzero(pred[members]))
        want = round(target * size)
        if ones > want:
            chosen = members[pred[members] == 1][: ones - want]
            new[chosen] = 0
        elif ones < want:
            chosen = members[pred[members] == 0][: want - ones]
            new[chosen] = 1
        else:
            continue
        flipped += int(chosen.size)
    out = AuditInput(BitSequence._wrap(new), data.labels, data.groups, data.source_digest)
    audit = audit_independence(out, tol, min_count, params)
    return TradeoffReport(
        out.predictions, target, before, _accuracy(new, labels), flipped, "; ".join(notes), audit
    )


def tradeoff_oracle(table: JointTable, target_rate: Number | None = None) -> Fraction:
    """Exact expected accuracy after equalizing a table's groups to ``target_rate``.

    In each group only the surplus outcome is flipped, so the mass moved is
    ``|rate_g - target|`` of the group, and each flip turns a correct or
    incorrect prediction into its opposite.
    """
    target = table.mass(y_hat=1) if target_rate is None else to_fraction(target_rate)
    acc = Fraction(0)
    for g in table.groups:
        w = table.mass(group=g)
        if w == 0:
            continue
        rate = table.mass(group=g, y_hat=1) / w
        if rate > target:
            move = (rate - target) / rate  # fraction of the group's ones flipped to 0
            acc += table.mass(group=g, y=0, y_hat=0)
            acc += (1 - move) * table.mass(group=g, y=1, y_hat=1) + move * table.mass(group=g, y=0, y_hat=1)
        elif rate < target:
            move = (target - rate) / (1 - rate)
            acc += table.mass(group=g, y=1, y_hat=1)
            acc += (1 - move) * table.mass(group=g, y=0, y_hat=0) + move * table.mass(group=g, y=1, y_hat=0)
        else:
            acc += table.mass(group=g, y=0, y_hat=0) + table.mass(group=g, y=1, y_hat=1)
    return acc
