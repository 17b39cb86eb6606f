"""Independence verdicts at finite scale.

Three-valued verdicts replace the limit statements: a comparison is
``inconclusive`` unless enough indices were selected and both relative
frequencies involved pass their convergence diagnostic.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InputError
from .rules import SelectionRule
from .sequences import (
    AUTO,
    DEFAULT_DIAGNOSTIC,
    BitSequence,
    ConvergenceDiagnostic,
    DiagnosticParams,
    FrequencyEstimate,
    Number,
    diagnose,
    diagnose_prefix_counts,
    to_fraction,
)

DEFAULT_MIN_COUNT = 100
TOLERANCE_FLOOR = Fraction(1, 100)
TOLERANCE_Z = 3

Tolerance = Number  # a positive rational, or the string "auto"


class Verdict(str, enum.Enum):
    INDEPENDENT = "independent"
    DEPENDENT = "dependent"
    INCONCLUSIVE = "inconclusive"

    def __str__(self) -> str:
        return self.value


def auto_tolerance(p: Fraction | None, m: int) -> Fraction:
    """``max(0.01, 3 * sqrt(p(1-p)/m))``: a CLT band around the overall frequency."""
    if p is None or m <= 0:
        return TOLERANCE_FLOOR
    return max(TOLERANCE_FLOOR, TOLERANCE_Z * Fraction(math.sqrt(p * (1 - p) / m)))


def resolve_tolerance(tol: Tolerance, p: Fraction | None, m: int) -> Fraction:
    if tol == AUTO:
        return auto_tolerance(p, m)
    value = to_fraction(tol)
    if value <= 0:
        raise ValueError("explicit tolerance must be positive")
    return value


@dataclass(frozen=True)
class IndependenceVerdict:
    """Overall versus subselected relative frequency of ones in a target sequence."""

    p_overall: Fraction | None
    p_selected: Fraction
    selected_count: int
    total: int
    delta: Fraction | None
    tolerance: Fraction
    verdict: Verdict
    convergence_overall: ConvergenceDiagnostic
    convergence_selected: ConvergenceDiagnostic
    min_count: int = DEFAULT_MIN_COUNT

    @property
    def conclusive(self) -> bool:
        return self.verdict is not Verdict.INCONCLUSIVE


def compare_frequencies(
    x: BitSequence,
    mask: np.ndarray,
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> IndependenceVerdict:
    """Compare the frequency of ones in ``x`` with its frequency on ``mask``.

    Shared core of :func:`vonmises_independent` and :func:`admissible`. An
    empty selection gets ``p_selected = 0`` (the 0/0 := 0 convention) and is
    always inconclusive because its diagnostic has no checkpoints.
    """
    n = len(x)
    bits = x.bits
    selected = bits[mask]
    m = int(selected.size)
    ones_sel = int(np.count_nonzero(selected))
    p_overall = Fraction(int(np.count_nonzero(bits)), n) if n else None
    p_selected = Fraction(ones_sel, m) if m else Fraction(0)
    diag_overall = diagnose(x, params)
    diag_selected = diagnose_prefix_counts(np.cumsum(selected, dtype=np.int64), params)
    tolerance = resolve_tolerance(tol, p_overall, m)
    delta = abs(p_selected - p_overall) if p_overall is not None else None

    if (
        delta is None
        or m < min_count
        or not diag_overall.converged
        or not diag_selected.converged
    ):
        verdict = Verdict.INCONCLUSIVE
    elif delta <= tolerance:
        verdict = Verdict.INDEPENDENT
    else:
        verdict = Verdict.DEPENDENT
    return IndependenceVerdict(
        p_overall=p_overall,
        p_selected=p_selected,
        selected_count=m,
        total=n,
        delta=delta,
        tolerance=tolerance,
        verdict=verdict,
        convergence_overall=diag_overall,
        convergence_selected=diag_selected,
        min_count=min_count,
    )


def vonmises_independent(
    x: BitSequence,
    y: BitSequence,
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> IndependenceVerdict:
    """Is ``x`` independent of ``y``, with ``y`` acting as a selector?"""
    if len(x) != len(y):
        raise InputError("E_LENGTH_MISMATCH", f"streams differ in length: {len(x)} vs {len(y)}")
    return compare_frequencies(x, y.bits.astype(bool), tol, min_count, params)


def admissible(
    x: BitSequence,
    s: SelectionRule,
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> IndependenceVerdict:
    """Does subselection by ``s`` leave the frequency of ones in ``x`` unchanged?

    Only the subselected frequency of ``x`` must settle; the density of the
    rule itself may oscillate.
    """
    return compare_frequencies(x, s.mask(len(x)), tol, min_count, params)


@dataclass(frozen=True)
class CollectiveReport:
    frequency: FrequencyEstimate
    diagnostic: ConvergenceDiagnostic
    rules: tuple[str, ...]
    verdicts: tuple[IndependenceVerdict, ...]

    @property
    def is_collective(self) -> bool:
        return self.diagnostic.converged and all(
            v.verdict is Verdict.INDEPENDENT for v in self.verdicts
        )

    def __bool__(self) -> bool:
        return self.is_collective


def is_collective(
    x: BitSequence,
    rules: Sequence[SelectionRule],
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> CollectiveReport:
    """Frequency converges and every rule in ``rules`` is admissible."""
    diag = diagnose(x, params)
    osc = diag.oscillation if diag.oscillation is not None else Fraction(0)
    freq = FrequencyEstimate(x.ones(), len(x), osc)
    verdicts = tuple(admissible(x, r, tol, min_count, params) for r in rules)
    return CollectiveReport(freq, diag, tuple(r.describe() for r in rules), verdicts)


# -- finite probability spaces -------------------------------------------------


@dataclass(frozen=True)
class FinitePMF:
    """Exact probability mass function over finitely many outcomes."""

    prob: Mapping[Hashable, Fraction]

    def __post_init__(self):
        cleaned = {k: to_fraction(v) for k, v in self.prob.items()}
        if any(v < 0 for v in cleaned.values()):
            raise ValueError("probabilities must be nonnegative")
        total = sum(cleaned.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "prob", cleaned)

    @classmethod
    def uniform(cls, outcomes: Iterable[Hashable]) -> FinitePMF:
        outcomes = list(outcomes)
        return cls({o: Fraction(1, len(outcomes)) for o in outcomes})

    @property
    def outcomes(self) -> frozenset:
        return frozenset(self.prob)

    def measure(self, event: Iterable[Hashable]) -> Fraction:
        event = set(event)
        unknown = event - self.outcomes
        if unknown:
            raise ValueError(f"event contains unknown outcomes {sorted(map(repr, unknown))}")
        return sum((self.prob[o] for o in event), Fraction(0))


@dataclass(frozen=True)
class KolmogorovResult:
    independent: bool
    p_a: Fraction
    p_b: Fraction
    p_ab: Fraction

    @property
    def product(self) -> Fraction:
        return self.p_a * self.p_b


def kolmogorov_independent(p: FinitePMF, a: Iterable[Hashable], b: Iterable[Hashable]) -> KolmogorovResult:
    """Exact check of ``P(A & B) == P(A) P(B)``."""
    a, b = set(a), set(b)
    p_a, p_b, p_ab = p.measure(a), p.measure(b), p.measure(a & b)
    return KolmogorovResult(p_ab == p_a * p_b, p_a, p_b, p_ab)


# -- natural density -----------------------------------------------------------


class Membership(str, enum.Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class NaturalDensityEstimate:
    """Prefix density of a set of naturals and whether it appears to have a limit."""

    indicator: BitSequence
    estimate: FrequencyEstimate
    diagnostic: ConvergenceDiagnostic
    member_of_density_logic: Membership

    @property
    def density(self) -> Fraction | None:
        return self.estimate.p_hat


def natural_density(
    indicator: BitSequence,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> NaturalDensityEstimate:
    diag = diagnose(indicator, params)
    if not diag.conclusive:
        member = Membership.INCONCLUSIVE
    else:
        member = Membership.YES if diag.converged else Membership.NO
    osc = diag.oscillation if diag.oscillation is not None else Fraction(0)
    est = FrequencyEstimate(indicator.ones(), len(indicator), osc)
    return NaturalDensityEstimate(indicator, est, diag, member)


@dataclass(frozen=True)
class ProductFormVerdict:
    """Independence of two index sets as ``density(X & S) == density(X) * density(S)``."""

    density_x: Fraction | None
    density_s: Fraction | None
    density_xs: Fraction | None
    delta: Fraction | None
    tolerance: Fraction
    verdict: Verdict
    reason: str
    diagnostic_x: ConvergenceDiagnostic
    diagnostic_s: ConvergenceDiagnostic
    diagnostic_xs: ConvergenceDiagnostic

    @property
    def product(self) -> Fraction | None:
        if self.density_x is None or self.density_s is None:
            return None
        return self.density_x * self.density_s


def product_form_tolerance(nu_x: Fraction, nu_s: Fraction, n: int) -> Fraction:
    """Symmetric auto band: ``max(0.01 * nu_x * nu_s, 3 * sqrt(nu_x(1-nu_x) nu_s(1-nu_s) / n))``."""
    spread = Fraction(math.sqrt(nu_x * (1 - nu_x) * nu_s * (1 - nu_s) / n))
    return max(TOLERANCE_FLOOR * nu_x * nu_s, TOLERANCE_Z * spread)


def finadd_independent(
    x_set: BitSequence,
    s_set: BitSequence,
    tol: Tolerance = AUTO,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> ProductFormVerdict:
    """Product-form independence of two subsets of ``1..n`` under natural density.

    Both sets must have settled densities to be measurable at all (otherwise
    inconclusive). Their intersection must settle too; if it does not, the
    pair is reported dependent.
    """
    n = len(x_set)
    if n != len(s_set):
        raise InputError("E_LENGTH_MISMATCH", f"index sets differ in horizon: {n} vs {len(s_set)}")
    xs_bits = x_set.bits & s_set.bits
    diag_x = diagnose(x_set, params)
    diag_s = diagnose(s_set, params)
    diag_xs = diagnose_prefix_counts(np.cumsum(xs_bits, dtype=np.int64), params)
    if n == 0:
        thr = TOLERANCE_FLOOR if tol == AUTO else to_fraction(tol)
        return ProductFormVerdict(
            None, None, None, None, thr, Verdict.INCONCLUSIVE, "empty horizon", diag_x, diag_s, diag_xs
        )
    nu_x = Fraction(x_set.ones(), n)
    nu_s = Fraction(s_set.ones(), n)
    nu_xs = Fraction(int(np.count_nonzero(xs_bits)), n)
    delta = abs(nu_xs - nu_x * nu_s)
    if tol == AUTO:
        tolerance = product_form_tolerance(nu_x, nu_s, n)
    else:
        tolerance = to_fraction(tol)
        if tolerance < 0:
            raise ValueError("tolerance must be nonnegative")

    if not (diag_x.converged and diag_s.converged):
        verdict, reason = Verdict.INCONCLUSIVE, "a marginal density has not settled"
    elif not diag_xs.converged:
        verdict, reason = Verdict.DEPENDENT, "intersection density has not settled"
    elif delta <= tolerance:
        verdict, reason = Verdict.INDEPENDENT, "product form holds"
    else:
        verdict, reason = Verdict.DEPENDENT, "product form fails"
    return ProductFormVerdict(
        nu_x, nu_s, nu_xs, delta, tolerance, verdict, reason, diag_x, diag_s, diag_xs
    )
