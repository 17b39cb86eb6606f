"""Finite-scale checks that admissibility and product-form independence coincide.

For a target ``x`` with index set ``X`` and a selector with index set ``S``
over ``1..n``, the two deltas are tied by an exact identity:

    |d(X & S) - d(X) d(S)| == d(S) * |p_selected - p_overall|

where ``d`` is the prefix density. The harness therefore compares the two
verdicts with matched tolerances (the product-form band is the admissibility
band scaled by ``d(S)``) and checks each implication with a factor-2 slack.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .generators import bernoulli_stream
from .independence import (
    DEFAULT_MIN_COUNT,
    IndependenceVerdict,
    ProductFormVerdict,
    Tolerance,
    Verdict,
    admissible,
    finadd_independent,
    natural_density,
)
from .rules import SelectionRule, mask_from_attribute, multiples_of, periodic
from .sequences import AUTO, DEFAULT_DIAGNOSTIC, BitSequence, DiagnosticParams

SLACK = 2


class Status(str, enum.Enum):
    HOLDS = "holds"
    VACUOUS = "vacuous"  # antecedent false
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"  # hypothesis or antecedent undecided

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TheoremCheck:
    statement: str
    hypothesis_ok: bool
    hypothesis_note: str
    status: Status
    admissibility: IndependenceVerdict
    product_form: ProductFormVerdict

    @property
    def identity_exact(self) -> bool:
        """``delta_product == d(S) * delta_admissibility`` exactly."""
        a, p = self.admissibility, self.product_form
        if a.delta is None or p.delta is None or p.density_s is None:
            return False
        return p.delta == p.density_s * a.delta


def _matched_pair(
    x: BitSequence,
    s_set: BitSequence,
    tol: Tolerance,
    min_count: int,
    params: DiagnosticParams,
) -> tuple[IndependenceVerdict, ProductFormVerdict]:
    adm = admissible(x, mask_from_attribute(s_set, "S"), tol, min_count, params)
    n = len(x)
    nu_s = Fraction(s_set.ones(), n) if n else Fraction(0)
    fa = finadd_independent(x, s_set, nu_s * adm.tolerance, params)
    return adm, fa


def _selector_hypothesis(x: BitSequence, s_set: BitSequence, min_count: int, params: DiagnosticParams) -> tuple[bool, str]:
    nd_s = natural_density(s_set, params)
    nd_x = natural_density(x, params)
    if s_set.ones() < min_count:
        return False, f"selector picks fewer than {min_count} indices (density ~ 0)"
    if not nd_s.diagnostic.converged:
        return False, "selector density has not settled"
    if not nd_x.diagnostic.converged:
        return False, "target frequency has not settled"
    return True, "ok"


def check_admissibility_implies_independence(
    x: BitSequence,
    s: SelectionRule | BitSequence,
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> TheoremCheck:
    """If ``s`` (with settled density) is admissible for ``x``, then ``X`` and ``S``
    are product-form independent."""
    s_set = s.indicator(len(x)) if isinstance(s, SelectionRule) else s
    ok, note = _selector_hypothesis(x, s_set, min_count, params)
    adm, fa = _matched_pair(x, s_set, tol, min_count, params)
    if not ok or not adm.conclusive:
        status = Status.INCONCLUSIVE
    elif adm.verdict is Verdict.DEPENDENT:
        status = Status.VACUOUS
    elif fa.diagnostic_xs.converged and fa.delta <= SLACK * fa.tolerance:
        status = Status.HOLDS
    else:
        status = Status.VIOLATED
    return TheoremCheck("admissible => product-form independent", ok, note, status, adm, fa)


def check_independence_implies_admissibility(
    x_set: BitSequence,
    s_set: BitSequence,
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> TheoremCheck:
    """If ``X`` and ``S`` (positive density) are product-form independent, then
    the indicator of ``S`` is an admissible rule for the indicator of ``X``."""
    ok, note = _selector_hypothesis(x_set, s_set, min_count, params)
    adm, fa = _matched_pair(x_set, s_set, tol, min_count, params)
    if not ok or fa.verdict is Verdict.INCONCLUSIVE:
        status = Status.INCONCLUSIVE
    elif fa.verdict is Verdict.DEPENDENT:
        status = Status.VACUOUS
    elif adm.conclusive and adm.delta <= SLACK * adm.tolerance:
        status = Status.HOLDS
    else:
        status = Status.VIOLATED
    return TheoremCheck("product-form independent => admissible", ok, note, status, adm, fa)


@dataclass(frozen=True)
class PairResult:
    name: str
    n: int
    forward: TheoremCheck
    backward: TheoremCheck

    @property
    def passes_hypotheses(self) -> bool:
        return (
            self.forward.hypothesis_ok
            and self.forward.admissibility.conclusive
            and self.backward.product_form.verdict is not Verdict.INCONCLUSIVE
        )

    @property
    def agree(self) -> bool:
        return Status.VIOLATED not in (self.forward.status, self.backward.status)


@dataclass(frozen=True)
class HarnessReport:
    pairs: tuple[PairResult, ...]

    @property
    def qualifying(self) -> list[PairResult]:
        return [p for p in self.pairs if p.passes_hypotheses]

    @property
    def disagreements(self) -> list[PairResult]:
        return [p for p in self.qualifying if not p.agree]

    @property
    def ok(self) -> bool:
        return not self.disagreements


TARGET_PATTERNS = {
    "alt(1,0)": (1, 0),
    "per(1,1,0)": (1, 1, 0),
    "per(1,0,0,0)": (1, 0, 0, 0),
    "per(0,1,1,0,1)": (0, 1, 1, 0, 1),
}
TARGET_RATES = (Fraction(1, 10), Fraction(3, 10), Fraction(1, 2), Fraction(7, 10))
SELECTORS: dict[str, SelectionRule | Fraction] = {
    "evens": multiples_of(2),
    "mult3": multiples_of(3),
    "mult5": multiples_of(5),
    "mod7{1,2}": periodic(7, (1, 2)),
    "mod4{1}": periodic(4, 1),
    "mod6{0,1,5}": periodic(6, (0, 1, 5)),
    "bern(1/4)": Fraction(1, 4),
    "bern(1/2)": Fraction(1, 2),
}


def generated_pairs(n: int, seed: int):
    """Yields ``(name, x, S)`` over periodic and seeded Bernoulli targets and
    selectors; horizons cycle through ``n, 2n, ..., 10n``."""
    targets: list[tuple[str, object]] = list(TARGET_PATTERNS.items()) + [
        (f"bern({p})", p) for p in TARGET_RATES
    ]
    k = 0
    for t_name, t in targets:
        for s_name, s in SELECTORS.items():
            size = n * (1 + k % 10)
            if isinstance(t, tuple):
                x = BitSequence.periodic(t, size)
            else:
                x = bernoulli_stream(t, size, seed, stream=2 * k)
            if isinstance(s, SelectionRule):
                s_set = s.indicator(size)
            else:
                s_set = bernoulli_stream(s, size, seed, stream=2 * k + 1)
            yield f"{t_name}|{s_name}", x, s_set
            k += 1


def run_harness(
    n: int = 100_000,
    seed: int = 0,
    tol: Tolerance = AUTO,
    min_count: int = DEFAULT_MIN_COUNT,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> HarnessReport:
    pairs = []
    for name, x, s_set in generated_pairs(n, seed):
        fwd = check_admissibility_implies_independence(x, s_set, tol, min_count, params)
        bwd = check_independence_implies_admissibility(x, s_set, tol, min_count, params)
        pairs.append(PairResult(name, len(x), fwd, bwd))
    return HarnessReport(tuple(pairs))
