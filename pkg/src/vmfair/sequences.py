"""Finite prefixes of 0-1 collectives and their relative-frequency estimates.

All frequency ratios are exact :class:`fractions.Fraction` values. Bits are
stored in a read-only ``numpy.uint8`` array so that counting over prefixes of
length 10**6 stays cheap; counts are always Python ints.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

Number = Union[int, float, str, Fraction]
Threshold = Union[Number, None]

AUTO = "auto"

DEFAULT_CHECKPOINT_RATIO = Fraction(2)
DEFAULT_WINDOW = 5
#: Lower bound of the auto threshold, and the threshold used for noiseless input.
THRESHOLD_FLOOR = Fraction(1, 100)
#: Width (in standard errors) of the auto threshold's noise band.
NOISE_Z = 4


def to_fraction(value: Number) -> Fraction:
    """Exact conversion; strings like ``"0.01"`` or ``"1/3"`` are parsed decimally."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


class BitSequence:
    """An immutable finite prefix ``x(1), ..., x(n)`` of a 0-1 sequence.

    Python indexing (``seq[i]``) is 0-based like any sequence; :meth:`at`
    takes the 1-based index used everywhere else in the package.
    """

    __slots__ = ("_bits",)

    def __init__(self, values: Iterable[int] | np.ndarray = ()):
        if isinstance(values, BitSequence):
            self._bits = values._bits
            return
        if not isinstance(values, np.ndarray):
            values = list(values)
        arr = np.asarray(values)
        if arr.size == 0:
            arr = np.zeros(0, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError(f"expected a 1-d sequence, got shape {arr.shape}")
        if arr.dtype != np.bool_:
            if arr.dtype.kind not in "iub" and not (
                arr.dtype.kind == "f" and np.all(np.floor(arr) == arr)
            ):
                raise ValueError(f"non-binary dtype {arr.dtype}")
            bad = np.flatnonzero((arr != 0) & (arr != 1))
            if bad.size:
                i = int(bad[0])
                raise ValueError(f"non-binary value {arr[i]!r} at index {i + 1}")
        bits = arr.astype(np.uint8, copy=True)
        bits.setflags(write=False)
        self._bits = bits

    @classmethod
    def _wrap(cls, bits: np.ndarray) -> BitSequence:
        # trusted constructor: caller guarantees a 0/1 uint8 array
        obj = cls.__new__(cls)
        bits = np.ascontiguousarray(bits, dtype=np.uint8)
        if bits.flags.writeable:
            bits = bits.copy()
            bits.setflags(write=False)
        obj._bits = bits
        return obj

    @classmethod
    def constant(cls, value: int, n: int) -> BitSequence:
        if value not in (0, 1):
            raise ValueError("value must be 0 or 1")
        return cls._wrap(np.full(n, value, dtype=np.uint8))

    @classmethod
    def periodic(cls, pattern: Iterable[int], n: int) -> BitSequence:
        """``pattern`` repeated and cut at length ``n``; ``pattern[0]`` is x(1)."""
        base = BitSequence(pattern).bits
        if base.size == 0:
            raise ValueError("empty pattern")
        reps = -(-n // base.size) if n else 0
        return cls._wrap(np.tile(base, reps)[:n])

    @classmethod
    def from_indices(cls, indices: Iterable[int], n: int) -> BitSequence:
        """Indicator of a set of 1-based indices, truncated to ``1..n``."""
        bits = np.zeros(n, dtype=np.uint8)
        idx = np.fromiter((i for i in indices if 1 <= i <= n), dtype=np.int64)
        bits[idx - 1] = 1
        return cls._wrap(bits)

    @classmethod
    def from_predicate(cls, predicate: Callable[[np.ndarray], np.ndarray], n: int) -> BitSequence:
        """Indicator of ``{i <= n : predicate(i)}``; ``predicate`` is vectorised over 1-based indices."""
        idx = np.arange(1, n + 1, dtype=np.int64)
        mask = np.asarray(predicate(idx), dtype=bool)
        if mask.shape != (n,):
            raise ValueError("predicate must return one boolean per index")
        return cls._wrap(mask.astype(np.uint8))

    @property
    def bits(self) -> np.ndarray:
        """Read-only uint8 view of the stored symbols."""
        return self._bits

    def at(self, i: int) -> int:
        if not 1 <= i <= len(self):
            raise IndexError(f"index {i} outside 1..{len(self)}")
        return int(self._bits[i - 1])

    def ones(self) -> int:
        return int(np.count_nonzero(self._bits))

    def prefix(self, n: int) -> BitSequence:
        return BitSequence._wrap(self._bits[:n])

    def append(self, bit: int) -> BitSequence:
        if bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        return BitSequence._wrap(np.append(self._bits, np.uint8(bit)))

    def tolist(self) -> list[int]:
        return self._bits.tolist()

    def __len__(self) -> int:
        return int(self._bits.size)

    def __iter__(self) -> Iterator[int]:
        return iter(self._bits.tolist())

    def __getitem__(self, item):
        if isinstance(item, slice):
            return BitSequence._wrap(self._bits[item])
        return int(self._bits[item])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitSequence):
            return NotImplemented
        return np.array_equal(self._bits, other._bits)

    def __hash__(self) -> int:
        return hash(self._bits.tobytes())

    def __repr__(self) -> str:
        n = len(self)
        head = "".join(map(str, self._bits[:32].tolist()))
        return f"BitSequence(n={n}, {head}{'...' if n > 32 else ''})"


@dataclass(frozen=True)
class FrequencyEstimate:
    """Counts of ones over a prefix; ``p_hat`` is ``None`` for the empty prefix."""

    ones_count: int
    total: int
    oscillation: Fraction = Fraction(0)

    def __post_init__(self):
        if not 0 <= self.ones_count <= self.total:
            raise ValueError(f"need 0 <= ones_count <= total, got {self.ones_count}/{self.total}")
        if self.oscillation < 0:
            raise ValueError("oscillation must be nonnegative")

    @property
    def defined(self) -> bool:
        return self.total > 0

    @property
    def p_hat(self) -> Fraction | None:
        if self.total == 0:
            return None
        return Fraction(self.ones_count, self.total)

    def __add__(self, other: FrequencyEstimate) -> FrequencyEstimate:
        return merge_counts(self, other)


EMPTY_ESTIMATE = FrequencyEstimate(0, 0)


def freq_estimate(x: BitSequence) -> FrequencyEstimate:
    return FrequencyEstimate(x.ones(), len(x))


def merge_counts(a: FrequencyEstimate, b: FrequencyEstimate) -> FrequencyEstimate:
    """Combine estimates taken over disjoint index ranges.

    Counts add; the oscillation of the merge is the larger of the two, which
    keeps the operation associative and commutative with ``EMPTY_ESTIMATE`` as
    identity.
    """
    return FrequencyEstimate(
        a.ones_count + b.ones_count,
        a.total + b.total,
        max(a.oscillation, b.oscillation),
    )


@dataclass(frozen=True)
class DiagnosticParams:
    checkpoint_ratio: Fraction = DEFAULT_CHECKPOINT_RATIO
    window: int = DEFAULT_WINDOW
    threshold: Fraction | str = AUTO

    def __post_init__(self):
        ratio = to_fraction(self.checkpoint_ratio)
        if ratio <= 1:
            raise ValueError("checkpoint_ratio must exceed 1")
        if self.window < 1:
            raise ValueError("window must be a positive integer")
        object.__setattr__(self, "checkpoint_ratio", ratio)
        if self.threshold != AUTO:
            thr = to_fraction(self.threshold)
            if thr <= 0:
                raise ValueError("threshold must be positive")
            object.__setattr__(self, "threshold", thr)


DEFAULT_DIAGNOSTIC = DiagnosticParams()


@dataclass(frozen=True)
class ConvergenceDiagnostic:
    """Finite-scale evidence that a relative frequency has settled.

    ``oscillation`` is the largest ``|p_hat(k) - p_hat(n)|`` over the
    ``window`` checkpoints preceding ``n``. It is ``None`` (and ``converged``
    false) when fewer than two checkpoints exist.
    """

    checkpoints: tuple[tuple[int, Fraction], ...]
    oscillation: Fraction | None
    threshold: Fraction
    converged: bool

    @property
    def conclusive(self) -> bool:
        return self.oscillation is not None


def geometric_checkpoints(n: int, ratio: Number = DEFAULT_CHECKPOINT_RATIO) -> list[int]:
    """Prefix lengths ``floor(n / ratio**j)``, deduplicated and ascending, ending at ``n``."""
    ratio = to_fraction(ratio)
    if ratio <= 1:
        raise ValueError("ratio must exceed 1")
    out: list[int] = []
    scale = Fraction(n)
    while True:
        k = math.floor(scale)
        if k < 1:
            break
        if not out or k != out[-1]:
            out.append(k)
        scale /= ratio
    out.reverse()
    return out


def auto_threshold(p: Fraction | None, k_first: int) -> Fraction:
    """Noise band ``max(0.01, 4 * sqrt(p(1-p)/k_first))`` for a window starting at ``k_first``."""
    if p is None or k_first <= 0:
        return THRESHOLD_FLOOR
    var = p * (1 - p) / k_first
    return max(THRESHOLD_FLOOR, NOISE_Z * Fraction(math.sqrt(var)))


def diagnose_prefix_counts(
    cumulative: np.ndarray,
    params: DiagnosticParams = DEFAULT_DIAGNOSTIC,
) -> ConvergenceDiagnostic:
    """Diagnostic from the cumulative ones-count array of a sequence (``cumulative[k-1]`` = ones in ``1..k``)."""
    n = int(cumulative.size)
    ks = geometric_checkpoints(n, params.checkpoint_ratio) if n else []
    points = tuple((k, Fraction(int(cumulative[k - 1]), k)) for k in ks)
    if len(points) < 2:
        thr = THRESHOLD_FLOOR if params.threshold == AUTO else params.threshold
        return ConvergenceDiagnostic(points, None, thr, False)
    final = points[-1][1]
    trailing = points[-(params.window + 1) : -1]
    oscillation = max(abs(p - final) for _, p in trailing)
    if params.threshold == AUTO:
        thr = auto_threshold(final, trailing[0][0])
    else:
        thr = params.threshold
    return ConvergenceDiagnostic(points, oscillation, thr, oscillation <= thr)


def convergence_diagnostic(
    x: BitSequence,
    checkpoint_ratio: Number = DEFAULT_CHECKPOINT_RATIO,
    window: int = DEFAULT_WINDOW,
    threshold: Number | str = AUTO,
) -> ConvergenceDiagnostic:
    params = DiagnosticParams(checkpoint_ratio, window, threshold)
    return diagnose_prefix_counts(np.cumsum(x.bits, dtype=np.int64), params)


def diagnose(x: BitSequence, params: DiagnosticParams = DEFAULT_DIAGNOSTIC) -> ConvergenceDiagnostic:
    return diagnose_prefix_counts(np.cumsum(x.bits, dtype=np.int64), params)
