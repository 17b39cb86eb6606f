"""Audit configuration, orchestration and the JSON report document.

Rationals are serialized as ``"p/q"`` strings so that verdicts round-trip
exactly; a float rendering sits next to each for human readers.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import __version__
from .errors import ConfigError
from .fairness import AUDITS, CRITERIA, AuditCell, AuditInput, FairnessReport, GroupFamily, Summary
from .independence import DEFAULT_MIN_COUNT, IndependenceVerdict, Verdict
from .sequences import AUTO, ConvergenceDiagnostic, DiagnosticParams, to_fraction

SCHEMA_VERSION = "vmfair.report/1"

EXIT_FAIR = 0
EXIT_DEPENDENT = 1
EXIT_INCONCLUSIVE = 2
EXIT_ERROR = 3


def _q(value: Fraction | None) -> str | None:
    return None if value is None else f"{value.numerator}/{value.denominator}"


def _unq(value: str | None) -> Fraction | None:
    return None if value is None else Fraction(value)


def _f(value: Fraction | None) -> float | None:
    return None if value is None else float(value)


@dataclass(frozen=True)
class AuditConfig:
    criteria: tuple[str, ...] = ("independence",)
    tolerance: Fraction | str = AUTO
    min_count: int = DEFAULT_MIN_COUNT
    diagnostic: DiagnosticParams = field(default_factory=DiagnosticParams)
    groups: tuple[str, ...] | None = None  # None: every group column
    intersections: bool = False
    seed: int | None = None

    def __post_init__(self):
        criteria = tuple(dict.fromkeys(self.criteria))
        if not criteria:
            raise ConfigError("E_NO_CRITERIA", "at least one criterion is required")
        unknown = [c for c in criteria if c not in CRITERIA]
        if unknown:
            raise ConfigError("E_UNKNOWN_CRITERION", f"unknown criterion {unknown[0]!r}; choose from {CRITERIA}")
        object.__setattr__(self, "criteria", criteria)
        if self.tolerance != AUTO:
            try:
                tol = to_fraction(self.tolerance)
            except (TypeError, ValueError, ZeroDivisionError):
                raise ConfigError("E_BAD_TOLERANCE", f"tolerance must be 'auto' or a rational, got {self.tolerance!r}") from None
            if tol <= 0:
                raise ConfigError("E_BAD_TOLERANCE", "tolerance must be positive")
            object.__setattr__(self, "tolerance", tol)
        if self.min_count < 0:
            raise ConfigError("E_BAD_MIN_COUNT", "min_count must be nonnegative")
        if self.groups is not None:
            object.__setattr__(self, "groups", tuple(self.groups))

    def check(self, data: AuditInput) -> None:
        needs_labels = [c for c in self.criteria if c in ("separation", "sufficiency")]
        if needs_labels and data.labels is None:
            raise ConfigError(
                "E_LABELS_REQUIRED",
                f"criterion {needs_labels[0]!r} needs a true-label column 'y'",
                column="y",
            )
        if self.groups is not None:
            missing = [g for g in self.groups if g not in data.groups.names]
            if missing:
                raise ConfigError("E_UNKNOWN_GROUP", f"group column {missing[0]!r} not in input", column=missing[0])
            if not self.groups:
                raise ConfigError("E_NO_GROUPS", "empty group selection")

    def to_dict(self) -> dict[str, Any]:
        d = self.diagnostic
        return {
            "criteria": list(self.criteria),
            "tolerance": self.tolerance if self.tolerance == AUTO else _q(self.tolerance),
            "min_count": self.min_count,
            "diagnostic": {
                "checkpoint_ratio": _q(d.checkpoint_ratio),
                "window": d.window,
                "threshold": d.threshold if d.threshold == AUTO else _q(d.threshold),
            },
            "groups": None if self.groups is None else list(self.groups),
            "intersections": self.intersections,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> AuditConfig:
        known = {"criteria", "tolerance", "min_count", "diagnostic", "groups", "intersections", "seed"}
        extra = set(raw) - known
        if extra:
            raise ConfigError("E_BAD_CONFIG", f"unknown config key {sorted(extra)[0]!r}")
        kwargs: dict[str, Any] = {k: raw[k] for k in known & set(raw) if k != "diagnostic"}
        if "criteria" in kwargs:
            crit = kwargs["criteria"]
            kwargs["criteria"] = tuple(crit.split(",")) if isinstance(crit, str) else tuple(crit)
        if "groups" in kwargs and kwargs["groups"] is not None:
            kwargs["groups"] = tuple(kwargs["groups"])
        if "diagnostic" in raw:
            diag = dict(raw["diagnostic"])
            try:
                kwargs["diagnostic"] = DiagnosticParams(
                    diag.get("checkpoint_ratio", 2), diag.get("window", 5), diag.get("threshold", AUTO)
                )
            except (TypeError, ValueError) as exc:
                raise ConfigError("E_BAD_CONFIG", f"bad diagnostic parameters: {exc}") from None
        return cls(**kwargs)


def diagnostic_to_dict(d: ConvergenceDiagnostic) -> dict[str, Any]:
    return {
        "checkpoints": [[k, _q(p)] for k, p in d.checkpoints],
        "oscillation": _q(d.oscillation),
        "threshold": _q(d.threshold),
        "converged": d.converged,
    }


def diagnostic_from_dict(raw: Mapping[str, Any]) -> ConvergenceDiagnostic:
    return ConvergenceDiagnostic(
        tuple((int(k), Fraction(p)) for k, p in raw["checkpoints"]),
        _unq(raw["oscillation"]),
        Fraction(raw["threshold"]),
        bool(raw["converged"]),
    )


def verdict_to_dict(v: IndependenceVerdict) -> dict[str, Any]:
    return {
        "verdict": v.verdict.value,
        "p_overall": _q(v.p_overall),
        "p_selected": _q(v.p_selected),
        "delta": _q(v.delta),
        "tolerance": _q(v.tolerance),
        "selected_count": v.selected_count,
        "total": v.total,
        "min_count": v.min_count,
        "approx": {
            "p_overall": _f(v.p_overall),
            "p_selected": _f(v.p_selected),
            "delta": _f(v.delta),
            "tolerance": _f(v.tolerance),
        },
        "convergence_overall": diagnostic_to_dict(v.convergence_overall),
        "convergence_selected": diagnostic_to_dict(v.convergence_selected),
    }


def verdict_from_dict(raw: Mapping[str, Any]) -> IndependenceVerdict:
    return IndependenceVerdict(
        p_overall=_unq(raw["p_overall"]),
        p_selected=Fraction(raw["p_selected"]),
        selected_count=int(raw["selected_count"]),
        total=int(raw["total"]),
        delta=_unq(raw["delta"]),
        tolerance=Fraction(raw["tolerance"]),
        verdict=Verdict(raw["verdict"]),
        convergence_overall=diagnostic_from_dict(raw["convergence_overall"]),
        convergence_selected=diagnostic_from_dict(raw["convergence_selected"]),
        min_count=int(raw["min_count"]),
    )


def fairness_report_to_dict(r: FairnessReport) -> dict[str, Any]:
    return {
        "summary": r.summary.value,
        "cells": [
            {"group": c.group, "stratum": c.stratum, "rule": c.rule, **verdict_to_dict(c.result)}
            for c in r.cells
        ],
    }


def fairness_report_from_dict(criterion: str, raw: Mapping[str, Any]) -> FairnessReport:
    cells = tuple(
        AuditCell(criterion, c["group"], c["stratum"], c["rule"], verdict_from_dict(c)) for c in raw["cells"]
    )
    return FairnessReport(criterion, cells)


@dataclass(frozen=True)
class ReportDocument:
    config: AuditConfig
    reports: Mapping[str, FairnessReport]
    n: int
    input_digest: str | None
    tool_version: str = __version__
    schema_version: str = SCHEMA_VERSION

    @property
    def summaries(self) -> dict[str, Summary]:
        return {k: r.summary for k, r in self.reports.items()}

    def exit_code(self) -> int:
        cells = [c for r in self.reports.values() for c in r.cells]
        if any(c.verdict is Verdict.DEPENDENT for c in cells):
            return EXIT_DEPENDENT
        if all(s is Summary.FAIR for s in self.summaries.values()):
            return EXIT_FAIR
        return EXIT_INCONCLUSIVE

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "input_digest": self.input_digest,
            "n": self.n,
            "config": self.config.to_dict(),
            "criteria": {k: fairness_report_to_dict(r) for k, r in self.reports.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> ReportDocument:
        if raw.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError("E_SCHEMA", f"unsupported report schema {raw.get('schema_version')!r}")
        return cls(
            config=AuditConfig.from_dict(raw["config"]),
            reports={k: fairness_report_from_dict(k, v) for k, v in raw["criteria"].items()},
            n=int(raw["n"]),
            input_digest=raw["input_digest"],
            tool_version=raw["tool_version"],
            schema_version=raw["schema_version"],
        )

    @classmethod
    def from_json(cls, text: str) -> ReportDocument:
        return cls.from_dict(json.loads(text))


def select_groups(config: AuditConfig, data: AuditInput) -> AuditInput:
    groups = data.groups
    if config.groups is not None:
        groups = GroupFamily({g: groups[g] for g in config.groups})
    if config.intersections:
        groups = groups.with_intersections()
    return AuditInput(data.predictions, data.labels, groups, data.source_digest)


def run_audit(config: AuditConfig, data: AuditInput) -> ReportDocument:
    config.check(data)
    data = select_groups(config, data)
    reports = {
        c: AUDITS[c](data, config.tolerance, config.min_count, config.diagnostic) for c in config.criteria
    }
    return ReportDocument(config, reports, len(data), data.source_digest)
