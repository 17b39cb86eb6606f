"""Command line entry point: ``audit``, ``demo`` and ``verify-theorems``.

Exit codes: 0 all requested criteria fair, 1 some cell dependent,
2 inconclusive only, 3 input or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import __version__
from .csvio import emit_trajectories, ingest_csv, parse_csv, to_csv
from .errors import ConfigError, VmfairError
from .generators import (
    BIASED_TABLE,
    GENERATOR_ID,
    loaded_die_demo,
    penguin_colony,
    randomize_for_independence,
    sample_joint,
    tradeoff_oracle,
)
from .report import EXIT_ERROR, AuditConfig, run_audit
from .theorems import run_harness

CONFIG_ENV = "VMFAIR_CONFIG"


def _q(v: Fraction | None) -> str | None:
    return None if v is None else f"{v.numerator}/{v.denominator}"


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="")


def _load_config_defaults(path: str | None) -> dict[str, Any]:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError("E_CONFIG_IO", f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("E_BAD_CONFIG", f"config {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("E_BAD_CONFIG", "config must be a JSON object")
    return raw


def _build_config(args: argparse.Namespace) -> AuditConfig:
    raw = _load_config_defaults(args.config)
    if args.criterion is not None:
        raw["criteria"] = [c.strip() for c in args.criterion.split(",") if c.strip()]
    if args.tolerance is not None:
        raw["tolerance"] = args.tolerance
    if args.min_count is not None:
        raw["min_count"] = args.min_count
    if args.groups is not None:
        raw["groups"] = [g.strip() for g in args.groups.split(",") if g.strip()]
    if args.intersections:
        raw["intersections"] = True
    diag = dict(raw.get("diagnostic", {}))
    for key in ("checkpoint_ratio", "window", "threshold"):
        value = getattr(args, key)
        if value is not None:
            diag[key] = value
    if diag:
        raw["diagnostic"] = diag
    return AuditConfig.from_dict(raw)


def cmd_audit(args: argparse.Namespace) -> int:
    config = _build_config(args)
    if args.input == "-":
        data = parse_csv(sys.stdin.buffer.read())
    else:
        data = ingest_csv(args.input)
    doc = run_audit(config, data)
    _write(args.report, doc.to_json())
    if args.trajectories:
        _write(args.trajectories, emit_trajectories(data, ratio=config.diagnostic.checkpoint_ratio))
    for name, report in doc.reports.items():
        counts = {}
        for c in report.cells:
            counts[c.verdict.value] = counts.get(c.verdict.value, 0) + 1
        detail = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
        print(f"{name}: {report.summary.value} ({detail})", file=sys.stderr)
    return doc.exit_code()


def _demo_loaded_die(args: argparse.Namespace) -> int:
    demo = loaded_die_demo()

    def result(r):
        return {
            "P(A)": _q(r.p_a),
            "P(B)": _q(r.p_b),
            "P(A&B)": _q(r.p_ab),
            "P(A)P(B)": _q(r.product),
            "independent": r.independent,
        }

    out = {
        "event_a": sorted(demo.event_a),
        "event_b": sorted(demo.event_b),
        "fair": {"pmf": {str(k): _q(v) for k, v in demo.fair.prob.items()}, **result(demo.fair_result)},
        "loaded": {"pmf": {str(k): _q(v) for k, v in demo.loaded.prob.items()}, **result(demo.loaded_result)},
        "balanced": {"pmf": {str(k): _q(v) for k, v in demo.balanced.prob.items()}, **result(demo.balanced_result)},
    }
    _write(args.output, json.dumps(out, indent=2, sort_keys=True) + "\n")
    return 0


def _demo_penguin(args: argparse.Namespace) -> int:
    rates = (Fraction(3, 10), Fraction(3, 10)) if args.equal_rates else (Fraction(3, 5), Fraction(1, 10))
    colony = penguin_colony(Fraction(1, 2), rates, args.n, args.seed)
    _write(args.output, to_csv(colony.as_audit_input()))
    return 0


def _demo_biased(args: argparse.Namespace) -> int:
    _write(args.output, to_csv(sample_joint(BIASED_TABLE, args.n, args.seed)))
    return 0


def _demo_tradeoff(args: argparse.Namespace) -> int:
    data = sample_joint(BIASED_TABLE, args.n, args.seed)
    before = run_audit(AuditConfig(("independence",)), data)
    result = randomize_for_independence(data, args.seed)
    out = {
        "generator": GENERATOR_ID,
        "seed": args.seed,
        "n": args.n,
        "target_rate": _q(result.target_rate),
        "accuracy_before": _q(result.accuracy_before),
        "accuracy_after": _q(result.accuracy_after),
        "accuracy_after_oracle": _q(tradeoff_oracle(BIASED_TABLE)),
        "flipped": result.flipped,
        "independence_before": before.reports["independence"].summary.value,
        "independence_after": result.audit.summary.value if result.audit else None,
        "note": result.note,
    }
    _write(args.output, json.dumps(out, indent=2, sort_keys=True) + "\n")
    if args.csv:
        from .fairness import AuditInput

        _write(args.csv, to_csv(AuditInput(result.predictions, data.labels, data.groups)))
    return 0


DEMOS = {
    "loaded-die": _demo_loaded_die,
    "penguin": _demo_penguin,
    "biased": _demo_biased,
    "tradeoff": _demo_tradeoff,
}


def cmd_demo(args: argparse.Namespace) -> int:
    return DEMOS[args.name](args)


def cmd_verify_theorems(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    report = run_harness(args.n, args.seed)
    elapsed = time.perf_counter() - start
    rows = []
    for p in report.pairs:
        fwd, bwd = p.forward, p.backward
        rows.append(
            {
                "pair": p.name,
                "n": p.n,
                "qualifies": p.passes_hypotheses,
                "admissible": fwd.admissibility.verdict.value,
                "product_form": bwd.product_form.verdict.value,
                "forward": fwd.status.value,
                "backward": bwd.status.value,
                "delta_admissibility": _q(fwd.admissibility.delta),
                "delta_product_form": _q(fwd.product_form.delta),
                "identity_exact": fwd.identity_exact,
            }
        )
    qualifying = len(report.qualifying)
    ok = report.ok and qualifying >= args.min_pairs
    out = {
        "pairs": rows,
        "qualifying": qualifying,
        "disagreements": [p.name for p in report.disagreements],
        "ok": ok,
        "seconds": round(elapsed, 3),
    }
    _write(args.output, json.dumps(out, indent=2) + "\n")
    print(
        f"{qualifying} qualifying pairs, {len(report.disagreements)} disagreements, {elapsed:.1f}s",
        file=sys.stderr,
    )
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vmfair", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"vmfair {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    audit = sub.add_parser("audit", help="audit a CSV of predictions, labels and groups")
    audit.add_argument("--input", required=True, help="CSV file, or - for stdin")
    audit.add_argument("--criterion", help="comma list of independence,separation,sufficiency")
    audit.add_argument("--tolerance", help="'auto' or a positive rational such as 0.02 or 1/50")
    audit.add_argument("--min-count", type=int, dest="min_count")
    audit.add_argument("--groups", help="comma list of group columns (default: all)")
    audit.add_argument("--intersections", action="store_true", help="also audit pairwise group intersections")
    audit.add_argument("--report", help="write the JSON report here (default: stdout)")
    audit.add_argument("--trajectories", help="write frequency trajectories CSV here")
    audit.add_argument("--checkpoint-ratio", dest="checkpoint_ratio")
    audit.add_argument("--window", type=int)
    audit.add_argument("--threshold", help="'auto' or a positive rational")
    audit.add_argument("--config", help=f"JSON config with defaults (else ${CONFIG_ENV})")
    audit.set_defaults(func=cmd_audit)

    demo = sub.add_parser("demo", help="emit a worked example")
    demo.add_argument("name", choices=sorted(DEMOS))
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--n", type=int, default=100_000)
    demo.add_argument("--equal-rates", action="store_true", help="penguin: same flu rate for both sexes")
    demo.add_argument("--output", help="default: stdout")
    demo.add_argument("--csv", help="tradeoff: also write the randomized data as CSV")
    demo.set_defaults(func=cmd_demo)

    verify = sub.add_parser("verify-theorems", help="check admissibility <=> product-form independence")
    verify.add_argument("--n", type=int, default=100_000, help="base horizon; pairs use n..10n")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--min-pairs", type=int, default=50, dest="min_pairs")
    verify.add_argument("--output", help="default: stdout")
    verify.set_defaults(func=cmd_verify_theorems)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VmfairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error: [E_INVALID] {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
