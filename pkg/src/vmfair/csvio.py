"""CSV ingestion of audit streams and emission of frequency trajectories.

Input layout: a header row, then one row per individual in index order.
``y_hat`` is required, ``y`` optional, every other column is a group
indicator. Cells must be exactly ``0`` or ``1``.
"""

from __future__ import annotations

import csv
import hashlib
import io
from collections import Counter
from fractions import Fraction
from os import PathLike
from pathlib import Path

import numpy as np

from .errors import InputError
from .fairness import AuditInput, GroupFamily
from .sequences import DEFAULT_CHECKPOINT_RATIO, BitSequence, Number, geometric_checkpoints

PREDICTION_COLUMN = "y_hat"
LABEL_COLUMN = "y"


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def parse_csv(data: bytes | str) -> AuditInput:
    """Parse and validate CSV content; errors carry row (1-based data row) and column."""
    raw = data.encode("utf-8") if isinstance(data, str) else data
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise InputError("E_ENCODING", f"input is not UTF-8: {exc}") from None
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if not header or all(not h.strip() for h in header):
        raise InputError("E_MISSING_HEADER", "no header row")
    header = [h.strip() for h in header]
    if any(not h for h in header):
        raise InputError("E_MISSING_HEADER", "header contains an empty column name")
    dupes = [name for name, k in Counter(header).items() if k > 1]
    if dupes:
        raise InputError("E_DUPLICATE_COLUMN", f"duplicate column name {dupes[0]!r}", column=dupes[0])
    if PREDICTION_COLUMN not in header:
        raise InputError("E_MISSING_COLUMN", f"required column {PREDICTION_COLUMN!r} not found", column=PREDICTION_COLUMN)
    group_names = [h for h in header if h not in (PREDICTION_COLUMN, LABEL_COLUMN)]
    if not group_names:
        raise InputError("E_NO_GROUPS", "no group indicator columns")

    width = len(header)
    rows = []
    for i, row in enumerate(reader, start=1):
        if len(row) != width:
            raise InputError("E_RAGGED_ROW", f"expected {width} cells, found {len(row)}", row=i)
        rows.append(row)
    table = np.array(rows, dtype="<U8").reshape(len(rows), width)
    is_one = table == "1"
    bad = np.argwhere(~(is_one | (table == "0")))
    if bad.size:
        r, c = (int(v) for v in bad[0])
        raise InputError(
            "E_NON_BINARY",
            f"value {rows[r][c]!r} is not 0 or 1",
            row=r + 1,
            column=header[c],
        )
    cols = {name: BitSequence._wrap(is_one[:, j].astype(np.uint8)) for j, name in enumerate(header)}
    return AuditInput(
        predictions=cols[PREDICTION_COLUMN],
        labels=cols.get(LABEL_COLUMN),
        groups=GroupFamily({g: cols[g] for g in group_names}),
        source_digest=digest(raw),
    )


def ingest_csv(path: str | PathLike) -> AuditInput:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError("E_IO", f"cannot read {path}: {exc.strerror}") from None
    return parse_csv(data)


def to_csv(data: AuditInput) -> str:
    """Inverse of :func:`parse_csv` (``\\n`` line endings, fixed column order)."""
    names = [PREDICTION_COLUMN]
    cols = [data.predictions.bits]
    if data.labels is not None:
        names.append(LABEL_COLUMN)
        cols.append(data.labels.bits)
    for name, g in data.groups:
        names.append(name)
        cols.append(g.bits)
    out = io.StringIO(newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(names)
    if len(data):
        body = np.stack(cols, axis=1).astype("<U1")
        out.write("\n".join(",".join(r) for r in body.tolist()))
        out.write("\n")
    return out.getvalue()


def _fmt(value: Fraction | None) -> str:
    return "" if value is None else f"{float(value):.12g}"


def emit_trajectories(
    data: AuditInput,
    checkpoints: list[int] | None = None,
    ratio: Number = DEFAULT_CHECKPOINT_RATIO,
) -> str:
    """CSV rows ``n,group,p_hat_overall,p_hat_selected`` at geometric prefix lengths.

    ``p_hat_selected`` at ``n`` is the frequency of ones among the group's
    members within ``1..n`` (blank while the group has no members yet).
    """
    n = len(data)
    ks = geometric_checkpoints(n, ratio) if checkpoints is None else sorted(set(checkpoints))
    if any(not 1 <= k <= n for k in ks):
        raise InputError("E_BAD_CHECKPOINT", f"checkpoints must lie in 1..{n}")
    x = data.predictions.bits
    cum_x = np.cumsum(x, dtype=np.int64)
    out = io.StringIO(newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["n", "group", "p_hat_overall", "p_hat_selected"])
    for name, g in data.groups:
        cum_g = np.cumsum(g.bits, dtype=np.int64)
        cum_xg = np.cumsum(x & g.bits, dtype=np.int64)
        for k in ks:
            overall = Fraction(int(cum_x[k - 1]), k)
            m = int(cum_g[k - 1])
            selected = Fraction(int(cum_xg[k - 1]), m) if m else None
            writer.writerow([k, name, _fmt(overall), _fmt(selected)])
    return out.getvalue()
