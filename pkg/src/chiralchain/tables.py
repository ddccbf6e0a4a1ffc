"""Byte-stable CSV / JSON / gnuplot emission of flat result rows."""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidArgument

FORMATS = ("csv", "json")


@dataclass
class SweepRow:
    """One result: inputs key the row, outputs are measured, flags report solver status."""

    inputs: dict
    outputs: dict
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if "converged" not in self.flags:
            raise InvalidArgument("every row needs a 'converged' flag")
        overlap = (set(self.inputs) & set(self.outputs)) | (set(self.flags) & (set(self.inputs) | set(self.outputs)))
        if overlap:
            raise InvalidArgument(f"column names used twice: {sorted(overlap)}")

    def columns(self) -> list[str]:
        return sorted(self.inputs) + sorted(self.outputs) + sorted(self.flags, key=_flag_order)

    def as_dict(self) -> dict:
        merged = {**self.inputs, **self.outputs, **self.flags}
        return {k: merged[k] for k in self.columns()}


def _flag_order(name: str):
    # converged first so the status is always the first flag column
    return (name != "converged", name)


def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return "%.17g" % x
    return str(x)


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return format_value(x)
    if hasattr(x, "item"):
        return _json_value(x.item())
    return x


def _check_rows(rows: list[SweepRow]) -> list[str]:
    if not rows:
        raise InvalidArgument("no rows to emit")
    cols = rows[0].columns()
    for r in rows[1:]:
        if r.columns() != cols:
            raise InvalidArgument("rows must share the same columns")
    return cols


def render_csv(rows: list[SweepRow]) -> str:
    cols = _check_rows(rows)
    lines = [",".join(cols)]
    for r in rows:
        d = r.as_dict()
        lines.append(",".join(_csv_field(format_value(d[c])) for c in cols))
    return "\n".join(lines) + "\n"


def _csv_field(s: str) -> str:
    if any(ch in s for ch in ',"\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def render_json(rows: list[SweepRow]) -> str:
    _check_rows(rows)
    data = [{k: _json_value(v) for k, v in r.as_dict().items()} for r in rows]
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def render_object(obj: dict) -> str:
    """A single JSON object, with the same inf/nan handling as rows."""
    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        return _json_value(v)

    return json.dumps(clean(obj), indent=2, allow_nan=False) + "\n"


def render_gnuplot(rows: list[SweepRow]) -> str:
    cols = _check_rows(rows)
    lines = ["# " + " ".join(cols)]
    for r in rows:
        d = r.as_dict()
        lines.append(" ".join(format_value(d[c]) or "-" for c in cols))
    return "\n".join(lines) + "\n"


def _write(text: str, path: str | Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def emit_table(rows: list[SweepRow], fmt: str = "csv", path: str | Path | None = None,
               *, metadata: dict | None = None, gnuplot: bool = False) -> None:
    """Write rows to path (stdout if None).

    Metadata goes to a sidecar `<path>.meta.json` so the table itself stays a
    plain grid; the .dat for gnuplot is written next to path.
    """
    if fmt not in FORMATS:
        raise InvalidArgument(f"format must be one of {FORMATS}, got {fmt!r}")
    _write(render_csv(rows) if fmt == "csv" else render_json(rows), path)
    if path is not None and metadata is not None:
        _write(render_object(metadata), f"{path}.meta.json")
    if gnuplot:
        if path is None:
            raise InvalidArgument("--gnuplot needs --out")
        _write(render_gnuplot(rows), Path(path).with_suffix(".dat"))
