"""Plot-ready result tables and their CSV / JSON renderings."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

SIG_DIGITS = 12


def fmt_number(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "nan"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, f".{SIG_DIGITS}g")
    return str(value)


def _json_value(value):
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(format(value, f".{SIG_DIGITS}g"))
    return value


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append([float(v) if hasattr(v, "dtype") else v for v in values])

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def to_csv(table: Table, echo_text: str = "") -> str:
    lines = [f"# {key}: {fmt_number(value)}" for key, value in table.meta.items()]
    if echo_text:
        lines.append("# config:")
        lines.extend(f"#   {line}" for line in echo_text.splitlines())
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(fmt_number(v) for v in row))
    return "\n".join(lines) + "\n"


def to_json(table: Table, config: dict | None = None) -> str:
    meta = {key: _json_value(value) for key, value in table.meta.items()}
    meta["columns"] = list(table.columns)
    if config is not None:
        meta["config"] = config
    rows = [{c: _json_value(v) for c, v in zip(table.columns, row)} for row in table.rows]
    return json.dumps({"meta": meta, "rows": rows}, indent=2) + "\n"
