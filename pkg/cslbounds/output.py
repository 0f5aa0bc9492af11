"""
output.py
Result tables written as CSV (LF line endings, UTF-8) or JSON arrays of objects.
"""

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional, Sequence, Union

from .exceptions import OutputError

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


def format_number(value: float) -> str:
    """17 significant digits; refuses NaN and infinities."""
    if not math.isfinite(value):
        raise OutputError(f"refusing to serialize non-finite value {value!r}")
    return format(value, ".17g")


@dataclass
class OutputTable:
    """Header names (with units) plus rows of numbers or short labels."""

    columns: Sequence[str]
    rows: List[Sequence[Any]] = field(default_factory=list)

    def add_row(self, *values: Any):
        if len(values) != len(self.columns):
            raise OutputError(f"row has {len(values)} values, table has {len(self.columns)} columns")
        self.rows.append(values)

    def _cells(self, row: Sequence[Any]) -> List[str]:
        cells = []
        for value in row:
            if isinstance(value, bool):
                cells.append("true" if value else "false")
            elif isinstance(value, (int, float)):
                cells.append(format_number(float(value)))
            else:
                cells.append(str(value))
        return cells

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(self._cells(row))
        return buffer.getvalue()

    def to_json(self) -> str:
        records = []
        for row in self.rows:
            record = {}
            for name, value in zip(self.columns, row):
                if isinstance(value, float):
                    format_number(value)
                record[name] = value
            records.append(record)
        return json.dumps(records, indent=2, allow_nan=False) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise OutputError(f"unknown output format {fmt!r}; expected one of {FORMATS}")


def write_table(table: OutputTable, path: Optional[Union[str, Path]], fmt: str = "csv", stream=None) -> str:
    """Render once, then write to path (or to stream when path is None)."""
    text = table.render(fmt)
    if path is None:
        if stream is not None:
            stream.write(text)
        return text
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}")
    logger.info("wrote %d rows to %s", len(table.rows), path)
    return text
