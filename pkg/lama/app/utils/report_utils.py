"""
Report utilities for LAMA.
Tables with a stable column order, written as CSV or JSON.
"""
import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO

FLOAT_FORMAT = "{:.6f}"


@dataclass
class ReportTable:
    """Named table; every row maps each column to a value or None."""
    name: str
    columns: List[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)

    def add_row(self, **values: Any) -> None:
        self.rows.append({column: values.get(column) for column in self.columns})


def format_value(value: Any) -> str:
    """CSV cell text: fixed decimals with '.', empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return FLOAT_FORMAT.format(value)
    return str(value)


def write_csv(table: ReportTable, stream: TextIO) -> None:
    """Header row plus one line per row, UTF-8 text with '\\n' line endings."""
    writer = csv.DictWriter(stream, fieldnames=table.columns, lineterminator="\n")
    writer.writeheader()
    for row in table.rows:
        writer.writerow({column: format_value(row.get(column)) for column in table.columns})


def table_to_csv(table: ReportTable) -> str:
    buffer = io.StringIO()
    write_csv(table, buffer)
    return buffer.getvalue()


def tables_to_json(tables: Sequence[ReportTable]) -> str:
    """All tables as one JSON document."""
    document = {
        "tables": [
            {"name": table.name, "columns": table.columns, "rows": table.rows}
            for table in tables
        ]
    }
    return json.dumps(document, indent=2) + "\n"


def render_tables(tables: Sequence[ReportTable], output_format: str) -> str:
    """Tables as one text stream; CSV tables are separated by a '# <name>' line."""
    if output_format == "json":
        return tables_to_json(tables)
    if len(tables) == 1:
        return table_to_csv(tables[0])
    return "\n".join(f"# {table.name}\n{table_to_csv(table)}" for table in tables)


def write_tables(
    tables: Sequence[ReportTable],
    output_format: str,
    output_dir: Optional[Path] = None,
    stream: Optional[TextIO] = None,
) -> List[Path]:
    """Write tables to one file each in output_dir, or all of them to stream."""
    if output_dir is None:
        stream.write(render_tables(tables, output_format))
        return []

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for table in tables:
        path = output_dir / f"{table.name}.{output_format}"
        with open(path, "w", encoding="utf-8", newline="") as f:
            if output_format == "json":
                f.write(tables_to_json([table]))
            else:
                write_csv(table, f)
        written.append(path)
    return written

