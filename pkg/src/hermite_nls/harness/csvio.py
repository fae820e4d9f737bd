"""CSV tables with a header row and 17-significant-digit numerics.

Reading and re-writing a table produced here gives identical bytes.
"""

from __future__ import annotations

import csv
import io
import math
import os

import numpy as np

__all__ = ["CsvFormatError", "format_number", "dumps_table", "write_table", "read_table",
           "write_nodal_snapshot", "write_coefficients"]


class CsvFormatError(ValueError):
    pass


def format_number(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def dumps_table(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise CsvFormatError(f"row has {len(row)} fields, header has {len(header)}")
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def write_table(path, header, rows) -> None:
    text = dumps_table(header, rows)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _parse_cell(cell: str, column: str, lineno: int):
    try:
        if cell.lstrip("+-").isdigit() and cell != "-0":
            return int(cell)
        return float(cell)
    except ValueError:
        if column in ("scheme", "kind", "equation"):
            return cell
        raise CsvFormatError(f"row {lineno}: column {column!r} is not numeric: {cell!r}") from None


def read_table(source) -> tuple[list[str], list[list]]:
    """Parse a table from a path or an open text stream; returns (header, rows)."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty CSV: missing header") from None
    rows = []
    for lineno, raw in enumerate(reader, start=2):
        if not raw:
            continue
        if len(raw) != len(header):
            raise CsvFormatError(f"row {lineno}: expected {len(header)} fields, got {len(raw)}")
        rows.append([_parse_cell(cell, col, lineno) for cell, col in zip(raw, header)])
    return header, rows


def write_nodal_snapshot(path, nodes, values) -> None:
    values = np.asarray(values, dtype=complex)
    write_table(path, ["x", "re", "im"], zip(nodes, values.real, values.imag))


def write_coefficients(path, coeffs) -> None:
    coeffs = np.asarray(coeffs, dtype=complex)
    write_table(path, ["m", "re", "im"], zip(range(coeffs.size), coeffs.real, coeffs.imag))
