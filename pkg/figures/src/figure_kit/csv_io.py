"""Readers for the CSV schemas published by the fracbeam CLI."""

from __future__ import annotations

import csv

SCHEMAS: dict[str, list[str]] = {
    "spectrum": ["re", "im"],
    "resolvent": ["lambda", "norm"],
    "energy": ["t", "energy"],
    "regionmap": ["tau", "sigma", "region", "phi_theory", "phi_hat", "r2", "pass"],
}

# columns carried through as text rather than parsed to float
_TEXT_COLUMNS = {"region"}
_BOOL_COLUMNS = {"pass"}


class SchemaError(Exception):
    """Input file does not match the published schema for the figure kind."""


class EmptyDataError(Exception):
    """Input file is schema-valid but carries no samples."""


def check_header(kind: str, header: list[str], path: str) -> None:
    expected = SCHEMAS[kind]
    for position, want in enumerate(expected):
        if position >= len(header):
            raise SchemaError(f"{path}: missing column '{want}' (expected {','.join(expected)})")
        if header[position] != want:
            raise SchemaError(
                f"{path}: column {position + 1} is '{header[position]}', expected '{want}'"
            )
    if len(header) > len(expected):
        raise SchemaError(f"{path}: unexpected column '{header[len(expected)]}'")


def _parse_cell(column: str, text: str, path: str, line_no: int):
    if column in _TEXT_COLUMNS:
        return text
    if column in _BOOL_COLUMNS:
        if text not in ("true", "false"):
            raise SchemaError(f"{path}: line {line_no}: column '{column}' must be true or false, got {text!r}")
        return text == "true"
    try:
        return float(text)
    except ValueError:
        raise SchemaError(f"{path}: line {line_no}: column '{column}' is not numeric: {text!r}") from None


def read_table(kind: str, path: str) -> dict[str, list]:
    """Read one CSV into per-column lists, validating against the kind's schema."""
    if kind not in SCHEMAS:
        raise ValueError(f"unknown figure kind {kind!r}")
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: empty file, expected header {','.join(SCHEMAS[kind])}")
    check_header(kind, rows[0], path)
    columns = SCHEMAS[kind]
    table: dict[str, list] = {c: [] for c in columns}
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(columns):
            raise SchemaError(f"{path}: line {line_no}: expected {len(columns)} cells, got {len(row)}")
        for column, text in zip(columns, row):
            table[column].append(_parse_cell(column, text, path, line_no))
    if not table[columns[0]]:
        raise EmptyDataError(f"{path}: no samples")
    return table
