"""Parser for the fire-perimeter attribute table (CSV export)."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

from ..errors import MalformedCsv, MissingColumn

REQUIRED_COLUMNS = ("YEAR_", "FIRE_NAME", "ALARM_DATE", "CONT_DATE", "GIS_ACRES")

# Canonical emission order for records_to_csv; IRWIN id column accepts the
# aliases seen across export vintages.
CANONICAL_COLUMNS = (
    "YEAR_", "IRWINID", "FIRE_NAME", "ALARM_DATE", "CONT_DATE",
    "CAUSE", "AGENCY", "UNIT_ID", "C_METHOD", "OBJECTIVE", "GIS_ACRES",
)
IRWIN_ALIASES = ("IRWINID", "IRWIN_ID", "IRWIN ID")


@dataclass(frozen=True)
class RawFireRecord:
    """One row of the perimeter table, untouched except for typing."""

    year_digitized: int
    irwin_id: Optional[str]
    fire_name: str
    alarm_date_text: str
    cont_date_text: str
    cause_code: Optional[int]
    agency_code: Optional[str]
    unit_id: Optional[str]
    c_method_code: Optional[int]
    objective_code: Optional[int]
    gis_acres: Optional[float]


def _decode(data) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data


def _header_index(header: list[str]) -> dict[str, int]:
    """Case-insensitive column lookup; IRWIN aliases fold to IRWINID."""
    index: dict[str, int] = {}
    for pos, name in enumerate(header):
        key = name.strip().upper()
        if key in IRWIN_ALIASES:
            key = "IRWINID"
        if key and key not in index:
            index[key] = pos
    for required in REQUIRED_COLUMNS:
        if required not in index:
            raise MissingColumn(required)
    return index


def _cell(row: list[str], index: dict[str, int], name: str) -> str:
    pos = index.get(name)
    if pos is None or pos >= len(row):
        return ""
    return row[pos].strip()


def _parse_int(text: str, line: int, column: str) -> Optional[int]:
    if not text:
        return None
    try:
        value = float(text)
    except ValueError:
        raise MalformedCsv(line, f"{column} is not numeric: {text!r}") from None
    if not value.is_integer():
        raise MalformedCsv(line, f"{column} is not an integer: {text!r}")
    return int(value)


def _parse_acres(text: str, line: int) -> Optional[float]:
    if not text:
        return None
    try:
        value = float(text)
    except ValueError:
        raise MalformedCsv(line, f"GIS_ACRES is not numeric: {text!r}") from None
    if not math.isfinite(value) or value < 0:
        raise MalformedCsv(line, f"GIS_ACRES must be finite and nonnegative: {text!r}")
    return value


def _parse_row(row: list[str], width: int, line: int, index: dict[str, int]) -> RawFireRecord:
    if len(row) != width:
        raise MalformedCsv(line, f"expected {width} cells, found {len(row)}")
    year = _parse_int(_cell(row, index, "YEAR_"), line, "YEAR_")
    if year is None:
        raise MalformedCsv(line, "YEAR_ is empty")
    name = _cell(row, index, "FIRE_NAME")
    if not name:
        raise MalformedCsv(line, "FIRE_NAME is empty")
    return RawFireRecord(
        year_digitized=year,
        irwin_id=_cell(row, index, "IRWINID") or None,
        fire_name=name,
        alarm_date_text=_cell(row, index, "ALARM_DATE"),
        cont_date_text=_cell(row, index, "CONT_DATE"),
        cause_code=_parse_int(_cell(row, index, "CAUSE"), line, "CAUSE"),
        agency_code=_cell(row, index, "AGENCY") or None,
        unit_id=_cell(row, index, "UNIT_ID") or None,
        c_method_code=_parse_int(_cell(row, index, "C_METHOD"), line, "C_METHOD"),
        objective_code=_parse_int(_cell(row, index, "OBJECTIVE"), line, "OBJECTIVE"),
        gis_acres=_parse_acres(_cell(row, index, "GIS_ACRES"), line),
    )


def parse_perimeter_csv(data) -> list[RawFireRecord]:
    """Parse a UTF-8 perimeter CSV (bytes or str) into raw records.

    Missing cells become absent values; row order is preserved. Raises
    MissingColumn when a required header is absent and MalformedCsv (with
    the 1-based line number) for structurally broken rows.
    """
    reader = csv.reader(io.StringIO(_decode(data)))
    try:
        header = next(reader)
    except StopIteration:
        raise MissingColumn(REQUIRED_COLUMNS[0]) from None
    index = _header_index(header)
    width = len(header)
    records = []
    for row in reader:
        if not row:
            continue
        records.append(_parse_row(row, width, reader.line_num, index))
    return records


def parse_perimeter_csv_lenient(data) -> tuple[list[RawFireRecord], list[int]]:
    """Like parse_perimeter_csv but skips malformed rows.

    Returns (records, skipped line numbers). Header problems still raise.
    Real FRAP exports contain occasional blank names or junk numerics;
    the CLI uses this path so one bad row cannot poison a whole snapshot.
    """
    reader = csv.reader(io.StringIO(_decode(data)))
    try:
        header = next(reader)
    except StopIteration:
        raise MissingColumn(REQUIRED_COLUMNS[0]) from None
    index = _header_index(header)
    width = len(header)
    records: list[RawFireRecord] = []
    skipped: list[int] = []
    for row in reader:
        if not row:
            continue
        try:
            records.append(_parse_row(row, width, reader.line_num, index))
        except MalformedCsv as exc:
            skipped.append(exc.line)
    return records, skipped


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv(records) -> str:
    """Serialize records back to canonical CSV; parse -> serialize -> parse
    round-trips to identical records."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CANONICAL_COLUMNS)
    for r in records:
        writer.writerow([
            _format(r.year_digitized),
            _format(r.irwin_id),
            r.fire_name,
            r.alarm_date_text,
            r.cont_date_text,
            _format(r.cause_code),
            _format(r.agency_code),
            _format(r.unit_id),
            _format(r.c_method_code),
            _format(r.objective_code),
            _format(r.gis_acres),
        ])
    return out.getvalue()
