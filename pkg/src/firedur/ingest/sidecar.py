"""Geometry sidecar CSV: pre-converted WKT/GeoJSON polygons with join keys.

Columns (case-insensitive): YEAR_, FIRE_NAME, GEOMETRY, plus an optional
IRWIN id column. GEOMETRY cells hold WKT or GeoJSON text. Rows whose
geometry fails to parse become flagged entries so cleaning can count them.
"""

from __future__ import annotations

import csv
import io

from ..errors import DataError, MissingColumn, ParseError, UnsupportedGeometry
from .perimeter import IRWIN_ALIASES, _decode
from .geometry import parse_polygon_text
from .shapefile import GeometryEntry, GeometryTable

_REQUIRED = ("YEAR_", "FIRE_NAME", "GEOMETRY")


def read_geometry_sidecar(data) -> GeometryTable:
    reader = csv.reader(io.StringIO(_decode(data)))
    try:
        header = next(reader)
    except StopIteration:
        raise MissingColumn(_REQUIRED[0]) from None
    index: dict = {}
    for pos, name in enumerate(header):
        key = name.strip().upper()
        if key in IRWIN_ALIASES:
            key = "IRWINID"
        index.setdefault(key, pos)
    for required in _REQUIRED:
        if required not in index:
            raise MissingColumn(required)

    def cell(row, key):
        pos = index.get(key)
        return row[pos].strip() if pos is not None and pos < len(row) else ""

    entries = []
    for row in reader:
        if not row:
            continue
        year_text = cell(row, "YEAR_")
        try:
            year = int(float(year_text)) if year_text else None
        except ValueError:
            year = None
        try:
            geometry = parse_polygon_text(cell(row, "GEOMETRY"))
        except (ParseError, UnsupportedGeometry, DataError):
            geometry = None
        entries.append(GeometryEntry(
            year=year,
            irwin_id=cell(row, "IRWINID") or None,
            fire_name=cell(row, "FIRE_NAME"),
            geometry=geometry,
        ))
    return GeometryTable(entries=tuple(entries))
