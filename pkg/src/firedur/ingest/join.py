"""Join perimeter records to geometry entries and extract centroids."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DegenerateGeometry
from .geometry import polygon_centroid
from .shapefile import GeometryTable


def normalize_fire_name(name: str) -> str:
    """Uppercase, trim, collapse internal whitespace."""
    return " ".join(name.upper().split())


@dataclass
class JoinReport:
    matched: int = 0
    unmatched: int = 0
    ambiguous: int = 0


def _key_maps(table: GeometryTable):
    by_irwin: dict = {}
    by_name: dict = {}
    for entry in table.entries:
        if entry.year is None:
            continue
        if entry.irwin_id:
            by_irwin.setdefault((entry.year, entry.irwin_id), []).append(entry)
        name = normalize_fire_name(entry.fire_name)
        if name:
            by_name.setdefault((entry.year, name), []).append(entry)
    return by_irwin, by_name


def join_geometry(records, table: GeometryTable):
    """Match records to geometry and return ([(record, lat, lon)], JoinReport).

    The (year, IRWIN id) key wins when both sides carry it; otherwise the
    fallback key is (year, normalized fire name). A record whose key hits
    more than one geometry entry is dropped as ambiguous; records with no
    match, a failed geometry, or a degenerate centroid are dropped as
    unmatched. Drops are counted, never raised.
    """
    by_irwin, by_name = _key_maps(table)
    joined = []
    report = JoinReport()
    for record in records:
        candidates = None
        if record.irwin_id:
            candidates = by_irwin.get((record.year_digitized, record.irwin_id))
        if candidates is None and record.fire_name:
            name = normalize_fire_name(record.fire_name)
            if name:
                candidates = by_name.get((record.year_digitized, name))
        if not candidates:
            report.unmatched += 1
            continue
        if len(candidates) > 1:
            report.ambiguous += 1
            continue
        entry = candidates[0]
        if entry.geometry is None:
            report.unmatched += 1
            continue
        try:
            lat, lon = polygon_centroid(entry.geometry)
        except DegenerateGeometry:
            report.unmatched += 1
            continue
        joined.append((record, lat, lon))
        report.matched += 1
    return joined, report
