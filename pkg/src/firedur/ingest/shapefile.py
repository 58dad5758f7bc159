"""Minimal ESRI shapefile reader: Polygon/PolygonZ .shp plus dBASE-III .dbf.

Covers exactly the subset the FRAP export uses. The .shp header mixes
endianness per the ESRI spec: file code big-endian at offset 0, version and
shape type little-endian at offsets 28 and 32. Z/M payloads are ignored.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional

from ..errors import BadMagic, RecordCountMismatch, UnsupportedShapeType
from .geometry import MultiPolygon, Polygon

SHP_FILE_CODE = 9994
SHP_VERSION = 1000
SHAPE_NULL = 0
SHAPE_POLYGON = 5
SHAPE_POLYGONZ = 15

_DBF_VERSION = 0x03
_DBF_FIELD_TYPES = frozenset("CNFD")

_IRWIN_FIELD_ALIASES = ("IRWINID", "IRWIN_ID", "IRWIN ID", "IRWIN")
_NAME_FIELD_ALIASES = ("FIRE_NAME", "FIRE NAME", "FIRENAME")


@dataclass(frozen=True)
class GeometryEntry:
    year: Optional[int]
    irwin_id: Optional[str]
    fire_name: str
    geometry: object  # Polygon | MultiPolygon | None when unusable

    @property
    def failed(self) -> bool:
        return self.geometry is None


@dataclass(frozen=True)
class GeometryTable:
    entries: tuple


def _ring_signed_area2(ring) -> float:
    s = 0.0
    for (x0, y0), (x1, y1) in zip(ring, ring[1:]):
        s += x0 * y1 - x1 * y0
    return s


def _rings_to_geometry(rings):
    """Group rings into Polygon/MultiPolygon.

    Shapefile outer rings wind clockwise (negative shoelace area); each
    outer ring starts a part and counter-clockwise rings attach as holes.
    """
    if len(rings) == 1:
        return Polygon(rings=(rings[0],))
    parts: list[list] = []
    for ring in rings:
        if _ring_signed_area2(ring) < 0 or not parts:
            parts.append([ring])
        else:
            parts[-1].append(ring)
    polygons = tuple(Polygon(rings=tuple(p)) for p in parts)
    if len(polygons) == 1:
        return polygons[0]
    return MultiPolygon(parts=polygons)


def _parse_polygon_record(content: bytes):
    """Decode one polygon record body; None when the record is corrupt."""
    if len(content) < 44:
        return None
    num_parts, num_points = struct.unpack_from("<ii", content, 36)
    if num_parts <= 0 or num_points <= 0:
        return None
    offsets_end = 44 + 4 * num_parts
    points_end = offsets_end + 16 * num_points
    if points_end > len(content):
        return None
    part_offsets = struct.unpack_from(f"<{num_parts}i", content, 44)
    flat = struct.unpack_from(f"<{2 * num_points}d", content, offsets_end)
    points = [(flat[2 * i], flat[2 * i + 1]) for i in range(num_points)]
    rings = []
    bounds = list(part_offsets) + [num_points]
    for start, stop in zip(bounds, bounds[1:]):
        if not 0 <= start < stop <= num_points:
            return None
        ring = tuple(points[start:stop])
        if len(ring) < 4 or ring[0] != ring[-1]:
            return None  # unclosed or too-short ring: corrupt record
        rings.append(ring)
    return _rings_to_geometry(rings)


def _parse_shp(shp: bytes) -> list:
    if len(shp) < 100:
        raise BadMagic("shp shorter than its 100-byte header")
    (file_code,) = struct.unpack_from(">i", shp, 0)
    if file_code != SHP_FILE_CODE:
        raise BadMagic(f"shp file code {file_code}, expected {SHP_FILE_CODE}")
    (version,) = struct.unpack_from("<i", shp, 28)
    if version != SHP_VERSION:
        raise BadMagic(f"shp version {version}, expected {SHP_VERSION}")
    (shape_type,) = struct.unpack_from("<i", shp, 32)
    if shape_type not in (SHAPE_POLYGON, SHAPE_POLYGONZ):
        raise UnsupportedShapeType(shape_type)

    geometries = []
    pos = 100
    while pos + 8 <= len(shp):
        _, content_words = struct.unpack_from(">ii", shp, pos)
        content = shp[pos + 8: pos + 8 + 2 * content_words]
        pos += 8 + 2 * content_words
        if len(content) < 4:
            geometries.append(None)
            continue
        (rec_type,) = struct.unpack_from("<i", content, 0)
        if rec_type == SHAPE_NULL:
            geometries.append(None)
        elif rec_type == shape_type:
            geometries.append(_parse_polygon_record(content))
        else:
            raise UnsupportedShapeType(rec_type)
    return geometries


def _parse_dbf(dbf: bytes):
    if len(dbf) < 32:
        raise BadMagic("dbf shorter than its 32-byte header")
    if dbf[0] != _DBF_VERSION:
        raise BadMagic(f"dbf version byte 0x{dbf[0]:02x}, expected 0x03")
    (n_records,) = struct.unpack_from("<i", dbf, 4)
    header_len, record_len = struct.unpack_from("<HH", dbf, 8)

    fields = []  # (name, length)
    pos = 32
    while pos < len(dbf) and dbf[pos] != 0x0D:
        if pos + 32 > header_len:
            raise BadMagic("dbf field descriptors overrun the header")
        descriptor = dbf[pos: pos + 32]
        name = descriptor[:11].split(b"\x00")[0].decode("ascii", "replace").strip().upper()
        ftype = chr(descriptor[11])
        if ftype not in _DBF_FIELD_TYPES:
            raise BadMagic(f"dbf field {name} has unsupported type {ftype!r}")
        fields.append((name, descriptor[16]))
        pos += 32

    rows = []
    pos = header_len
    for _ in range(n_records):
        if pos + record_len > len(dbf):
            raise BadMagic("dbf record area truncated")
        record = dbf[pos: pos + record_len]
        pos += record_len
        cells = {}
        offset = 1  # skip the deletion flag
        for name, length in fields:
            cells[name] = record[offset: offset + length].decode("latin-1").strip()
            offset += length
        rows.append(cells)
    return rows


def _pick(cells: dict, aliases) -> str:
    for alias in aliases:
        if alias in cells:
            return cells[alias]
    return ""


def read_shapefile_subset(shp: bytes, dbf: bytes) -> GeometryTable:
    """Read paired .shp/.dbf bytes into a GeometryTable.

    One entry per record index; YEAR_/IRWIN/FIRE_NAME attributes are pulled
    from the .dbf by name. Records with corrupt or null geometry come back
    flagged (geometry None) rather than raising, so cleaning can count them.
    """
    geometries = _parse_shp(shp)
    rows = _parse_dbf(dbf)
    if len(geometries) != len(rows):
        raise RecordCountMismatch(len(geometries), len(rows))
    entries = []
    for geometry, cells in zip(geometries, rows):
        year_text = _pick(cells, ("YEAR_", "YEAR"))
        try:
            year = int(float(year_text)) if year_text else None
        except ValueError:
            year = None
        entries.append(GeometryEntry(
            year=year,
            irwin_id=_pick(cells, _IRWIN_FIELD_ALIASES) or None,
            fire_name=_pick(cells, _NAME_FIELD_ALIASES),
            geometry=geometry,
        ))
    return GeometryTable(entries=tuple(entries))
