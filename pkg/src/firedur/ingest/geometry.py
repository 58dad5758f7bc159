"""Polygon text parsing (WKT / GeoJSON) and planar centroid extraction.

Coordinates are (longitude, latitude) degree pairs throughout; centroids
are returned as (latitude, longitude). Planar math is deliberate: fire
perimeters are small enough that spherical corrections are below feature
resolution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from ..errors import DegenerateGeometry, ParseError, UnsupportedGeometry

# Total signed area below this (in square degrees) triggers the
# vertex-mean fallback.
DEGENERATE_AREA = 1e-12


@dataclass(frozen=True)
class Polygon:
    """Rings of closed (lon, lat) tuples; first ring outer, rest holes."""

    rings: tuple

    def __post_init__(self):
        if not self.rings:
            raise ParseError(0, "polygon has no rings")


@dataclass(frozen=True)
class MultiPolygon:
    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise ParseError(0, "multipolygon has no parts")


def _validate_ring(ring, position, closed_required):
    if len(ring) < 3:
        raise ParseError(position, f"ring has only {len(ring)} points")
    for x, y in ring:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError(position, "non-finite coordinate")
    if ring[0] != ring[-1]:
        if closed_required:
            raise ParseError(position, "ring is not closed")
        ring = ring + (ring[0],)
    if len(ring) < 4:
        raise ParseError(position, "closed ring needs at least 4 points")
    return ring


# --- WKT ------------------------------------------------------------------


class _WktScanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, char: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != char:
            raise ParseError(self.pos, f"expected {char!r}")
        self.pos += 1

    def keyword(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        return self.text[start:self.pos].upper()

    def number(self) -> float:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in " \t\r\n,()":
            self.pos += 1
        token = self.text[start:self.pos]
        try:
            return float(token)
        except ValueError:
            raise ParseError(start, f"bad number {token!r}") from None

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def _wkt_ring(scanner: _WktScanner) -> tuple:
    start = scanner.pos
    scanner.expect("(")
    points = []
    while True:
        x = scanner.number()
        y = scanner.number()
        points.append((x, y))
        scanner.skip_ws()
        if scanner.pos < len(scanner.text) and scanner.text[scanner.pos] == ",":
            scanner.pos += 1
            continue
        break
    scanner.expect(")")
    # WKT rings must arrive closed; auto-closing is never applied here.
    return _validate_ring(tuple(points), start, closed_required=True)


def _wkt_polygon_body(scanner: _WktScanner) -> Polygon:
    scanner.expect("(")
    rings = [_wkt_ring(scanner)]
    scanner.skip_ws()
    while scanner.pos < len(scanner.text) and scanner.text[scanner.pos] == ",":
        scanner.pos += 1
        rings.append(_wkt_ring(scanner))
        scanner.skip_ws()
    scanner.expect(")")
    return Polygon(rings=tuple(rings))


def _parse_wkt(text: str):
    scanner = _WktScanner(text)
    kind = scanner.keyword()
    if kind == "POLYGON":
        geom = _wkt_polygon_body(scanner)
    elif kind == "MULTIPOLYGON":
        scanner.expect("(")
        parts = [_wkt_polygon_body(scanner)]
        scanner.skip_ws()
        while scanner.pos < len(scanner.text) and scanner.text[scanner.pos] == ",":
            scanner.pos += 1
            parts.append(_wkt_polygon_body(scanner))
            scanner.skip_ws()
        scanner.expect(")")
        geom = MultiPolygon(parts=tuple(parts))
    elif kind in ("POINT", "LINESTRING", "MULTIPOINT", "MULTILINESTRING",
                  "GEOMETRYCOLLECTION"):
        raise UnsupportedGeometry(kind)
    else:
        raise ParseError(scanner.pos, f"unknown WKT keyword {kind!r}")
    if not scanner.at_end():
        raise ParseError(scanner.pos, "trailing content after geometry")
    return geom


# --- GeoJSON ---------------------------------------------------------------


def _geojson_ring(coords, position) -> tuple:
    try:
        ring = tuple((float(pt[0]), float(pt[1])) for pt in coords)
    except (TypeError, ValueError, IndexError):
        raise ParseError(position, "ring coordinates are not [x, y] pairs") from None
    # GeoJSON-style input: append the closing point when absent.
    return _validate_ring(ring, position, closed_required=False)


def _geojson_polygon(coords, position) -> Polygon:
    if not isinstance(coords, list) or not coords:
        raise ParseError(position, "polygon coordinates empty")
    return Polygon(rings=tuple(_geojson_ring(ring, position) for ring in coords))


def _parse_geojson(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.pos, exc.msg) from None
    if not isinstance(obj, dict):
        raise ParseError(0, "GeoJSON geometry must be an object")
    kind = obj.get("type")
    coords = obj.get("coordinates")
    if kind == "Polygon":
        return _geojson_polygon(coords, 0)
    if kind == "MultiPolygon":
        if not isinstance(coords, list) or not coords:
            raise ParseError(0, "multipolygon coordinates empty")
        return MultiPolygon(parts=tuple(_geojson_polygon(p, 0) for p in coords))
    raise UnsupportedGeometry(str(kind))


def parse_polygon_text(text: str):
    """Parse WKT or GeoJSON polygon text into Polygon / MultiPolygon."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _parse_geojson(stripped)
    return _parse_wkt(text)


# --- centroid ---------------------------------------------------------------


def _ring_integrals(ring):
    """Shoelace integrals: (2*signed_area, sum (x_i+x_j)*cross, sum (y_i+y_j)*cross)."""
    s = mx = my = 0.0
    for (x0, y0), (x1, y1) in zip(ring, ring[1:]):
        cross = x0 * y1 - x1 * y0
        s += cross
        mx += (x0 + x1) * cross
        my += (y0 + y1) * cross
    return s, mx, my


def polygon_centroid(geometry) -> tuple:
    """Area-weighted planar centroid, returned as (latitude, longitude).

    Ring orientations are normalized so outer rings count positive and
    holes negative regardless of input winding; multipolygon parts combine
    by signed area. Near-zero total area falls back to the arithmetic mean
    of outer-ring vertices (closing vertex excluded).
    """
    parts = geometry.parts if isinstance(geometry, MultiPolygon) else (geometry,)
    s_total = mx_total = my_total = 0.0
    for part in parts:
        for idx, ring in enumerate(part.rings):
            s, mx, my = _ring_integrals(ring)
            outer = idx == 0
            if (outer and s < 0) or (not outer and s > 0):
                s, mx, my = -s, -mx, -my
            s_total += s
            mx_total += mx
            my_total += my
    area = 0.5 * s_total
    if abs(area) >= DEGENERATE_AREA:
        # centroid = moment / (6 * area) = moment / (3 * s_total)
        return my_total / (3.0 * s_total), mx_total / (3.0 * s_total)
    xs, ys, count = 0.0, 0.0, 0
    for part in parts:
        for x, y in part.rings[0][:-1]:
            xs += x
            ys += y
            count += 1
    if count == 0:
        raise DegenerateGeometry()
    return ys / count, xs / count
