"""Source-file parsing, centroid extraction and the geometry join."""

from .perimeter import RawFireRecord, parse_perimeter_csv, parse_perimeter_csv_lenient, records_to_csv
from .dictionary import DataDictionary, parse_data_dictionary
from .geometry import MultiPolygon, Polygon, parse_polygon_text, polygon_centroid
from .shapefile import GeometryEntry, GeometryTable, read_shapefile_subset
from .join import JoinReport, join_geometry, normalize_fire_name

__all__ = [
    "RawFireRecord",
    "parse_perimeter_csv",
    "parse_perimeter_csv_lenient",
    "records_to_csv",
    "DataDictionary",
    "parse_data_dictionary",
    "Polygon",
    "MultiPolygon",
    "parse_polygon_text",
    "polygon_centroid",
    "GeometryEntry",
    "GeometryTable",
    "read_shapefile_subset",
    "JoinReport",
    "join_geometry",
    "normalize_fire_name",
]
