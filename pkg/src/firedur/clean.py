"""Integrity rules, duration-target derivation and descriptive statistics."""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
import re
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import EmptyDataset, NegativeDuration, UnparseableDate
from .ingest.join import normalize_fire_name

DROP_REASONS = (
    "unparseable_date",
    "cont_before_alarm",
    "duplicate_key",
    "missing_geometry",
    "out_of_bounds",
)

# California bounding box; centroids outside are flagged and dropped.
LAT_RANGE = (32.0, 43.0)
LON_RANGE = (-125.0, -114.0)

# Stable column order of the cleaned-dataset CSV.
CLEAN_CSV_COLUMNS = (
    "irwin_id", "fire_name", "year_digitized", "alarm_date", "cont_date",
    "cause_code", "agency_code", "unit_id", "c_method_code", "objective_code",
    "gis_acres", "latitude", "longitude", "containment_days", "log_cont_days",
)

_DATE_RE = re.compile(r"^(\d{4})([-/])(\d{1,2})\2(\d{1,2})([T ].*)?$")


@dataclass(frozen=True)
class FireRecord:
    """One cleaned incident with parsed dates, centroid and derived target."""

    irwin_id: Optional[str]
    fire_name: str
    year_digitized: int
    alarm_date: dt.date
    cont_date: dt.date
    cause_code: Optional[int]
    agency_code: Optional[str]
    unit_id: Optional[str]
    c_method_code: Optional[int]
    objective_code: Optional[int]
    gis_acres: Optional[float]
    latitude: float
    longitude: float
    containment_days: int
    log_cont_days: float


@dataclass
class CleanReport:
    rows_in: int
    rows_out: int
    dropped_by_reason: dict

    def check(self):
        assert self.rows_in == self.rows_out + sum(self.dropped_by_reason.values())


@dataclass(frozen=True)
class StatsRow:
    variable: str
    count: int
    mean: float
    std: float
    min: float
    p25: float
    p50: float
    p75: float
    max: float


@dataclass(frozen=True)
class StatsTable:
    rows: tuple

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["variable", "count", "mean", "std", "min", "25%", "50%", "75%", "max"])
        for r in self.rows:
            writer.writerow([r.variable, r.count] + [repr(v) for v in
                            (r.mean, r.std, r.min, r.p25, r.p50, r.p75, r.max)])
        return out.getvalue()


def parse_date(text: str) -> dt.date:
    """Parse YYYY-MM-DD or YYYY/MM/DD, discarding any time suffix.

    Two-digit years and free-form dates are rejected.
    """
    match = _DATE_RE.match(text.strip())
    if not match:
        raise UnparseableDate(text)
    try:
        return dt.date(int(match.group(1)), int(match.group(3)), int(match.group(4)))
    except ValueError:
        raise UnparseableDate(text) from None


def derive_target(alarm: dt.date, cont: dt.date):
    """Whole-day containment duration and its log1p transform."""
    if cont < alarm:
        raise NegativeDuration(alarm, cont)
    days = (cont - alarm).days
    return days, math.log1p(days)


def _dedupe_key(record, alarm: dt.date):
    if record.irwin_id:
        return ("irwin", record.irwin_id)
    return ("name", record.year_digitized, normalize_fire_name(record.fire_name), alarm)


def clean_records(joined_rows, missing_geometry: int = 0):
    """Apply integrity rules to geometry-joined raw rows.

    Per-row order of checks: date parse, chronology, duplicate key (first
    occurrence kept), bounding box. All failures become drop counts; the
    optional missing_geometry count folds join-stage drops into the report
    so rows_in == rows_out + sum(drops) holds for the whole pipeline.
    """
    drops = {reason: 0 for reason in DROP_REASONS}
    drops["missing_geometry"] = missing_geometry
    seen = set()
    out = []
    for record, lat, lon in joined_rows:
        try:
            alarm = parse_date(record.alarm_date_text)
            cont = parse_date(record.cont_date_text)
        except UnparseableDate:
            drops["unparseable_date"] += 1
            continue
        if cont < alarm:
            drops["cont_before_alarm"] += 1
            continue
        key = _dedupe_key(record, alarm)
        if key in seen:
            drops["duplicate_key"] += 1
            continue
        seen.add(key)
        if not (LAT_RANGE[0] <= lat <= LAT_RANGE[1] and LON_RANGE[0] <= lon <= LON_RANGE[1]):
            drops["out_of_bounds"] += 1
            continue
        days, log_days = derive_target(alarm, cont)
        out.append(FireRecord(
            irwin_id=record.irwin_id,
            fire_name=record.fire_name,
            year_digitized=record.year_digitized,
            alarm_date=alarm,
            cont_date=cont,
            cause_code=record.cause_code,
            agency_code=record.agency_code,
            unit_id=record.unit_id,
            c_method_code=record.c_method_code,
            objective_code=record.objective_code,
            gis_acres=record.gis_acres,
            latitude=lat,
            longitude=lon,
            containment_days=days,
            log_cont_days=log_days,
        ))
    report = CleanReport(
        rows_in=len(joined_rows) + missing_geometry,
        rows_out=len(out),
        dropped_by_reason=drops,
    )
    report.check()
    return out, report


def _stats_row(name: str, values) -> Optional[StatsRow]:
    data = np.asarray([v for v in values if v is not None], dtype=float)
    if data.size == 0:
        return None
    std = float(np.std(data, ddof=1)) if data.size > 1 else 0.0
    p25, p50, p75 = (float(np.percentile(data, q)) for q in (25, 50, 75))
    return StatsRow(
        variable=name,
        count=int(data.size),
        mean=float(np.mean(data)),
        std=std,
        min=float(np.min(data)),
        p25=p25,
        p50=p50,
        p75=p75,
        max=float(np.max(data)),
    )


def descriptive_stats(records) -> StatsTable:
    """Count/mean/std/min/quartiles/max for the four modeling variables.

    Sample std (n-1); percentiles by linear interpolation. Variables with no
    observed values (e.g. acres entirely absent) are omitted.
    """
    if not records:
        raise EmptyDataset("descriptive_stats needs at least one record")
    acres = [r.gis_acres for r in records]
    rows = [
        _stats_row("containment_days", [r.containment_days for r in records]),
        _stats_row("log_cont_days", [r.log_cont_days for r in records]),
        _stats_row("gis_acres", acres),
        _stats_row("log_acres", [math.log1p(a) if a is not None else None for a in acres]),
    ]
    return StatsTable(rows=tuple(r for r in rows if r is not None))


# --- cleaned-dataset CSV round trip ----------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dt.date):
        return value.isoformat()
    return str(value)


def records_to_clean_csv(records) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CLEAN_CSV_COLUMNS)
    for r in records:
        writer.writerow([_cell(getattr(r, column)) for column in CLEAN_CSV_COLUMNS])
    return out.getvalue()


def load_clean_csv(data) -> list:
    """Read a cleaned-dataset CSV back into FireRecords.

    Target cells may be blank (prediction inputs); they are derived from the
    dates when present, else set to containment 0 so feature building can
    proceed without a label.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    reader = csv.DictReader(io.StringIO(data))
    records = []
    for row in reader:
        alarm = parse_date(row["alarm_date"])
        cont_text = (row.get("cont_date") or "").strip()
        cont = parse_date(cont_text) if cont_text else alarm
        days, log_days = derive_target(alarm, cont)
        records.append(FireRecord(
            irwin_id=(row.get("irwin_id") or "").strip() or None,
            fire_name=row["fire_name"],
            year_digitized=int(row["year_digitized"]),
            alarm_date=alarm,
            cont_date=cont,
            cause_code=int(row["cause_code"]) if (row.get("cause_code") or "").strip() else None,
            agency_code=(row.get("agency_code") or "").strip() or None,
            unit_id=(row.get("unit_id") or "").strip() or None,
            c_method_code=int(row["c_method_code"]) if (row.get("c_method_code") or "").strip() else None,
            objective_code=int(row["objective_code"]) if (row.get("objective_code") or "").strip() else None,
            gis_acres=float(row["gis_acres"]) if (row.get("gis_acres") or "").strip() else None,
            latitude=float(row["latitude"]),
            longitude=float(row["longitude"]),
            containment_days=days,
            log_cont_days=log_days,
        ))
    return records


def shift_containment(record: FireRecord, days: int) -> FireRecord:
    """Move the containment date, recomputing the target (test helper)."""
    cont = record.cont_date + dt.timedelta(days=days)
    new_days, new_log = derive_target(record.alarm_date, cont)
    return replace(record, cont_date=cont, containment_days=new_days, log_cont_days=new_log)
