#!/usr/bin/env python3
"""Regenerate the bundled fixtures under fixtures/.

The 10-row perimeter fixture plants exactly three violations (one
unparseable date, one containment-before-alarm, one duplicate IRWIN id), so
a full ingest keeps 7 rows. The geometry sidecar carries one extra entry, a
unit square matched by no record, used by the centroid acceptance check.
"""

import csv
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from firedur.clean import records_to_clean_csv
from firedur.synth import SYNTHETIC_500_SEED, make_fire_records

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def square(x0, y0, side=0.1):
    x1, y1 = x0 + side, y0 + side
    return f"POLYGON(({x0} {y0},{x1} {y0},{x1} {y1},{x0} {y1},{x0} {y0}))"


def geojson_square(x0, y0, side=0.1):
    x1, y1 = x0 + side, y0 + side
    ring = f"[[{x0},{y0}],[{x1},{y0}],[{x1},{y1}],[{x0},{y1}],[{x0},{y0}]]"
    return f'{{"type": "Polygon", "coordinates": [{ring}]}}'


PERIMETER = """YEAR_,IRWINID,FIRE_NAME,ALARM_DATE,CONT_DATE,CAUSE,AGENCY,UNIT_ID,C_METHOD,OBJECTIVE,GIS_ACRES
2015,A0001,RIVER,2015-06-01,2015-06-05,1,CDF,SHU,1,1,120.5
2016,A0002,CANYON,2016-08-10,2016-08-10,2,USF,LNU,2,1,35.0
2016,A0003,BADDATE,Nov 8 2016,2016-09-01,7,CDF,BTU,1,1,12.0
2017,A0004,BACKWARDS,2017-05-20,2017-05-10,1,BLM,RRU,3,2,88.0
2018,A0005,SUMMIT,2018-07-01T14:22:00,2018-07-19,14,CDF,SCU,8,1,5400.25
2015,A0001,RIVER DUPE,2015-06-02,2015-06-06,1,CDF,SHU,1,1,121.0
2019,A0007,GLASS,2019-09-27,2019-10-02,2,LRA,LNU,2,2,640.0
2017,,WITCH  CREEK ,2017-10-21,2017-11-13,7,USF,SHU,3,1,19780.0
2020,A0009,DOME,2020-08-15,2020-09-30,14,CDF,BTU,8,1,
2014,A0010,OLDTIMER,1899/09/15,1899/09/20,1,CDF,RRU,1,1,42.0
"""

GEOMETRY_ROWS = [
    ("2015", "A0001", "RIVER", square(-120.5, 37.5)),
    ("2016", "A0002", "CANYON", square(-121.0, 38.2)),
    ("2016", "A0003", "BADDATE", square(-119.8, 36.9)),
    ("2017", "A0004", "BACKWARDS", square(-122.1, 39.4)),
    ("2018", "A0005", "SUMMIT", square(-120.0, 38.8)),
    ("2019", "A0007", "GLASS", square(-122.5, 38.5)),
    ("2017", "", "Witch Creek", square(-116.9, 33.0)),
    ("2020", "A0009", "DOME", geojson_square(-118.4, 35.7)),
    ("2014", "A0010", "OLDTIMER", square(-123.0, 40.9)),
    # planted unit square: matched by no perimeter record
    ("1999", "PLANT0001", "UNIT SQUARE PLANT", "POLYGON((0 0,1 0,1 1,0 1,0 0))"),
]

DICTIONARY = """# fixture data dictionary
[CAUSE]
1,Lightning
2,Equipment Use
7,Arson
14,Unknown

[AGENCY]
CDF,California Department of Forestry
USF,United States Forest Service
BLM,Bureau of Land Management
LRA,Local Responsibility Area

[C_METHOD]
1,GPS Ground
2,GPS Air
3,Infrared
8,Mixed Collection Methods

[OBJECTIVE]
1,Suppression
2,Resource Benefit
"""


def main():
    os.makedirs(FIXTURES, exist_ok=True)
    with open(os.path.join(FIXTURES, "perimeter_10.csv"), "w") as handle:
        handle.write(PERIMETER)
    with open(os.path.join(FIXTURES, "dictionary.txt"), "w") as handle:
        handle.write(DICTIONARY)
    with open(os.path.join(FIXTURES, "geometry_sidecar.csv"), "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["YEAR_", "IRWINID", "FIRE_NAME", "GEOMETRY"])
        writer.writerows(GEOMETRY_ROWS)
    records = make_fire_records(500, SYNTHETIC_500_SEED)
    with open(os.path.join(FIXTURES, "synthetic_500.csv"), "w") as handle:
        handle.write(records_to_clean_csv(records))
    print("fixtures written to", os.path.abspath(FIXTURES))


if __name__ == "__main__":
    main()
