"""Regenerate the sample trip files bundled in ``src/ridelasso/data``.

The samples are synthetic: they use the January 2015 green-taxi header
layout, but every row comes from ``synthesize_green_trips``. A few
deliberately broken rows exercise the ingestion filters.
"""
import csv
from pathlib import Path

from ridelasso.trip_data import synthesize_green_trips, write_trips

DATA = Path(__file__).resolve().parents[1] / "src" / "ridelasso" / "data"


def _corrupt(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    col = {h: i for i, h in enumerate(header)}
    bad = [list(r) for r in rows[1:5]]
    bad[0][col["Pickup_longitude"]] = "0"
    bad[0][col["Pickup_latitude"]] = "0"
    bad[1][col["Lpep_dropoff_datetime"]] = "2015-01-01 00:00:00"
    bad[1][col["lpep_pickup_datetime"]] = "2015-01-01 01:00:00"
    bad[2][col["Fare_amount"]] = "-3.5"
    bad[3][col["Trip_distance"]] = "n/a"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows[1:] + bad)


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    sample = DATA / "green_tripdata_2015-01_sample.csv"
    write_trips(synthesize_green_trips(196, seed=2015), sample)
    _corrupt(sample)
    planted = DATA / "green_tripdata_planted_sample.csv"
    write_trips(synthesize_green_trips(200, seed=7, planted=True), planted)


if __name__ == "__main__":
    main()
