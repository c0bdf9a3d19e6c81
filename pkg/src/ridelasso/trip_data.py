"""Trip data: synthetic generators, green-taxi CSV ingestion, features, sampling, stats."""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field, fields
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np
from scipy import sparse

from .lasso_admm import LassoProblem

# canonical name -> header used by the January 2015 green-taxi files
DEFAULT_SCHEMA = {
    "vendor_id": "VendorID",
    "pickup_time": "lpep_pickup_datetime",
    "dropoff_time": "Lpep_dropoff_datetime",
    "store_flag": "Store_and_fwd_flag",
    "rate_code": "RateCodeID",
    "pickup_lon": "Pickup_longitude",
    "pickup_lat": "Pickup_latitude",
    "dropoff_lon": "Dropoff_longitude",
    "dropoff_lat": "Dropoff_latitude",
    "passenger_count": "Passenger_count",
    "trip_distance": "Trip_distance",
    "fare_amount": "Fare_amount",
    "extra": "Extra",
    "mta_tax": "MTA_tax",
    "tip_amount": "Tip_amount",
    "toll_amount": "Tolls_amount",
    "ehail_fee": "Ehail_fee",
    "surcharge": "improvement_surcharge",
    "total_amount": "Total_amount",
    "pay_type": "Payment_type",
    "trip_type": "Trip_type",
}

MANDATORY_COLUMNS = (
    "pickup_time", "dropoff_time", "pickup_lon", "pickup_lat",
    "dropoff_lon", "dropoff_lat", "passenger_count", "trip_distance",
    "fare_amount", "total_amount",
)

_CATEGORICAL = ("vendor_id", "store_flag", "rate_code", "pay_type", "trip_type")
_AMOUNTS = (
    "fare_amount", "extra", "mta_tax", "tip_amount", "toll_amount",
    "ehail_fee", "surcharge", "total_amount",
)
_TIME_FORMAT = "%Y-%m-%d %H:%M:%S"

# regression inputs; fare_amount is left out because total_amount contains it
NUMERIC_FEATURES = (
    "trip_distance", "passenger_count", "extra", "mta_tax", "tip_amount",
    "toll_amount", "surcharge",
)
CORRELATION_FEATURES = (
    "trip_distance", "passenger_count", "fare_amount", "extra", "mta_tax",
    "tip_amount", "toll_amount", "surcharge", "total_amount",
    "trip_duration_minutes",
)
WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")
STAT_KINDS = (
    "weekday_hist", "hour_hist", "day_of_month_hist",
    "pickup_dropoff_pairs", "feature_correlation",
)


class SchemaError(ValueError):
    """A mandatory column is missing from the input header."""


@dataclass
class TripRecord:
    pickup_time: datetime
    dropoff_time: datetime
    pickup_lon: float
    pickup_lat: float
    dropoff_lon: float
    dropoff_lat: float
    passenger_count: int
    trip_distance: float
    fare_amount: float
    total_amount: float
    vendor_id: str = ""
    store_flag: str = ""
    rate_code: str = ""
    extra: float = 0.0
    mta_tax: float = 0.0
    tip_amount: float = 0.0
    toll_amount: float = 0.0
    ehail_fee: float = 0.0
    surcharge: float = 0.0
    pay_type: str = ""
    trip_type: str = ""

    @property
    def duration_minutes(self):
        return (self.dropoff_time - self.pickup_time).total_seconds() / 60.0

    def validate(self):
        """Return the name of the first violated invariant, or None."""
        if self.dropoff_time < self.pickup_time:
            return "dropoff_before_pickup"
        for lat, lon in ((self.pickup_lat, self.pickup_lon), (self.dropoff_lat, self.dropoff_lon)):
            if lat == 0.0 and lon == 0.0:
                return "missing_coordinates"
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                return "coordinates_out_of_range"
        if self.passenger_count < 0 or self.trip_distance < 0:
            return "negative_count_or_distance"
        if self.total_amount < 0 or self.fare_amount < 0:
            return "negative_amount"
        return None


@dataclass
class LoadReport:
    rows_read: int = 0
    dropped: Counter = field(default_factory=Counter)

    @property
    def dropped_count(self):
        return sum(self.dropped.values())


@dataclass
class SyntheticRide:
    ratings: int
    preferences: int
    pickup_time_flag: int
    pickup_loc: float
    cost: float
    utility: float

    def regressors(self):
        return [self.ratings, self.preferences, self.pickup_time_flag, self.pickup_loc, self.cost]


@dataclass
class NodeProblem:
    node_id: int
    features: np.ndarray
    response: float
    pickup_lat: float
    pickup_lon: float
    pickup_time: datetime | None = None


@dataclass
class DatasetSplit:
    train: list
    test: list


@dataclass
class FeatureStats:
    """Column layout and standardization constants learned by ``featurize``."""

    columns: list
    means: np.ndarray
    stds: np.ndarray
    pay_types: list
    trip_types: list
    excluded: list


@dataclass
class Table:
    columns: list
    rows: list

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([_format_cell(v) for v in row])


def _format_cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


# --------------------------------------------------------------------------
# synthetic data

def generate_synthetic_lasso(n, d, density=0.02, noise_sigma=math.sqrt(1e-3), seed=0):
    """Sparse Gaussian design with a sparse planted coefficient vector.

    ``A`` has i.i.d. standard-normal nonzeros at the given density and unit
    column norms (empty columns stay zero). The ground truth has the same
    density, and ``b = A x* + noise``. Returns ``(LassoProblem, x_true)``.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    if not 0 < density <= 1:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    rng = np.random.default_rng(seed)
    A = sparse.random(
        n, d, density=density, random_state=rng, data_rvs=rng.standard_normal, format="csc"
    ).toarray()
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    A /= norms
    x_true = sparse.random(
        d, 1, density=density, random_state=rng, data_rvs=rng.standard_normal, format="csc"
    ).toarray().ravel()
    b = A @ x_true + noise_sigma * rng.standard_normal(n)
    return LassoProblem(A, b, 0.0), x_true


def generate_synthetic_rides(m, coeffs, noise_sigma=0.0, seed=0):
    """Draw ride requests and score them with the linear utility model.

    ``utility = a*ratings + b*preferences + c*pickup_time + d*pickup_loc
    - e*cost`` plus Gaussian noise. Ratings and preferences are integers in
    [1, 10], the pickup-time flag is 0 or 1, location is uniform on [0, 30]
    and cost uniform on [0, 1].
    """
    if m < 1:
        raise ValueError("m must be positive")
    a, b, c, d, e = (float(v) for v in coeffs)
    rng = np.random.default_rng(seed)
    ratings = rng.integers(1, 11, size=m)
    prefs = rng.integers(1, 11, size=m)
    flags = rng.integers(0, 2, size=m)
    locs = rng.uniform(0.0, 30.0, size=m)
    costs = rng.uniform(0.0, 1.0, size=m)
    noise = noise_sigma * rng.standard_normal(m) if noise_sigma > 0 else np.zeros(m)
    rides = []
    for i in range(m):
        utility = ride_utility(ratings[i], prefs[i], flags[i], locs[i], costs[i], (a, b, c, d, e))
        rides.append(SyntheticRide(
            int(ratings[i]), int(prefs[i]), int(flags[i]), float(locs[i]), float(costs[i]),
            utility + float(noise[i]),
        ))
    return rides


def ride_utility(ratings, preferences, pickup_time_flag, pickup_loc, cost, coeffs):
    a, b, c, d, e = coeffs
    return float(a * ratings + b * preferences + c * pickup_time_flag + d * pickup_loc - e * cost)


def rides_to_problem(rides, lam=0.0):
    """Design matrix of the five ride regressors against the utility."""
    A = np.array([r.regressors() for r in rides], dtype=float)
    b = np.array([r.utility for r in rides], dtype=float)
    return LassoProblem(A, b, lam)


# rough pickup hot spots served by green taxis (lat, lon)
_HOTSPOTS = np.array([
    (40.7143, -73.9510),  # Williamsburg
    (40.7644, -73.9235),  # Astoria
    (40.8116, -73.9465),  # Harlem
    (40.7470, -73.8930),  # Jackson Heights
    (40.6900, -73.9850),  # Downtown Brooklyn
])
# two-peak weekday demand profile over the 24 hours
_HOUR_PROFILE = np.array([
    3.0, 2.2, 1.6, 1.1, 0.8, 0.7, 1.2, 2.4, 3.4, 3.0, 2.6, 2.6,
    2.8, 2.8, 3.0, 3.3, 3.6, 4.2, 5.0, 5.2, 4.6, 4.2, 4.0, 3.6,
])
KM_PER_DEG_LAT = 111.195


def synthesize_green_trips(n, seed=0, start=datetime(2015, 1, 1), days=2, planted=False):
    """Generate green-taxi-like trip records for fixtures and demos.

    Pickups cluster around a few hot spots and follow a two-peak hourly
    demand curve. Fares grow linearly with distance and duration. With
    ``planted=True`` pickups come from two well separated areas whose fare
    schedules differ, giving a known two-cluster structure.
    """
    rng = np.random.default_rng(seed)
    hour_p = _HOUR_PROFILE / _HOUR_PROFILE.sum()
    records = []
    for i in range(n):
        day = int(rng.integers(0, days))
        hour = int(rng.choice(24, p=hour_p))
        pickup = start + timedelta(days=day, hours=hour, seconds=int(rng.integers(0, 3600)))
        if planted:
            group = i % 2
            center = _HOTSPOTS[4] if group == 0 else _HOTSPOTS[1]
            spread = 0.006
        else:
            group = 0
            center = _HOTSPOTS[int(rng.integers(0, len(_HOTSPOTS)))]
            spread = 0.012
        lat = float(center[0] + spread * rng.standard_normal())
        lon = float(center[1] + spread * rng.standard_normal())

        distance = float(np.round(np.clip(rng.lognormal(0.8, 0.6), 0.2, 25.0), 2))
        duration = max(1.0, 3.2 * distance + 4.0 + 2.0 * rng.standard_normal())
        dropoff = pickup + timedelta(seconds=int(round(duration * 60)))
        heading = rng.uniform(0, 2 * np.pi)
        km = distance * 1.609344 / 1.3
        dlat = km * np.cos(heading) / KM_PER_DEG_LAT
        dlon = km * np.sin(heading) / (KM_PER_DEG_LAT * np.cos(np.radians(lat)))

        if planted and group == 1:
            fare = 6.0 + 4.0 * distance + 0.1 * duration
        else:
            fare = 2.5 + 2.0 * distance + 0.2 * duration
        fare = round(fare, 2)
        night = hour >= 20 or hour < 6
        rush = 16 <= hour < 20 and pickup.weekday() < 5
        extra = 0.5 if night else (1.0 if rush else 0.0)
        pay_type = "1" if rng.random() < 0.5 else "2"
        tip = round(fare * rng.uniform(0.1, 0.25), 2) if pay_type == "1" else 0.0
        tolls = 5.33 if rng.random() < 0.03 else 0.0
        mta, surcharge = 0.5, 0.3
        total = round(fare + extra + mta + tip + tolls + surcharge, 2)
        passengers = int(rng.choice([1, 1, 1, 1, 1, 2, 2, 3, 5]))
        records.append(TripRecord(
            pickup_time=pickup, dropoff_time=dropoff,
            pickup_lon=round(lon, 6), pickup_lat=round(lat, 6),
            dropoff_lon=round(float(lon + dlon), 6), dropoff_lat=round(float(lat + dlat), 6),
            passenger_count=passengers, trip_distance=distance,
            fare_amount=fare, total_amount=total,
            vendor_id=str(int(rng.integers(1, 3))), store_flag="N", rate_code="1",
            extra=extra, mta_tax=mta, tip_amount=tip, toll_amount=tolls,
            ehail_fee=0.0, surcharge=surcharge, pay_type=pay_type,
            trip_type="1" if rng.random() < 0.97 else "2",
        ))
    return records


@dataclass
class PlantedNetwork:
    train: list
    test: list
    train_labels: np.ndarray
    test_labels: np.ndarray
    coefs: np.ndarray


PLANTED_COEFS = np.array([[2.0, -1.0, 3.0], [-1.5, 2.5, 8.0]])


def planted_network(side=10, test_count=50, noise_sigma=0.05, spacing_km=0.2,
                    gap_factor=1.2, jitter=0.05, coefs=PLANTED_COEFS, seed=0,
                    origin=(40.70, -73.95), rows=None):
    """Two side-by-side pickup blobs, each with its own linear fare model.

    Each blob is a jittered grid, ``side`` points east-west by ``rows``
    (default ``side``) north-south, with ``spacing_km`` between
    neighbours; the blobs face each other across a gap of
    ``gap_factor * spacing_km``, so a 5-nearest-neighbour graph links them
    through roughly one edge per facing row. Features are two standard
    normals plus an intercept, and responses follow the blob's coefficient
    vector plus Gaussian noise. Test nodes are drawn uniformly inside the
    blobs, alternating between them, with ids starting after the training
    ids.
    """
    rng = np.random.default_rng(seed)
    coefs = np.asarray(coefs, dtype=float)
    rows = side if rows is None else rows
    if side < 1 or rows < 1:
        raise ValueError("blob dimensions must be positive")
    lat0, lon0 = origin
    km_per_deg_lon = KM_PER_DEG_LAT * np.cos(np.radians(lat0))
    width = (side - 1) * spacing_km
    height = (rows - 1) * spacing_km
    offset = width + gap_factor * spacing_km

    def node(node_id, group, east_km, north_km):
        f = np.append(rng.standard_normal(coefs.shape[1] - 1), 1.0)
        y = float(f @ coefs[group] + noise_sigma * rng.standard_normal())
        return NodeProblem(node_id, f, y, lat0 + north_km / KM_PER_DEG_LAT,
                           lon0 + east_km / km_per_deg_lon)

    train, labels = [], []
    for g in range(2):
        for a in range(side):
            for b in range(rows):
                east = a * spacing_km + g * offset + jitter * spacing_km * rng.uniform(-1, 1)
                north = b * spacing_km + jitter * spacing_km * rng.uniform(-1, 1)
                train.append(node(len(train), g, east, north))
                labels.append(g)
    test, test_labels = [], []
    for t in range(test_count):
        g = t % 2
        east = rng.uniform(0, width) + g * offset
        north = rng.uniform(0, height)
        test.append(node(len(train) + t, g, east, north))
        test_labels.append(g)
    return PlantedNetwork(train, test, np.array(labels), np.array(test_labels), coefs)


# --------------------------------------------------------------------------
# CSV ingestion

def read_schema_map(path):
    """Parse ``canonical_name=csv_header`` lines; ``#`` starts a comment."""
    schema = dict(DEFAULT_SCHEMA)
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULT_SCHEMA:
            raise ValueError(f"{path}:{lineno}: unknown canonical column {key!r}")
        schema[key] = value
    return schema


def _parse_time(s):
    return datetime.strptime(s.strip(), _TIME_FORMAT)


def _parse_float(s, default=None):
    s = s.strip()
    if not s:
        if default is None:
            raise ValueError("empty value")
        return default
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("non-finite value")
    return v


def load_trips(path, schema_map=None):
    """Read trip records from a CSV file with a header row.

    Rows that cannot be parsed or that violate a record invariant are
    skipped and tallied by reason in the returned ``LoadReport``.

    Raises
    ------
    SchemaError
        If a mandatory column is absent from the header.
    """
    schema = dict(DEFAULT_SCHEMA)
    if schema_map:
        schema.update(schema_map)
    report = LoadReport()
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, no header row") from None
        index = {h: i for i, h in enumerate(header)}
        for name in MANDATORY_COLUMNS:
            if schema[name] not in index:
                raise SchemaError(f"missing mandatory column {name!r} (header {schema[name]!r})")
        cols = {name: index.get(col) for name, col in schema.items()}

        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            report.rows_read += 1
            try:
                rec = _record_from_row(row, cols)
            except (ValueError, IndexError):
                report.dropped["unparseable"] += 1
                continue
            reason = rec.validate()
            if reason is not None:
                report.dropped[reason] += 1
                continue
            records.append(rec)
    return records, report


def _record_from_row(row, cols):
    def get(name):
        i = cols[name]
        return row[i] if i is not None else ""

    values = {}
    for f in fields(TripRecord):
        name = f.name
        raw = get(name)
        if name in ("pickup_time", "dropoff_time"):
            values[name] = _parse_time(raw)
        elif name in _CATEGORICAL:
            values[name] = raw.strip()
        elif name == "passenger_count":
            values[name] = int(_parse_float(raw))
        elif name in MANDATORY_COLUMNS:
            values[name] = _parse_float(raw)
        else:
            values[name] = _parse_float(raw, default=0.0)
    return TripRecord(**values)


def write_trips(records, path, schema_map=None):
    """Write records in the CSV layout ``load_trips`` reads back."""
    schema = dict(DEFAULT_SCHEMA)
    if schema_map:
        schema.update(schema_map)
    names = [f.name for f in fields(TripRecord)]
    order = [n for n in DEFAULT_SCHEMA if n in names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([schema[n] for n in order])
        for rec in records:
            row = []
            for n in order:
                v = getattr(rec, n)
                if isinstance(v, datetime):
                    row.append(v.strftime(_TIME_FORMAT))
                elif isinstance(v, float):
                    row.append(repr(v))
                else:
                    row.append(v)
            writer.writerow(row)


# --------------------------------------------------------------------------
# features

def _raw_feature_matrix(records, pay_types, trip_types):
    cols = list(NUMERIC_FEATURES)
    cols += [f"pay_type={c}" for c in pay_types]
    cols += [f"trip_type={c}" for c in trip_types]
    cols.append("trip_duration_minutes")
    X = np.empty((len(records), len(cols)))
    for i, rec in enumerate(records):
        row = [float(getattr(rec, name)) for name in NUMERIC_FEATURES]
        row += [1.0 if rec.pay_type == c else 0.0 for c in pay_types]
        row += [1.0 if rec.trip_type == c else 0.0 for c in trip_types]
        row.append(rec.duration_minutes)
        X[i] = row
    return cols, X


def featurize(records, stats=None):
    """Turn trip records into per-node regression problems.

    Feature columns are standardized with population statistics (learned
    here, or reused from ``stats`` for held-out data) and an intercept 1 is
    appended. Columns with zero variance are listed in ``stats.excluded``
    and carry the value 0. The response is ``total_amount``.

    Returns ``(problems, stats)``.
    """
    records = list(records)
    if not records:
        raise ValueError("featurize needs at least one record")
    if stats is None:
        pay_types = sorted({r.pay_type for r in records})
        trip_types = sorted({r.trip_type for r in records})
        cols, X = _raw_feature_matrix(records, pay_types, trip_types)
        means = X.mean(axis=0)
        stds = X.std(axis=0)
        flat = stds <= 1e-12 * np.maximum(1.0, np.abs(means))
        excluded = [c for c, f in zip(cols, flat) if f]
        stds = np.where(flat, 0.0, stds)
        stats = FeatureStats(cols, means, stds, pay_types, trip_types, excluded)
    else:
        cols, X = _raw_feature_matrix(records, stats.pay_types, stats.trip_types)

    keep = stats.stds > 0
    Z = np.zeros_like(X)
    Z[:, keep] = (X[:, keep] - stats.means[keep]) / stats.stds[keep]
    Z = np.hstack([Z, np.ones((len(records), 1))])

    problems = [
        NodeProblem(
            node_id=i, features=Z[i].copy(), response=float(rec.total_amount),
            pickup_lat=rec.pickup_lat, pickup_lon=rec.pickup_lon, pickup_time=rec.pickup_time,
        )
        for i, rec in enumerate(records)
    ]
    return problems, stats


def feature_names(stats):
    return list(stats.columns) + ["intercept"]


# --------------------------------------------------------------------------
# sampling

def split_train_test(problems, train_count, test_count, arrival_weights=None, seed=0):
    """Sample disjoint train and test sets.

    Training nodes are drawn uniformly. Test nodes are drawn from the rest;
    with ``arrival_weights`` (24 per-hour weights) each draw first picks a
    pickup hour with probability proportional to its weight, among hours
    that still have unused nodes, then a node uniformly within that hour.
    """
    problems = list(problems)
    if train_count < 0 or test_count < 0:
        raise ValueError("counts must be non-negative")
    if train_count + test_count > len(problems):
        raise ValueError(
            f"requested {train_count} train + {test_count} test nodes "
            f"but only {len(problems)} are available"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(problems))
    train_idx = order[:train_count]
    rest = order[train_count:]

    if arrival_weights is None:
        test_idx = rest[:test_count]
    else:
        weights = np.asarray(arrival_weights, dtype=float)
        if weights.shape != (24,) or np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("arrival_weights must be 24 finite non-negative numbers")
        pools = {h: [] for h in range(24)}
        for i in sorted(rest):
            t = problems[i].pickup_time
            if t is None:
                raise ValueError("weighted test sampling needs pickup times")
            pools[t.hour].append(int(i))
        test_idx = []
        for _ in range(test_count):
            w = np.array([weights[h] if pools[h] else 0.0 for h in range(24)])
            if w.sum() <= 0:
                raise ValueError("not enough nodes in the hours with positive weight")
            hour = int(rng.choice(24, p=w / w.sum()))
            pool = pools[hour]
            test_idx.append(pool.pop(int(rng.integers(len(pool)))))
    return DatasetSplit(
        train=[problems[i] for i in train_idx],
        test=[problems[i] for i in test_idx],
    )


# --------------------------------------------------------------------------
# descriptive statistics

def hourly_counts(records):
    counts = np.zeros(24, dtype=int)
    for r in records:
        counts[r.pickup_time.hour] += 1
    return counts


def _correlation_table(records):
    X = np.array([
        [r.duration_minutes if name == "trip_duration_minutes" else float(getattr(r, name))
         for name in CORRELATION_FEATURES]
        for r in records
    ])
    Xc = X - X.mean(axis=0)
    norms = np.sqrt((Xc ** 2).sum(axis=0))
    scale = np.where(norms > 0, norms, 1.0)
    Zn = Xc / scale
    C = Zn.T @ Zn
    C = 0.5 * (C + C.T)
    np.fill_diagonal(C, 1.0)
    rows = [[name] + [float(v) for v in C[i]] for i, name in enumerate(CORRELATION_FEATURES)]
    return Table(["feature"] + list(CORRELATION_FEATURES), rows)


def emit_stats(records, kind):
    """Plot-ready table for one of ``STAT_KINDS``."""
    records = list(records)
    if not records:
        raise ValueError("emit_stats needs at least one record")
    if kind == "weekday_hist":
        c = Counter(r.pickup_time.weekday() for r in records)
        return Table(["weekday", "count"], [[WEEKDAYS[d], c.get(d, 0)] for d in range(7)])
    if kind == "hour_hist":
        counts = hourly_counts(records)
        return Table(["hour", "count"], [[h, int(counts[h])] for h in range(24)])
    if kind == "day_of_month_hist":
        c = Counter(r.pickup_time.day for r in records)
        return Table(["day", "count"], [[d, c.get(d, 0)] for d in range(1, 32)])
    if kind == "pickup_dropoff_pairs":
        first = min(r.pickup_time for r in records)
        origin = first.replace(day=1, hour=0, minute=0, second=0, microsecond=0)
        rows = []
        for i, r in enumerate(records):
            rows.append([
                i, r.pickup_time.strftime(_TIME_FORMAT), r.dropoff_time.strftime(_TIME_FORMAT),
                (r.pickup_time - origin).total_seconds() / 3600.0,
                (r.dropoff_time - origin).total_seconds() / 3600.0,
            ])
        return Table(["record", "pickup_time", "dropoff_time", "pickup_hours", "dropoff_hours"], rows)
    if kind == "feature_correlation":
        return _correlation_table(records)
    raise ValueError(f"unknown stats kind {kind!r}; expected one of {STAT_KINDS}")
