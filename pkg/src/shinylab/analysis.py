"""Ratings data model, condition aggregation, bias index, and regressions.

A rating record holds one trial's four confidence percentages (metal,
shiny black, shiny white, something else), constrained to sum to exactly
100. The bias index of a light map is the mean metal confidence over all
purely specular ground-truth stimuli (metal and shiny black, all intensity
factors) divided by the mean shiny-black confidence over the same stimuli.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DegenerateFitError, DomainError, MetricError, MissingDataError

CATEGORIES = ("metal", "shiny_black", "shiny_white", "other")
CSV_COLUMNS = (
    "observer",
    "session",
    "object",
    "material",
    "light_map",
    "factor",
    "metal",
    "shiny_black",
    "shiny_white",
    "other",
)
_SUM_TOL = 1e-9


@dataclass(frozen=True)
class RatingRecord:
    """One trial's four confidence ratings, keyed by observer and stimulus."""

    observer: str
    session: int
    object: str
    material: str
    light_map: str
    factor: float
    ratings: tuple

    def __post_init__(self):
        if self.session not in (1, 2):
            raise DomainError(f"session must be 1 or 2, got {self.session}")
        r = tuple(float(v) for v in self.ratings)
        if len(r) != 4:
            raise DomainError(f"need 4 ratings {CATEGORIES}, got {len(r)}")
        if any(v < 0 or v > 100 for v in r):
            raise DomainError(f"ratings must lie in [0, 100], got {r}")
        if abs(sum(r) - 100.0) > _SUM_TOL:
            raise DomainError(f"ratings must sum to 100, got sum {sum(r):g}")
        object.__setattr__(self, "ratings", r)

    def rating(self, category: str) -> float:
        return self.ratings[CATEGORIES.index(category)]


@dataclass(frozen=True)
class ConditionStats:
    """Per-condition mean and standard error for the four categories."""

    mean: np.ndarray
    sem: np.ndarray
    n: int


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def predict(self, x):
        return self.slope * np.asarray(x, dtype=np.float64) + self.intercept


@dataclass(frozen=True)
class StimulusStat:
    """An image statistic (coverage or mean intensity) tagged with its condition."""

    object: str
    material: str
    light_map: str
    factor: float
    value: float


def condition_key(record) -> tuple:
    return (record.light_map, record.material, record.factor)


def aggregate(records, conditions=None) -> dict:
    """Mean and SEM of the four categories per (light map, material, factor).

    Averages over observers, sessions and objects. SEM is the sample
    standard deviation over contributing records divided by sqrt(n); for a
    single record it is 0 by convention (n = 1 is visible in the result).
    If `conditions` is given, every requested condition must have at least
    one record.
    """
    groups: dict = {}
    for rec in records:
        groups.setdefault(condition_key(rec), []).append(rec.ratings)
    if conditions is not None:
        missing = [c for c in conditions if tuple(c) not in groups]
        if missing:
            raise MissingDataError(f"no records for conditions: {missing}")
        groups = {tuple(c): groups[tuple(c)] for c in conditions}
    out = {}
    for key, rows in groups.items():
        a = np.asarray(rows, dtype=np.float64)
        n = a.shape[0]
        mean = a.mean(axis=0)
        sem = a.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(4)
        out[key] = ConditionStats(mean=mean, sem=sem, n=n)
    return out


def bias_index(records, light_map: str) -> float:
    """Mean metal confidence over the purely specular stimuli of a light
    map divided by the mean shiny-black confidence over the same stimuli."""
    pool = [
        r
        for r in records
        if r.light_map == light_map and r.material in ("metal", "shiny_black")
    ]
    if not pool:
        raise MissingDataError(
            f"no metal/shiny_black ground-truth records for light map {light_map!r}"
        )
    metal_conf = float(np.mean([r.rating("metal") for r in pool]))
    black_conf = float(np.mean([r.rating("shiny_black") for r in pool]))
    if black_conf == 0.0:
        raise MetricError(f"bias index undefined for {light_map!r}: zero shiny-black confidence")
    return metal_conf / black_conf


def linear_fit(x, y) -> RegressionFit:
    """Ordinary least squares fit of y on x with R^2 = 1 - SS_res/SS_tot."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise DomainError("x and y must be 1-d arrays of equal length")
    if x.size < 2:
        raise DomainError(f"need at least 2 points, got {x.size}")
    if np.ptp(x) == 0.0:
        raise DegenerateFitError("cannot fit a line to a constant predictor")
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RegressionFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=min(max(r2, 0.0), 1.0),
        n_points=int(x.size),
    )


def coverage_rating_correlation(stimulus_stats, records) -> dict:
    """Fit metal and shiny-black confidence against an image statistic.

    `stimulus_stats` are StimulusStat values (typically specular coverage,
    or mean intensity for the alternative analysis) for the metal and
    shiny-black stimuli; shiny-white stimuli are excluded because they mix
    diffuse and specular reflections. Ratings and statistics are averaged
    per (light map, material, factor) condition and one fit per rated
    category is returned.
    """
    stats = [s for s in stimulus_stats if s.material in ("metal", "shiny_black")]
    if not stats:
        raise MissingDataError("no metal/shiny_black stimulus statistics supplied")
    x_by_cond: dict = {}
    for s in stats:
        x_by_cond.setdefault((s.light_map, s.material, s.factor), []).append(s.value)
    agg = aggregate([r for r in records if r.material in ("metal", "shiny_black")])
    common = sorted(set(x_by_cond) & set(agg))
    if len(common) < 2:
        raise MissingDataError("need statistics and ratings for at least 2 shared conditions")
    x = np.array([np.mean(x_by_cond[c]) for c in common])
    fits = {}
    for cat in ("metal", "shiny_black"):
        y = np.array([agg[c].mean[CATEGORIES.index(cat)] for c in common])
        fits[cat] = linear_fit(x, y)
    return fits


# ---------------------------------------------------------------------------
# CSV schema
# ---------------------------------------------------------------------------

def load_ratings_csv(source) -> list:
    """Read rating records from a CSV path or file-like object.

    Column order is fixed (observer, session, object, material, light_map,
    factor, metal, shiny_black, shiny_white, other). Rows violating the
    sum-to-100 constraint are rejected with their row number.
    """
    if hasattr(source, "read"):
        return _parse_ratings(source)
    with open(source, "r", newline="") as fh:
        return _parse_ratings(fh)


def _parse_ratings(fh) -> list:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != CSV_COLUMNS:
        raise DomainError(f"ratings CSV must start with header {','.join(CSV_COLUMNS)}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise DomainError(f"row {lineno}: expected {len(CSV_COLUMNS)} columns, got {len(row)}")
        try:
            records.append(
                RatingRecord(
                    observer=row[0],
                    session=int(row[1]),
                    object=row[2],
                    material=row[3],
                    light_map=row[4],
                    factor=float(row[5]),
                    ratings=tuple(float(v) for v in row[6:10]),
                )
            )
        except (DomainError, ValueError) as exc:
            raise DomainError(f"row {lineno}: {exc}") from exc
    return records


def write_ratings_csv(records, target) -> None:
    """Write records in the fixed CSV schema to a path or file-like object."""
    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [r.observer, r.session, r.object, r.material, r.light_map, f"{r.factor:g}"]
                + [f"{v:g}" for v in r.ratings]
            )

    if hasattr(target, "write"):
        _write(target)
    else:
        with open(target, "w", newline="") as fh:
            _write(fh)


def ratings_csv_string(records) -> str:
    buf = io.StringIO()
    write_ratings_csv(records, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Bundled reference table
# ---------------------------------------------------------------------------

def table1_fixture_path() -> Path:
    """Path of the bundled per-light-map reference table (bias index and
    the three spherical-harmonic statistics)."""
    return Path(resources.files("shinylab").joinpath("fixtures/table1.csv"))


def load_table1() -> dict:
    """Bundled reference table as {column: list}, light_map column included."""
    with open(table1_fixture_path(), newline="") as fh:
        rows = list(csv.DictReader(fh))
    out: dict = {k: [] for k in rows[0]}
    for row in rows:
        for k, v in row.items():
            out[k].append(v if k == "light_map" else float(v))
    return out
