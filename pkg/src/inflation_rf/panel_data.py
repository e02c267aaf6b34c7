"""Country panel ingestion and feature construction.

The raw panel holds monthly, seasonally adjusted series per country. From it
we build six features and a quarterly annualized inflation target:

====  ==================  ==================================================
idx   name                definition at month t
====  ==================  ==================================================
0     lagged_inflation    inflation over (t-6, t-3]
1     expectation_12m     12-month-ahead expectation blended from survey
                          forecasts for the current and the next year
2     output_gap          one-sided HP gap of the latest GDP quarter <= t
3     oil_change          Brent change over the window ending at t
4     neer_change         NEER change over the window ending at t
5     global_ppi          mean of US, euro area and China PPI inflation
====  ==================  ==================================================

The target for horizon ``h`` is inflation over ``(t+h-3, t+h]``.

Inflation is annualized by compounding, ``((I_t / I_{t-3})**4 - 1) * 100``.
The log alternative ``400 * log(I_t / I_{t-3})`` is slightly smaller for
positive rates; it is not used anywhere in this package.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .filters import HPConfig, output_gap

SCHEMA = (
    "country",
    "date",
    "cpi_sa",
    "core_cpi_sa",
    "real_gdp_sa",
    "consensus_cy",
    "consensus_ny",
    "brent",
    "neer",
    "ppi_yoy_us",
    "ppi_yoy_ea",
    "ppi_yoy_cn",
)
VALUE_COLUMNS = SCHEMA[2:]
INDEX_COLUMNS = ("cpi_sa", "core_cpi_sa", "real_gdp_sa", "brent", "neer")
PPI_COLUMNS = ("ppi_yoy_us", "ppi_yoy_ea", "ppi_yoy_cn")

FEATURE_NAMES = (
    "lagged_inflation",
    "expectation_12m",
    "output_gap",
    "oil_change",
    "neer_change",
    "global_ppi",
)
TARGET_KINDS = ("headline", "core")
HORIZONS = (0, 6, 12)
WINDOWS = (12, 3)


class PanelError(ValueError):
    """Base class for ingestion and feature-construction errors."""


class MissingColumn(PanelError):
    pass


class NonMonotoneDates(PanelError):
    pass


class NonPositiveIndex(PanelError):
    pass


class GdpCoverageError(PanelError):
    pass


class InsufficientHistory(PanelError):
    pass


class EmptyDataset(PanelError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


def month_of_year(dates: np.ndarray) -> np.ndarray:
    """Calendar month (1..12) of ``datetime64[M]`` values."""
    return dates.astype("datetime64[M]").astype(np.int64) % 12 + 1


@dataclass(frozen=True)
class CountrySeries:
    country: str
    dates: np.ndarray
    columns: Mapping[str, np.ndarray]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class RawPanel:
    """Validated per-country monthly series, sorted by (country, date)."""

    series: tuple[CountrySeries, ...]

    @property
    def countries(self) -> tuple[str, ...]:
        return tuple(s.country for s in self.series)

    def __getitem__(self, country: str) -> CountrySeries:
        for s in self.series:
            if s.country == country:
                return s
        raise KeyError(country)

    def __iter__(self) -> Iterator[CountrySeries]:
        return iter(self.series)

    def __len__(self) -> int:
        return len(self.series)

    @property
    def n_rows(self) -> int:
        return sum(len(s) for s in self.series)

    @classmethod
    def from_arrays(cls, data: Mapping[str, Mapping[str, np.ndarray]]) -> "RawPanel":
        """Build and validate a panel from ``{country: {column: array}}``.

        Each inner mapping needs a ``date`` entry (anything ``datetime64[M]``
        accepts) plus every value column; NaN marks a missing value.
        """
        series = []
        for country in sorted(data):
            cols = data[country]
            missing = [c for c in ("date",) + VALUE_COLUMNS if c not in cols]
            if missing:
                raise MissingColumn(f"country {country!r}: missing {', '.join(missing)}")
            dates = np.asarray(cols["date"], dtype="datetime64[M]")
            order = np.argsort(dates, kind="stable")
            values = {c: np.asarray(cols[c], dtype=float)[order] for c in VALUE_COLUMNS}
            series.append(_validated(country, dates[order], values, rows=None))
        return cls(tuple(series))


def _validated(country, dates, values, rows) -> CountrySeries:
    def where(i):
        if rows is not None:
            return f"country {country!r}, line {rows[i]}"
        return f"country {country!r}, date {dates[i]}"

    steps = np.diff(dates.astype(np.int64))
    bad = np.flatnonzero(steps != 1)
    if bad.size:
        i = bad[0] + 1
        kind = "duplicate" if steps[bad[0]] == 0 else "non-consecutive"
        raise NonMonotoneDates(f"{where(i)}: {kind} month {dates[i]} after {dates[i - 1]}")
    for c in INDEX_COLUMNS:
        v = values[c]
        nonpos = np.flatnonzero(~np.isnan(v) & (v <= 0))
        if nonpos.size:
            raise NonPositiveIndex(f"{where(nonpos[0])}: {c} = {v[nonpos[0]]!r} is not > 0")
    # GDP is quarterly: no run of more than two missing months
    have = np.flatnonzero(~np.isnan(values["real_gdp_sa"]))
    edges = np.concatenate(([-1], have, [len(dates)]))
    if np.any(np.diff(edges) > 3):
        raise GdpCoverageError(f"country {country!r}: real_gdp_sa missing for more than two consecutive months")
    return CountrySeries(
        country,
        _frozen(dates),
        {c: _frozen(v) for c, v in values.items()},
    )


def load_panel(csv_path: str | Path) -> RawPanel:
    """Read and validate a panel CSV (see ``SCHEMA``; empty cell = missing)."""
    path = Path(csv_path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MissingColumn(f"{path}: empty file, expected header {','.join(SCHEMA)}") from None
        missing = [c for c in SCHEMA if c not in header]
        if missing:
            raise MissingColumn(f"{path}: missing column(s) {', '.join(missing)}")
        pos = [header.index(c) for c in SCHEMA]
        groups: dict[str, list] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            rec = [row[p].strip() if p < len(row) else "" for p in pos]
            groups.setdefault(rec[0], []).append((lineno, rec))

    series = []
    for country in sorted(groups):
        recs = groups[country]
        try:
            dates = np.array([np.datetime64(r[1], "M") for _, r in recs])
        except ValueError as exc:
            raise NonMonotoneDates(f"country {country!r}: bad date ({exc})") from None
        order = np.argsort(dates, kind="stable")
        lines = np.array([ln for ln, _ in recs])[order]
        values = {}
        for j, c in enumerate(VALUE_COLUMNS, start=2):
            col = np.array([float(r[j]) if r[j] else np.nan for _, r in recs])
            values[c] = col[order]
        series.append(_validated(country, dates[order], values, rows=lines))
    return RawPanel(tuple(series))


def write_panel(panel: RawPanel, csv_path: str | Path) -> None:
    """Write ``panel`` in the ``load_panel`` schema; floats round-trip exactly."""
    with Path(csv_path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCHEMA)
        for s in panel:
            for i, d in enumerate(s.dates):
                vals = (s[c][i] for c in VALUE_COLUMNS)
                w.writerow([s.country, str(d)] + ["" if np.isnan(v) else repr(float(v)) for v in vals])


# -- feature arithmetic -------------------------------------------------------


def quarterly_annualized_inflation(index: Sequence[float], t: int) -> float:
    """Annualized inflation between months ``t-3`` and ``t`` of ``index``."""
    if t - 3 < 0 or t >= len(index):
        raise InsufficientHistory(f"need index values at months {t - 3} and {t}")
    now, before = float(index[t]), float(index[t - 3])
    if now <= 0 or before <= 0:
        raise NonPositiveIndex(f"index levels must be > 0, got {before!r} and {now!r}")
    return ((now / before) ** 4 - 1.0) * 100.0


def _quarterly_inflation_series(index: np.ndarray) -> np.ndarray:
    out = np.full(len(index), np.nan)
    out[3:] = ((index[3:] / index[:-3]) ** 4 - 1.0) * 100.0
    return out


def expectation_12m(cy, ny, month):
    """Blend current- and next-year forecasts into a 12-month-ahead rate.

    Of the months ``t+1..t+12``, ``12 - month`` fall in the current calendar
    year and the rest in the next one; gross rates are averaged
    geometrically with those month counts as weights. Works elementwise on
    arrays.
    """
    cy, ny, month = np.asarray(cy, float), np.asarray(ny, float), np.asarray(month)
    if np.any((month < 1) | (month > 12)):
        raise ValueError("month must lie in 1..12")
    if np.any(cy <= -100) or np.any(ny <= -100):
        raise ValueError("forecasts must exceed -100%")
    w = (12 - month) / 12.0
    out = ((1.0 + cy / 100.0) ** w * (1.0 + ny / 100.0) ** (1.0 - w) - 1.0) * 100.0
    return float(out) if out.ndim == 0 else out


def cumulative_change(series: Sequence[float], t: int, window: int = 12) -> float:
    """Percentage change of ``series`` from ``t - window`` to ``t``."""
    if window not in WINDOWS:
        raise ValueError(f"window must be one of {WINDOWS}")
    if t - window < 0 or t >= len(series):
        raise InsufficientHistory(f"need values at months {t - window} and {t}")
    now, before = float(series[t]), float(series[t - window])
    if now <= 0 or before <= 0:
        raise NonPositiveIndex(f"levels must be > 0, got {before!r} and {now!r}")
    return (now / before - 1.0) * 100.0


def _change_series(levels: np.ndarray, window: int) -> np.ndarray:
    out = np.full(len(levels), np.nan)
    out[window:] = (levels[window:] / levels[:-window] - 1.0) * 100.0
    return out


def _shift(a: np.ndarray, k: int) -> np.ndarray:
    """out[t] = a[t - k]; NaN where out of range."""
    out = np.full(len(a), np.nan)
    if k >= 0:
        out[k:] = a[: len(a) - k]
    else:
        out[:k] = a[-k:]
    return out


def monthly_output_gap(s: CountrySeries, cfg: HPConfig = HPConfig()) -> np.ndarray:
    """Output gap per month of ``s``, holding each quarter's value forward.

    A month carries the gap of the latest month ``<= t`` with a GDP reading,
    so no month sees GDP published after it.
    """
    return gap_from_gdp(s["real_gdp_sa"], cfg)


def gap_from_gdp(gdp: np.ndarray, cfg: HPConfig = HPConfig()) -> np.ndarray:
    """Monthly gap from a monthly GDP column that is NaN outside quarter ends."""
    have = np.flatnonzero(~np.isnan(gdp))
    out = np.full(len(gdp), np.nan)
    if len(have) < cfg.min_window:
        return out
    gap_q = output_gap(gdp[have], cfg)
    pos = np.searchsorted(have, np.arange(len(gdp)), side="right") - 1
    ok = pos >= 0
    out[ok] = gap_q[pos[ok]]
    return out


# -- datasets -----------------------------------------------------------------


class Observation(NamedTuple):
    country: str
    date: np.datetime64
    features: np.ndarray
    target: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """Aligned observations: feature matrix ``X`` (n, 6), target ``y`` (n,)."""

    X: np.ndarray
    y: np.ndarray
    country: np.ndarray
    date: np.ndarray
    feature_names: tuple[str, ...] = FEATURE_NAMES
    horizon_months: int = 0
    target_kind: str = "headline"
    dropped: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=float)
        y = np.ascontiguousarray(self.y, dtype=float)
        if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[1] != len(self.feature_names):
            raise ValueError("X must be (n, n_features) and match y and feature_names")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("features and target must be finite")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "country", _frozen(np.asarray(self.country, dtype=object)))
        object.__setattr__(self, "date", _frozen(np.asarray(self.date, dtype="datetime64[M]")))

    def __len__(self) -> int:
        return self.y.shape[0]

    @property
    def observations(self) -> list[Observation]:
        return [Observation(c, d, x, t) for c, d, x, t in zip(self.country, self.date, self.X, self.y)]

    def take(self, rows) -> "Dataset":
        """Sub-dataset of ``rows`` (indices or boolean mask), same metadata."""
        rows = np.asarray(rows)
        return Dataset(
            self.X[rows],
            self.y[rows],
            self.country[rows],
            self.date[rows],
            self.feature_names,
            self.horizon_months,
            self.target_kind,
            self.dropped,
        )

    def date_range(self, start=None, stop=None) -> "Dataset":
        """Rows dated in ``[start, stop)``; either bound may be omitted."""
        mask = np.ones(len(self), bool)
        if start is not None:
            mask &= self.date >= np.datetime64(start, "M")
        if stop is not None:
            mask &= self.date < np.datetime64(stop, "M")
        return self.take(np.flatnonzero(mask))


def assemble_dataset(
    raw: RawPanel,
    gap: Mapping[str, np.ndarray] | None = None,
    horizon: int = 0,
    target_kind: str = "headline",
    window: int = 12,
    hp: HPConfig = HPConfig(),
) -> Dataset:
    """Build the feature matrix and target for every complete (country, month).

    ``gap`` maps each country to a monthly gap series aligned with its dates;
    when omitted it is computed with :func:`monthly_output_gap`. The core
    variant swaps the target and lagged inflation to core CPI and keeps the
    headline expectations. Rows with any missing ingredient are dropped and
    counted per country in ``Dataset.dropped``.
    """
    if horizon not in HORIZONS:
        raise ValueError(f"horizon must be one of {HORIZONS}")
    if target_kind not in TARGET_KINDS:
        raise ValueError(f"target_kind must be one of {TARGET_KINDS}")
    if window not in WINDOWS:
        raise ValueError(f"window must be one of {WINDOWS}")

    blocks, dropped = [], {}
    for s in raw:
        price = s["cpi_sa" if target_kind == "headline" else "core_cpi_sa"]
        infl = _quarterly_inflation_series(price)
        g = monthly_output_gap(s, hp) if gap is None else np.asarray(gap[s.country], float)
        if len(g) != len(s):
            raise ValueError(f"gap series for {s.country!r} is not aligned with its dates")
        feats = np.column_stack(
            [
                _shift(infl, 3),
                expectation_12m(s["consensus_cy"], s["consensus_ny"], month_of_year(s.dates)),
                g,
                _change_series(s["brent"], window),
                _change_series(s["neer"], window),
                np.mean([s[c] for c in PPI_COLUMNS], axis=0),
            ]
        )
        target = _shift(infl, -horizon)
        keep = np.all(np.isfinite(feats), axis=1) & np.isfinite(target)
        dropped[s.country] = int(len(s) - keep.sum())
        if keep.any():
            blocks.append((feats[keep], target[keep], np.full(keep.sum(), s.country, dtype=object), s.dates[keep]))

    if not blocks:
        raise EmptyDataset("no complete observations survive feature construction")
    X, y, c, d = (np.concatenate(parts) for parts in zip(*blocks))
    return Dataset(X, y, c, d, FEATURE_NAMES, horizon, target_kind, dropped)


ANNEX_ORDER = ("target", "global_ppi", "output_gap", "expectation_12m", "neer_change", "oil_change", "lagged_inflation")


def summary_stats(ds: Dataset) -> list[tuple[str, float, float]]:
    """(variable, mean, sample std) for the target and every feature."""
    if len(ds) == 0:
        raise EmptyDataset("summary statistics need at least one row")
    cols = {"target": ds.y, **{n: ds.X[:, j] for j, n in enumerate(ds.feature_names)}}
    order = [n for n in ANNEX_ORDER if n in cols] + [n for n in cols if n not in ANNEX_ORDER]
    ddof = 1 if len(ds) > 1 else 0
    return [(n, float(np.mean(cols[n])), float(np.std(cols[n], ddof=ddof))) for n in order]


def write_summary_stats(stats, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variable", "mean", "std"])
        for name, mean, std in stats:
            w.writerow([name, repr(mean), repr(std)])


def subsample_size(n: int, fraction: float) -> int:
    """``floor(fraction * n)`` without float round-off for fractions like 2/3."""
    return math.floor(Fraction(fraction).limit_denominator(10**6) * n)


def split_train_test(ds: Dataset, fraction: float = 2 / 3, seed=0) -> tuple[Dataset, Dataset]:
    """Random train/test partition with ``floor(fraction * n)`` training rows.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts, including
    a sequence of ints such as ``(seed, repetition)``.
    """
    n = len(ds)
    if n < 3:
        raise ValueError("need at least 3 rows to split")
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    perm = np.random.default_rng(seed).permutation(n)
    m = subsample_size(n, fraction)
    return ds.take(np.sort(perm[:m])), ds.take(np.sort(perm[m:]))
