"""Pooled OLS and AR(1) benchmarks, RMSE accounting and ratio tables."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .panel_data import Dataset, split_train_test

TABLE1_COLUMNS = ("p", "n_trees", "ml_in", "ml_oob", "ratio_ar1_in", "ratio_ols_in", "ratio_ar1_out", "ratio_ols_out")


class RankDeficient(np.linalg.LinAlgError):
    def __init__(self, column: int):
        super().__init__(f"design matrix is rank deficient at column {column}")
        self.column = column


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class OlsFit:
    coef: np.ndarray
    se: np.ndarray
    tstat: np.ndarray
    r2: float
    fstat: float
    n: int
    names: tuple[str, ...] = ()
    cov_type: str = "HC1"

    def predict(self, X) -> np.ndarray:
        return np.asarray(X, float) @ self.coef


def _first_dependent_column(X: np.ndarray) -> int | None:
    for j in range(1, X.shape[1] + 1):
        if np.linalg.matrix_rank(X[:, :j]) < j:
            return j - 1
    return None


def ols_fit(X, y, cov_type: str = "HC1", names=()) -> OlsFit:
    """Least squares with heteroskedasticity-robust standard errors.

    ``X`` must already contain the intercept column (first by convention).
    ``cov_type`` is one of HC0, HC1 (default, ``n/(n-k)`` correction) or
    HC3. R-squared is centered and F tests all slopes against the
    intercept-only model.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    if n != y.shape[0]:
        raise LengthMismatch("X and y have different numbers of rows")
    if n <= k:
        raise ValueError("need more observations than regressors")
    bad = _first_dependent_column(X)
    if bad is not None:
        raise RankDeficient(bad)

    xtx = X.T @ X
    coef = np.linalg.solve(xtx, X.T @ y)
    resid = y - X @ coef
    bread = np.linalg.inv(xtx)
    u2 = resid**2
    if cov_type == "HC3":
        h = np.einsum("ij,jk,ik->i", X, bread, X)
        u2 = u2 / (1.0 - h) ** 2
    meat = (X * u2[:, None]).T @ X
    cov = bread @ meat @ bread
    if cov_type == "HC1":
        cov *= n / (n - k)
    elif cov_type not in ("HC0", "HC3"):
        raise ValueError(f"unknown cov_type {cov_type!r}")
    se = np.sqrt(np.diag(cov))

    ssr = resid @ resid
    yc = y - y.mean()
    sst = yc @ yc
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    if k > 1:
        fstat = (r2 / (k - 1)) / ((1.0 - r2) / (n - k)) if r2 < 1 else np.inf
    else:
        fstat = np.nan
    with np.errstate(divide="ignore", invalid="ignore"):
        # exact fits have zero standard errors
        tstat = coef / se
    return OlsFit(coef, se, tstat, float(r2), float(fstat), n, tuple(names), cov_type)


def add_constant(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return np.column_stack([np.ones(X.shape[0]), X])


def ar1_fit(y, y_lag, cov_type: str = "HC1") -> OlsFit:
    """OLS of ``y`` on a constant and its lag."""
    y, y_lag = np.asarray(y, float), np.asarray(y_lag, float)
    if y.shape != y_lag.shape:
        raise LengthMismatch("y and y_lag must be aligned")
    if y.shape[0] < 3:
        raise ValueError("need at least 3 pairs")
    return ols_fit(add_constant(y_lag), y, cov_type, names=("constant", "lagged_inflation"))


def rmse(pred, actual) -> float:
    pred, actual = np.asarray(pred, float), np.asarray(actual, float)
    if pred.shape != actual.shape or pred.size == 0:
        raise LengthMismatch("pred and actual must have the same nonzero length")
    return float(np.sqrt(np.mean((pred - actual) ** 2)))


# -- models as fit/predict procedures ----------------------------------------

LAG_FEATURE = 0


def fit_ols(ds: Dataset) -> OlsFit:
    return ols_fit(add_constant(ds.X), ds.y, names=("constant",) + tuple(ds.feature_names))


def fit_ar1(ds: Dataset) -> OlsFit:
    return ar1_fit(ds.y, ds.X[:, LAG_FEATURE])


def ols_model(train: Dataset, test: Dataset) -> np.ndarray:
    return fit_ols(train).predict(add_constant(test.X))


def ar1_model(train: Dataset, test: Dataset) -> np.ndarray:
    return fit_ar1(train).predict(add_constant(test.X[:, [LAG_FEATURE]]))


class RepetitionError(RuntimeError):
    pass


def oos_protocol(
    model: Callable[[Dataset, Dataset], np.ndarray],
    ds: Dataset,
    n_reps: int = 100,
    seed: int = 0,
    fraction: float = 2 / 3,
) -> tuple[float, float]:
    """Mean and std of test RMSE over repeated random 2/3-1/3 splits.

    Repetition ``r`` uses the split seeded with ``(seed, r)``. The std uses
    ``n_reps - 1`` degrees of freedom (0 for a single repetition).
    """
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    scores = []
    for r in range(n_reps):
        train, test = split_train_test(ds, fraction, seed=(seed, r))
        try:
            scores.append(rmse(model(train, test), test.y))
        except Exception as exc:
            raise RepetitionError(f"repetition {r}: {exc}") from exc
    scores = np.array(scores)
    return float(scores.mean()), float(scores.std(ddof=1)) if n_reps > 1 else 0.0


# -- ratio tables -------------------------------------------------------------


@dataclass(frozen=True)
class RatioRow:
    p: int
    n_trees: int
    ml_in: float
    ml_oob: float
    ratio_ar1_in: float
    ratio_ols_in: float
    ratio_ar1_out: float
    ratio_ols_out: float


@dataclass(frozen=True)
class BenchmarkReport:
    """Benchmark RMSEs and one ratio row per (p, n_trees) cell.

    ``ar1``/``ols`` hold ``{"in": rmse, "out": mean, "out_std": std}``.
    """

    rows: tuple[RatioRow, ...]
    ar1: Mapping[str, float] = field(default_factory=dict)
    ols: Mapping[str, float] = field(default_factory=dict)

    def write_csv(self, path: str | Path) -> None:
        write_rows_csv(self.rows, path)

    @classmethod
    def read_csv(cls, path: str | Path, ar1=None, ols=None) -> "BenchmarkReport":
        with Path(path).open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != TABLE1_COLUMNS:
                raise ValueError(f"{path}: expected columns {','.join(TABLE1_COLUMNS)}")
            rows = tuple(
                RatioRow(int(r["p"]), int(r["n_trees"]), *(float(r[c]) for c in TABLE1_COLUMNS[2:])) for r in reader
            )
        return cls(rows, ar1 or {}, ols or {})


def write_rows_csv(rows, path: str | Path, lead: Mapping[str, object] | None = None) -> None:
    lead = dict(lead or {})
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(lead) + list(TABLE1_COLUMNS))
        for r in rows:
            w.writerow([str(v) for v in lead.values()] + [str(r.p), str(r.n_trees)] + [repr(getattr(r, c)) for c in TABLE1_COLUMNS[2:]])


def _safe_ratio(a: float, b: float) -> float:
    if not b > 0:
        raise ZeroDivisionError("benchmark RMSE must be > 0")
    return a / b


def ratio_table(ml: Mapping[tuple[int, int], float], ar1_rmse: float, ols_rmse: float, scope: str = "in"):
    """ML RMSE over each benchmark RMSE, per (p, n_trees) cell.

    Returns ``[(p, n_trees, ml_rmse, ml/ar1, ml/ols), ...]`` sorted by
    ``n_trees`` then ``p``. ``scope`` only labels which RMSEs are compared.
    """
    if scope not in ("in", "out"):
        raise ValueError("scope must be 'in' or 'out'")
    return [
        (p, n, v, _safe_ratio(v, ar1_rmse), _safe_ratio(v, ols_rmse))
        for (p, n), v in sorted(ml.items(), key=lambda kv: (kv[0][1], kv[0][0]))
    ]


def build_report(ml_in: Mapping, ml_oob: Mapping, ar1: Mapping[str, float], ols: Mapping[str, float]) -> BenchmarkReport:
    """Combine in-sample and out-of-sample ratios into table rows."""
    ins = ratio_table(ml_in, ar1["in"], ols["in"], "in")
    outs = {(p, n): r for p, n, *r in ratio_table(ml_oob, ar1["out"], ols["out"], "out")}
    rows = []
    for p, n, v_in, a_in, o_in in ins:
        v_out, a_out, o_out = outs[(p, n)]
        rows.append(RatioRow(p, n, v_in, v_out, a_in, o_in, a_out, o_out))
    return BenchmarkReport(tuple(rows), dict(ar1), dict(ols))
