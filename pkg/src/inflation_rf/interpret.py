"""Impurity importance and at-means partial effects of a fitted forest.

Partial effects here are *profiles at the means*: every other feature is
fixed at its sample mean while one feature moves along a grid. This is not
the usual partial-dependence average over the sample; the two coincide
only for additive models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cart import LEAF
from .forest import Forest
from .panel_data import Dataset


class DegenerateFeature(ValueError):
    pass


@dataclass(frozen=True)
class ImportanceVector:
    feature_names: tuple[str, ...]
    raw: np.ndarray
    normalized: np.ndarray
    has_splits: bool

    def ranking(self) -> list[str]:
        """Feature names, most important first (stable on ties)."""
        order = np.argsort(-self.raw, kind="stable")
        return [self.feature_names[i] for i in order]


def tree_split_credit(tree, n_features: int) -> np.ndarray:
    """Squared-error reduction credited to each feature by one tree."""
    credit = np.zeros(n_features)
    internal = np.flatnonzero(tree.feature != LEAF)
    gains = tree.sse[internal] - tree.sse[tree.left[internal]] - tree.sse[tree.right[internal]]
    np.add.at(credit, tree.feature[internal], gains)
    return credit


def impurity_importance(f: Forest, ds: Dataset | None = None) -> ImportanceVector:
    """Mean per-tree SSE reduction by feature, plus a sum-to-one version.

    Node errors are those recorded on each tree's own training subsample.
    A forest without a single split gets all-zero scores and
    ``has_splits=False``.
    """
    K = len(f.feature_names)
    if ds is not None and len(ds) != f.n_rows:
        raise ValueError("dataset does not match the forest's training rows")
    raw = np.mean([tree_split_credit(t, K) for t in f.trees], axis=0)
    total = raw.sum()
    has = bool(total > 0)
    normalized = raw / total if has else np.zeros(K)
    return ImportanceVector(tuple(f.feature_names), raw, normalized, has)


@dataclass(frozen=True)
class PartialEffectCurve:
    feature_index: int
    feature_name: str
    grid: np.ndarray
    predictions: np.ndarray
    covariate_means: np.ndarray

    def at(self, value: float) -> float:
        """Linear interpolation of the curve at ``value``."""
        return float(np.interp(value, self.grid, self.predictions))


def _grid(ds: Dataset, k: int, n_grid: int, trim) -> np.ndarray:
    col = ds.X[:, k]
    if np.all(col == col[0]):
        raise DegenerateFeature(f"feature {ds.feature_names[k]!r} is constant")
    lo, hi = np.quantile(col, trim)
    if not hi > lo:
        raise DegenerateFeature(f"feature {ds.feature_names[k]!r} has no spread between the trim quantiles")
    return np.linspace(lo, hi, n_grid)


def partial_effect(f: Forest, ds: Dataset, k: int, n_grid: int = 50, trim=(0.01, 0.99)) -> PartialEffectCurve:
    """Forest prediction along a grid of feature ``k``, others at their means."""
    if n_grid < 2:
        raise ValueError("n_grid must be >= 2")
    grid = _grid(ds, k, n_grid, trim)
    means = ds.X.mean(axis=0)
    Z = np.tile(means, (n_grid, 1))
    Z[:, k] = grid
    return PartialEffectCurve(k, ds.feature_names[k], grid, f.predict(Z), means)


def partial_effect_surface(f: Forest, ds: Dataset, k1: int, k2: int, n_grid: int = 25, trim=(0.01, 0.99)):
    """Predictions on a grid over two features, the rest at their means.

    Returns ``(grid1, grid2, Z)`` with ``Z[i, j]`` the prediction at
    ``(grid1[i], grid2[j])``.
    """
    g1, g2 = _grid(ds, k1, n_grid, trim), _grid(ds, k2, n_grid, trim)
    means = ds.X.mean(axis=0)
    pts = np.tile(means, (n_grid * n_grid, 1))
    pts[:, k1] = np.repeat(g1, n_grid)
    pts[:, k2] = np.tile(g2, n_grid)
    return g1, g2, f.predict(pts).reshape(n_grid, n_grid)


def average_slope(curve: PartialEffectCurve) -> float:
    """Least-squares slope of the predictions on the grid values."""
    x, y = np.asarray(curve.grid, float), np.asarray(curve.predictions, float)
    if x.shape[0] < 2:
        raise ValueError("need at least two grid points")
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
