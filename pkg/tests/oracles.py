"""Slow, direct reference implementations used to check the fast code.

Nothing here imports from ``inflation_rf``: each routine recomputes its
result from first principles with plain Python loops or dense algebra.
"""

from __future__ import annotations

import numpy as np

TOL = 1e-10


# -- regression trees ---------------------------------------------------------


def _mean(y, rows):
    s = 0.0
    for r in rows:
        s += y[r]
    return s / len(rows)


def _sse(y, rows):
    m = sum(y[r] for r in rows) / len(rows)
    return sum((y[r] - m) ** 2 for r in rows)


def brute_best_split(X, y, rows):
    """Exhaustive split search: every feature, every midpoint, direct SSE.

    Returns ``(feature, threshold)`` or None under the same rules as the
    fast search: a candidate must beat the incumbent by more than
    ``TOL * parent_sse``; the first qualifying candidate in (feature,
    threshold) order wins ties.
    """
    parent = _sse(y, rows)
    if max(y[r] for r in rows) == min(y[r] for r in rows):
        return None
    best, choice = np.inf, None
    for k in range(X.shape[1]):
        values = sorted(set(X[r, k] for r in rows))
        for a, b in zip(values[:-1], values[1:]):
            t = 0.5 * (a + b)
            if not t < b:
                t = a
            left = [r for r in rows if X[r, k] <= t]
            right = [r for r in rows if X[r, k] > t]
            sse = _sse(y, left) + _sse(y, right)
            if sse < best - TOL * parent:
                best, choice = sse, (k, t)
    if choice is None or not best < parent - TOL * parent:
        return None
    return choice


def brute_tree(X, y, rows, min_parent):
    """Nested tuples: ``("leaf", mean)`` or ``("split", k, t, left, right)``."""
    rows = sorted(rows)
    if len(rows) < min_parent:
        return ("leaf", _mean(y, rows))
    split = brute_best_split(X, y, rows)
    if split is None:
        return ("leaf", _mean(y, rows))
    k, t = split
    left = [r for r in rows if X[r, k] <= t]
    right = [r for r in rows if X[r, k] > t]
    return ("split", k, t, brute_tree(X, y, left, min_parent), brute_tree(X, y, right, min_parent))


def brute_predict(node, x):
    while node[0] == "split":
        _, k, t, left, right = node
        node = left if x[k] <= t else right
    return node[1]


# -- Hodrick-Prescott ---------------------------------------------------------


def hp_dense(y, lamb):
    """Trend solving ``(I + lamb D'D) tau = y`` with a dense second-difference ``D``."""
    y = np.asarray(y, float)
    T = y.shape[0]
    D = np.zeros((T - 2, T))
    for i in range(T - 2):
        D[i, i : i + 3] = (1.0, -2.0, 1.0)
    return np.linalg.solve(np.eye(T) + lamb * D.T @ D, y)


def hp_one_sided_dense(y, lamb, min_window):
    y = np.asarray(y, float)
    out = np.full(y.shape[0], np.nan)
    for t in range(min_window - 1, y.shape[0]):
        out[t] = hp_dense(y[: t + 1], lamb)[-1]
    return out


# -- least squares ------------------------------------------------------------


def ols_dense(X, y, correction="HC1"):
    """Coefficients via SVD least squares and an explicit per-row sandwich."""
    X, y = np.asarray(X, float), np.asarray(y, float)
    n, k = X.shape
    coef = np.linalg.lstsq(X, y, rcond=None)[0]
    resid = y - X @ coef
    bread = np.linalg.pinv(X.T @ X)
    meat = np.zeros((k, k))
    for i in range(n):
        meat += resid[i] ** 2 * np.outer(X[i], X[i])
    cov = bread @ meat @ bread
    if correction == "HC1":
        cov = cov * n / (n - k)
    se = np.sqrt(np.diag(cov))
    ssr = float(np.sum(resid**2))
    sst = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1 - ssr / sst
    f = ((sst - ssr) / (k - 1)) / (ssr / (n - k))
    return coef, se, r2, f
