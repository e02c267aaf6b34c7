"""Regression trees grown by exhaustive recursive partitioning.

A node with ``count >= min_parent`` rows is split on the feature ``k`` and
threshold ``t`` minimizing ``(S_A * MSE(S_A) + S_B * MSE(S_B)) / S``,
i.e. the summed squared error of the two children. Candidate thresholds
are midpoints between consecutive distinct feature values; rows with
``x[k] <= t`` go left. Ties go to the lowest feature index, then the
lowest threshold. A node is a leaf when it is too small, its targets are
all equal, or no candidate lowers the squared error by more than a
relative ``SPLIT_TOL`` (which also absorbs round-off so that equal-quality
candidates are treated as tied). Leaves predict the mean target of their
training rows.

Trees are stored as flat node arrays; ``feature[i] == -1`` marks a leaf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

SPLIT_TOL = 1e-10
LEAF = -1


# -- compiled kernels ---------------------------------------------------------


@njit(cache=True, nogil=True)
def _node_stats(y, idx, start, end):
    # sequential sums in ascending row order keep leaf means reproducible
    s = 0.0
    lo = y[idx[start]]
    hi = lo
    for i in range(start, end):
        v = y[idx[i]]
        s += v
        if v < lo:
            lo = v
        if v > hi:
            hi = v
    mean = s / (end - start)
    sse = 0.0
    for i in range(start, end):
        d = y[idx[i]] - mean
        sse += d * d
    return mean, sse, lo == hi


@njit(cache=True, nogil=True)
def _scan(X, y, idx, start, end, features, mean, parent_sse, vals, ys):
    n = end - start
    tol = SPLIT_TOL * parent_sse
    tot_s = 0.0
    for i in range(start, end):
        tot_s += y[idx[i]] - mean
    best = np.inf
    best_f = -1
    best_t = 0.0
    for f in features:
        for i in range(n):
            vals[i] = X[idx[start + i], f]
        order = np.argsort(vals[:n], kind="mergesort")
        for i in range(n):
            ys[i] = y[idx[start + order[i]]] - mean
        sl = 0.0
        ql = 0.0
        for i in range(n - 1):
            v = ys[i]
            sl += v
            ql += v * v
            a = vals[order[i]]
            b = vals[order[i + 1]]
            if a < b:
                nl = i + 1
                nr = n - nl
                sr = tot_s - sl
                sse = (ql - sl * sl / nl) + ((parent_sse - ql) - sr * sr / nr)
                if sse < best - tol:
                    best = sse
                    best_f = f
                    t = 0.5 * (a + b)
                    best_t = t if t < b else a
    return best_f, best_t, best


@njit(cache=True, nogil=True)
def _choose_features(keys_row, m_try):
    K = keys_row.shape[0]
    if m_try >= K:
        return np.arange(K)
    return np.sort(np.argsort(keys_row, kind="mergesort")[:m_try])


@njit(cache=True, nogil=True)
def _partition(X, idx, start, end, f, thr, buf):
    nl = 0
    nr = 0
    for i in range(start, end):
        r = idx[i]
        if X[r, f] <= thr:
            idx[start + nl] = r
            nl += 1
        else:
            buf[nr] = r
            nr += 1
    for i in range(nr):
        idx[start + nl + i] = buf[i]
    return nl


@njit(cache=True, nogil=True)
def _grow(X, y, rows, min_parent, m_try, keys):
    n = rows.shape[0]
    cap = 2 * n - 1
    feature = np.full(cap, LEAF, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap)
    count = np.zeros(cap, np.int64)
    sse = np.zeros(cap)
    node_start = np.zeros(cap, np.int64)
    node_end = np.zeros(cap, np.int64)
    stack = np.zeros(cap, np.int64)

    idx = rows.copy()
    buf = np.empty(n, np.int64)
    vals = np.empty(n)
    ys = np.empty(n)

    node_end[0] = n
    n_nodes = 1
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        s = node_start[node]
        e = node_end[node]
        mean, nsse, pure = _node_stats(y, idx, s, e)
        value[node] = mean
        count[node] = e - s
        sse[node] = nsse
        if e - s < min_parent or pure:
            continue
        feats = _choose_features(keys[node], m_try)
        f, thr, best = _scan(X, y, idx, s, e, feats, mean, nsse, vals, ys)
        if f < 0 or not best < nsse - SPLIT_TOL * nsse:
            continue
        nl = _partition(X, idx, s, e, f, thr, buf)
        feature[node] = f
        threshold[node] = thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        node_start[n_nodes] = s
        node_end[n_nodes] = s + nl
        node_start[n_nodes + 1] = s + nl
        node_end[n_nodes + 1] = e
        stack[sp] = n_nodes + 1
        stack[sp + 1] = n_nodes
        sp += 2
        n_nodes += 2
    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
        count[:n_nodes].copy(),
        sse[:n_nodes].copy(),
    )


@njit(cache=True, nogil=True)
def _apply(feature, threshold, left, right, X, out):
    for i in range(X.shape[0]):
        node = 0
        while feature[node] != LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node


@njit(cache=True, nogil=True)
def _predict_packed(feature, threshold, left, right, value, roots, X, out):
    # out[j, i] = prediction of tree j for row i
    for j in range(roots.shape[0]):
        for i in range(X.shape[0]):
            node = roots[j]
            while feature[node] != LEAF:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[j, i] = value[node]


# -- public API ---------------------------------------------------------------


@dataclass(frozen=True)
class SplitCandidate:
    feature: int
    threshold: float
    weighted_mse: float


@dataclass(frozen=True)
class GrowConfig:
    """Stopping rule and per-split feature sampling for one tree.

    ``rng`` is a :class:`numpy.random.Generator` used only when
    ``m_try`` is below the number of features.
    """

    min_parent: int = 10
    m_try: int = 2
    rng: np.random.Generator | None = None

    def __post_init__(self):
        if self.min_parent < 2:
            raise ValueError("min_parent must be >= 2")
        if self.m_try < 1:
            raise ValueError("m_try must be >= 1")


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Fitted tree as flat node arrays; node 0 is the root."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray
    sse: np.ndarray

    def __post_init__(self):
        for name in ("feature", "threshold", "left", "right", "value", "count", "sse"):
            getattr(self, name).setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature == LEAF

    @property
    def n_leaves(self) -> int:
        return int(self.is_leaf.sum())

    def depth(self) -> int:
        d = np.zeros(self.n_nodes, int)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                d[self.left[i]] = d[self.right[i]] = d[i] + 1
        return int(d.max())

    def apply(self, X) -> np.ndarray:
        """Leaf node index reached by each row of ``X``."""
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
        out = np.empty(X.shape[0], np.int64)
        _apply(self.feature, self.threshold, self.left, self.right, X, out)
        return out

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def preorder(self) -> list[int]:
        out, stack = [], [0]
        while stack:
            i = stack.pop()
            out.append(i)
            if self.feature[i] != LEAF:
                stack += [self.right[i], self.left[i]]
        return out

    def dump(self, feature_names=None) -> str:
        """Indented text rendering, one node per line."""
        depth = {0: 0}
        lines = []
        for i in self.preorder():
            pad = "  " * depth[i]
            if self.feature[i] == LEAF:
                lines.append(f"{pad}leaf value={self.value[i]:.6g} n={self.count[i]}")
            else:
                k = self.feature[i]
                name = feature_names[k] if feature_names else f"feature{k}"
                lines.append(f"{pad}{name} <= {self.threshold[i]:.6g}")
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return "\n".join(lines)


def _as_xy(X, y):
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, K) with n == len(y)")
    return X, y


def best_split(X, y, rows=None, feature_subset=None) -> SplitCandidate | None:
    """Best single split of ``rows`` over ``feature_subset``.

    Returns None when no candidate strictly lowers the squared error.
    """
    X, y = _as_xy(X, y)
    rows = np.arange(len(y)) if rows is None else np.sort(np.asarray(rows, np.int64))
    if rows.shape[0] < 2:
        raise ValueError("need at least two rows")
    feats = np.arange(X.shape[1]) if feature_subset is None else np.unique(np.asarray(feature_subset, np.int64))
    mean, sse, pure = _node_stats(y, rows, 0, rows.shape[0])
    if pure:
        return None
    n = rows.shape[0]
    f, thr, best = _scan(X, y, rows, 0, n, feats, mean, sse, np.empty(n), np.empty(n))
    if f < 0 or not best < sse - SPLIT_TOL * sse:
        return None
    yl = y[rows[X[rows, f] <= thr]]
    yr = y[rows[X[rows, f] > thr]]
    weighted = (np.sum((yl - yl.mean()) ** 2) + np.sum((yr - yr.mean()) ** 2)) / n
    return SplitCandidate(int(f), float(thr), float(weighted))


def grow(X, y, cfg: GrowConfig = GrowConfig(), rows=None) -> RegressionTree:
    """Grow a tree on ``rows`` of ``(X, y)`` (all rows by default).

    Each node draws its own ``cfg.m_try``-feature subset from ``cfg.rng``.
    """
    X, y = _as_xy(X, y)
    rows = np.arange(len(y), dtype=np.int64) if rows is None else np.sort(np.asarray(rows, np.int64))
    if rows.shape[0] < 1:
        raise ValueError("need at least one row")
    K = X.shape[1]
    m_try = min(cfg.m_try, K)
    if m_try < K:
        rng = cfg.rng if cfg.rng is not None else np.random.default_rng()
        keys = rng.random((2 * rows.shape[0], K))
    else:
        keys = np.zeros((2 * rows.shape[0], K))
    return RegressionTree(*_grow(X, y, rows, cfg.min_parent, m_try, keys))


def predict_tree(tree: RegressionTree, x) -> float | np.ndarray:
    """Prediction for one feature vector, or one per row of a matrix."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    if x.ndim == 1:
        return float(tree.predict(x[None, :])[0])
    return tree.predict(x)
