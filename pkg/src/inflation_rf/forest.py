"""Random forests on 2/3 subsamples with out-of-bag evaluation.

Tree ``j`` draws its subsample and its per-split feature subsets from a
Philox generator seeded with ``(seed, j)``, so a forest does not depend on
the order or the number of threads its trees are grown with.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .cart import LEAF, RegressionTree, _grow, _predict_packed
from .panel_data import Dataset, EmptyDataset, subsample_size

FORMAT_VERSION = 1


def default_m_try(n_features: int) -> int:
    return max(1, math.ceil(n_features / 3))


@dataclass(frozen=True)
class ForestConfig:
    """Ensemble settings.

    ``bootstrap=True`` swaps the ``floor(subsample_fraction * n)`` draw
    without replacement for a classical size-``n`` bootstrap.
    """

    n_trees: int = 1000
    min_parent: int = 10
    m_try: int = 2
    subsample_fraction: float = 2 / 3
    seed: int = 0
    bootstrap: bool = False

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_parent < 2:
            raise ValueError("min_parent must be >= 2")
        if self.m_try < 1:
            raise ValueError("m_try must be >= 1")
        if not 0 < self.subsample_fraction < 1:
            raise ValueError("subsample_fraction must lie in (0, 1)")


def tree_rng(seed: int, j: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, j])))


@dataclass(frozen=True, eq=False)
class Forest:
    trees: tuple[RegressionTree, ...]
    inbag_sets: tuple[np.ndarray, ...]
    config: ForestConfig
    feature_names: tuple[str, ...]
    n_rows: int

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @cached_property
    def _packed(self):
        offsets = np.cumsum([0] + [t.n_nodes for t in self.trees])
        cat = lambda name: np.concatenate([getattr(t, name) for t in self.trees])
        feature = cat("feature")
        left, right = cat("left"), cat("right")
        shift = np.repeat(offsets[:-1], [t.n_nodes for t in self.trees])
        internal = feature != LEAF
        left = np.where(internal, left + shift, -1)
        right = np.where(internal, right + shift, -1)
        return feature, cat("threshold"), left, right, cat("value"), offsets[:-1].astype(np.int64)

    def tree_predictions(self, X, trees: slice | None = None) -> np.ndarray:
        """Matrix of per-tree predictions, shape (n_trees, n_rows)."""
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
        feature, threshold, left, right, value, roots = self._packed
        roots = roots if trees is None else roots[trees]
        out = np.empty((roots.shape[0], X.shape[0]))
        _predict_packed(feature, threshold, left, right, value, roots, X, out)
        return out

    def predict(self, X) -> np.ndarray:
        return self.tree_predictions(X).mean(axis=0)

    def oob_mask(self) -> np.ndarray:
        """Boolean (n_trees, n_rows): row i is out of bag for tree j."""
        mask = np.ones((self.n_trees, self.n_rows), bool)
        for j, inbag in enumerate(self.inbag_sets):
            mask[j, inbag] = False
        return mask


def _grow_member(X, y, n, cfg: ForestConfig, j: int):
    rng = tree_rng(cfg.seed, j)
    if cfg.bootstrap:
        inbag = np.sort(rng.integers(0, n, size=n))
    else:
        inbag = np.sort(rng.choice(n, size=subsample_size(n, cfg.subsample_fraction), replace=False))
    K = X.shape[1]
    m_try = min(cfg.m_try, K)
    keys = rng.random((2 * inbag.shape[0], K))
    tree = RegressionTree(*_grow(X, y, inbag.astype(np.int64), cfg.min_parent, m_try, keys))
    inbag.setflags(write=False)
    return tree, inbag


def train_forest(ds: Dataset, cfg: ForestConfig = ForestConfig(), n_jobs: int = 1) -> Forest:
    """Grow ``cfg.n_trees`` trees, each on its own random subsample of ``ds``.

    ``n_jobs`` threads share the work; the result is the same for any value.
    """
    n = len(ds)
    if n == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    if n < 3:
        raise ValueError("need at least 3 rows")
    X, y = ds.X, ds.y
    work = lambda j: _grow_member(X, y, n, cfg, j)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            members = list(pool.map(work, range(cfg.n_trees)))
    else:
        members = [work(j) for j in range(cfg.n_trees)]
    trees, inbags = zip(*members)
    return Forest(tuple(trees), tuple(inbags), cfg, tuple(ds.feature_names), n)


def predict_forest(f: Forest, x) -> float | np.ndarray:
    """Unweighted mean of the tree predictions for a vector or matrix."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    if x.ndim == 1:
        return float(f.predict(x[None, :])[0])
    return f.predict(x)


@dataclass(frozen=True)
class OOBResult:
    prediction: np.ndarray
    n_oob_trees: np.ndarray

    @property
    def covered(self) -> np.ndarray:
        return self.n_oob_trees > 0

    @property
    def n_uncovered(self) -> int:
        return int((~self.covered).sum())

    def rmse(self, y) -> float:
        c = self.covered
        return float(np.sqrt(np.mean((self.prediction[c] - np.asarray(y)[c]) ** 2)))


def _check_rows(f: Forest, ds: Dataset):
    if len(ds) != f.n_rows:
        raise ValueError(f"forest was trained on {f.n_rows} rows, dataset has {len(ds)}")


def oob_predictions(f: Forest, ds: Dataset, n_trees: int | None = None) -> OOBResult:
    """Per-row mean over the trees (of the first ``n_trees``) that left it out.

    Rows left out by no tree get NaN and ``n_oob_trees == 0``.
    """
    _check_rows(f, ds)
    k = f.n_trees if n_trees is None else n_trees
    preds = f.tree_predictions(ds.X, slice(0, k))
    mask = f.oob_mask()[:k]
    counts = mask.sum(axis=0)
    sums = np.where(mask, preds, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        pred = np.where(counts > 0, sums / counts, np.nan)
    return OOBResult(pred, counts)


def mse_curve(f: Forest, ds: Dataset, checkpoints: Sequence[int]) -> list[tuple[int, float]]:
    """OOB MSE of the prefix ensembles made of the first ``c`` trees."""
    _check_rows(f, ds)
    cps = [int(c) for c in checkpoints]
    if not cps or any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] < 1 or cps[-1] > f.n_trees:
        raise ValueError("checkpoints must be increasing and within 1..n_trees")
    preds = f.tree_predictions(ds.X, slice(0, cps[-1]))
    mask = f.oob_mask()[: cps[-1]]
    sums = np.cumsum(np.where(mask, preds, 0.0), axis=0)
    counts = np.cumsum(mask, axis=0)
    out = []
    for c in cps:
        n = counts[c - 1]
        ok = n > 0
        err = sums[c - 1, ok] / n[ok] - ds.y[ok]
        out.append((c, float(np.mean(err**2))))
    return out


def in_sample_rmse(f: Forest, ds: Dataset) -> float:
    _check_rows(f, ds)
    return float(np.sqrt(np.mean((f.predict(ds.X) - ds.y) ** 2)))


# -- serialization ------------------------------------------------------------
#
# Text format, one record per line:
#
#   inflation_rf-forest <version>
#   config <key>=<value> ...
#   features <name>,<name>,...
#   n_rows <n>
#   tree <j> nodes <count>
#   inbag <i> <i> ...
#   S <feature> <threshold> <value> <count> <sse>      internal node
#   L <value> <count> <sse>                            leaf
#
# Node records follow each tree header in pre-order (node, left subtree,
# right subtree). Floats use Python's shortest round-trip repr.


def save_forest(f: Forest, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"inflation_rf-forest {FORMAT_VERSION}\n")
        fh.write("config " + " ".join(f"{k}={v!r}" for k, v in asdict(f.config).items()) + "\n")
        fh.write("features " + ",".join(f.feature_names) + "\n")
        fh.write(f"n_rows {f.n_rows}\n")
        for j, (t, inbag) in enumerate(zip(f.trees, f.inbag_sets)):
            fh.write(f"tree {j} nodes {t.n_nodes}\n")
            fh.write("inbag " + " ".join(map(str, inbag.tolist())) + "\n")
            for i in t.preorder():
                v, c, s = repr(float(t.value[i])), int(t.count[i]), repr(float(t.sse[i]))
                if t.feature[i] == LEAF:
                    fh.write(f"L {v} {c} {s}\n")
                else:
                    fh.write(f"S {t.feature[i]} {float(t.threshold[i])!r} {v} {c} {s}\n")


def _parse_config(tokens) -> ForestConfig:
    kw = {}
    for tok in tokens:
        k, v = tok.split("=", 1)
        kw[k] = {"True": True, "False": False}.get(v, None)
        if kw[k] is None:
            kw[k] = float(v) if k == "subsample_fraction" else int(v)
    return ForestConfig(**kw)


def _tree_from_records(records) -> RegressionTree:
    n = len(records)
    arr = {
        "feature": np.full(n, LEAF, np.int64),
        "threshold": np.zeros(n),
        "left": np.full(n, -1, np.int64),
        "right": np.full(n, -1, np.int64),
        "value": np.zeros(n),
        "count": np.zeros(n, np.int64),
        "sse": np.zeros(n),
    }
    pos = 0

    def build() -> int:
        nonlocal pos
        i = pos
        rec = records[pos]
        pos += 1
        if rec[0] == "S":
            arr["feature"][i] = int(rec[1])
            arr["threshold"][i] = float(rec[2])
            arr["value"][i], arr["count"][i], arr["sse"][i] = float(rec[3]), int(rec[4]), float(rec[5])
            arr["left"][i] = build()
            arr["right"][i] = build()
        else:
            arr["value"][i], arr["count"][i], arr["sse"][i] = float(rec[1]), int(rec[2]), float(rec[3])
        return i

    build()
    if pos != n:
        raise ValueError("malformed tree records")
    return RegressionTree(**arr)


def load_forest(path: str | Path) -> Forest:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    magic, version = lines[0].split()
    if magic != "inflation_rf-forest" or int(version) != FORMAT_VERSION:
        raise ValueError(f"{path}: not a version-{FORMAT_VERSION} forest file")
    cfg = _parse_config(lines[1].split()[1:])
    names = tuple(lines[2].split(" ", 1)[1].split(","))
    n_rows = int(lines[3].split()[1])
    trees, inbags = [], []
    i = 4
    while i < len(lines):
        head = lines[i].split()
        count = int(head[3])
        inbag = np.array([int(v) for v in lines[i + 1].split()[1:]], dtype=np.int64)
        inbag.setflags(write=False)
        recs = [ln.split() for ln in lines[i + 2 : i + 2 + count]]
        trees.append(_tree_from_records(recs))
        inbags.append(inbag)
        i += 2 + count
    return Forest(tuple(trees), tuple(inbags), cfg, names, n_rows)
