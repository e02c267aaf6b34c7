import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from inflation_rf.cart import LEAF, GrowConfig, best_split, grow, predict_tree

from oracles import brute_predict, brute_tree


def random_instance(rng, n_max=50, k_max=4):
    n = int(rng.integers(2, n_max + 1))
    K = int(rng.integers(1, k_max + 1))
    if rng.random() < 0.5:
        X = rng.integers(0, 5, size=(n, K)).astype(float)
    else:
        X = rng.normal(size=(n, K))
    y = rng.integers(0, 4, size=n).astype(float) if rng.random() < 0.5 else rng.normal(size=n)
    return X, y, int(rng.integers(2, 11))


def oracle_agrees(X, y, min_parent, rng):
    tree = grow(X, y, GrowConfig(min_parent=min_parent, m_try=X.shape[1]))
    ref = brute_tree(X, y, range(len(y)), min_parent)
    queries = np.vstack([X, rng.normal(size=(20, X.shape[1])) * 2])
    got = tree.predict(queries)
    want = np.array([brute_predict(ref, q) for q in queries])
    return np.array_equal(got, want)


class TestBestSplit:
    def test_clean_step(self):
        s = best_split(np.array([[1.0], [2.0], [3.0], [4.0]]), np.array([0.0, 0.0, 10.0, 10.0]))
        assert (s.feature, s.threshold, s.weighted_mse) == (0, 2.5, 0.0)

    def test_ramp(self):
        # candidates 1.5, 2.5, 3.5 give weighted MSE 0.5, 0.25, 0.5
        s = best_split(np.array([[1.0], [2.0], [3.0], [4.0]]), np.array([1.0, 2.0, 3.0, 4.0]))
        assert (s.threshold, s.weighted_mse) == (2.5, 0.25)

    def test_constant_target(self):
        assert best_split(np.array([[1.0], [2.0], [3.0]]), np.full(3, 7.0)) is None

    def test_constant_feature(self):
        assert best_split(np.full((4, 1), 2.0), np.array([0.0, 1.0, 2.0, 3.0])) is None

    def test_tie_goes_to_lowest_feature(self):
        X = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]])
        s = best_split(X, np.array([0.0, 0.0, 5.0, 5.0]))
        assert s.feature == 0

    def test_tie_goes_to_lowest_threshold(self):
        # splits at 1.5 and 3.5 are equally good
        s = best_split(np.array([[1.0], [2.0], [3.0], [4.0]]), np.array([0.0, 1.0, 1.0, 2.0]))
        assert s.threshold == 1.5

    def test_feature_subset(self):
        X = np.array([[1.0, 4.0], [2.0, 3.0], [3.0, 2.0], [4.0, 1.0]])
        s = best_split(X, np.array([0.0, 0.0, 9.0, 9.0]), feature_subset=[1])
        assert (s.feature, s.threshold) == (1, 2.5)


class TestGrow:
    X4 = np.array([[1.0], [2.0], [3.0], [4.0]])
    y4 = np.array([0.0, 0.0, 10.0, 10.0])

    def test_depth_one(self):
        tree = grow(self.X4, self.y4, GrowConfig(min_parent=2, m_try=1))
        assert tree.depth() == 1
        assert sorted(tree.value[tree.is_leaf]) == [0.0, 10.0]

    def test_boundary_goes_left(self):
        tree = grow(self.X4, self.y4, GrowConfig(min_parent=2, m_try=1))
        assert predict_tree(tree, [2.5]) == 0.0
        assert predict_tree(tree, [2.5000001]) == 10.0

    def test_min_parent_above_n(self):
        tree = grow(self.X4, self.y4, GrowConfig(min_parent=5, m_try=1))
        assert tree.n_nodes == 1 and predict_tree(tree, [0.0]) == 5.0

    def test_equal_targets(self):
        tree = grow(self.X4, np.full(4, 3.0), GrowConfig(min_parent=2, m_try=1))
        assert tree.n_nodes == 1

    def test_single_leaf_prediction(self):
        tree = grow(self.X4, np.full(4, 5.0), GrowConfig(min_parent=2))
        assert predict_tree(tree, [123.0]) == 5.0

    def test_rows_argument(self):
        tree = grow(self.X4, self.y4, GrowConfig(min_parent=2, m_try=1), rows=[2, 3])
        assert tree.n_nodes == 1 and tree.value[0] == 10.0

    def test_leaf_means_and_sse(self, rng):
        X, y = rng.normal(size=(200, 3)), rng.normal(size=200)
        tree = grow(X, y, GrowConfig(min_parent=10, m_try=3))
        leaf = tree.apply(X)
        total = 0.0
        for node in np.unique(leaf):
            vals = y[leaf == node]
            assert tree.value[node] == pytest.approx(vals.mean(), rel=1e-12)
            total += np.sum((vals - vals.mean()) ** 2)
        assert np.sum((y - tree.predict(X)) ** 2) == pytest.approx(total, rel=1e-10)

    def test_children_never_worse(self, rng):
        X, y = rng.normal(size=(300, 4)), rng.normal(size=300)
        tree = grow(X, y, GrowConfig(min_parent=4, m_try=2, rng=rng))
        inner = np.flatnonzero(tree.feature != LEAF)
        assert np.all(tree.sse[tree.left[inner]] + tree.sse[tree.right[inner]] <= tree.sse[inner])

    def test_pure_leaves_with_distinct_features(self, rng):
        X, y = rng.normal(size=(80, 6)), rng.normal(size=80)
        tree = grow(X, y, GrowConfig(min_parent=2, m_try=6))
        assert np.sqrt(np.mean((tree.predict(X) - y) ** 2)) == 0.0

    def test_seeded_feature_draws(self):
        X, y = np.random.default_rng(0).normal(size=(100, 6)), np.random.default_rng(1).normal(size=100)
        a = grow(X, y, GrowConfig(m_try=2, rng=np.random.default_rng(5)))
        b = grow(X, y, GrowConfig(m_try=2, rng=np.random.default_rng(5)))
        np.testing.assert_array_equal(a.threshold, b.threshold)
        np.testing.assert_array_equal(a.feature, b.feature)

    def test_validation(self):
        with pytest.raises(ValueError):
            GrowConfig(min_parent=1)
        with pytest.raises(ValueError):
            grow(np.zeros((3, 2)), np.zeros(4))
        tree = grow(self.X4, self.y4, GrowConfig(min_parent=2, m_try=1))
        with pytest.raises(ValueError):
            predict_tree(tree, [np.nan])

    def test_dump_mentions_names(self):
        tree = grow(self.X4, self.y4, GrowConfig(min_parent=2, m_try=1))
        assert "gdp <= 2.5" in tree.dump(["gdp"])


def test_oracle_equivalence_fixed_instances():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        X, y, p = random_instance(rng)
        assert oracle_agrees(X, y, p, rng)


@given(st.integers(0, 2**32 - 1))
def test_oracle_equivalence_property(seed):
    rng = np.random.default_rng(seed)
    X, y, p = random_instance(rng, n_max=30)
    assert oracle_agrees(X, y, p, rng)


@given(st.integers(0, 2**32 - 1), st.sampled_from(["exp", "cube", "affine"]))
def test_monotone_transform_keeps_leaves(seed, kind):
    rng = np.random.default_rng(seed)
    X, y = rng.normal(size=(60, 3)), rng.normal(size=60)
    f = {"exp": np.exp, "cube": lambda v: v**3 + v, "affine": lambda v: 3 * v + 1}[kind]
    Z = X.copy()
    Z[:, 1] = f(X[:, 1])
    cfg = GrowConfig(min_parent=4, m_try=3)
    a, b = grow(X, y, cfg), grow(Z, y, cfg)
    np.testing.assert_array_equal(a.apply(X), b.apply(Z))
    np.testing.assert_array_equal(a.feature, b.feature)
