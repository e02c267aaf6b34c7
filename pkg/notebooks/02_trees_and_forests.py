"""
Regression trees and random forests
===================================

Grow one tree by exhaustive split search, then a forest of trees on 2/3
subsamples, and watch the out-of-bag error fall as trees are added.
"""

# %%
import numpy as np

from inflation_rf.cart import GrowConfig, best_split, grow
from inflation_rf.forest import ForestConfig, mse_curve, oob_predictions, train_forest
from inflation_rf.panel_data import assemble_dataset
from inflation_rf.synth import SynthSpec, synth_panel

# %% [markdown]
# A single split: the midpoint between 2 and 3 separates the two groups.

# %%
X = np.array([[1.0], [2.0], [3.0], [4.0]])
print(best_split(X, np.array([0.0, 0.0, 10.0, 10.0])))

# %%
ds = assemble_dataset(synth_panel(SynthSpec(seed=42)))
shallow = grow(ds.X, ds.y, GrowConfig(min_parent=1500, m_try=6))
print(shallow.dump(ds.feature_names))

# %% [markdown]
# A forest: each tree sees its own 2/3 subsample and two randomly drawn
# features at every split. Tree j depends only on (seed, j).

# %%
forest = train_forest(ds, ForestConfig(n_trees=200, min_parent=10, m_try=2, seed=42))
oob = oob_predictions(forest, ds)
print("OOB RMSE", round(oob.rmse(ds.y), 4), "rows never out of bag:", oob.n_uncovered)

# %%
for n_trees, mse in mse_curve(forest, ds, [1, 2, 5, 10, 20, 50, 100, 200]):
    print(f"{n_trees:4d} trees  OOB MSE {mse:.4f}")
