"""Random-forest models of inflation on country panels.

Submodules: ``panel_data`` (ingestion and features), ``filters`` (HP
filter), ``cart`` and ``forest`` (trees and ensembles), ``interpret``
(importance and partial effects), ``econobench`` (AR(1)/OLS benchmarks),
``synth`` (synthetic panels) and ``experiments`` (report runs).
"""

from .cart import GrowConfig, RegressionTree, best_split, grow, predict_tree
from .econobench import BenchmarkReport, ar1_fit, ols_fit, oos_protocol
from .experiments import ExperimentConfig, emit_report, run_experiment
from .filters import HPConfig, hp_one_sided, hp_two_sided, output_gap
from .forest import Forest, ForestConfig, load_forest, mse_curve, oob_predictions, predict_forest, save_forest, train_forest
from .interpret import average_slope, impurity_importance, partial_effect
from .panel_data import Dataset, RawPanel, assemble_dataset, load_panel
from .synth import SynthSpec, synth_panel

__version__ = "0.1.0"
