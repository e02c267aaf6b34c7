"""
A complete report run
=====================

The same pipeline the ``inflation-rf run`` command drives: a config, the
stages, and a directory of CSV and SVG outputs with a manifest.
"""

# %%
import tempfile
from pathlib import Path

from inflation_rf.experiments import emit_report, parse_config, run_experiment

cfg = parse_config(
    """
    p_grid = 4, 10, 30
    n_trees_grid = 20, 100
    n_reps = 10
    """
)
bundle = run_experiment(cfg)
out = Path(tempfile.mkdtemp())
emit_report(bundle, out)

# %%
print((out / "table1.csv").read_text())
print((out / "table2.csv").read_text())

# %%
manifest = (out / "manifest.txt").read_text()
print(manifest[manifest.index("[artifacts]"):])
