"""
From raw country series to a feature matrix
===========================================

Generate a synthetic panel, write it in the CSV layout the loader expects,
read it back and build the six predictors plus the inflation target.
"""

# %%
import tempfile
from pathlib import Path

import numpy as np

from inflation_rf.filters import HPConfig, hp_two_sided, output_gap
from inflation_rf.panel_data import assemble_dataset, load_panel, summary_stats, write_panel
from inflation_rf.synth import SynthSpec, synth_panel

panel = synth_panel(SynthSpec(seed=42))
print(len(panel), "countries,", panel.n_rows, "country-months")

# %% [markdown]
# The CSV round trip is exact, so a real panel in the same layout can be
# dropped in place of the synthetic one.

# %%
out = Path(tempfile.mkdtemp()) / "panel.csv"
write_panel(panel, out)
panel = load_panel(out)
print(out.read_text().splitlines()[0])

# %% [markdown]
# GDP arrives quarterly. The gap at month t comes from a HP trend fitted
# only on quarters up to t, and is held until the next GDP reading.

# %%
gdp = panel["C01"]["real_gdp_sa"]
quarterly = gdp[~np.isnan(gdp)]
one_sided = output_gap(quarterly, HPConfig(lamb=1600.0, min_window=12))
log_gdp = 100 * np.log(quarterly)
two_sided = log_gdp - hp_two_sided(log_gdp, 1600.0)
print("one-sided vs two-sided gap, last 4 quarters:")
print(np.round(one_sided[-4:], 2), np.round(two_sided[-4:], 2))

# %%
ds = assemble_dataset(panel, horizon=0, target_kind="headline", window=12)
print(len(ds), "rows;", "features:", ", ".join(ds.feature_names))
for name, mean, std in summary_stats(ds):
    print(f"{name:18s} {mean:7.2f} {std:7.2f}")

# %% [markdown]
# Longer horizons shift the target forward; the features stay dated t.

# %%
for h in (0, 6, 12):
    print("horizon", h, "->", len(assemble_dataset(panel, horizon=h)), "rows")
