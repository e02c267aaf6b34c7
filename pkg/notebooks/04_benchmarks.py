"""
Benchmarks: AR(1) and pooled OLS
================================

Fit the linear benchmarks, score them on repeated random 2/3-1/3 splits
and express the forest's error relative to theirs.
"""

# %%
from inflation_rf.econobench import add_constant, ar1_model, build_report, fit_ar1, fit_ols, ols_model, oos_protocol, rmse
from inflation_rf.forest import ForestConfig, in_sample_rmse, oob_predictions, train_forest
from inflation_rf.panel_data import assemble_dataset
from inflation_rf.synth import SynthSpec, synth_panel

ds = assemble_dataset(synth_panel(SynthSpec(seed=42)))

# %%
ols = fit_ols(ds)
for name, b, t in zip(ols.names, ols.coef, ols.tstat):
    print(f"{name:18s} {b:8.3f}  t={t:7.2f}")
print("R2", round(ols.r2, 3), "F", round(ols.fstat, 1), "n", ols.n)
ar1 = fit_ar1(ds)
print("AR(1) lag coefficient", round(ar1.coef[1], 3))
ar1_in = rmse(ar1.predict(add_constant(ds.X[:, 0])), ds.y)
ols_in = rmse(ols.predict(add_constant(ds.X)), ds.y)

# %%
ar1_out = oos_protocol(ar1_model, ds, n_reps=30, seed=42)
ols_out = oos_protocol(ols_model, ds, n_reps=30, seed=42)
print("out-of-sample RMSE  AR(1) %.3f +/- %.3f   OLS %.3f +/- %.3f" % (*ar1_out, *ols_out))

# %%
forest = train_forest(ds, ForestConfig(n_trees=200, seed=42))
cell = (10, 200)
report = build_report(
    {cell: in_sample_rmse(forest, ds)},
    {cell: oob_predictions(forest, ds).rmse(ds.y)},
    {"in": ar1_in, "out": ar1_out[0]},
    {"in": ols_in, "out": ols_out[0]},
)
print(report.rows[0])
