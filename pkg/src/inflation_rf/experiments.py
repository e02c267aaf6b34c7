"""Config-driven experiment runs and report bundles.

A run walks through named stages and collects its outputs as a mapping
from file name to file text. ``emit_report`` writes that mapping plus a
``manifest.txt``. Stage names:

``ingest``
    panel loading or generation, dataset assembly, summary statistics
``table1``
    forest grid over (p, n_trees), AR(1)/OLS benchmarks, OOB MSE curve
``importance`` / ``partial``
    importance and partial effects of all six features, benchmark forest
``horizons``
    6- and 12-month-ahead targets, ratio table, expectation x PPI surface
``decades``
    samples before/after ``decade_split`` refitted separately
``shallow``
    benchmark forest with the larger ``shallow_p`` minimum parent size
``core``
    core CPI target and lagged core inflation, headline expectations
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from . import report
from .econobench import (
    TABLE1_COLUMNS,
    BenchmarkReport,
    ar1_model,
    build_report,
    fit_ar1,
    fit_ols,
    ols_model,
    rmse,
)
from .econobench import oos_protocol
from .filters import HPConfig
from .forest import Forest, ForestConfig, in_sample_rmse, mse_curve, oob_predictions, train_forest
from .interpret import average_slope, impurity_importance, partial_effect, partial_effect_surface
from .panel_data import (
    FEATURE_NAMES,
    HORIZONS,
    TARGET_KINDS,
    WINDOWS,
    Dataset,
    RawPanel,
    assemble_dataset,
    load_panel,
    summary_stats,
)
from .synth import SynthSpec, synth_panel

STAGES = ("ingest", "table1", "importance", "partial", "horizons", "decades", "shallow", "core")
DEFAULT_P_GRID = (4, 6, 8, 10, 12, 14, 16, 18, 20, 30, 60, 120)
CURVE_CHECKPOINTS = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000)

# which emitted files stand for which table or figure
ARTIFACTS = {
    "Table 1": ("table1.csv",),
    "Table 2": ("table2.csv",),
    "Table A1": ("table_a1.csv",),
    "Annex summary statistics": ("summary_stats.csv",),
    "Figure 1": ("mse_curve.csv",),
    "Figure 2": ("importance_full.csv",),
    "Figure 3": ("partial_expectation_12m_full.csv",),
    "Figure 4": ("partial_output_gap_full.csv",),
    "Figure 5": ("importance_early.csv", "importance_late.csv"),
    "Figure 6": ("partial_expectation_12m_early.csv", "partial_expectation_12m_late.csv"),
    "Figure 7": ("importance_h12.csv",),
    "Figure 8": ("surface_h12.csv",),
    "Figure 9": ("importance_shallow.csv",),
    "Figure 10": ("partial_expectation_12m_shallow.csv",),
    "Figure 11": ("importance_core.csv",),
    "Figure 12": ("partial_expectation_12m_core.csv",),
}


class ExperimentError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run depends on.

    ``input`` names a panel CSV; without it the panel comes from ``synth``.
    ``threads`` only changes speed, never results, and is left out of the
    manifest.
    """

    input: str | None = None
    synth: SynthSpec = field(default_factory=SynthSpec)
    target_kind: str = "headline"
    horizon: int = 0
    window: int = 12
    p_grid: tuple[int, ...] = DEFAULT_P_GRID
    n_trees_grid: tuple[int, ...] = (100, 1000)
    benchmark_p: int = 10
    shallow_p: int = 30
    m_try: int = 2
    decade_split: str = "2011-01"
    n_reps: int = 100
    n_grid: int = 50
    hp_lambda: float = 1600.0
    min_window: int = 12
    seed: int = 42
    out: str = "out"
    threads: int = 1

    def __post_init__(self):
        if self.target_kind not in TARGET_KINDS:
            raise ValueError(f"target_kind must be one of {TARGET_KINDS}")
        if self.horizon not in HORIZONS:
            raise ValueError(f"horizon must be one of {HORIZONS}")
        if self.window not in WINDOWS:
            raise ValueError(f"window must be one of {WINDOWS}")
        if not self.p_grid or not self.n_trees_grid:
            raise ValueError("p_grid and n_trees_grid must be nonempty")
        np.datetime64(self.decade_split, "M")

    @property
    def benchmark_trees(self) -> int:
        return max(self.n_trees_grid)

    @property
    def hp(self) -> HPConfig:
        return HPConfig(self.hp_lambda, self.min_window)

    def forest_config(self, p: int | None = None, n_trees: int | None = None) -> ForestConfig:
        return ForestConfig(
            n_trees=self.benchmark_trees if n_trees is None else n_trees,
            min_parent=self.benchmark_p if p is None else p,
            m_try=self.m_try,
            seed=self.seed,
        )

    def echo(self) -> list[str]:
        """``key = value`` lines for every result-relevant setting."""
        lines = []
        for f in fields(self):
            if f.name in ("threads", "out", "synth"):
                continue
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        if self.input is None:
            for f in fields(self.synth):
                lines.append(f"synth_{f.name} = {_format_value(getattr(self.synth, f.name))}")
        return lines


def _format_value(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def _coerce(value: str, like):
    if isinstance(like, bool):
        return value.strip().lower() in ("1", "true", "yes")
    if isinstance(like, tuple):
        kind = type(like[0]) if like else int
        return tuple(kind(v) for v in value.split(",") if v.strip())
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value.strip()


def parse_config(text: str, base: ExperimentConfig = ExperimentConfig()) -> ExperimentConfig:
    """Apply ``key = value`` lines to ``base``; ``synth_<field>`` keys go to the synth spec.

    Blank lines and ``#`` comments are ignored.
    """
    top = {f.name: getattr(base, f.name) for f in fields(base)}
    synth = {f.name: getattr(base.synth, f.name) for f in fields(base.synth)}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("synth_") and key[6:] in synth:
            synth[key[6:]] = _coerce(value, synth[key[6:]])
        elif key == "input":
            top["input"] = value or None
        elif key in top and key != "synth":
            top[key] = _coerce(value, top[key]) if top[key] is not None else value
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    top["synth"] = SynthSpec(**synth)
    return ExperimentConfig(**top)


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    cfg = parse_config(Path(path).read_text(encoding="utf-8"))
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


# -- the run ------------------------------------------------------------------


@dataclass
class ReportBundle:
    files: dict[str, str] = field(default_factory=dict)
    stages: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    config: ExperimentConfig | None = None


class _Run:
    def __init__(self, cfg: ExperimentConfig, bundle: ReportBundle, out_dir: Path | None):
        self.cfg = cfg
        self.bundle = bundle
        self.out_dir = out_dir
        self._raw: RawPanel | None = None
        self._datasets: dict[tuple, Dataset] = {}
        self._bench: dict[str, Forest] = {}

    # data
    def raw(self) -> RawPanel:
        if self._raw is None:
            self._raw = load_panel(self.cfg.input) if self.cfg.input else synth_panel(self.cfg.synth)
        return self._raw

    def dataset(self, horizon: int | None = None, target_kind: str | None = None) -> Dataset:
        key = (self.cfg.horizon if horizon is None else horizon, target_kind or self.cfg.target_kind)
        if key not in self._datasets:
            self._datasets[key] = assemble_dataset(self.raw(), None, key[0], key[1], self.cfg.window, self.cfg.hp)
        return self._datasets[key]

    def forest(self, ds: Dataset, cfg: ForestConfig) -> Forest:
        return train_forest(ds, cfg, n_jobs=self.cfg.threads)

    def bench_forest(self) -> Forest:
        if "full" not in self._bench:
            self._bench["full"] = self.forest(self.dataset(), self.cfg.forest_config())
        return self._bench["full"]

    def put(self, name: str, text: str):
        self.bundle.files[name] = text

    # outputs
    def importance(self, f: Forest, ds: Dataset, scope: str):
        imp = impurity_importance(f, ds)
        if not imp.has_splits:
            self.bundle.notes.append(f"importance_{scope}: forest has no splits, scores are all zero")
        self.put(f"importance_{scope}.csv", report.importance_csv(imp))
        self.put(f"importance_{scope}.svg", report.bar_svg(imp.feature_names, imp.normalized, f"Importance ({scope})", "share"))
        return imp

    def partial(self, f: Forest, ds: Dataset, k: int, scope: str):
        curve = partial_effect(f, ds, k, self.cfg.n_grid)
        name = ds.feature_names[k]
        self.put(f"partial_{name}_{scope}.csv", report.curve_csv(curve))
        self.put(
            f"partial_{name}_{scope}.svg",
            report.line_svg(curve.grid, curve.predictions, f"Partial effect of {name} ({scope})", name, "predicted inflation"),
        )
        self._slopes.append((scope, name, average_slope(curve)))
        return curve

    _slopes: list

    # stages
    def ingest(self):
        ds = self.dataset()
        self.put("summary_stats.csv", report.csv_text(("variable", "mean", "std"), summary_stats(ds)))
        dropped = ",".join(f"{c}:{n}" for c, n in sorted(ds.dropped.items()))
        self.bundle.notes.append(f"rows = {len(ds)}")
        self.bundle.notes.append(f"dropped = {dropped}")

    def benchmarks(self, ds: Dataset, seed: int):
        """In-sample fits and repeated-split RMSEs of AR(1) and OLS."""
        ar1, ols = fit_ar1(ds), fit_ols(ds)
        lag = np.column_stack([np.ones(len(ds)), ds.X[:, 0]])
        full = np.column_stack([np.ones(len(ds)), ds.X])
        out = {}
        for name, fit, X, model in (("ar1", ar1, lag, ar1_model), ("ols", ols, full, ols_model)):
            mean, std = oos_protocol(model, ds, self.cfg.n_reps, seed)
            out[name] = {"in": rmse(fit.predict(X), ds.y), "out": mean, "out_std": std}
        return ar1, ols, out

    def table1(self):
        cfg, ds = self.cfg, self.dataset()
        ar1, ols, bench = self.benchmarks(ds, cfg.seed)
        self.put("table_a1.csv", _table_a1(ar1, ols, ds))
        self.put(
            "benchmarks.csv",
            report.csv_text(
                ("model", "rmse_in", "rmse_out_mean", "rmse_out_std"),
                [(m, v["in"], v["out"], v["out_std"]) for m, v in bench.items()],
            ),
        )
        ml_in, ml_oob = {}, {}
        for n_trees in sorted(cfg.n_trees_grid):
            for p in cfg.p_grid:
                f = self.forest(ds, cfg.forest_config(p, n_trees))
                ml_in[(p, n_trees)] = in_sample_rmse(f, ds)
                ml_oob[(p, n_trees)] = oob_predictions(f, ds).rmse(ds.y)
                if (p, n_trees) == (cfg.benchmark_p, cfg.benchmark_trees):
                    self._bench["full"] = f
        rep = build_report(ml_in, ml_oob, bench["ar1"], bench["ols"])
        self.put("table1.csv", _rows_csv(rep.rows))
        big = [r for r in rep.rows if r.n_trees == cfg.benchmark_trees]
        self.put(
            "table1.svg",
            report.line_svg([r.p for r in big], [r.ratio_ols_out for r in big], "OOB RMSE relative to OLS", "min parent size p", "ratio"),
        )
        f = self.bench_forest()
        cps = [c for c in CURVE_CHECKPOINTS if c < f.n_trees] + [f.n_trees]
        curve = mse_curve(f, ds, cps)
        self.put("mse_curve.csv", report.csv_text(("n_trees", "oob_mse"), curve))
        self.put("mse_curve.svg", report.line_svg(*zip(*curve), "OOB MSE by number of trees", "trees", "MSE"))
        self.report = rep

    def importance_stage(self):
        self.importance(self.bench_forest(), self.dataset(), "full")

    def partial_stage(self):
        f, ds = self.bench_forest(), self.dataset()
        for k in range(len(ds.feature_names)):
            self.partial(f, ds, k, "full")

    def horizons(self):
        cfg = self.cfg
        rows = []
        for h in (6, 12):
            ds = self.dataset(horizon=h)
            f = self.forest(ds, cfg.forest_config())
            _, _, bench = self.benchmarks(ds, cfg.seed)
            rep = build_report(
                {(cfg.benchmark_p, f.n_trees): in_sample_rmse(f, ds)},
                {(cfg.benchmark_p, f.n_trees): oob_predictions(f, ds).rmse(ds.y)},
                bench["ar1"],
                bench["ols"],
            )
            rows.append((h, rep.rows[0]))
            self.importance(f, ds, f"h{h}")
            self.partial(f, ds, 1, f"h{h}")
            if h == 12:
                g1, g2, Z = partial_effect_surface(f, ds, 1, 5)
                self.put("surface_h12.csv", report.surface_csv(ds.feature_names[1], ds.feature_names[5], g1, g2, Z))
        self.put(
            "table2.csv",
            report.csv_text(("horizon",) + TABLE1_COLUMNS, [(h, *_row_values(r)) for h, r in rows]),
        )

    def decades(self):
        ds, split = self.dataset(), self.cfg.decade_split
        for scope, part in (("early", ds.date_range(stop=split)), ("late", ds.date_range(start=split))):
            if len(part) < 3:
                raise ValueError(f"{scope} subsample around {split} has {len(part)} rows")
            f = self.forest(part, self.cfg.forest_config())
            self.importance(f, part, scope)
            self.partial(f, part, 1, scope)

    def shallow(self):
        ds = self.dataset()
        f = self.forest(ds, self.cfg.forest_config(p=self.cfg.shallow_p))
        self.importance(f, ds, "shallow")
        self.partial(f, ds, 1, "shallow")
        self.partial(f, ds, 2, "shallow")

    def core(self):
        ds = self.dataset(target_kind="core")
        f = self.forest(ds, self.cfg.forest_config())
        self.importance(f, ds, "core")
        self.partial(f, ds, 1, "core")


def _row_values(r):
    return [getattr(r, c) for c in TABLE1_COLUMNS]


def _rows_csv(rows) -> str:
    return report.csv_text(TABLE1_COLUMNS, (_row_values(r) for r in rows))


def _table_a1(ar1, ols, ds: Dataset) -> str:
    names = ("constant",) + tuple(ds.feature_names)
    rows = []
    for j, name in enumerate(names):
        a = (ar1.coef[j], ar1.tstat[j]) if j < 2 else ("", "")
        rows.append((name, *a, ols.coef[j], ols.tstat[j]))
    rows.append(("observations", ar1.n, "", ols.n, ""))
    rows.append(("r2", ar1.r2, "", ols.r2, ""))
    rows.append(("f_statistic", ar1.fstat, "", ols.fstat, ""))
    return report.csv_text(("term", "ar1_coef", "ar1_t", "ols_coef", "ols_t"), rows)


_STAGE_METHODS = {
    "ingest": "ingest",
    "table1": "table1",
    "importance": "importance_stage",
    "partial": "partial_stage",
    "horizons": "horizons",
    "decades": "decades",
    "shallow": "shallow",
    "core": "core",
}


def run_experiment(cfg: ExperimentConfig, stages: Iterable[str] = STAGES, out_dir: str | Path | None = None) -> ReportBundle:
    """Run ``stages`` in order and return the report bundle.

    With ``out_dir`` the ingestion outputs are written as soon as they
    exist; if a later stage fails a ``PARTIAL`` marker naming the stage is
    left next to them and :class:`ExperimentError` is raised.
    """
    stages = list(stages)
    unknown = [s for s in stages if s not in STAGES]
    if unknown:
        raise ValueError(f"unknown stage(s): {', '.join(unknown)}")
    if "ingest" not in stages:
        stages.insert(0, "ingest")
    bundle = ReportBundle(config=cfg)
    run = _Run(cfg, bundle, Path(out_dir) if out_dir is not None else None)
    run._slopes = []
    for stage in STAGES:
        if stage not in stages:
            continue
        try:
            getattr(run, _STAGE_METHODS[stage])()
        except Exception as exc:
            if run.out_dir is not None:
                _write_partial(bundle, run.out_dir, stage, exc)
            raise ExperimentError(stage, f"{type(exc).__name__}: {exc}") from exc
        bundle.stages.append(stage)
        if stage == "ingest" and run.out_dir is not None:
            _write_files(bundle.files, run.out_dir)
    if run._slopes:
        bundle.files["slopes.csv"] = report.csv_text(("scope", "feature", "average_slope"), run._slopes)
    return bundle


def _write_files(files: Mapping[str, str], out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in sorted(files):
        path = out_dir / name
        try:
            path.write_text(files[name], encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc


def _write_partial(bundle: ReportBundle, out_dir: Path, stage: str, exc: Exception):
    _write_files(bundle.files, out_dir)
    (out_dir / "PARTIAL").write_text(f"failed stage = {stage}\nerror = {type(exc).__name__}: {exc}\n", encoding="utf-8")


def manifest_text(bundle: ReportBundle) -> str:
    lines = ["inflation_rf report", f"stages = {','.join(bundle.stages)}"]
    if bundle.config is not None:
        lines += ["", "[config]"] + bundle.config.echo()
    if bundle.notes:
        lines += ["", "[notes]"] + bundle.notes
    lines += ["", "[files]"] + sorted(bundle.files)
    covered = [(a, [f for f in names if f in bundle.files]) for a, names in ARTIFACTS.items()]
    covered = [(a, fs) for a, fs in covered if fs]
    if covered:
        lines += ["", "[artifacts]"] + [f"{a} = {','.join(fs)}" for a, fs in covered]
    return "\n".join(lines) + "\n"


def emit_report(bundle: ReportBundle, out_dir: str | Path) -> list[Path]:
    """Write every bundle file plus ``manifest.txt``; returns the paths written."""
    out_dir = Path(out_dir)
    files = dict(bundle.files)
    files["manifest.txt"] = manifest_text(bundle)
    _write_files(files, out_dir)
    marker = out_dir / "PARTIAL"
    if marker.exists():
        marker.unlink()
    return [out_dir / n for n in sorted(files)]


def read_table1(path: str | Path) -> BenchmarkReport:
    return BenchmarkReport.read_csv(path)
