"""Synthetic country panels with a known nonlinear inflation process.

The generated panel has the raw-CSV layout, so it exercises the whole
pipeline. Headline inflation at month ``t`` is built from the features the
pipeline will later compute at ``t``::

    pi_t = c + b'x_t
             + gap_kink * max(0, -gap_t - 1)
             + exp_kink * max(0, exp_t - 2)
             + interaction * (exp_t - 2) * (ppi_t - ppi_mean) / 10
             + noise

where ``x_t`` holds lagged inflation, expectations, the output gap, oil and
NEER changes and global PPI, in that order. Core inflation follows the
same process with its own lag, no oil term and independent noise.

Driving processes:

* Brent: log random walk with drift, shared by all countries.
* PPI: a common AR(1) factor plus AR(1) idiosyncratic parts for the US,
  the euro area and China.
* Expectations: country-specific AR(1) around a level drawn in
  ``expectation_range``; the two survey forecasts scatter around it.
* NEER: log random walk per country.
* GDP: quarterly log trend plus an AR(1) cycle, reported in quarter-end
  months only.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .filters import HPConfig
from .panel_data import (
    FEATURE_NAMES,
    PPI_COLUMNS,
    Dataset,
    RawPanel,
    _change_series,
    expectation_12m,
    gap_from_gdp,
    month_of_year,
)

PPI_MEAN = 1.5


@dataclass(frozen=True)
class SynthSpec:
    """Synthetic panel size, process coefficients and seed.

    ``months`` counts the analysis span starting at ``start``; the panel
    also carries ``presample_months`` of history before it so that the
    lagged and filtered features are available early on.
    """

    n_countries: int = 20
    months: int = 258
    presample_months: int = 24
    start: str = "2000-01"
    intercept: float = 0.0
    # lagged_inflation, expectation_12m, output_gap, oil_change, neer_change, global_ppi
    beta: tuple[float, ...] = (0.25, 0.9, 0.15, 0.015, -0.04, 0.12)
    gap_kink: float = -1.5
    exp_kink: float = -0.7
    interaction: float = 0.15
    noise_std: float = 0.5
    core_noise_std: float = 0.4
    expectation_range: tuple[float, float] = (1.2, 2.6)
    gdp_cycle_std: float = 1.5
    seed: int = 42

    def __post_init__(self):
        if self.n_countries < 1 or self.months < 1 or self.presample_months < 0:
            raise ValueError("n_countries and months must be >= 1, presample_months >= 0")
        if len(self.beta) != len(FEATURE_NAMES):
            raise ValueError(f"beta needs {len(FEATURE_NAMES)} coefficients")
        if self.noise_std < 0 or self.core_noise_std < 0:
            raise ValueError("noise std must be >= 0")


def _ar1(rng, n, mean, rho, sd, x0=None):
    x = np.empty(n)
    x[0] = mean if x0 is None else x0
    z = rng.standard_normal(n)
    for t in range(1, n):
        x[t] = mean + rho * (x[t - 1] - mean) + sd * z[t]
    return x


def _inflation_path(spec: SynthSpec, feats, noise, oil: bool, warm):
    T = feats.shape[0]
    b = np.array(spec.beta, float)
    if not oil:
        b[3] = 0.0
    pi = warm.copy()
    ok = np.all(np.isfinite(feats[:, 1:]), axis=1)
    for t in range(3, T):
        if not ok[t]:
            continue
        e, g, p = feats[t, 1], feats[t, 2], feats[t, 5]
        x = np.array([pi[t - 3], *feats[t, 1:]])
        pi[t] = (
            spec.intercept
            + b @ x
            + spec.gap_kink * max(0.0, -g - 1.0)
            + spec.exp_kink * max(0.0, e - 2.0)
            + spec.interaction * (e - 2.0) * (p - PPI_MEAN) / 10.0
            + noise[t]
        )
    return pi


def _price_index(pi):
    # I_t = I_{t-3} (1 + pi_t/100)^(1/4) so the measured quarterly rate is pi_t
    idx = np.full(len(pi), 100.0)
    for t in range(3, len(pi)):
        idx[t] = idx[t - 3] * (1.0 + pi[t] / 100.0) ** 0.25
    return idx


def synth_panel(spec: SynthSpec = SynthSpec()) -> RawPanel:
    """Generate a validated raw panel; identical output for identical specs."""
    root = np.random.SeedSequence(spec.seed)
    g_rng, *c_rngs = [np.random.default_rng(s) for s in root.spawn(spec.n_countries + 1)]
    T = spec.presample_months + spec.months
    first = np.datetime64(spec.start, "M") - spec.presample_months
    dates = first + np.arange(T)
    month = month_of_year(dates)
    quarter_end = month % 3 == 0

    brent = 25.0 * np.exp(np.cumsum(0.004 + 0.09 * g_rng.standard_normal(T)))
    common = _ar1(g_rng, T, PPI_MEAN, 0.96, 0.8)
    ppi = {c: common + _ar1(g_rng, T, 0.0, 0.9, 0.5) for c in PPI_COLUMNS}
    oil = _change_series(brent, 12)
    ppi_mean = np.mean([ppi[c] for c in PPI_COLUMNS], axis=0)

    data = {}
    width = len(str(spec.n_countries))
    for i, rng in enumerate(c_rngs):
        lo, hi = spec.expectation_range
        level = _ar1(rng, T, rng.uniform(lo, hi), 0.97, 0.18)
        cy = level + 0.1 * rng.standard_normal(T)
        ny = level + 0.1 * rng.standard_normal(T)
        neer = 100.0 * np.exp(np.cumsum(0.012 * rng.standard_normal(T)))

        n_q = T // 3 + 1
        cycle = _ar1(rng, n_q, 0.0, 0.85, spec.gdp_cycle_std)
        log_gdp = np.log(1000.0) + np.arange(n_q) * 0.005 + cycle / 100.0
        gdp = np.full(T, np.nan)
        qe = np.flatnonzero(quarter_end)
        gdp[qe] = np.exp(log_gdp[: len(qe)])

        feats = np.column_stack(
            [
                np.full(T, np.nan),
                expectation_12m(cy, ny, month),
                gap_from_gdp(gdp, HPConfig()),
                oil,
                _change_series(neer, 12),
                ppi_mean,
            ]
        )
        warm = level + 0.5 * rng.standard_normal(T)
        head = _inflation_path(spec, feats, spec.noise_std * rng.standard_normal(T), True, warm)
        core = _inflation_path(spec, feats, spec.core_noise_std * rng.standard_normal(T), False, warm)

        data[f"C{i + 1:0{width}d}"] = {
            "date": dates,
            "cpi_sa": _price_index(head),
            "core_cpi_sa": _price_index(core),
            "real_gdp_sa": gdp,
            "consensus_cy": cy,
            "consensus_ny": ny,
            "brent": brent,
            "neer": neer,
            **ppi,
        }
    return RawPanel.from_arrays(data)


# -- additive process with independent features -------------------------------

# means and standard deviations broadly in line with a G20-style panel
_ADDITIVE_MOMENTS = (
    (1.9, 3.2),  # lagged_inflation
    (1.8, 0.9),  # expectation_12m
    (-0.3, 2.3),  # output_gap
    (12.0, 39.0),  # oil_change
    (0.5, 4.1),  # neer_change
    (1.6, 3.6),  # global_ppi
)


@dataclass(frozen=True)
class AdditiveDGP:
    """``y = g(expectation) + sum_k slope_k * x_k + noise`` with iid features.

    Features are independent uniforms with the means and standard deviations
    in ``_ADDITIVE_MOMENTS``. The expectations component carries most of the
    target variance, so its shape is what the forest has to recover.
    ``g(e) = exp_slope * e + exp_kink * max(0, e - 2)``.
    """

    exp_slope: float = 3.0
    exp_kink: float = -2.0
    slopes: tuple[float, ...] = (0.1, 0.0, 0.1, 0.01, -0.03, 0.08)
    noise_std: float = 0.3

    def g(self, e):
        e = np.asarray(e, float)
        return self.exp_slope * e + self.exp_kink * np.maximum(0.0, e - 2.0)

    def sample(self, n: int, seed: int) -> Dataset:
        rng = np.random.default_rng(seed)
        # uniform marginals: no sparse tails inside the evaluated range
        half = np.sqrt(3.0)
        X = np.column_stack([m + s * rng.uniform(-half, half, n) for m, s in _ADDITIVE_MOMENTS])
        y = self.g(X[:, 1]) + X @ np.array(self.slopes) + self.noise_std * rng.standard_normal(n)
        dates = np.datetime64("2000-01", "M") + np.arange(n) % 258
        return Dataset(X, y, np.full(n, "SYN", dtype=object), dates, FEATURE_NAMES)


def linear_spec(spec: SynthSpec = SynthSpec(), noise_std: float = 0.0) -> SynthSpec:
    """Copy of ``spec`` with every nonlinear term switched off."""
    return replace(spec, gap_kink=0.0, exp_kink=0.0, interaction=0.0, noise_std=noise_std, core_noise_std=noise_std)
