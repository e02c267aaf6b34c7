"""Hodrick-Prescott trend extraction and the one-sided output gap."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded


class SeriesTooShort(ValueError):
    pass


@dataclass(frozen=True)
class HPConfig:
    """Smoothing penalty and the first expanding-sample length.

    ``lamb=1600`` is the usual choice for quarterly data. The one-sided pass
    leaves the first ``min_window - 1`` points unavailable (NaN).
    """

    lamb: float = 1600.0
    min_window: int = 12

    def __post_init__(self):
        if not self.lamb > 0:
            raise ValueError("lamb must be > 0")
        if self.min_window < 8:
            raise ValueError("min_window must be >= 8")


def hp_penalty_banded(T: int, lamb: float) -> np.ndarray:
    """Upper banded storage of ``I + lamb * D'D`` (D = second differences)."""
    ab = np.zeros((3, T))
    main = np.full(T, 6.0)
    main[[0, -1]] = 1.0
    main[[1, -2]] = 5.0
    off1 = np.full(T - 1, -4.0)
    off1[[0, -1]] = -2.0
    ab[2] = 1.0 + lamb * main
    ab[1, 1:] = lamb * off1
    ab[0, 2:] = lamb
    return ab


def hp_two_sided(y, lamb: float = 1600.0) -> np.ndarray:
    """HP trend of ``y``: minimizes ``sum (y - tau)^2 + lamb * sum (D^2 tau)^2``.

    The symmetric pentadiagonal system ``(I + lamb D'D) tau = y`` is solved
    in banded form.

    Parameters
    ----------
    y : array_like, shape (T,)
        Finite series, ``T >= 4``.
    lamb : float
        Smoothing penalty.

    Returns
    -------
    trend : ndarray, shape (T,)
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.shape[0] < 4:
        raise SeriesTooShort("HP filter needs a 1-d series of length >= 4")
    if not np.all(np.isfinite(y)):
        raise ValueError("series must be finite")
    T = y.shape[0]
    # straight lines lie in the penalty's null space: solve for the
    # deviation from the OLS line to keep the solution exact on them
    t = np.arange(T, dtype=float) - (T - 1) / 2.0
    slope = np.dot(t, y) / np.dot(t, t)
    line = y.mean() + slope * t
    return line + solveh_banded(hp_penalty_banded(T, lamb), y - line)


def hp_one_sided(y, cfg: HPConfig = HPConfig()) -> np.ndarray:
    """Expanding-window HP trend; entry ``t`` only uses ``y[:t+1]``.

    The first ``cfg.min_window - 1`` entries are NaN.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[0] < cfg.min_window:
        raise SeriesTooShort(f"one-sided HP filter needs at least {cfg.min_window} points")
    trend = np.full(y.shape[0], np.nan)
    for t in range(cfg.min_window - 1, y.shape[0]):
        trend[t] = hp_two_sided(y[: t + 1], cfg.lamb)[-1]
    return trend


def output_gap(gdp, cfg: HPConfig = HPConfig()) -> np.ndarray:
    """Percent gap ``100 * log(gdp) - trend``, trend from the one-sided filter.

    Filtering runs on ``100 * log(gdp)``, so the gap is in log-percent.
    """
    gdp = np.asarray(gdp, dtype=float)
    if np.any(~(gdp > 0)):
        raise ValueError("GDP levels must be > 0")
    level = 100.0 * np.log(gdp)
    return level - hp_one_sided(level, cfg)
