"""Fidelity terms: deviation of the combined model from the performance model."""

from __future__ import annotations

from enum import Enum

import numpy as np

from .data import TimeGrid
from .numerics import trapezoid

CLAMP_EPS = 1e-12


class FidelityKind(Enum):
    CROSS_ENTROPY = "cross_entropy"
    CROSS_ENTROPY_SWAPPED = "cross_entropy_swapped"
    SQUARED_ERROR = "squared_error"
    INTEGRATED_SURVIVAL_SE = "integrated_survival_se"


def ce_fidelity(f_comb, f_perf):
    """Cross-entropy with the combined prediction in the label slot.

    Note this is linear in ``f_comb``: with no fairness pressure its minimizer
    pushes the combined output toward hard 0/1 versions of the performance
    model.  See :func:`ce_fidelity_swapped` for the variant minimized exactly
    at ``f_comb == f_perf``.
    """
    p = np.clip(f_perf, CLAMP_EPS, 1.0 - CLAMP_EPS)
    return -(f_comb * np.log(p) + (1.0 - np.asarray(f_comb)) * np.log(1.0 - p))


def ce_fidelity_swapped(f_comb, f_perf):
    """Cross-entropy with the performance prediction in the label slot."""
    q = np.clip(f_comb, CLAMP_EPS, 1.0 - CLAMP_EPS)
    return -(f_perf * np.log(q) + (1.0 - np.asarray(f_perf)) * np.log(1.0 - q))


def se_fidelity(f_comb, f_perf):
    """Squared error between combined and performance predictions."""
    return (np.asarray(f_comb, dtype=float) - np.asarray(f_perf, dtype=float)) ** 2


def survival_fidelity(s_comb_row, s_perf_row, grid: TimeGrid) -> float:
    """Integrated squared difference of two survival curves over [0, tau].

    The curves are only known at the grid points, so the integral is the
    trapezoid rule on the sampled squared differences.
    """
    a = np.asarray(s_comb_row, dtype=float)
    b = np.asarray(s_perf_row, dtype=float)
    if a.shape != (grid.m,) or b.shape != (grid.m,):
        raise ValueError("curve rows do not match the time grid")
    return float(trapezoid((a - b) ** 2, grid.times))
