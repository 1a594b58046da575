"""Shared numerical kernels: even-grid quadrature, empirical quantiles, sigmoid."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

# numpy 2 renamed trapz; keep one alias so the rest of the package is quiet
trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class IntegratorConfig:
    """Settings for the self-refining even-grid trapezoid rule.

    The rule starts from ``initial_points`` evenly spaced abscissas and keeps
    doubling the number of intervals (reusing previous samples) until two
    successive estimates agree to within ``rel_tol`` or the point budget
    ``max_points`` is exhausted.
    """

    initial_points: int = 65
    max_points: int = 4097
    rel_tol: float = 1e-4

    def __post_init__(self) -> None:
        if self.initial_points < 2:
            raise ValueError("initial_points must be at least 2")
        if self.max_points < self.initial_points:
            raise ValueError("max_points must be >= initial_points")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")


def _eval_grid(f: Callable, xs: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` on an abscissa array, accepting scalar-only callables."""
    ys = None
    try:
        ys = np.asarray(f(xs), dtype=float)
    except (TypeError, ValueError):
        ys = None
    if ys is None or ys.shape != xs.shape:
        ys = np.array([float(f(x)) for x in xs])
    bad = ~np.isfinite(ys)
    if bad.any():
        where = float(xs[int(np.argmax(bad))])
        raise ValueError(f"integrand returned a non-finite value at x={where!r}")
    return ys


def adaptive_even_grid_integral(
    f: Callable,
    a: float,
    b: float,
    config: IntegratorConfig | None = None,
) -> float:
    """Integrate ``f`` over ``[a, b]`` by trapezoid on a self-refining even grid.

    Refinement doubles the interval count (``k`` points -> ``2k-1``), reusing
    earlier samples, and stops once successive estimates differ by no more
    than ``rel_tol * (|estimate| + 1e-12)`` or the next grid would exceed
    ``max_points``.  The last estimate is returned either way.

    ``f`` may accept an ndarray of abscissas (preferred, evaluated in one
    call) or a single float.
    """
    if not a < b:
        raise ValueError("integration requires a < b")
    cfg = config if config is not None else IntegratorConfig()

    k = cfg.initial_points
    xs = np.linspace(a, b, k)
    ys = _eval_grid(f, xs)
    h = (b - a) / (k - 1)
    estimate = float(trapezoid(ys, dx=h))

    while True:
        next_k = 2 * (k - 1) + 1
        if next_k > cfg.max_points:
            return estimate
        # new abscissas are the midpoints of the current intervals
        mids = (xs[:-1] + xs[1:]) / 2.0
        mid_ys = _eval_grid(f, mids)
        h /= 2.0
        refined = estimate / 2.0 + h * float(np.sum(mid_ys))

        merged_xs = np.empty(next_k)
        merged_xs[0::2] = xs
        merged_xs[1::2] = mids
        merged_ys = np.empty(next_k)
        merged_ys[0::2] = ys
        merged_ys[1::2] = mid_ys
        xs, ys, k = merged_xs, merged_ys, next_k

        if abs(refined - estimate) <= cfg.rel_tol * (abs(refined) + 1e-12):
            return refined
        estimate = refined


def empirical_quantile(values, t: float) -> float:
    """Lower empirical quantile of ascending-sorted ``values``.

    Returns ``values[ceil(t*n) - 1]`` for t > 0 and ``values[0]`` for t = 0,
    i.e. the smallest sample value v with Pr(x <= v) >= t.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"quantile level must be in [0, 1], got {t}")
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        raise ValueError("empirical_quantile requires at least one value")
    if t == 0.0:
        return float(vals[0])
    idx = math.ceil(t * vals.size) - 1
    return float(vals[min(max(idx, 0), vals.size - 1)])


def sigmoid(z):
    """Overflow-safe logistic function 1/(1+exp(-z)); scalar or ndarray."""
    arr = np.asarray(z, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ez = np.exp(arr[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out[0]) if scalar else out
