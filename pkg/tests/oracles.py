"""Independent reference computations used to pin expected test values.

Everything here is deliberately dumb: plain composite Simpson panels, dense
grid scans, finite differences, 2-D Riemann sums, and an exhaustive search
over discretized payment splits.  None of it shares code with the library
paths it checks.
"""

from __future__ import annotations

import numpy as np


def composite_simpson(f, a: float, b: float, panels: int = 512) -> float:
    """Plain composite Simpson on one interval."""
    xs = np.linspace(a, b, 2 * panels + 1)
    ys = np.asarray(f(xs), dtype=float)
    h = (b - a) / (2 * panels)
    return h / 3.0 * (
        ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum()
    )


def simpson_between_knots(f, knots, panels_per_segment: int = 64) -> float:
    """Composite Simpson with panels aligned to the integrand's kinks."""
    return sum(
        composite_simpson(f, a, b, panels_per_segment)
        for a, b in zip(knots[:-1], knots[1:])
    )


def ks_statistic(samples: np.ndarray, cdf) -> float:
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    fx = np.asarray(cdf(xs), dtype=float)
    upper = np.max(np.arange(1, n + 1) / n - fx)
    lower = np.max(fx - np.arange(0, n) / n)
    return float(max(upper, lower))


def grid_search_max(f, lo: float, hi: float, points: int = 20001):
    xs = np.linspace(lo, hi, points)
    ys = np.asarray(f(xs), dtype=float)
    i = int(np.argmax(ys))
    return float(xs[i]), float(ys[i])


def central_difference(f, x: float, h: float = 1e-5) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def pair_revenue_riemann(d1, d2, prices, bundle_price: float,
                         cells: int = 2000) -> float:
    """2-D midpoint Riemann sum of the offer revenue over the joint density.

    Midpoints avoid sitting on acceptance boundaries; accuracy is limited by
    the O(1/cells) error along the acceptance frontier.
    """
    a1 = np.inf if prices[0] is None else prices[0]
    a2 = np.inf if prices[1] is None else prices[1]
    m1, m2 = d1.upper_bound, d2.upper_bound
    x = (np.arange(cells) + 0.5) * (m1 / cells)
    y = (np.arange(cells) + 0.5) * (m2 / cells)
    w1 = d1.pdf(x) * (m1 / cells)
    w2 = d2.pdf(y) * (m2 / cells)
    c1 = np.minimum(x, a1)[:, None]
    c2 = np.minimum(y, a2)[None, :]
    accept = c1 + c2 >= bundle_price
    solo = np.zeros((cells, cells))
    if np.isfinite(a1):
        solo = solo + np.where(x >= a1, a1, 0.0)[:, None]
    if np.isfinite(a2):
        solo = solo + np.where(y >= a2, a2, 0.0)[None, :]
    revenue = np.where(accept, bundle_price, solo)
    return float(w1 @ revenue @ w2)


# Payment grid used by the exhaustive split search: 0.01 spacing on [-2, 2].
SPLIT_GRID = np.round(np.arange(-2.0, 2.0 + 0.005, 0.01), 10)
_SLACK = 1e-9


def split_exists_bruteforce(valuations, prices, bundle_price: float) -> bool:
    """Exhaustive search for payments on SPLIT_GRID with sum == b,
    P_i <= V_i and P_i <= a_i (checked literally, one condition at a time).

    Supports n in {2, 3}: the first n-1 payments range over the grid and the
    last is forced by the sum condition (it must also lie within the grid's
    range).  Quadratic/cubic cost -- this is the oracle, not the product.
    """
    v = [float(x) for x in valuations]
    a = [np.inf if p is None else float(p) for p in prices]
    b = float(bundle_price)
    g = SPLIT_GRID
    lo, hi = g[0] - _SLACK, g[-1] + _SLACK
    if len(v) == 2:
        p1 = g
        p2 = b - p1
        ok = (
            (p1 <= v[0] + _SLACK) & (p1 <= a[0] + _SLACK)
            & (p2 <= v[1] + _SLACK) & (p2 <= a[1] + _SLACK)
            & (p2 >= lo) & (p2 <= hi)
        )
        return bool(ok.any())
    if len(v) == 3:
        p1 = g[:, None]
        p2 = g[None, :]
        p3 = b - p1 - p2
        ok = (
            (p1 <= v[0] + _SLACK) & (p1 <= a[0] + _SLACK)
            & (p2 <= v[1] + _SLACK) & (p2 <= a[1] + _SLACK)
            & (p3 <= v[2] + _SLACK) & (p3 <= a[2] + _SLACK)
            & (p3 >= lo) & (p3 <= hi)
        )
        return bool(ok.any())
    raise ValueError("oracle supports n in {2, 3}")
