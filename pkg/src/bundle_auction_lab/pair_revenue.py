"""Exact and Monte Carlo expected revenue for two-customer bundle offers.

For a pair offer ``(a_1, a_2, b)`` the realized revenue is piecewise
constant in the valuations: ``b`` on the acceptance set
``min(V_1, a_1) + min(V_2, a_2) >= b`` and the applicable solo prices on its
complement.  Conditioning on ``V_1`` reduces every probability to a
one-dimensional integral

    P[accept & box] = integral f_1(v) * P[min(V_2, a_2) >= b - min(v, a_1),
                                          V_2 in window] dv

whose integrand is piecewise cubic between known breakpoints, so the
quadrature in :mod:`._quad` evaluates it essentially exactly.

The module also carries the machinery showing a pair bundle strictly beats
optimal single prices: the epsilon-offer ``(p1 + eps, p2, p1 + p2)`` built
from the single-price optima, the five-region decomposition of the positive
quadrant used to compare the two strategies region by region, and a
deterministic pair-offer optimizer.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ._mc import revenue_stats
from ._quad import integrate_with_breakpoints
from ._search import golden_section_max
from .bundles import NO_SALE, BundleOffer
from .single_pricing import optimal_single_price
from .valuations import ValuationDistribution

__all__ = [
    "DEFAULT_EPS_GRID",
    "PairRevenueBreakdown",
    "RegionLabel",
    "EpsilonEvaluation",
    "PairImprovementReport",
    "pair_expected_revenue_exact",
    "pair_expected_revenue_mc",
    "epsilon_offer",
    "classify_region",
    "region_box",
    "region_probability",
    "region_expected_revenue",
    "pair_bundle_accepts",
    "verify_pair_improvement",
    "optimize_pair_offer",
]

EXACT_TOL = 1e-7
DEFAULT_EPS_GRID = (0.01, 0.02, 0.05, 0.1, 0.2)


@dataclass(frozen=True)
class PairRevenueBreakdown:
    """Expected revenue of a pair offer, split by source.

    ``total = bundle_part + solo_part_1 + solo_part_2`` with
    ``bundle_part = b * accept_probability``.
    """

    total: float
    bundle_part: float
    solo_part_1: float
    solo_part_2: float
    accept_probability: float


class RegionLabel(Enum):
    """Labels of the five-way partition of the positive quadrant."""

    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    A4 = "A4"
    A5 = "A5"


def _saturated_accept_prob(d_other: ValuationDistribution,
                           a_other: Optional[float], b: float,
                           a_self: float) -> float:
    """``P[min(V_other, a_other) >= b - a_self]``.

    The capped value ``min(V, a)`` has an atom at ``a``, so the boundary
    case ``b = a_self + a_other`` has positive probability and must resolve
    the same way everywhere (ties buy).  The branch predicate is therefore
    evaluated as ``b <= a_self + a_other`` in the original quantities --
    never via the rounded difference ``b - a_self`` -- so both customers'
    solo terms and the acceptance integrand agree bit for bit.
    """
    x = b - a_self
    if x <= 0.0:
        return 1.0
    if a_other is not None and b > a_self + a_other:
        return 0.0
    return 1.0 - float(d_other.cdf(x))


def _accept_prob_box(d1: ValuationDistribution, d2: ValuationDistribution,
                     a1: Optional[float], a2: Optional[float], b: float,
                     lo1: float, hi1: float, lo2: float, hi2: float,
                     tol: float) -> float:
    """``P[group accepts and (V_1, V_2) in [lo1, hi1) x [lo2, hi2)]``."""
    lo1 = max(lo1, 0.0)
    hi1 = min(hi1, d1.upper_bound)
    lo2 = max(lo2, 0.0)
    hi2 = min(hi2, d2.upper_bound)
    if hi1 <= lo1 or hi2 <= lo2:
        return 0.0
    a1_eff = math.inf if a1 is None else float(a1)
    a2_eff = math.inf if a2 is None else float(a2)
    f2_hi = float(d2.cdf(hi2))
    f2_lo = float(d2.cdf(lo2))
    base2 = f2_hi - f2_lo
    if base2 <= 0.0:
        return 0.0

    def integrand(v: np.ndarray) -> np.ndarray:
        c1 = np.minimum(v, a1_eff)
        x = b - c1
        inner = np.maximum(0.0, f2_hi - d2.cdf(np.maximum(x, lo2)))
        # Tie convention: "x <= a2" is evaluated as b <= c1 + a2 so the
        # saturated plateau (c1 == a1) matches _saturated_accept_prob.
        q = np.where(x <= 0.0, base2, np.where(b <= c1 + a2_eff, inner, 0.0))
        return d1.pdf(v) * q

    pts = [lo1, hi1]
    extra = [a1_eff, b, b - a2_eff, b - lo2, b - hi2]
    extra.extend(d1.knots)
    extra.extend(b - k for k in d2.knots)
    pts.extend(c for c in extra if math.isfinite(c) and lo1 < c < hi1)
    prob = integrate_with_breakpoints(integrand, pts, tol)
    return min(max(prob, 0.0), 1.0)


def pair_expected_revenue_exact(d1: ValuationDistribution,
                                d2: ValuationDistribution,
                                offer: BundleOffer,
                                tol: float = EXACT_TOL) -> PairRevenueBreakdown:
    """Exact expected revenue of a two-customer offer.

    The acceptance probability is computed by breakpoint-aware Simpson
    quadrature (absolute tolerance ``tol``); the solo parts reduce to closed
    forms because the capped value of a solo buyer is constant:
    ``solo_i = a_i * P[V_i >= a_i] * P[other capped value < b - a_i]``.
    """
    if offer.n != 2:
        raise ValueError("pair revenue needs a two-customer offer")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    a1, a2 = offer.individual_prices
    b = offer.bundle_price
    accept = _accept_prob_box(
        d1, d2, a1, a2, b, 0.0, d1.upper_bound, 0.0, d2.upper_bound, tol
    )
    solo1 = 0.0
    if a1 is not None:
        tail = 1.0 - float(d1.cdf(a1))
        if tail > 0.0:
            solo1 = a1 * tail * (1.0 - _saturated_accept_prob(d2, a2, b, a1))
    solo2 = 0.0
    if a2 is not None:
        tail = 1.0 - float(d2.cdf(a2))
        if tail > 0.0:
            solo2 = a2 * tail * (1.0 - _saturated_accept_prob(d1, a1, b, a2))
    bundle_part = b * accept
    return PairRevenueBreakdown(
        total=bundle_part + solo1 + solo2,
        bundle_part=bundle_part,
        solo_part_1=solo1,
        solo_part_2=solo2,
        accept_probability=accept,
    )


def pair_expected_revenue_mc(d1: ValuationDistribution,
                             d2: ValuationDistribution,
                             offer: BundleOffer, n_samples: int,
                             seed) -> tuple[float, float]:
    """Monte Carlo estimate ``(mean, std_error)``; deterministic given seed."""
    if offer.n != 2:
        raise ValueError("pair revenue needs a two-customer offer")
    stats = revenue_stats([d1, d2], offer, n_samples, seed)
    return stats.mean, stats.std_error


def epsilon_offer(p1: float, p2: float, eps: float) -> BundleOffer:
    """The improving construction: prices ``(p1 + eps, p2)``, bundle ``p1 + p2``."""
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    return BundleOffer((p1 + eps, p2), p1 + p2)


def pair_bundle_accepts(v1: float, v2: float, p1: float, p2: float,
                        eps: float) -> bool:
    """Acceptance of the epsilon-offer as three explicit inequalities.

    ``V1 + V2 >= p1 + p2``, ``V1 >= p1`` and ``V2 >= p2 - eps``; equivalent
    to :func:`group_rational_accepts` on :func:`epsilon_offer` (cross-checked
    in the tests).
    """
    return v1 + v2 >= p1 + p2 and v1 >= p1 and v2 >= p2 - eps


def region_box(p1: float, p2: float, eps: float,
               label: RegionLabel) -> tuple[float, float, float, float]:
    """Half-open box ``[lo1, hi1) x [lo2, hi2)`` of a partition region."""
    inf = math.inf
    boxes = {
        RegionLabel.A1: (p1, inf, p2, inf),
        RegionLabel.A2: (0.0, inf, 0.0, p2 - eps),
        RegionLabel.A3: (0.0, p1, p2 - eps, inf),
        RegionLabel.A4: (p1, p1 + eps, p2 - eps, p2),
        RegionLabel.A5: (p1 + eps, inf, p2 - eps, p2),
    }
    return boxes[label]


def _check_region_params(p1: float, p2: float, eps: float) -> None:
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if p2 - eps < 0.0:
        raise ValueError("need p2 - eps >= 0")
    if p1 < 0.0 or p2 < 0.0:
        raise ValueError("prices must be nonnegative")


def classify_region(v1: float, v2: float, p1: float, p2: float,
                    eps: float) -> RegionLabel:
    """The unique region containing ``(v1, v2)``.

    The five boxes from :func:`region_box` tile the positive quadrant:
    the strip below ``p2 - eps`` (A2), everything left of ``p1`` above it
    (A3), the quadrant above both prices (A1), and the band
    ``p2 - eps <= v2 < p2`` split at ``p1 + eps`` into A4 and A5.
    """
    _check_region_params(p1, p2, eps)
    if v1 < 0.0 or v2 < 0.0:
        raise ValueError("valuations must be in the positive quadrant")
    if v2 < p2 - eps:
        return RegionLabel.A2
    if v2 >= p2:
        return RegionLabel.A1 if v1 >= p1 else RegionLabel.A3
    if v1 < p1:
        return RegionLabel.A3
    return RegionLabel.A4 if v1 < p1 + eps else RegionLabel.A5


def _window_prob(d: ValuationDistribution, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    return float(d.cdf(hi)) - float(d.cdf(lo))


def region_probability(d1: ValuationDistribution, d2: ValuationDistribution,
                       p1: float, p2: float, eps: float,
                       label: RegionLabel) -> float:
    """Exact probability of a region (product of CDF increments)."""
    _check_region_params(p1, p2, eps)
    lo1, hi1, lo2, hi2 = region_box(p1, p2, eps, label)
    return _window_prob(d1, max(lo1, 0.0), min(hi1, d1.upper_bound)) * \
        _window_prob(d2, max(lo2, 0.0), min(hi2, d2.upper_bound))


def region_expected_revenue(d1: ValuationDistribution,
                            d2: ValuationDistribution,
                            p1: float, p2: float, eps: float,
                            label: RegionLabel, strategy: str,
                            tol: float = EXACT_TOL) -> float:
    """``E[revenue * 1{region}]`` under one of the two sales strategies.

    ``strategy="singles"`` prices the customers independently at
    ``(p1, p2)``; ``strategy="bundle"`` uses the epsilon-offer.  These are
    the per-region quantities whose comparison establishes the strict
    improvement of pair bundling.
    """
    _check_region_params(p1, p2, eps)
    lo1, hi1, lo2, hi2 = region_box(p1, p2, eps, label)
    if strategy == "singles":
        buy1 = _window_prob(d1, max(lo1, p1), min(hi1, d1.upper_bound)) * \
            _window_prob(d2, max(lo2, 0.0), min(hi2, d2.upper_bound))
        buy2 = _window_prob(d1, max(lo1, 0.0), min(hi1, d1.upper_bound)) * \
            _window_prob(d2, max(lo2, p2), min(hi2, d2.upper_bound))
        return p1 * buy1 + p2 * buy2
    if strategy != "bundle":
        raise ValueError("strategy must be 'singles' or 'bundle'")
    offer = epsilon_offer(p1, p2, eps)
    a1, a2 = offer.individual_prices
    b = offer.bundle_price
    p_accept = _accept_prob_box(d1, d2, a1, a2, b, lo1, hi1, lo2, hi2, tol)
    total = b * p_accept
    # Solo sales happen on the rejection set only.
    buy1_all = _window_prob(d1, max(lo1, a1), min(hi1, d1.upper_bound)) * \
        _window_prob(d2, max(lo2, 0.0), min(hi2, d2.upper_bound))
    buy1_acc = _accept_prob_box(d1, d2, a1, a2, b, max(lo1, a1), hi1, lo2, hi2, tol)
    total += a1 * max(0.0, buy1_all - buy1_acc)
    buy2_all = _window_prob(d1, max(lo1, 0.0), min(hi1, d1.upper_bound)) * \
        _window_prob(d2, max(lo2, a2), min(hi2, d2.upper_bound))
    buy2_acc = _accept_prob_box(d1, d2, a1, a2, b, lo1, hi1, max(lo2, a2), hi2, tol)
    total += a2 * max(0.0, buy2_all - buy2_acc)
    return total


@dataclass(frozen=True)
class EpsilonEvaluation:
    """One evaluated epsilon-offer and its gain over optimal singles."""

    eps: float
    breakdown: PairRevenueBreakdown
    improvement: float


@dataclass(frozen=True)
class PairImprovementReport:
    """Evidence that some epsilon-offer strictly beats optimal single prices."""

    p1_star: float
    p2_star: float
    singles_value: float
    evaluations: tuple[EpsilonEvaluation, ...]
    refined: Optional[EpsilonEvaluation]
    best: EpsilonEvaluation
    improved: bool
    improvement_tol: float


def verify_pair_improvement(d1: ValuationDistribution,
                            d2: ValuationDistribution,
                            eps_grid=DEFAULT_EPS_GRID,
                            tol: float = EXACT_TOL,
                            improvement_tol: float = 1e-6,
                            refine: bool = True) -> PairImprovementReport:
    """Evaluate epsilon-offers against the optimal single-price benchmark.

    Solves each customer's single-price optimum, evaluates the epsilon-offer
    exactly for every grid value (each must satisfy ``0 < eps < p2*``), and
    optionally refines epsilon by golden-section search.  ``improved`` is
    true when the best offer beats the singles benchmark by more than
    ``improvement_tol``; existence of such an epsilon is guaranteed for
    distributions meeting the smoothness hypotheses, and this report is the
    desk-checkable witness.
    """
    grid = tuple(float(e) for e in eps_grid)
    if not grid:
        raise ValueError("eps grid must be nonempty")
    sol1 = optimal_single_price(d1)
    sol2 = optimal_single_price(d2)
    singles = sol1.utility + sol2.utility
    for e in grid:
        if not 0.0 < e < sol2.price:
            raise ValueError(
                f"eps values must lie strictly between 0 and p2*={sol2.price:.6g}; "
                f"got {e!r}"
            )

    def evaluate(eps: float) -> EpsilonEvaluation:
        bd = pair_expected_revenue_exact(
            d1, d2, epsilon_offer(sol1.price, sol2.price, eps), tol
        )
        return EpsilonEvaluation(eps, bd, bd.total - singles)

    evaluations = tuple(evaluate(e) for e in sorted(grid))
    best = max(evaluations, key=lambda ev: ev.breakdown.total)

    refined = None
    if refine:
        hi = 0.999 * sol2.price
        eps_ref, _ = golden_section_max(
            lambda e: pair_expected_revenue_exact(
                d1, d2, epsilon_offer(sol1.price, sol2.price, e), tol
            ).total,
            0.0, hi, xtol=1e-6,
        )
        refined = evaluate(eps_ref)
        if refined.breakdown.total > best.breakdown.total:
            best = refined

    return PairImprovementReport(
        p1_star=sol1.price,
        p2_star=sol2.price,
        singles_value=singles,
        evaluations=evaluations,
        refined=refined,
        best=best,
        improved=best.improvement > improvement_tol,
        improvement_tol=improvement_tol,
    )


def _thread_count(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    return max(1, os.cpu_count() or 1)


def _evaluate_offers(value, triples, threads: Optional[int]):
    """Evaluate offer triples, reducing in index order regardless of the
    execution schedule so the selected optimum is scheduling-independent."""
    workers = _thread_count(threads)
    if workers <= 1 or len(triples) < 64:
        return [value(t) for t in triples]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        chunk = max(16, len(triples) // (8 * workers))
        return list(pool.map(value, triples, chunksize=chunk))


def optimize_pair_offer(d1: ValuationDistribution, d2: ValuationDistribution,
                        budget: int = 15, *, grid_points: int = 32,
                        tol: float = EXACT_TOL, pure_bundle_only: bool = False,
                        threads: Optional[int] = None
                        ) -> tuple[BundleOffer, float]:
    """Deterministic search for the best two-customer offer.

    Stage 1 scans a coarse grid over ``[0, M1] x [0, M2] x [0, M1 + M2]``
    plus the NO_SALE variants of each solo price, and seeds the singles
    optimum as the offer ``(p1*, p2*, p1* + p2*)`` (which reproduces single
    pricing exactly, so the result always dominates it).  Stage 2 runs a
    compass search on the winning sale pattern, halving the step each of
    ``budget`` rounds.  All evaluations use the exact integrator; grid
    evaluations may run on a thread pool, reduced in index order.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    m1, m2 = d1.upper_bound, d2.upper_bound
    ax1 = np.linspace(0.0, m1, grid_points)
    ax2 = np.linspace(0.0, m2, grid_points)
    axb = np.linspace(0.0, m1 + m2, grid_points)

    def value(triple) -> float:
        a1, a2, b = triple
        return pair_expected_revenue_exact(
            d1, d2, BundleOffer((a1, a2), b), tol
        ).total

    if pure_bundle_only:
        patterns = [(False, False)]
    else:
        patterns = [(True, True), (True, False), (False, True), (False, False)]

    triples: list[tuple[Optional[float], Optional[float], float]] = []
    if not pure_bundle_only:
        s1 = optimal_single_price(d1)
        s2 = optimal_single_price(d2)
        triples.append((s1.price, s2.price, s1.price + s2.price))
    for fin1, fin2 in patterns:
        c1 = ax1 if fin1 else [NO_SALE]
        c2 = ax2 if fin2 else [NO_SALE]
        for a1 in c1:
            for a2 in c2:
                for b in axb:
                    triples.append((a1, a2, float(b)))

    values = _evaluate_offers(value, triples, threads)
    best_idx = 0
    for i, v in enumerate(values):
        if v > values[best_idx]:
            best_idx = i
    best_triple = list(triples[best_idx])
    best_value = values[best_idx]

    # Compass refinement on the coordinates that are actually in play.
    coords = [i for i, x in enumerate(best_triple) if x is not None]
    ranges = {0: (0.0, m1), 1: (0.0, m2), 2: (0.0, m1 + m2)}
    steps = {0: float(ax1[1] - ax1[0]) if len(ax1) > 1 else m1 / 4,
             1: float(ax2[1] - ax2[0]) if len(ax2) > 1 else m2 / 4,
             2: float(axb[1] - axb[0]) if len(axb) > 1 else (m1 + m2) / 4}
    for _ in range(budget):
        for _ in range(200):  # moves per round; compass stalls well before this
            best_move = None
            best_move_value = best_value
            for c in coords:
                lo, hi = ranges[c]
                for direction in (-1.0, 1.0):
                    cand = min(hi, max(lo, best_triple[c] + direction * steps[c]))
                    if cand == best_triple[c]:
                        continue
                    trial = list(best_triple)
                    trial[c] = cand
                    v = value(tuple(trial))
                    if v > best_move_value + 1e-15:
                        best_move = trial
                        best_move_value = v
            if best_move is None:
                break
            best_triple = best_move
            best_value = best_move_value
        for c in coords:
            steps[c] *= 0.5

    offer = BundleOffer((best_triple[0], best_triple[1]), best_triple[2])
    return offer, best_value
