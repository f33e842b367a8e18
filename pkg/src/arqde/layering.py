"""Layer-rate construction for successively refined transmission with ARQ.

With ``n`` layers, layer ``k`` carries multiplexing gain ``r_k`` and the
receiver decodes a prefix of layers, so the mean distortion is governed by
the worst of the candidate exponents ``d(rbar_{k+1}) + b*rbar_k`` over the
cumulative gains ``rbar_k``.  The construction here places the points
``(rbar_k, d(rbar_{k+1}))`` on the supporting line of slope ``-b``:

* forward pass, first half: ``rbar_1`` solves ``d(rbar_1) = c`` and each next
  cumulative gain solves ``d(rbar_{k+1}) = c - b*rbar_k``; the iterates climb
  toward the touching corner from the left;
* backward pass, second half: ``rbar_n`` sits at the line's x-intercept and
  ``rbar_k = (c - d(rbar_{k+1})) / b`` walks down toward the corner from the
  right.

The bridging rate between the two halves carries the whole finite-n deficit;
each half satisfies the equal-exponent equations exactly, and the achieved
exponent converges to the line's intercept as n grows.

When ``b`` ties a segment-slope magnitude the line coincides with a whole
segment and the corner recursions stall.  By default the allocation is built
as the limit of vanishing slope perturbations; passing an explicit
``tie_eps`` instead tilts the slope to ``-(b - tie_eps)`` and reruns the
plain construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .dmt import AntennaConfig, DmtCurve, build_dmt, eval_dmt, invert_dmt
from .exponent import delta_line


@dataclass(frozen=True)
class LayerAllocation:
    """Per-layer multiplexing gains and the finite-n distortion exponent."""

    bandwidth_ratio: float
    n_layers: int
    tie_eps: float
    rates: np.ndarray
    cumulative: np.ndarray
    delta_n: float


class ExponentResidual(NamedTuple):
    """One equal-exponent equation: d(rbar_{k+1}) + b*r_k - d(rbar_k)."""

    layer: int
    residual: float
    bridge: bool


def exponent_terms(curve: DmtCurve, bandwidth_ratio: float, cumulative) -> np.ndarray:
    """Candidate exponents d(rbar_{k+1}) + b*rbar_k for k = 0..n.

    Conventions: rbar_0 = 0 and d past rbar_n is 0 (nothing left to decode).
    """
    cum = np.asarray(cumulative, dtype=float)
    prefix = np.concatenate([[0.0], cum])
    tail_div = np.concatenate([np.atleast_1d(eval_dmt(curve, cum)), [0.0]])
    return tail_div + bandwidth_ratio * prefix


def _two_pass(
    curve: DmtCurve, b_eff: float, intercept: float, n: int, corner: int
) -> np.ndarray:
    """Forward/backward recursion on the supporting line, cumulative gains."""
    m = n // 2
    cj = float(corner)
    cum = np.empty(n, dtype=float)
    x = invert_dmt(curve, intercept)
    cum[0] = x
    for k in range(1, m):
        # In exact arithmetic the iterates approach the touch corner from
        # below and never cross it; the corner is attracting only on that
        # side, so a 1-ulp crossing would grow geometrically.  Clamp it.
        x = min(invert_dmt(curve, intercept - b_eff * x), cj)
        cum[k] = x
    if corner == curve.full_gain:
        # The line meets zero diversity exactly at the last corner, so the
        # whole backward pass stalls there (zero trailing rates).  Iterating
        # would amplify the rounding of intercept/b_eff: the fixed point is
        # repelling from below when the segment is steeper than the line.
        cum[m:] = cj
        return cum
    y = intercept / b_eff
    cum[n - 1] = y
    for k in range(n - 2, m - 1, -1):
        # Mirror image of the forward clamp: exact iterates stay above the
        # corner, and below it the recursion diverges downward.
        y = max((intercept - eval_dmt(curve, y)) / b_eff, cj)
        cum[k] = y
    return cum


def _tie_limit(curve: DmtCurve, b: float, n: int, intercept: float, corner: int) -> np.ndarray:
    """Tie-case allocation as the limit of vanishing slope perturbations.

    The forward pass keeps the exact line.  The backward pass runs on a
    parallel line lowered by b*delta, with delta chosen by bisection so the
    pass lands exactly delta above the touching corner; on the coincident
    segment the iterates then march arithmetically, which is the limiting
    shape of the tilted construction, and the deficit b*delta shrinks like
    1/n.
    """
    m = n // 2
    j = float(corner)

    def landing(delta: float) -> float:
        # Each step drops y by at least delta (the lowered line sits strictly
        # under the curve), so a probe that reaches the corner is already an
        # overshoot and can stop before wandering below zero.
        low = intercept - b * delta
        y = low / b
        for _ in range(n - m - 1):
            if y <= j:
                return y
            y = (low - eval_dmt(curve, y)) / b
        return y

    # landing() decreases in delta while the target j + delta increases, and
    # the endpoints bracket the crossing: landing(0) >= j, landing(hi) <= j.
    hi0 = eval_dmt(curve, j) / b
    lo, hi = 0.0, hi0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if landing(mid) - j - mid > 0.0:
            lo = mid
        else:
            hi = mid
    delta = 0.5 * (lo + hi)

    if delta > 1.0:
        # With very few layers the march can overshoot the far end of the
        # coincident segment, where the lowered-line geometry no longer pins
        # the bridge term.  Re-anchor the landing at the gain with b*r = d(r):
        # every term from the bridge on then equals intercept - b*delta.
        target = equalizing_gain(curve, b)
        lo, hi = 0.0, hi0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if landing(mid) > target:
                lo = mid
            else:
                hi = mid
        delta = 0.5 * (lo + hi)

    cum = np.empty(n, dtype=float)
    x = invert_dmt(curve, intercept)
    cum[0] = x
    for k in range(1, m):
        x = invert_dmt(curve, intercept - b * x)
        cum[k] = x
    low = intercept - b * delta
    y = low / b
    cum[n - 1] = y
    for k in range(n - 2, m - 1, -1):
        y = (low - eval_dmt(curve, y)) / b
        cum[k] = y
    return cum


def assign_layers(
    cfg: AntennaConfig,
    bandwidth_ratio: float,
    n_layers: int,
    tie_eps: float | None = None,
) -> LayerAllocation:
    """Build the n-layer gain allocation for the given bandwidth ratio.

    ``n_layers`` must be even (the two passes split it in half).  ``tie_eps``
    only matters when the ratio ties a segment slope; omitted, the exact
    perturbation limit is used, which keeps the equal-exponent residuals at
    zero and the finite-n deficit of order 1/n.
    """
    b = float(bandwidth_ratio)
    if b <= 0:
        raise ValueError("bandwidth ratio must be positive")
    n = int(n_layers)
    if n < 2 or n % 2 != 0:
        raise ValueError(f"layer count must be a positive even integer, got {n_layers}")
    if tie_eps is not None and not 0.0 < tie_eps < b:
        raise ValueError("tie_eps must lie strictly between 0 and the bandwidth ratio")

    curve = build_dmt(cfg)
    line = delta_line(cfg, b)
    eps_used = 0.0
    if not line.tie:
        cumulative = _two_pass(curve, b, line.intercept, n, line.touch_corner)
    elif tie_eps is None:
        cumulative = _tie_limit(curve, b, n, line.intercept, line.touch_corner)
    else:
        cumulative, eps_used = _tie_perturbed(cfg, curve, b, n, tie_eps)

    rates = np.diff(cumulative, prepend=0.0)
    if rates.min() < -1e-12:
        raise RuntimeError(f"construction produced a negative layer rate: {rates.min():g}")
    rates = np.maximum(rates, 0.0)

    terms = exponent_terms(curve, b, cumulative)
    delta_n = float(terms.min())
    if terms[n // 2] > delta_n + 1e-9:
        raise RuntimeError("exponent minimum strayed from the bridge equation")
    return LayerAllocation(
        bandwidth_ratio=b,
        n_layers=n,
        tie_eps=eps_used,
        rates=rates,
        cumulative=cumulative,
        delta_n=delta_n,
    )


def _tie_perturbed(
    cfg: AntennaConfig, curve: DmtCurve, b: float, n: int, eps: float
) -> tuple[np.ndarray, float]:
    # Tilting to slope -(b - eps) must land strictly between two segment
    # slopes; halve on collision, give up after a bounded number of tries.
    for _ in range(64):
        b_eff = b - eps
        if b_eff > 0.0:
            line = delta_line(cfg, b_eff)
            if not line.tie:
                return _two_pass(curve, b_eff, line.intercept, n, line.touch_corner), eps
        eps *= 0.5
    raise RuntimeError("slope tie unresolved after 64 perturbation retries")


def finite_layer_exponent(alloc: LayerAllocation, curve: DmtCurve) -> float:
    """Worst candidate exponent of the allocation, min over k of the terms.

    For allocations built by assign_layers the minimum sits at the bridge
    index k = n/2 (up to 1e-9 ties); anything else means the allocation and
    curve are inconsistent.
    """
    cum = np.asarray(alloc.cumulative, dtype=float)
    if not np.allclose(np.cumsum(alloc.rates), cum, rtol=0.0, atol=1e-9):
        raise RuntimeError("cumulative gains disagree with the running sum of rates")
    terms = exponent_terms(curve, alloc.bandwidth_ratio, cum)
    value = float(terms.min())
    if terms[alloc.n_layers // 2] > value + 1e-9:
        raise RuntimeError("exponent minimum not attained at the bridge equation")
    return value


def verify_equal_exponents(
    alloc: LayerAllocation, curve: DmtCurve
) -> list[ExponentResidual]:
    """Residuals of the equal-exponent system, one per layer equation.

    Equation k is d(rbar_{k+1}) + b*r_k - d(rbar_k) with d past rbar_n taken
    as 0.  The two bridge-block equations (k = n/2 and n/2 + 1) absorb the
    finite-n deficit and are flagged; all the others should vanish for
    allocations built by assign_layers without an explicit tie_eps.
    """
    b = alloc.bandwidth_ratio
    n = alloc.n_layers
    m = n // 2
    cum = np.asarray(alloc.cumulative, dtype=float)
    d_here = np.atleast_1d(eval_dmt(curve, cum))
    d_next = np.concatenate([d_here[1:], [0.0]])
    res = d_next + b * np.asarray(alloc.rates, dtype=float) - d_here
    return [
        ExponentResidual(layer=k, residual=float(res[k - 1]), bridge=k in (m, m + 1))
        for k in range(1, n + 1)
    ]


def convergence_sweep(
    cfg: AntennaConfig, bandwidth_ratio: float, n_list: Sequence[int]
) -> list[tuple[int, float]]:
    """Finite-n exponents for each layer count, for convergence studies."""
    return [
        (int(n), assign_layers(cfg, bandwidth_ratio, int(n)).delta_n) for n in n_list
    ]


def equalizing_gain(curve: DmtCurve, bandwidth_ratio: float) -> float:
    """Single-layer gain balancing rate against outage: solves d(r) = b*r.

    The curve falls to 0 at full gain while b*r rises from 0, so a unique
    crossing exists on [0, full_gain]; it is found exactly on its segment.
    """
    b = float(bandwidth_ratio)
    if b <= 0:
        raise ValueError("bandwidth ratio must be positive")
    gains = curve.gains.astype(float)
    divs = curve.diversities.astype(float)
    for k in range(len(gains) - 1):
        drop = divs[k] - divs[k + 1]
        r = (divs[k] + drop * gains[k]) / (b + drop)
        if gains[k] - 1e-12 <= r <= gains[k + 1] + 1e-12:
            return float(min(max(r, gains[k]), gains[k + 1]))
    raise RuntimeError("no balancing gain on the curve")
