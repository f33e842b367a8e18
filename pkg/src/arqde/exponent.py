"""Optimal distortion exponents via supporting lines under the DMT curve.

The distortion exponent of layered transmission at bandwidth ratio ``b``
(channel uses per source sample) equals the y-intercept of the line of slope
``-b`` that supports the tradeoff curve from below.  Because the curve is
convex piecewise-linear, that intercept is a minimum over the corner points,
and it also equals a closed-form sum of clipped terms; both routes are
implemented and cross-checked in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dmt import AntennaConfig, build_dmt

# A bandwidth ratio this close to a segment-slope magnitude counts as a tie:
# the supporting line then coincides with a whole segment instead of touching
# a single corner.
TIE_TOL = 1e-9


@dataclass(frozen=True)
class DeltaLine:
    """Supporting line of slope -bandwidth_ratio under the tradeoff curve.

    ``intercept`` is the achieved distortion exponent.  ``touch_corner`` is
    the corner gain where the line meets the curve (the smaller corner of the
    coincident segment when ``tie`` is set).  ``x_intercept`` is where the
    line crosses zero diversity, intercept / bandwidth_ratio.
    """

    bandwidth_ratio: float
    intercept: float
    touch_corner: int
    x_intercept: float
    tie: bool


def upper_bound_exponent(cfg: AntennaConfig, bandwidth_ratio: float) -> float:
    """Best possible distortion exponent at the given bandwidth ratio.

    Computed as sum over i = 1..n_min of min(b, 2i - 1 + n_max - n_min);
    saturates at n_tx * n_rx once b reaches n_tx + n_rx - 1.
    """
    b = float(bandwidth_ratio)
    if b < 0:
        raise ValueError("bandwidth ratio must be nonnegative")
    i = np.arange(1, cfg.n_min + 1, dtype=float)
    caps = 2.0 * i - 1.0 + (cfg.n_max - cfg.n_min)
    return float(np.minimum(b, caps).sum())


def segment_slope_magnitudes(cfg: AntennaConfig) -> np.ndarray:
    """|slope| of tradeoff segment k for k = 1..n_min, strictly decreasing."""
    k = np.arange(1, cfg.n_min + 1, dtype=float)
    return cfg.n_tx + cfg.n_rx - 2.0 * k + 1.0


def delta_line(cfg: AntennaConfig, bandwidth_ratio: float) -> DeltaLine:
    """Supporting line of slope -b under the tradeoff curve.

    The intercept is min over corners j of d(j) + b*j.  When b matches a
    segment-slope magnitude the line coincides with that segment and both of
    its corners attain the minimum; the smaller one is reported.
    """
    b = float(bandwidth_ratio)
    if b <= 0:
        raise ValueError("bandwidth ratio must be positive")
    curve = build_dmt(cfg)
    values = curve.diversities + b * curve.gains

    slopes = segment_slope_magnitudes(cfg)
    tied = np.abs(b - slopes) < TIE_TOL
    if tied.any():
        # Segment k ties corners k-1 and k; report the smaller corner even if
        # rounding made the other one the floating-point argmin.
        j = int(np.argmax(tied))  # tied segment index minus 1
        tie = True
    else:
        j = int(np.argmin(values))
        tie = False

    intercept = float(values[j])
    return DeltaLine(
        bandwidth_ratio=b,
        intercept=intercept,
        touch_corner=j,
        x_intercept=intercept / b,
        tie=tie,
    )


def exponent_breakpoints(cfg: AntennaConfig) -> list[tuple[int, int]]:
    """Corners of the exponent-vs-bandwidth-ratio curve, ascending in b.

    For k = n_min-1 down to 0 the curve kinks at b = n_tx + n_rx - (2k + 1)
    with exponent b*(k+1) + (n_tx - k - 1)(n_rx - k - 1).  The k = 0 kink is
    the saturation point (n_tx + n_rx - 1, n_tx * n_rx), after which the
    exponent stays at the full diversity order.  All arithmetic is exact.
    """
    points = []
    for k in range(cfg.n_min - 1, -1, -1):
        b_k = cfg.n_tx + cfg.n_rx - (2 * k + 1)
        delta_k = b_k * (k + 1) + (cfg.n_tx - k - 1) * (cfg.n_rx - k - 1)
        points.append((b_k, delta_k))
    return points
