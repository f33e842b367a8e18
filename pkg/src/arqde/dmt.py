"""Diversity-multiplexing tradeoff (DMT) curves for Rayleigh block-fading MIMO links.

The tradeoff curve for an ``n_tx x n_rx`` link is the piecewise-linear function
through the corner points ``(k, (n_tx - k) * (n_rx - k))`` for
``k = 0 .. min(n_tx, n_rx)``.  It maps a multiplexing gain (rate growth
coefficient relative to log2(SNR)) to the best achievable outage-probability
decay exponent.  Corner arithmetic is exact integer work; only interpolated
points use floating point.

The curve is extended with ``d(r) = 0`` for ``r`` beyond the full multiplexing
gain: outage is certain once the attempted rate outgrows the channel, and the
layer-allocation recursions need evaluations out there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts for a MIMO link."""

    n_tx: int
    n_rx: int

    def __post_init__(self) -> None:
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError(
                f"antenna counts must be positive integers, got ({self.n_tx}, {self.n_rx})"
            )

    @property
    def n_min(self) -> int:
        return min(self.n_tx, self.n_rx)

    @property
    def n_max(self) -> int:
        return max(self.n_tx, self.n_rx)

    @property
    def max_diversity(self) -> int:
        """Diversity order at zero multiplexing gain, n_tx * n_rx."""
        return self.n_tx * self.n_rx


@dataclass(frozen=True)
class DmtCurve:
    """Piecewise-linear tradeoff curve stored as ordered integer corners.

    ``gains[i]`` runs 0..n_min and ``diversities[i]`` is strictly decreasing
    down to 0.  Both arrays are integer-exact; evaluation interpolates.
    """

    gains: np.ndarray
    diversities: np.ndarray

    @property
    def full_gain(self) -> int:
        """Largest corner gain (min of the antenna counts)."""
        return int(self.gains[-1])

    @property
    def max_diversity(self) -> int:
        return int(self.diversities[0])


def build_dmt(cfg: AntennaConfig) -> DmtCurve:
    """Corner points (k, (n_tx - k)(n_rx - k)) for k = 0..n_min."""
    k = np.arange(cfg.n_min + 1, dtype=np.int64)
    d = (cfg.n_tx - k) * (cfg.n_rx - k)
    return DmtCurve(gains=k, diversities=d)


def eval_dmt(curve: DmtCurve, gain):
    """Diversity at the given multiplexing gain(s).

    Linear interpolation between corners; 0 beyond the last corner.
    Accepts a scalar or an array; negative gains are a domain error.
    """
    g = np.asarray(gain, dtype=float)
    if np.any(g < 0):
        raise ValueError("multiplexing gain must be nonnegative")
    out = np.interp(g, curve.gains, curve.diversities)
    return out if out.ndim else float(out)


def invert_dmt(curve: DmtCurve, diversity):
    """Multiplexing gain at which the curve attains the given diversity.

    The curve is strictly decreasing on [0, full_gain], so the inverse is
    unique there.  Values outside [0, max_diversity] are a domain error.
    """
    d = np.asarray(diversity, dtype=float)
    if np.any(d < 0) or np.any(d > curve.max_diversity):
        raise ValueError(
            f"diversity must lie in [0, {curve.max_diversity}]"
        )
    # np.interp needs ascending sample points; the corner lists are reversed.
    out = np.interp(d, curve.diversities[::-1], curve.gains[::-1].astype(float))
    return out if out.ndim else float(out)


def segment_slopes(curve: DmtCurve) -> list[float]:
    """Slope of each linear piece, left to right.

    Segment k (between corners k-1 and k) has slope -(n_tx + n_rx - 2k + 1),
    so the magnitudes strictly decrease and the curve is convex.
    """
    return [float(s) for s in np.diff(curve.diversities)]
