"""Rayleigh block-fading MIMO channels: sampling, capacity, outage, diversity.

Entries are complex Gaussian with independent zero-mean real and imaginary
parts of variance 1/2 (unit-variance entries overall).  Capacity uses the
identity input covariance with total power split across transmit antennas,
log2 det(I + (snr/n_tx) H H*), evaluated through the Gram matrix of the
smaller dimension for numerical stability at very large snr.

Monte Carlo estimation is organized in fixed-size blocks, each drawing from
its own counter-based substream, so results are bit-identical for a given
seed no matter how blocks are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dmt import AntennaConfig

BLOCK = 1 << 16
_LN2 = np.log(2.0)
_SQRT_HALF = np.sqrt(0.5)


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent deterministic generator for the worker identified by path."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=path)
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ChannelMatrix:
    """One n_rx x n_tx channel realization."""

    entries: np.ndarray


@dataclass(frozen=True)
class OutageEstimate:
    probability: float
    std_error: float
    trials: int
    snr: float
    rate: float


@dataclass(frozen=True)
class DiversityFit:
    """Log-log outage slope with the per-point estimates behind it."""

    slope: float
    points: list[OutageEstimate]
    excluded_snrs_db: list[float]


def sample_channel_batch(
    cfg: AntennaConfig, rng: np.random.Generator, count: int
) -> np.ndarray:
    """count matrices of shape (n_rx, n_tx), stacked along the first axis."""
    z = rng.standard_normal(size=(count, cfg.n_rx, cfg.n_tx, 2))
    return (z[..., 0] + 1j * z[..., 1]) * _SQRT_HALF


def sample_channel(cfg: AntennaConfig, rng: np.random.Generator) -> ChannelMatrix:
    """One channel draw; deterministic given the generator state."""
    return ChannelMatrix(entries=sample_channel_batch(cfg, rng, 1)[0])


def gram_eigenvalues(batch: np.ndarray) -> np.ndarray:
    """Eigenvalues of H H* (or H* H, whichever is smaller), per matrix.

    Input shape (count, n_rx, n_tx); output (count, min(n_rx, n_tx)),
    ascending and clipped at zero.  When the smaller side is 1 the single
    eigenvalue is just the squared Frobenius norm.
    """
    count, n_rx, n_tx = batch.shape
    if min(n_rx, n_tx) == 1:
        lam = np.abs(batch) ** 2
        return lam.reshape(count, -1).sum(axis=1, keepdims=True)
    if n_rx <= n_tx:
        gram = batch @ batch.conj().swapaxes(-2, -1)
    else:
        gram = batch.conj().swapaxes(-2, -1) @ batch
    return np.maximum(np.linalg.eigvalsh(gram), 0.0)


def capacity_from_eigenvalues(lam: np.ndarray, snr: float, n_tx: int) -> np.ndarray:
    """Capacity in bits per channel use from Gram eigenvalues, batched."""
    return np.log1p((snr / n_tx) * lam).sum(axis=-1) / _LN2


def capacity(h, snr: float, n_tx: int) -> float:
    """log2 det(I + (snr/n_tx) H H*) for a single matrix.

    Accepts a ChannelMatrix or a plain 2-D array.  Stable up to snr around
    1e12 and beyond thanks to log1p accumulation over eigenvalues.
    """
    if snr <= 0:
        raise ValueError("snr must be positive")
    entries = h.entries if isinstance(h, ChannelMatrix) else h
    entries = np.atleast_2d(np.asarray(entries, dtype=complex))
    if not np.all(np.isfinite(entries)):
        raise ValueError("channel matrix has non-finite entries")
    lam = gram_eigenvalues(entries[np.newaxis])
    return float(capacity_from_eigenvalues(lam, snr, n_tx)[0])


def outage_prob_siso_exact(snr: float, rate: float) -> float:
    """Closed-form 1x1 outage: the squared gain is unit-mean exponential,
    so P(capacity < rate) = 1 - exp(-(2**rate - 1)/snr)."""
    if snr <= 0:
        raise ValueError("snr must be positive")
    return float(-np.expm1(-(np.exp2(rate) - 1.0) / snr))


def outage_prob_mc(
    cfg: AntennaConfig, snr: float, rate: float, trials: int, seed: int
) -> OutageEstimate:
    """Fraction of sampled channels with capacity strictly below the rate."""
    if trials < 1:
        raise ValueError("trials must be positive")
    failures = 0
    done = 0
    block_index = 0
    while done < trials:
        count = min(BLOCK, trials - done)
        rng = substream(seed, block_index)
        lam = gram_eigenvalues(sample_channel_batch(cfg, rng, count))
        caps = capacity_from_eigenvalues(lam, snr, cfg.n_tx)
        failures += int((caps < rate).sum())
        done += count
        block_index += 1
    p = failures / trials
    return OutageEstimate(
        probability=p,
        std_error=float(np.sqrt(p * (1.0 - p) / trials)),
        trials=trials,
        snr=float(snr),
        rate=float(rate),
    )


def estimate_diversity(
    cfg: AntennaConfig,
    gain: float,
    snr_grid_db,
    trials: int,
    seed: int,
    rate_offset_bpcu: float = 0.0,
    exact: bool = False,
) -> DiversityFit:
    """Least-squares slope of -log10(outage) against log10(snr).

    Rates scale as gain*log2(snr) plus a fixed offset (set gain to 0 for a
    constant-rate sweep).  With exact=True the closed-form 1x1 outage
    replaces Monte Carlo.  Grid points with zero estimated outage cannot
    enter the log fit; they are dropped and flagged.
    """
    if exact and (cfg.n_tx, cfg.n_rx) != (1, 1):
        raise ValueError("the exact outage oracle only covers the 1x1 configuration")
    points: list[OutageEstimate] = []
    excluded: list[float] = []
    kept_db: list[float] = []
    for db in snr_grid_db:
        snr = 10.0 ** (db / 10.0)
        rate = gain * np.log2(snr) + rate_offset_bpcu
        if exact:
            est = OutageEstimate(
                probability=outage_prob_siso_exact(snr, rate),
                std_error=0.0,
                trials=trials,
                snr=snr,
                rate=float(rate),
            )
        else:
            est = outage_prob_mc(cfg, snr, rate, trials, seed)
        if est.probability <= 0.0:
            excluded.append(float(db))
            continue
        points.append(est)
        kept_db.append(float(db))
    if len(points) < 2:
        raise RuntimeError(
            "need at least two grid points with nonzero outage to fit a slope"
        )
    x = np.array([np.log10(p.snr) for p in points])
    y = -np.log10(np.array([p.probability for p in points]))
    slope = float(np.polyfit(x, y, 1)[0])
    return DiversityFit(slope=slope, points=points, excluded_snrs_db=excluded)
