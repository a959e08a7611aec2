"""Synthetic point processes and Monte Carlo envelopes.

All randomness flows through numpy's Philox 4x64 counter-based generator
keyed directly by the caller's seed, so every output is bit-reproducible
for a given (arguments, seed) pair regardless of platform.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import DistanceGrid, MarkedPointPattern, ObservationWindow, default_rgrid
from .errors import BadIntensity, BadNSim, TooFewPoints
from . import summaries


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _uniform_in_window(rng, window: ObservationWindow, n: int) -> np.ndarray:
    return rng.uniform(
        (window.x_min, window.y_min), (window.x_max, window.y_max), size=(n, 2)
    )


def poisson_csr(intensity: float, window: ObservationWindow, seed: int) -> np.ndarray:
    """Homogeneous Poisson pattern: Poisson count, uniform locations."""
    if not np.isfinite(intensity) or intensity < 0.0:
        raise BadIntensity(f"intensity must be nonnegative, got {intensity!r}")
    rng = _rng(seed)
    n = rng.poisson(intensity * window.area())
    return _uniform_in_window(rng, window, n)


def thomas_cluster(
    parent_intensity: float,
    mean_offspring: float,
    sigma: float,
    window: ObservationWindow,
    seed: int,
) -> np.ndarray:
    """Thomas process: Poisson parents, Gaussian-scattered offspring.

    Offspring landing outside the window are discarded, so the realized
    count falls slightly below parent_intensity * mean_offspring * area
    when sigma is large relative to the window.
    """
    if not np.isfinite(parent_intensity) or parent_intensity < 0.0:
        raise BadIntensity(f"parent intensity must be nonnegative, got {parent_intensity!r}")
    if not np.isfinite(mean_offspring) or mean_offspring < 0.0:
        raise BadIntensity(f"mean offspring must be nonnegative, got {mean_offspring!r}")
    if not np.isfinite(sigma) or sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    rng = _rng(seed)
    n_parents = rng.poisson(parent_intensity * window.area())
    parents = _uniform_in_window(rng, window, n_parents)
    litter = rng.poisson(mean_offspring, size=n_parents)
    centers = np.repeat(parents, litter, axis=0)
    points = centers + rng.normal(0.0, sigma, size=centers.shape) if len(centers) else centers
    inside = (
        (points[:, 0] >= window.x_min)
        & (points[:, 0] <= window.x_max)
        & (points[:, 1] >= window.y_min)
        & (points[:, 1] <= window.y_max)
    )
    return points[inside]


def matern_ii(
    proposal_intensity: float,
    hardcore_r: float,
    window: ObservationWindow,
    seed: int,
) -> np.ndarray:
    """Matern II hard-core thinning of a Poisson proposal pattern.

    Each proposal gets an independent uniform age; a point survives iff
    no younger-aged (smaller) proposal lies within hardcore_r. A zero
    radius disables thinning and returns the proposals unchanged.
    """
    if not np.isfinite(hardcore_r) or hardcore_r < 0.0:
        raise ValueError("hardcore radius must be nonnegative")
    if not np.isfinite(proposal_intensity) or proposal_intensity < 0.0:
        raise BadIntensity(f"proposal intensity must be nonnegative, got {proposal_intensity!r}")
    rng = _rng(seed)
    n = rng.poisson(proposal_intensity * window.area())
    proposals = _uniform_in_window(rng, window, n)
    if hardcore_r == 0.0 or n < 2:
        return proposals
    ages = rng.uniform(size=n)
    pairs = cKDTree(proposals).query_pairs(hardcore_r, output_type="ndarray")
    keep = np.ones(n, dtype=bool)
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        older_i = ages[i] < ages[j]
        keep[np.where(older_i, j, i)] = False
    return proposals[keep]


@dataclass(frozen=True, eq=False)
class Envelope:
    """Pointwise Monte Carlo envelope of one summary statistic.

    ``lo`` and ``hi`` are the rank-th smallest and largest simulated
    values per grid point; grid points where fewer than ``rank``
    simulations are defined carry NaN.
    """

    statistic_id: str
    r: DistanceGrid
    lo: np.ndarray
    hi: np.ndarray
    observed: np.ndarray
    n_sim: int
    rank: int
    seed: int


_ENVELOPE_STATISTICS = ("K", "L", "G", "F", "J", "PCF")


def _statistic_curve(statistic_id, points, window, rgrid):
    if statistic_id == "K":
        return summaries.k_function(points, window, rgrid).estimate
    if statistic_id == "L":
        return summaries.l_function(summaries.k_function(points, window, rgrid)).estimate
    if statistic_id == "G":
        return summaries.g_function(points, window, rgrid).estimate
    if statistic_id == "F":
        return summaries.f_function(points, window, rgrid).estimate
    if statistic_id == "J":
        g = summaries.g_function(points, window, rgrid)
        f = summaries.f_function(points, window, rgrid)
        return summaries.j_function(g, f).estimate
    if statistic_id == "PCF":
        return summaries.pcf(summaries.k_function(points, window, rgrid)).estimate
    raise ValueError(f"unknown statistic {statistic_id!r}; pick one of {_ENVELOPE_STATISTICS}")


def csr_envelope(
    pattern: MarkedPointPattern,
    statistic_id: str,
    n_sim: int,
    seed: int,
    rgrid: DistanceGrid | None = None,
    rank: int = 1,
) -> Envelope:
    """Envelope of a statistic under CSR at the pattern's own intensity.

    Simulates ``n_sim`` Poisson patterns matching the observed intensity
    on the same window, evaluates the chosen statistic on each, and takes
    pointwise rank-based bounds. Simulations too sparse to evaluate
    contribute NaN rows and are ignored pointwise.
    """
    if n_sim < 1:
        raise BadNSim(f"need at least one simulation, got {n_sim}")
    if rank < 1 or 2 * rank > n_sim + 1:
        raise BadNSim(f"rank must satisfy 1 <= rank <= (n_sim + 1) / 2, got {rank}")
    window = pattern.window
    if rgrid is None:
        rgrid = default_rgrid(window)
    observed = _statistic_curve(statistic_id, pattern.points, window, rgrid)
    intensity = pattern.n / window.area()
    sims = np.full((n_sim, rgrid.count), np.nan)
    for k in range(n_sim):
        points = poisson_csr(intensity, window, seed=seed + k)
        try:
            sims[k] = _statistic_curve(statistic_id, points, window, rgrid)
        except TooFewPoints:
            pass
    ordered = np.sort(sims, axis=0)  # NaN sorts last
    defined = np.sum(~np.isnan(sims), axis=0)
    idx = np.arange(rgrid.count)
    lo = np.where(defined >= rank, ordered[np.minimum(rank - 1, n_sim - 1), idx], np.nan)
    hi_pos = np.maximum(defined - rank, 0)
    hi = np.where(defined >= rank, ordered[hi_pos, idx], np.nan)
    return Envelope(statistic_id, rgrid, lo, hi, observed, n_sim, rank, seed)
