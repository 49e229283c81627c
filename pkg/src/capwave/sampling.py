"""Deterministic low-discrepancy sampling for the numerical audits.

Halton sequences (scrambled, seeded) drive every audit: the claims under test
are uniform statements over frequency sectors and time triangles, and
low-discrepancy points probe their extremes far more efficiently than
pseudo-random ones while staying reproducible.

Sampling is uniform in polar coordinates (radius and angle each uniform over
their intervals), not in area.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc

from .data import SectorRegion


def unit_samples(seed: int, count: int, dim: int) -> np.ndarray:
    """(count, dim) scrambled Halton points in the unit cube."""
    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    return sampler.random(count)


def to_interval(u: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return lo + (hi - lo) * u


def to_sector(u_radius: np.ndarray, u_angle: np.ndarray, region: SectorRegion):
    """Cartesian components of polar-uniform points in the region."""
    r = to_interval(u_radius, region.r_lo, region.r_hi)
    if region.dim == 1:
        return r, np.zeros_like(r)
    theta = region.half_angle * (2.0 * u_angle - 1.0)
    return r * np.cos(theta), r * np.sin(theta)


def to_time_triangle(u_outer: np.ndarray, u_inner: np.ndarray, cap: float):
    """(t, t') with 0 <= t' <= t <= cap."""
    t = cap * u_outer
    return t, t * u_inner


def sector_corner_probes(region: SectorRegion, n_factors: int) -> np.ndarray:
    """Deterministic boundary probes: every radius-endpoint/midpoint and
    angle-endpoint combination across the convolution factors.

    Extremes of the audited smooth ratios sit on or near the boundary of the
    sampling box, so these probes pin the measured extrema regardless of how
    the Halton points happen to fall.  Returns (count, 2 * n_factors) arrays
    of cartesian components, factor by factor.
    """
    radii = [region.r_lo, 0.5 * (region.r_lo + region.r_hi), region.r_hi]
    if region.dim == 2:
        angles = [-region.half_angle, 0.0, region.half_angle]
    else:
        angles = [0.0]
    singles = [
        (r * np.cos(a), r * np.sin(a)) for r in radii for a in angles
    ]
    count = len(singles) ** n_factors
    out = np.empty((count, 2 * n_factors))
    grids = np.meshgrid(*[np.arange(len(singles))] * n_factors, indexing="ij")
    flat = [g.ravel() for g in grids]
    coords = np.array(singles)
    for j, idx in enumerate(flat):
        out[:, 2 * j] = coords[idx, 0]
        out[:, 2 * j + 1] = coords[idx, 1]
    return out
