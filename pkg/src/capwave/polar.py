"""Panel-structured polar quadrature for the continuum sector backend.

Frequency integrals over annular sectors are discretized by midpoint rules on
panels whose edges coincide with every region boundary the experiments care
about (datum band, output window, support annulus).  Aligning edges with those
boundaries keeps the sharp indicator factors exact: each node lies strictly
inside or strictly outside every region, never on an edge.

Weights carry the area element, r dr dtheta in 2d and dr in 1d, so plain
weighted sums approximate frequency-space integrals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .data import sector_membership


def _panel_midpoints(edges: Sequence[float], counts: Sequence[int]):
    """Midpoint nodes and cell widths, panel by panel."""
    if len(counts) != len(edges) - 1:
        raise ConfigError(
            f"need one count per panel: {len(edges) - 1} panels, {len(counts)} counts"
        )
    nodes = []
    widths = []
    for lo, hi, n in zip(edges[:-1], edges[1:], counts):
        if hi <= lo:
            raise ConfigError(f"panel edges must increase, got [{lo}, {hi}]")
        if n < 1:
            raise ConfigError("panel counts must be positive")
        step = (hi - lo) / n
        nodes.append(lo + step * (np.arange(n) + 0.5))
        widths.append(np.full(n, step))
    return np.concatenate(nodes), np.concatenate(widths)


@dataclass(frozen=True)
class PolarGrid:
    """Flat arrays of quadrature nodes in cartesian components.

    1d grids keep y identically zero and use dr weights.
    """

    dim: int
    x: np.ndarray
    y: np.ndarray
    weight: np.ndarray

    @property
    def size(self) -> int:
        return self.x.size

    @property
    def radius(self) -> np.ndarray:
        return np.hypot(self.x, self.y)

    def region_mask(self, r_lo: float, r_hi: float, half_angle: float) -> np.ndarray:
        return sector_membership(self.x, self.y, r_lo, r_hi, half_angle)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(self.weight * values))


def sector_quadrature(
    dim: int,
    radial_edges: Sequence[float],
    radial_counts: Sequence[int],
    angular_edges: Sequence[float] | None = None,
    angular_counts: Sequence[int] | None = None,
) -> PolarGrid:
    """Tensor midpoint grid over radial x angular panels.

    In 1d the angular arguments are ignored and nodes sit on the positive
    half-line at the radial midpoints.
    """
    r, dr = _panel_midpoints(radial_edges, radial_counts)
    if dim == 1:
        return PolarGrid(1, r.copy(), np.zeros_like(r), dr.copy())
    if dim != 2:
        raise ConfigError(f"dim must be 1 or 2, got {dim}")
    if angular_edges is None or angular_counts is None:
        raise ConfigError("2d sector quadrature needs angular edges and counts")
    theta, dtheta = _panel_midpoints(angular_edges, angular_counts)
    rr = np.repeat(r, theta.size)
    tt = np.tile(theta, r.size)
    ww = np.repeat(dr, theta.size) * np.tile(dtheta, r.size) * rr
    return PolarGrid(2, rr * np.cos(tt), rr * np.sin(tt), ww)


def weighted_norm(
    grid: PolarGrid,
    values: np.ndarray,
    sobolev_index: float,
    mask: np.ndarray | None = None,
) -> float:
    """Sobolev norm of coefficient values sampled on the grid."""
    density = grid.weight * (1.0 + grid.radius**2) ** sobolev_index * np.abs(values) ** 2
    if mask is not None:
        density = np.where(mask, density, 0.0)
    return float(np.sqrt(np.sum(density)))
