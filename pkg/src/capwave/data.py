"""Sector-concentrated initial data and the norms used by the growth runs.

The experiments start from a zero height and a velocity potential whose
coefficients equal a single amplitude on a high-frequency sector

    2d:  N <= |k| <= 2N, |angle| <= delta,   amplitude N^-(s+1)
    1d:  N <= k <= 2N (positive side only),  amplitude N^-(s+1/2)

measured in the pair spaces

    X^s = H^{s+1/2} x H^s   (height, potential),
    Y^s = H^{s-1/2} x H^s,

with the pair norm the sum of the component norms.  Iterates of such data stay
in larger sectors; SectorRegion describes those, both as continuum sets and as
lattice masks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .lattice import FrequencyLattice, LatticeField, SurfaceState, sobolev_norm

ROOT2 = math.sqrt(2.0)


def sector_membership(x, y, r_lo: float, r_hi: float, half_angle: float):
    """Pointwise test for the closed sector r_lo <= r <= r_hi, |angle| <= half_angle.

    One-dimensional callers pass y = 0; negative frequencies then sit at angle
    pi and fall outside whenever half_angle < pi.
    """
    r = np.hypot(x, y)
    ang = np.abs(np.arctan2(y, x))
    return (r >= r_lo) & (r <= r_hi) & (ang <= half_angle)


@dataclass(frozen=True)
class SectorRegion:
    """Annular sector in frequency space; in 1d just the radial band."""

    dim: int
    r_lo: float
    r_hi: float
    half_angle: float

    def mask(self, lattice: FrequencyLattice) -> np.ndarray:
        return sector_membership(lattice.kx, lattice.ky, self.r_lo, self.r_hi, self.half_angle)

    def continuum_measure(self) -> float:
        if self.dim == 1:
            return self.r_hi - self.r_lo
        return (self.r_hi**2 - self.r_lo**2) * self.half_angle

    def lattice_count(self, lattice: FrequencyLattice) -> int:
        return int(self.mask(lattice).sum())


@dataclass(frozen=True)
class SectorDatum:
    """Sector indicator data for the growth experiments."""

    dim: int
    scale: float
    half_angle: float
    sobolev_index: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        if self.scale <= 0:
            raise ConfigError("scale must be positive")
        if self.dim == 2 and not 0 < self.half_angle < math.pi / 2:
            raise ConfigError("half_angle must lie in (0, pi/2)")

    @property
    def amplitude(self) -> float:
        if self.dim == 2:
            return self.scale ** -(self.sobolev_index + 1.0)
        return self.scale ** -(self.sobolev_index + 0.5)

    @property
    def support(self) -> SectorRegion:
        return SectorRegion(self.dim, self.scale, 2.0 * self.scale, self.half_angle)

    def realize(self, lattice: FrequencyLattice) -> SurfaceState:
        """Grid realization: the indicator sampled at lattice points."""
        if lattice.dim != self.dim:
            raise ConfigError("lattice dimension does not match the datum")
        if 2 * self.scale > lattice.max_extent:
            raise ConfigError(
                f"datum support 2N = {2 * self.scale:g} exceeds lattice extent {lattice.max_extent}"
            )
        hat = np.where(self.support.mask(lattice), self.amplitude, 0.0).astype(np.complex128)
        return SurfaceState(
            LatticeField.zeros(lattice, real=False), LatticeField(lattice, hat, real=False)
        )


def make_sector_datum(dim: int, scale: float, half_angle: float, sobolev_index: float) -> SectorDatum:
    return SectorDatum(dim, scale, half_angle, sobolev_index)


def quadratic_support_region(datum: SectorDatum) -> SectorRegion:
    """Where sums of two datum frequencies can land."""
    n = datum.scale
    if datum.dim == 1:
        return SectorRegion(1, 2 * n, 4 * n, datum.half_angle)
    return SectorRegion(2, ROOT2 * n, 4 * n, datum.half_angle)


def output_region(datum: SectorDatum, order: int) -> SectorRegion:
    """The high-frequency window whose norm each iterate is measured on."""
    n = datum.scale
    if order == 2:
        if datum.dim == 1:
            return SectorRegion(1, 2 * n, 4 * n, datum.half_angle)
        return SectorRegion(2, 2 * n, 4 * n, 0.5 * datum.half_angle)
    if order == 3:
        if datum.dim == 1:
            return SectorRegion(1, 3 * n, 6 * n, datum.half_angle)
        return SectorRegion(2, 2 * n, 6 * n, datum.half_angle)
    raise ConfigError(f"order must be 2 or 3, got {order}")


def component_weights(s: float, space: str):
    """Sobolev indices (height, potential) of the pair space.

    "psi" selects the potential component alone at index s; the cubic-order
    growth records are read off that single component.
    """
    if space == "X":
        return s + 0.5, s
    if space == "Y":
        return s - 0.5, s
    if space == "psi":
        return None, s
    raise ConfigError(f"space must be 'X', 'Y' or 'psi', got {space!r}")


def state_norm(
    state: SurfaceState, s: float, space: str = "X", region_mask: np.ndarray | None = None
) -> float:
    """Pair norm: height and potential Sobolev norms summed."""
    s_h, s_p = component_weights(s, space)
    total = sobolev_norm(state.potential, s_p, region_mask)
    if s_h is not None:
        total += sobolev_norm(state.height, s_h, region_mask)
    return total


def datum_norm(datum: SectorDatum, n_nodes: int = 64) -> float:
    """Continuum H^s norm of the potential component of the datum.

    Gauss-Legendre in radius (the integrand is smooth); the angular factor is
    exact.  Height vanishes, so this is also the X^s and Y^s pair norm.
    """
    s = datum.sobolev_index
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    r = datum.scale * (1.5 + 0.5 * nodes)
    w = weights * 0.5 * datum.scale
    bracket = (1.0 + r * r) ** s
    if datum.dim == 2:
        integral = 2.0 * datum.half_angle * np.sum(w * bracket * r)
    else:
        integral = np.sum(w * bracket)
    return datum.amplitude * math.sqrt(integral)
