"""Dispersion relation of the linearized free surface and its exact propagator.

Linearized around a flat surface, each Fourier mode of the (height, potential)
pair evolves by the 2x2 system

    d/dt height    = |k| potential
    d/dt potential = -(g + tau |k|^2) height

whose angular frequency is w(r) = sqrt(g r + tau r^3) at radius r = |k|.  The
matrix exponential is assembled from three real even symbols:

    cosine         = cos(w t)
    height_gain    = sin(w t) r / w        (potential feeding height)
    potential_gain = -sin(w t) w / r       (height feeding potential)

with the r -> 0 limits (1, 0, -g t).  They satisfy
cosine^2 - height_gain * potential_gain = 1, and the flow conserves the
per-mode energy (g + tau r^2) |height|^2 + r |potential|^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .lattice import LatticeField, SurfaceState


@dataclass(frozen=True)
class DispersionLaw:
    """Gravity and surface-tension coefficients; both nonnegative, not both zero."""

    gravity: float = 1.0
    surface_tension: float = 1.0

    def __post_init__(self):
        if self.gravity < 0 or self.surface_tension < 0:
            raise ValueError("coefficients must be nonnegative")
        if self.gravity == 0 and self.surface_tension == 0:
            raise ValueError("at least one coefficient must be positive")

    @property
    def kind(self) -> str:
        if self.surface_tension == 0:
            return "gravity"
        if self.gravity == 0:
            return "surface-tension"
        return "gravity-capillary"

    def angular_frequency(self, radius):
        """w(r) = sqrt(g r + tau r^3)."""
        r = np.asarray(radius, dtype=np.float64)
        return np.sqrt(self.gravity * r + self.surface_tension * r**3)

    def restoring(self, radius):
        """g + tau r^2 = w(r)^2 / r, analytic through r = 0."""
        r = np.asarray(radius, dtype=np.float64)
        return self.gravity + self.surface_tension * r**2


class PropagatorSymbols(NamedTuple):
    cosine: np.ndarray
    height_gain: np.ndarray
    potential_gain: np.ndarray


def propagator_symbols(law: DispersionLaw, radius, t: float) -> PropagatorSymbols:
    """The three entries of the mode propagator at time t, safe at radius 0.

    sin(w t)/w is evaluated as t * sinc(w t / pi) so the zero-frequency limit
    and t = 0 need no special casing.
    """
    r = np.asarray(radius, dtype=np.float64)
    w = law.angular_frequency(r)
    sin_over_w = t * np.sinc(w * t / np.pi)
    return PropagatorSymbols(
        cosine=np.cos(w * t),
        height_gain=r * sin_over_w,
        potential_gain=-law.restoring(r) * sin_over_w,
    )


def apply_propagator(
    law: DispersionLaw, state: SurfaceState, t: float, swapped: bool = False
) -> SurfaceState:
    """Evolve a state by the linearized flow for time t (exact per mode).

    With swapped=True the two off-diagonal gains trade places, so height is
    driven through potential_gain and potential through height_gain.  The
    cubic-order assembly runs entirely in that transposed orientation.
    """
    lat = state.lattice
    sym = propagator_symbols(law, lat.radius, t)
    h, p = state.height, state.potential
    gain_hp = sym.potential_gain if swapped else sym.height_gain
    gain_ph = sym.height_gain if swapped else sym.potential_gain
    new_h = sym.cosine * h.hat + gain_hp * p.hat
    new_p = gain_ph * h.hat + sym.cosine * p.hat
    new_h[lat.nyquist_mask] = 0.0
    new_p[lat.nyquist_mask] = 0.0
    real = h.real and p.real
    return SurfaceState(
        LatticeField(lat, new_h, real=real), LatticeField(lat, new_p, real=real)
    )


def mode_energy(law: DispersionLaw, state: SurfaceState) -> float:
    """Conserved quadratic energy sum_k (g + tau r^2)|h_k|^2 + r |p_k|^2."""
    r = state.lattice.radius
    return float(
        np.sum(law.restoring(r) * np.abs(state.height.hat) ** 2)
        + np.sum(r * np.abs(state.potential.hat) ** 2)
    )
