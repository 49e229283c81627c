"""Duhamel time quadrature and the second and third solution-expansion terms.

Expanding the solution map in the size of the data turns each order into a
Duhamel integral: propagate the variation forcing from the interior time to
the output time and integrate.  This module evaluates those integrals with
Gauss-Legendre nodes in time and two interchangeable frequency backends:

* grid: realize the sector datum on an FFT lattice, form the variation
  forcings with dealiased products (forcing.py), and propagate mode by mode.
* sector: evaluate the frequency-space convolution integrals directly on
  polar quadrature grids over the datum sector (_kernels.py), with the
  propagator entries inlined.  No lattice is involved, so the scale N can
  grow far beyond any FFT budget.

Orientation: the second-order term uses the true propagator; the entire
third-order assembly (first iterates, the nested second-order pair, and the
outer integral) runs with the off-diagonal gains swapped.  The two choices
agree on every scaling read off here; keeping them fixed per order makes the
backends directly comparable.

Sup-in-time norms are taken over a fixed fan of output times ending at the
requested horizon.  Every reported integral can be re-run with doubled time
nodes; a relative change above NODE_DOUBLING_TOL raises
QuadratureConvergenceError instead of returning a silently unconverged
number.

All entries guard the coherent-phase window: the horizon must keep every
propagator phase below pi/3, so cosine factors stay at least 1/2 on the
frequency regions in play.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._kernels import (
    cubic_sector_spectrum,
    qtilde_sector_spectrum,
    quad_sector_spectrum,
)
from .data import (
    SectorDatum,
    SectorRegion,
    component_weights,
    output_region,
    quadratic_support_region,
    state_norm,
)
from .dispersion import DispersionLaw, apply_propagator
from .errors import ConfigError, QuadratureConvergenceError
from .forcing import (
    mixed_cubic_forcing,
    mixed_weight,
    pure_cubic_forcing,
    quadratic_forcing,
    third_variation,
)
from .lattice import FrequencyLattice, SurfaceState
from .polar import PolarGrid, sector_quadrature, weighted_norm

OUTPUT_TIMES = 8
NODE_DOUBLING_TOL = 1e-8
DECOMPOSITION_TOL = 1e-12


@dataclass(frozen=True)
class QuadratureSpec:
    """Time-quadrature resolution and the horizon it serves.

    time_cap is the short-time horizon scale**(-cap_exponent)/100 under
    which the propagator phases stay coherent; outer_nodes integrates the
    forcing time, inner_nodes the nested second-order pair inside the
    third-order cross term.
    """

    time_cap: float
    cap_exponent: float = 1.5
    outer_nodes: int = 8
    inner_nodes: int = 8

    def __post_init__(self):
        if self.time_cap <= 0:
            raise ConfigError("time_cap must be positive")
        if self.outer_nodes < 4 or self.inner_nodes < 4:
            raise ConfigError("node counts must be at least 4")

    @classmethod
    def for_scale(
        cls,
        scale: float,
        cap_exponent: float = 1.5,
        outer_nodes: int = 8,
        inner_nodes: int = 8,
    ) -> "QuadratureSpec":
        return cls(scale**-cap_exponent / 100.0, cap_exponent, outer_nodes, inner_nodes)

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(
            self.time_cap, self.cap_exponent, 2 * self.outer_nodes, 2 * self.inner_nodes
        )


def check_cap_exponent(law: DispersionLaw, cap_exponent: float) -> None:
    """Reject horizons longer than the law admits.

    With surface tension the cap exponent must reach 3/2 to tame the r^{3/2}
    phase growth on the output regions; pure gravity only needs 1/2.
    """
    floor = 1.5 if law.surface_tension > 0 else 0.5
    if cap_exponent < floor - 1e-12:
        raise ConfigError(
            f"cap exponent {cap_exponent:g} below the admissible floor {floor:g}"
        )


def check_phase_window(law: DispersionLaw, max_radius: float, horizon: float) -> None:
    """Require cos(phase) >= 1/2 for every propagator factor in play."""
    phase = float(law.angular_frequency(max_radius)) * horizon
    if phase > math.pi / 3.0 + 1e-12:
        raise ConfigError(
            f"phase {phase:.3g} at radius {max_radius:g} leaves the coherent window"
            " (cosine factors would drop below 1/2); shorten the horizon"
        )


def output_times(horizon: float, count: int = OUTPUT_TIMES) -> np.ndarray:
    """Equally spaced sample times ending at the horizon."""
    if horizon <= 0:
        raise ConfigError("horizon must be positive")
    if count < 1:
        raise ConfigError("need at least one output time")
    return np.linspace(horizon / count, horizon, count)


def _gauss_rule(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _node_matrices(times: np.ndarray, n: int):
    """Nodes and weights of [0, t] for each t in times, shape (len(times), n)."""
    u, v = _gauss_rule(n)
    return times[:, None] * u[None, :], times[:, None] * v[None, :]


def duhamel(
    law: DispersionLaw,
    forcing: Callable[[float], SurfaceState],
    t: float,
    quad: QuadratureSpec,
    swapped: bool = False,
    n_nodes: int | None = None,
) -> SurfaceState:
    """Gauss-Legendre evaluation of int_0^t P(t - t') F(t') dt' on the lattice.

    forcing maps a time to the forcing SurfaceState; n_nodes overrides the
    outer node count (the nested second-order pair passes inner_nodes).
    """
    u, v = _gauss_rule(quad.outer_nodes if n_nodes is None else n_nodes)
    total = None
    for ui, vi in zip(u, v):
        tp = t * ui
        term = apply_propagator(law, forcing(tp), t - tp, swapped=swapped) * (t * vi)
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class SectorSpectrum:
    """Iterate spectrum sampled on a polar quadrature grid."""

    grid: PolarGrid
    height: np.ndarray
    potential: np.ndarray

    def __add__(self, other: "SectorSpectrum") -> "SectorSpectrum":
        if other.grid is not self.grid:
            raise ConfigError("spectra live on different grids")
        return SectorSpectrum(
            self.grid, self.height + other.height, self.potential + other.potential
        )

    def __mul__(self, scalar: float) -> "SectorSpectrum":
        return SectorSpectrum(self.grid, scalar * self.height, scalar * self.potential)

    __rmul__ = __mul__


def spectrum_norm(
    spectrum: SectorSpectrum,
    s: float,
    space: str = "X",
    region: SectorRegion | None = None,
) -> float:
    """Pair Sobolev norm of a sector spectrum, optionally region-restricted."""
    s_h, s_p = component_weights(s, space)
    mask = None
    if region is not None:
        mask = spectrum.grid.region_mask(region.r_lo, region.r_hi, region.half_angle)
    total = weighted_norm(spectrum.grid, spectrum.potential, s_p, mask)
    if s_h is not None:
        total += weighted_norm(spectrum.grid, spectrum.height, s_h, mask)
    return total


@dataclass(frozen=True)
class IterateResult:
    """One expansion order evaluated at the sampled output times.

    states holds the whole iterate per time; at third order mixed_states and
    pure_states carry the weighted cross piece and the pure-cubic piece whose
    pointwise sum is the whole (decomposition_residual reports the worst
    relative failure of that identity).  sup_norms maps region labels to
    sup-in-time norms measured with (sobolev_index, norm_space).
    """

    backend: str
    order: int
    times: np.ndarray
    states: tuple
    region: SectorRegion
    support_region: SectorRegion | None
    sup_norms: dict
    sobolev_index: float
    norm_space: str
    mixed_states: tuple | None = None
    pure_states: tuple | None = None
    decomposition_residual: float | None = None

    def norm_at(self, index: int, region: SectorRegion | None = None, space: str | None = None) -> float:
        """Norm of the whole iterate at one output time."""
        return _region_norm(
            self.states[index],
            self.sobolev_index,
            space or self.norm_space,
            region if region is not None else self.region,
        )


def _region_norm(state, s: float, space: str, region: SectorRegion | None) -> float:
    if isinstance(state, SectorSpectrum):
        return spectrum_norm(state, s, space, region)
    mask = region.mask(state.lattice) if region is not None else None
    return state_norm(state, s, space, region_mask=mask)


def _sup_norm(states: Sequence, s: float, space: str, region: SectorRegion) -> float:
    return max(_region_norm(st, s, space, region) for st in states)


def _default_space(law: DispersionLaw, order: int) -> str:
    if order == 3:
        return "psi"
    return "X" if law.surface_tension > 0 else "Y"


def _support_tuple(datum: SectorDatum):
    return (datum.scale, 2.0 * datum.scale, datum.half_angle)


def _grid_lattice(datum: SectorDatum, reach: float, lattice: FrequencyLattice | None):
    if lattice is None:
        return FrequencyLattice.for_max_frequency(
            datum.dim, reach * datum.scale + 1.0, 1.0
        )
    if lattice.dim != datum.dim:
        raise ConfigError("lattice dimension does not match the datum")
    if lattice.max_extent < reach * datum.scale:
        raise ConfigError(
            f"lattice extent {lattice.max_extent} cannot hold output radii up to"
            f" {reach * datum.scale:g}"
        )
    return lattice


def _check_sector_nodes(radial_nodes: int, angular_nodes: int) -> None:
    # the derived grids split these counts into panel blocks
    if radial_nodes < 16 or radial_nodes % 16:
        raise ConfigError("radial_nodes must be a positive multiple of 16")
    if angular_nodes < 4 or angular_nodes % 4:
        raise ConfigError("angular_nodes must be a positive multiple of 4")


def _datum_grid(datum: SectorDatum, radial_nodes: int, angular_nodes: int) -> PolarGrid:
    n, d = datum.scale, datum.half_angle
    if datum.dim == 1:
        return sector_quadrature(1, [n, 2 * n], [4 * radial_nodes])
    return sector_quadrature(2, [n, 2 * n], [radial_nodes], [-d, d], [angular_nodes])


def _quad_output_grid(datum: SectorDatum, radial_nodes: int, angular_nodes: int) -> PolarGrid:
    """Panel grid over the reachable second-order window.

    Panel edges sit on the measurement-region boundaries (radius 2N, angles
    +-delta/2) so region masks pick up whole panels exactly.
    """
    n, d = datum.scale, datum.half_angle
    if datum.dim == 1:
        return sector_quadrature(1, [2 * n, 4 * n], [radial_nodes // 2])
    return sector_quadrature(
        2,
        [math.sqrt(2.0) * n, 2 * n, 4 * n],
        [3 * radial_nodes // 16, 5 * radial_nodes // 16],
        [-d, -d / 2, d / 2, d],
        [angular_nodes // 4, angular_nodes // 2, angular_nodes // 4],
    )


def _cubic_inner_grid(datum: SectorDatum, radial_nodes: int, angular_nodes: int) -> PolarGrid:
    # two nested frequency sums: keep the per-factor grid coarser
    n, d = datum.scale, datum.half_angle
    if datum.dim == 1:
        return sector_quadrature(1, [n, 2 * n], [radial_nodes])
    return sector_quadrature(
        2, [n, 2 * n], [radial_nodes // 4], [-d, d], [angular_nodes // 4]
    )


def _cubic_output_grid(datum: SectorDatum, radial_nodes: int, angular_nodes: int) -> PolarGrid:
    n, d = datum.scale, datum.half_angle
    if datum.dim == 1:
        return sector_quadrature(1, [3 * n, 6 * n], [radial_nodes])
    return sector_quadrature(
        2,
        [2 * n, 3 * n, 6 * n],
        [radial_nodes // 8, 3 * radial_nodes // 8],
        [-d, d],
        [angular_nodes // 2],
    )


def _mixed_pair_grid(datum: SectorDatum, radial_nodes: int, angular_nodes: int) -> PolarGrid:
    """Integration grid over the second-order support for the cross term."""
    n, d = datum.scale, datum.half_angle
    if datum.dim == 1:
        return sector_quadrature(1, [2 * n, 4 * n], [radial_nodes])
    return sector_quadrature(
        2,
        [math.sqrt(2.0) * n, 2 * n, 4 * n],
        [3 * radial_nodes // 16, 5 * radial_nodes // 16],
        [-d, d],
        [angular_nodes // 2],
    )


def _second_states_grid(law, datum, times, quad, lattice):
    start = datum.realize(lattice)

    def force(tp):
        u1 = apply_propagator(law, start, tp)
        return quadratic_forcing(u1.height, u1.potential)

    return tuple(duhamel(law, force, tm, quad) for tm in times)


def _second_states_sector(law, datum, times, quad, radial_nodes, angular_nodes):
    inner = _datum_grid(datum, radial_nodes, angular_nodes)
    out = _quad_output_grid(datum, radial_nodes, angular_nodes)
    nodes, weights = _node_matrices(times, quad.outer_nodes)
    h, p = quad_sector_spectrum(
        out.x, out.y, inner.x, inner.y, inner.weight,
        _support_tuple(datum), datum.amplitude,
        law.gravity, law.surface_tension, times, nodes, weights,
    )
    # the kernel returns the bare bilinear integral; the variation carries 2
    return tuple(
        SectorSpectrum(out, 2.0 * h[m], 2.0 * p[m]) for m in range(times.size)
    )


def _third_states_grid(law, datum, times, quad, lattice):
    start = datum.realize(lattice)
    weight = mixed_weight(datum.dim)

    def first(tp):
        return apply_propagator(law, start, tp, swapped=True)

    def quad_force(s):
        u1 = first(s)
        return quadratic_forcing(u1.height, u1.potential)

    wholes, mixeds, pures = [], [], []
    for tm in times:
        cache = {}

        def second_pair(tp):
            if tp not in cache:
                cache[tp] = duhamel(
                    law, quad_force, tp, quad, swapped=True, n_nodes=quad.inner_nodes
                )
            return cache[tp]

        def mixed_force(tp):
            u1, u2 = first(tp), second_pair(tp)
            return mixed_cubic_forcing(u1.height, u1.potential, u2.height, u2.potential)

        def pure_force(tp):
            u1 = first(tp)
            return pure_cubic_forcing(u1.height, u1.potential, law.surface_tension)

        def whole_force(tp):
            u1, u2 = first(tp), second_pair(tp)
            return third_variation(
                u1.height, u1.potential, u2.height, u2.potential, law.surface_tension
            )

        mixeds.append(weight * duhamel(law, mixed_force, tm, quad, swapped=True))
        pures.append(duhamel(law, pure_force, tm, quad, swapped=True))
        wholes.append(duhamel(law, whole_force, tm, quad, swapped=True))
    return tuple(wholes), tuple(mixeds), tuple(pures)


def _third_states_sector(law, datum, times, quad, radial_nodes, angular_nodes):
    support = _support_tuple(datum)
    amp = datum.amplitude
    out = _cubic_output_grid(datum, radial_nodes, angular_nodes)
    nodes, weights = _node_matrices(times, quad.outer_nodes)

    inner = _cubic_inner_grid(datum, radial_nodes, angular_nodes)
    ch, cp = cubic_sector_spectrum(
        out.x, out.y, inner.x, inner.y, inner.weight, support, amp,
        law.gravity, law.surface_tension, times, nodes, weights,
    )

    # cross term: tabulate the second-order pair at every forcing-time node
    # on a grid over its support, then integrate it against the first order
    pair_grid = _mixed_pair_grid(datum, radial_nodes, angular_nodes)
    datum_grid = _datum_grid(datum, radial_nodes, angular_nodes)
    t_flat = nodes.reshape(-1)
    nodes2, weights2 = _node_matrices(t_flat, quad.inner_nodes)
    h2, p2 = quad_sector_spectrum(
        pair_grid.x, pair_grid.y, datum_grid.x, datum_grid.y, datum_grid.weight,
        support, amp, law.gravity, law.surface_tension,
        t_flat, nodes2, weights2, swapped=True,
    )
    table_shape = nodes.shape + (pair_grid.size,)
    qh, qp = qtilde_sector_spectrum(
        out.x, out.y, pair_grid.x, pair_grid.y, pair_grid.weight,
        2.0 * h2.reshape(table_shape), 2.0 * p2.reshape(table_shape),
        support, amp, law.gravity, law.surface_tension, times, nodes, weights,
    )

    weight = mixed_weight(datum.dim)
    mixeds = tuple(
        SectorSpectrum(out, weight * qh[m], weight * qp[m]) for m in range(times.size)
    )
    pures = tuple(SectorSpectrum(out, ch[m], cp[m]) for m in range(times.size))
    wholes = tuple(m + c for m, c in zip(mixeds, pures))
    return wholes, mixeds, pures


def _pair_arrays(state):
    if isinstance(state, SectorSpectrum):
        return state.height, state.potential
    return state.height.hat, state.potential.hat


def _states_change(base, refined) -> float:
    worst = 0.0
    for a, b in zip(base, refined):
        ah, ap = _pair_arrays(a)
        bh, bp = _pair_arrays(b)
        scale = math.hypot(np.linalg.norm(ah), np.linalg.norm(ap))
        diff = math.hypot(np.linalg.norm(ah - bh), np.linalg.norm(ap - bp))
        if scale > 0:
            worst = max(worst, diff / scale)
        elif diff > 0:
            worst = max(worst, math.inf)
    return worst


def _require_convergence(base, refined, label: str) -> None:
    change = _states_change(base, refined)
    if not change < NODE_DOUBLING_TOL:
        raise QuadratureConvergenceError(
            f"{label}: doubling the time nodes moved the result by {change:.3e}"
            f" (tolerance {NODE_DOUBLING_TOL:g})"
        )


def _validate_backend(backend: str) -> None:
    if backend not in ("grid", "sector"):
        raise ConfigError(f"backend must be 'grid' or 'sector', got {backend!r}")


def second_iterate(
    law: DispersionLaw,
    datum: SectorDatum,
    t: float,
    quad: QuadratureSpec,
    backend: str = "sector",
    *,
    lattice: FrequencyLattice | None = None,
    radial_nodes: int = 64,
    angular_nodes: int = 32,
    norm_space: str | None = None,
    n_times: int = OUTPUT_TIMES,
    check_convergence: bool = False,
) -> IterateResult:
    """Second expansion term over [0, t], sampled at n_times output times.

    Norms are reported over the measurement window (sup_norms key
    "output_region") and over the full reachable support ("support_region"),
    at the datum's Sobolev index in norm_space (default: the pair space the
    law pairs with).
    """
    _validate_backend(backend)
    check_cap_exponent(law, quad.cap_exponent)
    support = quadratic_support_region(datum)
    check_phase_window(law, support.r_hi, t)
    times = output_times(t, n_times)
    space = norm_space or _default_space(law, 2)

    if backend == "grid":
        lat = _grid_lattice(datum, 4.0, lattice)
        states = _second_states_grid(law, datum, times, quad, lat)
        if check_convergence:
            refined = _second_states_grid(law, datum, times, quad.doubled(), lat)
            _require_convergence(states, refined, "second iterate (grid)")
    else:
        _check_sector_nodes(radial_nodes, angular_nodes)
        states = _second_states_sector(law, datum, times, quad, radial_nodes, angular_nodes)
        if check_convergence:
            refined = _second_states_sector(
                law, datum, times, quad.doubled(), radial_nodes, angular_nodes
            )
            _require_convergence(states, refined, "second iterate (sector)")

    region = output_region(datum, 2)
    s = datum.sobolev_index
    sup_norms = {
        "output_region": _sup_norm(states, s, space, region),
        "support_region": _sup_norm(states, s, space, support),
    }
    return IterateResult(
        backend=backend,
        order=2,
        times=times,
        states=states,
        region=region,
        support_region=support,
        sup_norms=sup_norms,
        sobolev_index=s,
        norm_space=space,
    )


def third_iterate(
    law: DispersionLaw,
    datum: SectorDatum,
    t: float,
    quad: QuadratureSpec,
    backend: str = "sector",
    *,
    lattice: FrequencyLattice | None = None,
    radial_nodes: int = 64,
    angular_nodes: int = 32,
    norm_space: str | None = None,
    n_times: int = OUTPUT_TIMES,
    check_convergence: bool = False,
) -> IterateResult:
    """Third expansion term with its cross/pure decomposition.

    The cross piece carries its dimensional weight (3 in 2d, 6 in 1d); the
    whole iterate minus the pointwise piece sum is reported as
    decomposition_residual.  Piece norms land in sup_norms under
    "mixed_piece" and "pure_piece"; the whole under "output_region".
    """
    _validate_backend(backend)
    check_cap_exponent(law, quad.cap_exponent)
    region = output_region(datum, 3)
    check_phase_window(law, region.r_hi, t)
    times = output_times(t, n_times)
    space = norm_space or _default_space(law, 3)

    if backend == "grid":
        lat = _grid_lattice(datum, 6.0, lattice)
        wholes, mixeds, pures = _third_states_grid(law, datum, times, quad, lat)
        if check_convergence:
            refined = _third_states_grid(law, datum, times, quad.doubled(), lat)
            _require_convergence(wholes, refined[0], "third iterate (grid)")
    else:
        _check_sector_nodes(radial_nodes, angular_nodes)
        wholes, mixeds, pures = _third_states_sector(
            law, datum, times, quad, radial_nodes, angular_nodes
        )
        if check_convergence:
            refined = _third_states_sector(
                law, datum, times, quad.doubled(), radial_nodes, angular_nodes
            )
            _require_convergence(wholes, refined[0], "third iterate (sector)")

    residual = 0.0
    for whole, mixed, pure in zip(wholes, mixeds, pures):
        wh, wp = _pair_arrays(whole)
        mh, mp = _pair_arrays(mixed)
        ph, pp = _pair_arrays(pure)
        scale = math.hypot(np.linalg.norm(wh), np.linalg.norm(wp))
        gap = math.hypot(
            np.linalg.norm(wh - mh - ph), np.linalg.norm(wp - mp - pp)
        )
        if scale > 0:
            residual = max(residual, gap / scale)

    s = datum.sobolev_index
    sup_norms = {
        "output_region": _sup_norm(wholes, s, space, region),
        "mixed_piece": _sup_norm(mixeds, s, space, region),
        "pure_piece": _sup_norm(pures, s, space, region),
    }
    return IterateResult(
        backend=backend,
        order=3,
        times=times,
        states=wholes,
        region=region,
        support_region=None,
        sup_norms=sup_norms,
        sobolev_index=s,
        norm_space=space,
        mixed_states=mixeds,
        pure_states=pures,
        decomposition_residual=residual,
    )
