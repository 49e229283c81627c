"""Sampled numerical audits of the support, magnitude, and propagator bounds.

Each audit draws seeded low-discrepancy samples from the datum sector(s),
appends deterministic boundary probes (the extrema of the audited smooth
ratios sit on or near the sampling-box boundary), evaluates the exact
closed-form quantity under test, and reports the measured extrema against a
claimed band.  A check passes iff the measured range is contained in the band.

Bands fall in three groups:
  * exact support/sign facts (output radius and angle windows, one-sided
    symbol signs),
  * explicit constant chains (the transport ratio cap 4, the bernoulli window
    [1/2, 4], the cubic caps below, the propagator parasite caps),
  * one calibrated band: the quartic curvature-symbol ratio, measured densely
    once at scale 64 and frozen with 10% slack (CURVATURE_BAND).

The double-sine parasite cap for laws with surface tension is kept as claimed
even though it is not attainable: the phase bound behind it caps the fastest
admissible phase at 3/100 while the top of the output band actually reaches
8/100, so the measured ratio lands near 1.77 times the cap and the check
reports FAIL.  See the README note on the expected red check.

One adjacent constant is corrected rather than left red: the angle between
the output frequency and the inner frequency ranges over [0, 2 delta] (two
sector vectors at opposite edges), not [0, delta], so the inner-sine parasite
cap carries the angle factor 2 delta^2 instead of delta^2 / 2.  The measured
maximum sits at 1/3 of the corrected cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import SectorDatum, SectorRegion, output_region, quadratic_support_region
from .dispersion import DispersionLaw, propagator_symbols
from .errors import ConfigError
from .dno import dn_term, dn_term_recursive
from .lattice import FrequencyLattice, LatticeField, inner_product
from .sampling import sector_corner_probes, to_sector, to_time_triangle, unit_samples
from .symbols import (
    bernoulli_symbol,
    cubic_bernoulli_symbol,
    cubic_height_symbol,
    curvature_symbol,
    transport_symbol,
)

ROOT2 = math.sqrt(2.0)

# dense calibration at scale 64, half-angle 0.05: 2d range [-144.06, -8.93],
# 1d exactly [-144, -9]; frozen with 10% slack
CURVATURE_BAND = (-158.5, -8.0)

# triangle-inequality chains over the cubic support, in units of scale^3:
# height symbol 3 * 6 * 2 * (8 - 2 sqrt 2) in 2d, 3 * 6 * 2 * 4 in 1d;
# bernoulli-gradient symbol 6 * 2 * 2 * 3 in both
CUBIC_HEIGHT_CAP = {1: 144.0, 2: 36.0 * (8.0 - 2.0 * ROOT2)}
CUBIC_BERNOULLI_CAP = 72.0

DOMINANT_TERM_BAND = (1.0 / 16.0, 1.0)
COMBINATION_BAND = (1.0 / 32.0, 8.0)


@dataclass(frozen=True)
class AuditReport:
    check: str
    samples: int
    measured_min: float
    measured_max: float
    claimed_band: tuple
    passed: bool
    worst_point: tuple

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_json_dict(self) -> dict:
        return {
            "check": self.check,
            "status": self.status,
            "measured_min": self.measured_min,
            "measured_max": self.measured_max,
            "claimed_band": list(self.claimed_band),
            "worst_point": list(self.worst_point),
        }


def _report(check: str, values: np.ndarray, band: tuple, points: np.ndarray) -> AuditReport:
    values = np.asarray(values, dtype=float)
    i_min = int(np.argmin(values))
    i_max = int(np.argmax(values))
    lo = float(values[i_min])
    hi = float(values[i_max])
    passed = band[0] <= lo and hi <= band[1]
    # worst point: the sample on the side with less margin (or past the edge)
    worst = i_max if (band[1] - hi) <= (lo - band[0]) else i_min
    return AuditReport(
        check=check,
        samples=values.size,
        measured_min=lo,
        measured_max=hi,
        claimed_band=(float(band[0]), float(band[1])),
        passed=passed,
        worst_point=tuple(float(c) for c in np.atleast_2d(points)[worst]),
    )


def _sector_factors(region: SectorRegion, n_factors: int, samples: int, seed: int):
    """Halton samples plus corner probes, as a (count, 2 n_factors) array."""
    if samples < 1:
        raise ConfigError("need at least one sample")
    u = unit_samples(seed, samples, 2 * n_factors)
    cols = []
    for j in range(n_factors):
        x, y = to_sector(u[:, 2 * j], u[:, 2 * j + 1], region)
        cols.extend([x, y])
    halton = np.column_stack(cols)
    return np.vstack([halton, sector_corner_probes(region, n_factors)])


def support_and_bound_audit(
    dim: int,
    scale: float,
    half_angle: float,
    order: int,
    tension: float = 1.0,
    samples: int = 100_000,
    seed: int = 0,
) -> list[AuditReport]:
    """Output-window membership and symbol-magnitude checks at sampled
    frequency tuples drawn from the datum sector."""
    if scale <= 0 or half_angle <= 0:
        raise ConfigError("degenerate sector: need scale > 0 and half_angle > 0")
    if half_angle > math.pi / 2:
        raise ConfigError("half_angle must not exceed pi/2")
    if order not in (2, 3):
        raise ConfigError(f"order must be 2 or 3, got {order}")
    band_I = SectorRegion(dim, scale, 2.0 * scale, half_angle)
    n_factors = order - 1 + 1  # 2 factors for quadratic, 3 for cubic
    pts = _sector_factors(band_I, n_factors, samples, seed)
    xs = [pts[:, 2 * j] for j in range(n_factors)]
    ys = [pts[:, 2 * j + 1] for j in range(n_factors)]
    xi_x = sum(xs)
    xi_y = sum(ys)
    radius = np.hypot(xi_x, xi_y) / scale
    reports = []
    tag = "quadratic" if order == 2 else "cubic"
    if order == 2:
        radial_band = (ROOT2, 4.0) if dim == 2 else (2.0, 4.0)
    else:
        radial_band = (2.0, 6.0) if dim == 2 else (3.0, 6.0)
    reports.append(_report(f"{tag}-support-radius-{dim}d", radius, radial_band, pts))
    if dim == 2:
        angle = np.abs(np.arctan2(xi_y, xi_x)) / half_angle
        reports.append(_report(f"{tag}-support-angle-{dim}d", angle, (0.0, 1.0), pts))
    if order == 2:
        m1 = transport_symbol(xi_x, xi_y, xs[1], ys[1])
        m2 = bernoulli_symbol(xi_x, xi_y, xs[1], ys[1])
        m1_band = (0.0, 4.0) if dim == 2 else (0.0, 0.0)
        reports.append(
            _report(
                f"transport-symbol-ratio-{dim}d",
                np.abs(m1) / (scale**2 * half_angle**2),
                m1_band,
                pts,
            )
        )
        reports.append(
            _report(f"bernoulli-symbol-ratio-{dim}d", m2 / scale**2, (0.5, 4.0), pts)
        )
    else:
        p1 = cubic_height_symbol(xi_x, xi_y, xs[1], ys[1], xs[2], ys[2])
        p21 = cubic_bernoulli_symbol(xi_x, xi_y, xs[1], ys[1], xs[2], ys[2])
        p22 = curvature_symbol(xi_x, xi_y, xs[1], ys[1], xs[2], ys[2], tension)
        reports.append(
            _report(
                f"cubic-height-symbol-ratio-{dim}d",
                np.abs(p1) / scale**3,
                (0.0, CUBIC_HEIGHT_CAP[dim]),
                pts,
            )
        )
        reports.append(
            _report(
                f"cubic-bernoulli-symbol-ratio-{dim}d",
                np.abs(p21) / scale**3,
                (0.0, CUBIC_BERNOULLI_CAP),
                pts,
            )
        )
        if tension > 0:
            curv_values = p22 / (tension * scale**4)
            curv_band = CURVATURE_BAND
        else:
            curv_values = p22
            curv_band = (0.0, 0.0)
        reports.append(
            _report(f"curvature-symbol-ratio-{dim}d", curv_values, curv_band, pts)
        )
    return reports


def _time_probes(cap: float) -> np.ndarray:
    fractions = [(1.0, 0.0), (1.0, 0.25), (1.0, 0.5), (1.0, 0.75), (1.0, 1.0), (0.5, 0.5)]
    return np.array([(cap * f_t, cap * f_t * f_s) for f_t, f_s in fractions])


def propagator_combo_audit(
    law: DispersionLaw,
    dim: int,
    scale: float,
    half_angle: float,
    cap_exponent: float,
    samples: int = 100_000,
    seed: int = 0,
) -> list[AuditReport]:
    """Bounds on the four-term propagator/symbol combination that drives the
    quadratic growth window, over sampled frequency pairs and time pairs."""
    if law.surface_tension > 0 and cap_exponent < 1.5:
        raise ConfigError("laws with surface tension need cap_exponent >= 3/2")
    if law.surface_tension == 0 and cap_exponent < 0.5:
        raise ConfigError("the pure-gravity law needs cap_exponent >= 1/2")
    cap = scale**-cap_exponent / 100.0
    band_I = SectorRegion(dim, scale, 2.0 * scale, half_angle)
    u = unit_samples(seed, samples, 2 * 2 + 2)
    zx, zy = to_sector(u[:, 0], u[:, 1], band_I)
    ex, ey = to_sector(u[:, 2], u[:, 3], band_I)
    t, t_in = to_time_triangle(u[:, 4], u[:, 5], cap)
    halton = np.column_stack([zx, zy, ex, ey, t, t_in])
    corners = sector_corner_probes(band_I, 2)
    times = _time_probes(cap)
    probe = np.hstack(
        [
            np.repeat(corners, times.shape[0], axis=0),
            np.tile(times, (corners.shape[0], 1)),
        ]
    )
    pts = np.vstack([halton, probe])
    zx, zy, ex, ey, t, t_in = (pts[:, j] for j in range(6))
    xi_x, xi_y = zx + ex, zy + ey
    r_xi = np.hypot(xi_x, xi_y)
    r_z = np.hypot(zx, zy)
    r_e = np.hypot(ex, ey)
    outer = propagator_symbols(law, r_xi, t - t_in)
    inner_z = propagator_symbols(law, r_z, t_in)
    inner_e = propagator_symbols(law, r_e, t_in)
    m1 = transport_symbol(xi_x, xi_y, ex, ey)
    m2 = bernoulli_symbol(xi_x, xi_y, ex, ey)
    denom = r_z * r_e
    double_sine = outer.potential_gain * m1 * inner_z.height_gain * inner_e.cosine
    dominant = outer.cosine * m2 * inner_z.cosine * inner_e.cosine
    outer_sine = outer.height_gain * m2 * inner_z.cosine * inner_e.cosine
    inner_sine = outer.cosine * m1 * inner_z.height_gain * inner_e.cosine
    kind = law.kind
    reports = [
        _report(
            f"combination-dominant-term-{kind}",
            dominant / denom,
            DOMINANT_TERM_BAND,
            pts,
        )
    ]
    if law.surface_tension > 0:
        parasite_cap = 0.5 * half_angle**2 * (3.0 / 100.0) ** 2
        drift = scale ** (1.0 - cap_exponent) / 100.0
        reports.append(
            _report(
                f"combination-double-sine-parasite-{kind}",
                np.abs(double_sine) / denom,
                (0.0, parasite_cap),
                pts,
            )
        )
        reports.append(
            _report(
                f"combination-outer-sine-parasite-{kind}",
                np.abs(outer_sine) / denom,
                (0.0, 4.0 * drift),
                pts,
            )
        )
        # cap: 2 delta^2 (the full 2-delta angle spread) times |xi| t' <= 4 N T
        reports.append(
            _report(
                f"combination-inner-sine-parasite-{kind}",
                np.abs(inner_sine) / denom,
                (0.0, 8.0 * half_angle**2 * drift),
                pts,
            )
        )
        total = double_sine + dominant + outer_sine + inner_sine
    else:
        parasite_cap = half_angle**2 * (1.0 / 50.0) ** 2
        reports.append(
            _report(
                f"combination-double-sine-parasite-{kind}",
                np.abs(double_sine) / denom,
                (0.0, parasite_cap),
                pts,
            )
        )
        total = double_sine + dominant
    reports.append(
        _report(
            f"combination-magnitude-{kind}", np.abs(total) / scale**2, COMBINATION_BAND, pts
        )
    )
    return reports


def frequency_combination_audit(
    law: DispersionLaw,
    dim: int,
    scale: float,
    half_angle: float,
    samples: int = 50_000,
    seed: int = 0,
) -> list[AuditReport]:
    """Magnitude of the four sign combinations of dispersion frequencies over
    cubic-support triples.

    Only the all-plus combination has a positive pointwise floor (3 at the
    triple bottom corner, in units of scale^{3/2}); the other three vanish on
    resonant surfaces inside the support, so for them the audit checks the
    upper cap, that samples do approach zero, and that the median sits at the
    same power of the scale.
    """
    band_I = SectorRegion(dim, scale, 2.0 * scale, half_angle)
    pts = _sector_factors(band_I, 3, samples, seed)
    radii = [np.hypot(pts[:, 2 * j], pts[:, 2 * j + 1]) for j in range(3)]
    lam = [law.angular_frequency(r) for r in radii]
    unit = scale**1.5
    combos = {
        "plus-plus": (lam[0] + lam[1] + lam[2]) / unit,
        "plus-minus": (lam[0] + lam[1] - lam[2]) / unit,
        "minus-plus": (lam[0] - lam[1] + lam[2]) / unit,
        "minus-minus": (lam[0] - lam[1] - lam[2]) / unit,
    }
    reports = [
        _report(
            "frequency-combination-plus-plus",
            np.abs(combos["plus-plus"]),
            (3.0, 9.0),
            pts,
        )
    ]
    floors = []
    medians = []
    floor_points = []
    median_points = []
    for name in ("plus-minus", "minus-plus", "minus-minus"):
        v = np.abs(combos[name])
        reports.append(_report(f"frequency-combination-{name}", v, (0.0, 9.0), pts))
        floors.append(v.min())
        floor_points.append(pts[int(np.argmin(v))])
        medians.append(float(np.median(v)))
        median_points.append(pts[int(np.argsort(v)[v.size // 2])])
    reports.append(
        _report(
            "frequency-combination-resonant-floor",
            np.array(floors),
            (0.0, 0.1),
            np.array(floor_points),
        )
    )
    reports.append(
        _report(
            "frequency-combination-resonant-median",
            np.array(medians),
            (0.5, 4.0),
            np.array(median_points),
        )
    )
    return reports


def region_count_audit(dim: int = 2, scale: float = 64.0) -> list[AuditReport]:
    """Lattice point counts of the experiment regions against continuum
    measures; the ratio settles to 1 as the scale grows."""
    half_angle = scale**-0.1
    datum = SectorDatum(dim, scale, half_angle, 1.0)
    size = 4
    while size // 2 - 1 < 6 * scale:
        size *= 2
    lattice = FrequencyLattice(dim, size)
    regions = [
        datum.support,
        output_region(datum, 2),
        quadratic_support_region(datum),
        output_region(datum, 3),
    ]
    ratios = [r.lattice_count(lattice) / r.continuum_measure() for r in regions]
    points = np.array([(r.r_lo, r.r_hi, r.half_angle) for r in regions])
    return [_report(f"region-count-ratio-{dim}d", np.array(ratios), (0.9, 1.1), points)]


def run_verify_suite(seed: int = 0, samples: int = 100_000) -> list[AuditReport]:
    """The full audit battery behind the verify command."""
    capillary = DispersionLaw(gravity=1.0, surface_tension=1.0)
    gravity = DispersionLaw(gravity=1.0, surface_tension=0.0)
    reports = []
    for dim in (2, 1):
        for order in (2, 3):
            reports.extend(
                support_and_bound_audit(dim, 256.0, 0.05, order, samples=samples, seed=seed)
            )
    reports.extend(
        propagator_combo_audit(capillary, 2, 64.0, 0.05, 1.5, samples=samples, seed=seed)
    )
    reports.extend(
        propagator_combo_audit(gravity, 2, 64.0, 0.05, 0.5, samples=samples, seed=seed)
    )
    reports.extend(
        frequency_combination_audit(capillary, 2, 64.0, 0.05, samples=samples // 2, seed=seed)
    )
    reports.extend(region_count_audit(2, 64.0))
    reports.extend(region_count_audit(1, 64.0))
    return reports


def _random_real_field(rng: np.random.Generator, lattice: FrequencyLattice, n_modes: int, extent: int) -> LatticeField:
    modes: dict = {}
    for _ in range(n_modes):
        if lattice.dim == 1:
            key = int(rng.integers(-extent, extent + 1))
            mate = -key
        else:
            key = (int(rng.integers(-extent, extent + 1)), int(rng.integers(-extent, extent + 1)))
            mate = (-key[0], -key[1])
        coeff = complex(rng.normal(), rng.normal())
        modes[key] = modes.get(key, 0.0) + 0.5 * coeff
        modes[mate] = modes.get(mate, 0.0) + 0.5 * np.conj(coeff)
    return LatticeField.from_modes(lattice, modes, real=True)


def _field_gap(a: LatticeField, b: LatticeField) -> float:
    scale = max(np.abs(a.hat).max(), np.abs(b.hat).max(), 1e-300)
    return float(np.abs(a.hat - b.hat).max() / scale)


def dno_selftest(seed: int = 0, fields: int = 100) -> list[AuditReport]:
    """Battery behind the dno-selftest command.

    Checks, on seeded sparse random real fields: the recursion against the
    closed forms at expansion orders 1 and 2 (half the fields in each
    dimension), exact degree-n homogeneity of orders 1..3 in the height,
    self-adjointness of the order-1 term, and the two single-mode oracles
    (adjacent cosine modes either cancel or map to minus the low mode).
    """
    rng = np.random.default_rng(seed)
    reports = []

    closed_errors, points = [], []
    for dim in (1, 2):
        lattice = FrequencyLattice(dim, 64)
        for trial in range(max(1, fields // 2)):
            h = _random_real_field(rng, lattice, 8, 8)
            pot = _random_real_field(rng, lattice, 8, 8)
            for order in (1, 2):
                closed_errors.append(
                    _field_gap(dn_term_recursive(order, h, pot), dn_term(order, h, pot))
                )
                points.append((dim, trial, order))
    reports.append(
        _report("dno-recursion-vs-closed", np.array(closed_errors), (0.0, 1e-12), np.array(points))
    )

    homog_errors, points = [], []
    lattice = FrequencyLattice(2, 64)
    for trial in range(8):
        h = _random_real_field(rng, lattice, 6, 6)
        pot = _random_real_field(rng, lattice, 6, 6)
        for order in (1, 2, 3):
            scaled = dn_term_recursive(order, 2.0 * h, pot)
            homog_errors.append(_field_gap(scaled, 2.0**order * dn_term_recursive(order, h, pot)))
            points.append((trial, order, 0))
    reports.append(
        _report("dno-height-homogeneity", np.array(homog_errors), (0.0, 1e-12), np.array(points))
    )

    adjoint_errors, points = [], []
    for trial in range(8):
        h = _random_real_field(rng, lattice, 6, 8)
        pot = _random_real_field(rng, lattice, 6, 8)
        probe = _random_real_field(rng, lattice, 6, 8)
        left = inner_product(dn_term(1, h, pot), probe)
        right = inner_product(pot, dn_term(1, h, probe))
        scale = max(abs(left), abs(right), 1.0)
        adjoint_errors.append(abs(left - right) / scale)
        points.append((trial, 0, 0))
    reports.append(
        _report("dno-order1-self-adjoint", np.array(adjoint_errors), (0.0, 1e-10), np.array(points))
    )

    line = FrequencyLattice(1, 32)
    cos_low = LatticeField.from_modes(line, {1: 0.5, -1: 0.5}, real=True)
    cos_high = LatticeField.from_modes(line, {2: 0.5, -2: 0.5}, real=True)
    cancel = dn_term(1, cos_low, cos_high)
    swap = dn_term(1, cos_high, cos_low)
    oracle_errors = [
        float(np.abs(cancel.hat).max()),
        _field_gap(swap, -1.0 * cos_low),
    ]
    reports.append(
        _report(
            "dno-single-mode-oracles",
            np.array(oracle_errors),
            (0.0, 1e-10),
            np.array([(1, 2, 0), (2, 1, 0)]),
        )
    )
    return reports
