"""Growth sweeps, exponent fits, threshold verdicts, and the model-system
scaling check.

A sweep runs one expansion order (quadratic or cubic) over a dyadic list of
frequency scales, holding the Sobolev index fixed while the sector half-angle
shrinks like scale**(-2*epsilon).  Each point yields one ScalingRecord; the
log-log slope of any positive record field against the scale is fit by
ordinary least squares (fit_exponent).

Threshold scans repeat a sweep across a ladder of Sobolev indices and turn
the slope of the ratio column (iterate norm over datum norm to the order's
power) into a verdict: GROWS above +0.15, BOUNDED below -0.15, MARGINAL in
between.  The margin sits above the fit noise of the default resolutions and
well below the 0.5 index spacing of the ladder.  A scan passes when the
verdict flip brackets the expected critical index.  Pure-gravity scans are
tagged FORMAL: below height regularity 2 the surface is not even Lipschitz,
so the growth there reflects the iteration scheme rather than the flow.

The model-system check is exact rational arithmetic: it rescales each term
of the truncated second-order systems (the capillary one with a Laplacian
restoring term, the gravity one with a zeroth-order restoring term) under
the two-parameter family height -> lam**(-w_h) height(lam t, lam**b x),
potential -> lam**(-w_p) potential(lam t, lam**b x), reports every term's
homogeneity degree, and locates the Sobolev index at which the datum norm
is invariant.

Everything here is deterministic: quadrature nodes are fixed by the config,
and the audit seed only feeds the sampling-based verification suites.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .data import SectorDatum, datum_norm
from .dispersion import DispersionLaw
from .errors import CapwaveError, ConfigError
from .iterates import (
    OUTPUT_TIMES,
    QuadratureSpec,
    check_cap_exponent,
    second_iterate,
    third_iterate,
)

DEFAULT_EPSILON = 0.05
DEFAULT_SCALES = (256, 512, 1024, 2048, 4096, 8192)
# shorter ladder for index scans: four points is the fitting minimum and the
# slope signal per index step (0.5 in the exponent) dwarfs the fit noise
THRESHOLD_SCALES = (256, 512, 1024, 2048)
GROWTH_MARGIN = 0.15

CSV_COLUMNS = (
    "N",
    "delta",
    "T",
    "data_norm",
    "sup_norm",
    "qtilde_norm",
    "ctilde_norm",
    "ratio",
    "runtime_ms",
)

GROWS = "GROWS"
BOUNDED = "BOUNDED"
MARGINAL = "MARGINAL"


def default_cap_exponent(law: DispersionLaw) -> float:
    """Smallest admissible time-cap exponent, which maximizes growth."""
    return 1.5 if law.surface_tension > 0 else 0.5


@dataclass(frozen=True)
class SweepConfig:
    """Everything one sweep needs besides the expansion order."""

    law: DispersionLaw
    dim: int
    sobolev_index: float
    epsilon: float = DEFAULT_EPSILON
    cap_exponent: float | None = None
    scales: tuple[int, ...] = DEFAULT_SCALES
    backend: str = "sector"
    outer_nodes: int = 8
    inner_nodes: int = 8
    radial_nodes: int = 64
    angular_nodes: int = 32
    n_times: int = OUTPUT_TIMES
    out: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        if self.epsilon < 0:
            raise ConfigError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.backend not in ("grid", "sector"):
            raise ConfigError(f"backend must be 'grid' or 'sector', got {self.backend!r}")
        scales = tuple(int(n) for n in self.scales)
        if len(scales) < 4:
            raise ConfigError("need at least 4 scales to fit an exponent")
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise ConfigError(f"scales must be strictly increasing, got {scales}")
        if scales[0] < 4:
            raise ConfigError(f"scales must be >= 4, got {scales}")
        object.__setattr__(self, "scales", scales)
        if self.cap_exponent is None:
            object.__setattr__(self, "cap_exponent", default_cap_exponent(self.law))
        check_cap_exponent(self.law, self.cap_exponent)

    def with_index(self, sobolev_index: float) -> "SweepConfig":
        return replace(self, sobolev_index=sobolev_index)


@dataclass(frozen=True)
class ScalingRecord:
    """One sweep point.  ratio = sup_norm / data_norm**order."""

    scale: int
    delta: float
    horizon: float
    data_norm: float
    sup_norm: float
    ratio: float
    runtime_ms: float
    qtilde_norm: float | None = None
    ctilde_norm: float | None = None

    def __post_init__(self):
        for name in ("data_norm", "sup_norm", "qtilde_norm", "ctilde_norm"):
            value = getattr(self, name)
            if value is not None and not value >= 0:
                raise ConfigError(f"{name} must be >= 0, got {value}")
        if not math.isfinite(self.ratio):
            raise ConfigError(f"ratio must be finite, got {self.ratio}")

    def to_dict(self) -> dict:
        return {
            "N": self.scale,
            "delta": self.delta,
            "T": self.horizon,
            "data_norm": self.data_norm,
            "sup_norm": self.sup_norm,
            "qtilde_norm": self.qtilde_norm,
            "ctilde_norm": self.ctilde_norm,
            "ratio": self.ratio,
            "runtime_ms": self.runtime_ms,
        }


_ORDER_NAMES = {"quadratic": 2, "cubic": 3, 2: 2, 3: 3}


def _iterate_order(order) -> int:
    try:
        return _ORDER_NAMES[order]
    except KeyError:
        raise ConfigError(f"order must be 'quadratic' or 'cubic', got {order!r}") from None


def scaling_sweep(config: SweepConfig, order) -> list[ScalingRecord]:
    """One record per scale, in ascending scale order.

    Quadratic records measure the full pair norm over the measurement
    window; cubic records measure the potential component alone and also
    carry the two decomposition piece norms (qtilde: the piece driven by
    the second expansion term; ctilde: the purely cubic piece).
    """
    k = _iterate_order(order)
    records = []
    for scale in config.scales:
        delta = float(scale) ** (-2.0 * config.epsilon)
        datum = SectorDatum(config.dim, float(scale), delta, config.sobolev_index)
        quad = QuadratureSpec.for_scale(
            float(scale),
            cap_exponent=config.cap_exponent,
            outer_nodes=config.outer_nodes,
            inner_nodes=config.inner_nodes,
        )
        start = time.perf_counter()
        try:
            if k == 2:
                result = second_iterate(
                    config.law,
                    datum,
                    quad.time_cap,
                    quad,
                    config.backend,
                    radial_nodes=config.radial_nodes,
                    angular_nodes=config.angular_nodes,
                    n_times=config.n_times,
                )
            else:
                result = third_iterate(
                    config.law,
                    datum,
                    quad.time_cap,
                    quad,
                    config.backend,
                    radial_nodes=config.radial_nodes,
                    angular_nodes=config.angular_nodes,
                    n_times=config.n_times,
                )
        except CapwaveError as exc:
            raise type(exc)(f"sweep aborted at scale {scale}: {exc}") from exc
        runtime_ms = (time.perf_counter() - start) * 1e3
        data = datum_norm(datum)
        sup = result.sup_norms["output_region"]
        records.append(
            ScalingRecord(
                scale=scale,
                delta=delta,
                horizon=quad.time_cap,
                data_norm=data,
                sup_norm=sup,
                ratio=sup / data**k,
                runtime_ms=runtime_ms,
                qtilde_norm=result.sup_norms["mixed_piece"] if k == 3 else None,
                ctilde_norm=result.sup_norms["pure_piece"] if k == 3 else None,
            )
        )
    return records


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares power law: value = exp(intercept) * scale**slope."""

    slope: float
    intercept: float
    stderr: float
    r_squared: float
    n_records: int


_FIELD_ALIASES = {"N": "scale", "T": "horizon"}


def fit_exponent(records, selector: str = "ratio") -> ExponentFit:
    """Fit log(selected field) against log(scale) by ordinary least squares.

    Needs at least 4 records and strictly positive values; the standard
    error is the usual OLS slope error from the residual variance.
    """
    name = _FIELD_ALIASES.get(selector, selector)
    if len(records) < 4:
        raise ConfigError(f"need at least 4 records to fit, got {len(records)}")
    values = []
    for record in records:
        value = getattr(record, name)
        if value is None or not value > 0:
            raise ConfigError(
                f"{selector} must be positive at every record, got {value} at scale {record.scale}"
            )
        values.append(value)
    x = np.log([float(r.scale) for r in records])
    y = np.log(values)
    n = len(records)
    x_centered = x - x.mean()
    sxx = float(x_centered @ x_centered)
    slope = float(x_centered @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    residual = y - (slope * x + intercept)
    ssr = float(residual @ residual)
    ss_total = float(((y - y.mean()) ** 2).sum())
    stderr = math.sqrt(ssr / (n - 2) / sxx)
    r_squared = 1.0 - ssr / ss_total if ss_total > 0 else 1.0
    return ExponentFit(slope, intercept, stderr, r_squared, n)


def growth_verdict(slope: float, margin: float = GROWTH_MARGIN) -> str:
    if slope > margin:
        return GROWS
    if slope < -margin:
        return BOUNDED
    return MARGINAL


def ratio_is_monotone(records, allow_head_inversion: bool = True) -> bool:
    """Whether the ratio column increases with scale.

    The very first step may invert: the smallest scale carries the largest
    relative quadrature and windowing error.
    """
    ratios = [r.ratio for r in records]
    rising = [b > a for a, b in zip(ratios, ratios[1:])]
    if all(rising):
        return True
    return allow_head_inversion and all(rising[1:]) and len(rising) > 1


def theoretical_threshold(law: DispersionLaw, dim: int, order) -> float:
    """Critical Sobolev index the verdict flip should bracket."""
    k = _iterate_order(order)
    capillary = law.surface_tension > 0
    if k == 3 and capillary:
        return 3.0 if dim == 2 else 2.5
    if k == 2 and dim == 2:
        return 1.5 if capillary else 2.5
    raise ConfigError(
        f"no critical index on record for order {order!r}, dim {dim}, "
        f"surface tension {law.surface_tension}"
    )


@dataclass(frozen=True)
class ThresholdRow:
    sobolev_index: float
    fit: ExponentFit
    verdict: str


@dataclass(frozen=True)
class ThresholdReport:
    """Verdict ladder for one law/dimension/order family."""

    dim: int
    order: int
    threshold: float
    formal: bool
    rows: tuple[ThresholdRow, ...] = field(default_factory=tuple)

    @property
    def bracket(self) -> tuple[float, float] | None:
        """(largest growing index, smallest bounded index), if both exist."""
        growing = [r.sobolev_index for r in self.rows if r.verdict == GROWS]
        bounded = [r.sobolev_index for r in self.rows if r.verdict == BOUNDED]
        if not growing or not bounded:
            return None
        return max(growing), min(bounded)

    @property
    def brackets_threshold(self) -> bool:
        """True when the flip is clean and straddles the critical index."""
        pair = self.bracket
        if pair is None:
            return False
        lo, hi = pair
        if lo >= hi:
            return False
        for row in self.rows:
            if row.verdict == GROWS and row.sobolev_index > lo:
                return False
            if row.verdict == BOUNDED and row.sobolev_index < hi:
                return False
        return lo < self.threshold < hi

    def table(self) -> str:
        tag = " [FORMAL]" if self.formal else ""
        order_name = "cubic" if self.order == 3 else "quadratic"
        lines = [
            f"threshold scan: {order_name}, {self.dim}d, critical index {self.threshold}{tag}"
        ]
        for row in self.rows:
            lines.append(
                f"  s={row.sobolev_index:<4g} ratio-slope={row.fit.slope:+.4f}"
                f" (stderr {row.fit.stderr:.4f})  {row.verdict}"
            )
        pair = self.bracket
        if pair is None:
            lines.append("  no verdict flip observed")
        else:
            ok = "brackets" if self.brackets_threshold else "MISSES"
            lines.append(f"  flip in ({pair[0]:g}, {pair[1]:g}) {ok} {self.threshold:g}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "order": self.order,
            "threshold": self.threshold,
            "formal": self.formal,
            "bracket": list(self.bracket) if self.bracket else None,
            "brackets_threshold": self.brackets_threshold,
            "rows": [
                {
                    "s": row.sobolev_index,
                    "slope": row.fit.slope,
                    "stderr": row.fit.stderr,
                    "r_squared": row.fit.r_squared,
                    "verdict": row.verdict,
                }
                for row in self.rows
            ],
        }


def default_threshold_indices(law: DispersionLaw, dim: int, order) -> tuple[float, ...]:
    """Ladder on the half-integer grid, skipping the near-marginal rung."""
    critical = theoretical_threshold(law, dim, order)
    return (critical - 1.0, critical - 0.5, critical + 0.5, critical + 1.0)


def threshold_report(
    law: DispersionLaw,
    dim: int,
    indices,
    config: SweepConfig | None = None,
    order=None,
) -> ThresholdReport:
    """Sweep each Sobolev index and classify the ratio slope.

    The index list must straddle the critical index by at least 0.5 on each
    side.  Default order: cubic when surface tension is present (that is
    the sharp obstruction), quadratic for pure gravity (where third-order
    iteration gains nothing and the scan is formal).
    """
    if order is None:
        order = 3 if law.surface_tension > 0 else 2
    k = _iterate_order(order)
    critical = theoretical_threshold(law, dim, k)
    indices = tuple(float(s) for s in indices)
    if not indices:
        raise ConfigError("need at least one Sobolev index")
    if min(indices) > critical - 0.5 or max(indices) < critical + 0.5:
        raise ConfigError(
            f"indices {indices} must straddle the critical index {critical} "
            "by at least 0.5 on each side"
        )
    if config is None:
        config = SweepConfig(law, dim, indices[0], scales=THRESHOLD_SCALES)
    else:
        config = replace(config, law=law, dim=dim)
    rows = []
    for s in sorted(indices):
        records = scaling_sweep(config.with_index(s), k)
        fit = fit_exponent(records, "ratio")
        rows.append(ThresholdRow(s, fit, growth_verdict(fit.slope)))
    return ThresholdReport(
        dim=dim,
        order=k,
        threshold=critical,
        formal=law.surface_tension == 0,
        rows=tuple(rows),
    )


# --- model-system scaling check (exact rational arithmetic) ---

SURFACE_TENSION_MODEL = "surface-tension-model"
GRAVITY_MODEL = "gravity-model"

# canonical scale-invariance weights (b_x, w_height, w_potential)
MODEL_WEIGHTS = {
    SURFACE_TENSION_MODEL: (Fraction(2, 3), Fraction(2, 3), Fraction(1, 3)),
    GRAVITY_MODEL: (Fraction(2), Fraction(2), Fraction(3)),
}


@dataclass(frozen=True)
class TermDegree:
    equation: str
    term: str
    degree: Fraction


@dataclass(frozen=True)
class ModelScalingReport:
    system: str
    dim: int
    weights: tuple[Fraction, Fraction, Fraction]
    terms: tuple[TermDegree, ...]
    scale_invariant: bool
    critical_from_height: Fraction
    critical_from_potential: Fraction
    critical_index: Fraction | None
    probe_index: Fraction | None = None
    probe_below_critical: bool | None = None

    def table(self) -> str:
        lines = [f"{self.system}, {self.dim}d, weights {tuple(map(str, self.weights))}"]
        for row in self.terms:
            lines.append(f"  [{row.equation}] {row.term:<26} degree {row.degree}")
        if self.scale_invariant:
            lines.append("  all degrees per equation coincide: scale invariant")
        else:
            lines.append("  degree mismatch: not scale invariant")
        if self.critical_index is not None:
            lines.append(f"  critical Sobolev index {self.critical_index}")
        else:
            lines.append(
                "  datum-norm invariance differs per component: "
                f"height {self.critical_from_height}, potential {self.critical_from_potential}"
            )
        if self.probe_index is not None:
            side = "below" if self.probe_below_critical else "at or above"
            lines.append(f"  probe index {self.probe_index} is {side} critical")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "dim": self.dim,
            "weights": [str(w) for w in self.weights],
            "terms": [
                {"equation": t.equation, "term": t.term, "degree": str(t.degree)}
                for t in self.terms
            ],
            "scale_invariant": self.scale_invariant,
            "critical_from_height": str(self.critical_from_height),
            "critical_from_potential": str(self.critical_from_potential),
            "critical_index": None if self.critical_index is None else str(self.critical_index),
            "probe_index": None if self.probe_index is None else str(self.probe_index),
            "probe_below_critical": self.probe_below_critical,
        }


# term = (label, height factors, potential factors, total derivative order);
# the restoring term is the only difference between the two model systems
_HEIGHT_TERMS = (
    ("|D| potential", 0, 1, 1),
    ("div(height grad potential)", 1, 1, 2),
    ("|D|(height |D| potential)", 1, 1, 2),
)
_SHARED_POTENTIAL_TERMS = (
    ("(|D| potential)^2 / 2", 0, 2, 2),
    ("|grad potential|^2 / 2", 0, 2, 2),
)
_RESTORING_TERM = {
    SURFACE_TENSION_MODEL: ("Lap height", 1, 0, 2),
    GRAVITY_MODEL: ("height", 1, 0, 0),
}
# Sobolev shift of the height slot relative to the potential slot
_HEIGHT_SHIFT = {
    SURFACE_TENSION_MODEL: Fraction(1, 2),
    GRAVITY_MODEL: Fraction(-1, 2),
}

_MODEL_ALIASES = {
    SURFACE_TENSION_MODEL: SURFACE_TENSION_MODEL,
    "surface-tension": SURFACE_TENSION_MODEL,
    GRAVITY_MODEL: GRAVITY_MODEL,
    "gravity": GRAVITY_MODEL,
}


def _as_fraction(value) -> Fraction:
    # snap float input to a small denominator so 2/3 stays 2/3
    if isinstance(value, float):
        return Fraction(value).limit_denominator(1000)
    return Fraction(value)


def model_scaling_degrees(
    weights, system: str, dim: int = 2, sobolev_index=None
) -> ModelScalingReport:
    """Homogeneity degree of every term of the chosen model system.

    weights = (b_x, w_height, w_potential): space rescales by lam**b_x,
    the components by lam**-w.  A term with n_h height factors, n_p
    potential factors and m derivatives picks up degree
    b_x*m - n_h*w_height - n_p*w_potential; the time derivatives pick up
    1 - w.  All degrees within an equation coincide exactly on the
    invariance weights.  The critical index is where the homogeneous
    Sobolev datum norm (with the system's half-index height shift) is
    invariant: w/b_x + dim/2, shifted back to the potential scale.  An
    optional probe index is classified against the critical one.
    """
    try:
        system = _MODEL_ALIASES[system]
    except KeyError:
        raise ConfigError(
            f"system must be '{SURFACE_TENSION_MODEL}' or '{GRAVITY_MODEL}', got {system!r}"
        ) from None
    if dim not in (1, 2):
        raise ConfigError(f"dim must be 1 or 2, got {dim}")
    b, w_height, w_potential = (_as_fraction(w) for w in weights)
    if b <= 0 or w_height <= 0 or w_potential <= 0:
        raise ConfigError(f"weights must be positive, got {weights}")

    def degree(n_h: int, n_p: int, m: int) -> Fraction:
        return b * m - n_h * w_height - n_p * w_potential

    equations = {
        "height": [TermDegree("height", "d/dt height", 1 - w_height)]
        + [TermDegree("height", label, degree(n_h, n_p, m)) for label, n_h, n_p, m in _HEIGHT_TERMS],
        "potential": [TermDegree("potential", "d/dt potential", 1 - w_potential)]
        + [
            TermDegree("potential", label, degree(n_h, n_p, m))
            for label, n_h, n_p, m in (_RESTORING_TERM[system],) + _SHARED_POTENTIAL_TERMS
        ],
    }
    invariant = all(
        len({row.degree for row in rows}) == 1 for rows in equations.values()
    )
    half_dim = Fraction(dim, 2)
    from_potential = w_potential / b + half_dim
    from_height = w_height / b + half_dim - _HEIGHT_SHIFT[system]
    critical = from_potential if from_height == from_potential else None
    probe = None if sobolev_index is None else _as_fraction(sobolev_index)
    return ModelScalingReport(
        system=system,
        dim=dim,
        weights=(b, w_height, w_potential),
        terms=tuple(equations["height"] + equations["potential"]),
        scale_invariant=invariant,
        critical_from_height=from_height,
        critical_from_potential=from_potential,
        critical_index=critical,
        probe_index=probe,
        probe_below_critical=None if probe is None or critical is None else probe < critical,
    )


# --- report serialization ---


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def records_to_csv(records) -> str:
    """Fixed-column CSV; floats via repr for bit-stable round trips."""
    lines = [",".join(CSV_COLUMNS)]
    for record in records:
        row = record.to_dict()
        lines.append(",".join(_csv_cell(row[col]) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def records_to_json(records) -> str:
    return json.dumps([r.to_dict() for r in records], indent=2) + "\n"


def reports_to_json(reports) -> str:
    """Audit reports as the verify-report array."""
    return json.dumps([r.to_json_dict() for r in reports], indent=2) + "\n"
