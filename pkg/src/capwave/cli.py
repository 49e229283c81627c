"""Command-line surface: audits, growth sweeps, threshold scans, the
model-system scaling check, and single-iterate spectrum dumps.

Subcommands
    verify              run the sampled audit battery; exit 0 iff every check passes
    quadratic-scaling   sweep the second expansion term over dyadic scales
    cubic-scaling       sweep the third expansion term (with piece norms)
    threshold           verdict ladder across Sobolev indices; exit 0 iff the
                        GROWS/BOUNDED flip brackets the critical index
    dno-selftest        Dirichlet-Neumann expansion checks; exit 0 iff clean
    model-scaling       exact rational homogeneity table of the model systems
    iterate             run one iterate and dump its final-time spectrum

Sweep output is CSV (columns N,delta,T,data_norm,sup_norm,qtilde_norm,
ctilde_norm,ratio,runtime_ms) or JSON with the same keys; everything except
the wall-clock column is bit-stable for a fixed configuration and seed.

A config file (--config) holds flat key=value lines mirroring the flags;
values given on the command line win.  Exit codes: 0 success, 1 failed
check or verdict, 2 usage or configuration error, 3 quadrature
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .audits import dno_selftest, run_verify_suite
from .data import SectorDatum, datum_norm
from .dispersion import DispersionLaw
from .errors import CapwaveError, ConfigError, QuadratureConvergenceError
from .experiments import (
    DEFAULT_EPSILON,
    DEFAULT_SCALES,
    GRAVITY_MODEL,
    MODEL_WEIGHTS,
    SURFACE_TENSION_MODEL,
    THRESHOLD_SCALES,
    SweepConfig,
    default_threshold_indices,
    fit_exponent,
    model_scaling_degrees,
    records_to_csv,
    records_to_json,
    reports_to_json,
    scaling_sweep,
    threshold_report,
)
from .iterates import QuadratureSpec, second_iterate, third_iterate

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_USAGE = 2
EXIT_NONCONVERGED = 3

# config-file key -> argparse destination (file keys are case-insensitive,
# hyphens and underscores interchangeable)
_FILE_KEYS = {
    "g": "g",
    "tau": "tau",
    "dim": "dim",
    "s": "s",
    "epsilon": "epsilon",
    "a": "a",
    "n": "scales",
    "backend": "backend",
    "time_nodes": "time_nodes",
    "radial_nodes": "radial_nodes",
    "angular_nodes": "angular_nodes",
    "out": "out",
    "format": "fmt",
    "seed": "seed",
}

_DEFAULTS = {
    "g": 1.0,
    "tau": 1.0,
    "dim": 2,
    "s": None,
    "epsilon": DEFAULT_EPSILON,
    "a": None,
    "scales": None,
    "backend": "sector",
    "time_nodes": 8,
    "radial_nodes": 64,
    "angular_nodes": 32,
    "out": None,
    "fmt": "csv",
    "seed": 0,
}


def load_config_file(path: str) -> dict:
    """Flat key=value lines; blank lines and #-comment lines ignored."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        dest = _FILE_KEYS.get(key.strip().lower().replace("-", "_"))
        if dest is None:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key.strip()!r}")
        overrides[dest] = value.strip()
    return overrides


def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    merged = dict(_DEFAULTS)
    if defaults:
        merged.update(defaults)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value defaults file; flags win")
    common.add_argument("--g", type=float, default=merged["g"], help="gravity (default 1)")
    common.add_argument("--tau", type=float, default=merged["tau"], help="surface tension (default 1)")
    common.add_argument("--dim", type=int, choices=(1, 2), default=merged["dim"])
    common.add_argument(
        "--s", default=merged["s"], help="Sobolev index; threshold takes a comma list"
    )
    common.add_argument(
        "--epsilon", type=float, default=merged["epsilon"], help="half-angle decay exponent"
    )
    common.add_argument(
        "--a", type=float, default=merged["a"], help="time-cap exponent (default: law minimum)"
    )
    common.add_argument(
        "--N",
        dest="scales",
        default=merged["scales"],
        help="comma list of frequency scales (iterate: a single scale)",
    )
    common.add_argument("--backend", choices=("grid", "sector"), default=merged["backend"])
    common.add_argument(
        "--time-nodes", type=int, default=merged["time_nodes"], help="Gauss nodes per time axis"
    )
    common.add_argument("--radial-nodes", type=int, default=merged["radial_nodes"])
    common.add_argument("--angular-nodes", type=int, default=merged["angular_nodes"])
    common.add_argument("--out", default=merged["out"], help="output file (default: stdout)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default=merged["fmt"])
    common.add_argument("--seed", type=int, default=merged["seed"])

    parser = argparse.ArgumentParser(
        prog="capwave",
        description="Frequency-space iterate experiments for gravity-capillary waves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the full audit battery")
    sub.add_parser("quadratic-scaling", parents=[common], help="second-term growth sweep")
    sub.add_parser("cubic-scaling", parents=[common], help="third-term growth sweep")
    sub.add_parser("threshold", parents=[common], help="verdict ladder across Sobolev indices")
    sub.add_parser("dno-selftest", parents=[common], help="Dirichlet-Neumann expansion checks")
    sub.add_parser("model-scaling", parents=[common], help="model-system homogeneity table")
    it = sub.add_parser("iterate", parents=[common], help="dump one iterate's spectrum")
    it.add_argument(
        "order", nargs="?", type=int, choices=(2, 3), default=2, help="expansion order (default 2)"
    )
    return parser


def _parse_scales(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise ConfigError(f"--N expects a comma list of integers, got {text!r}") from None


def _parse_indices(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise ConfigError(f"--s expects a comma list of numbers, got {text!r}") from None


def _single_index(args, fallback: float) -> float:
    if args.s is None:
        return fallback
    indices = _parse_indices(str(args.s))
    if len(indices) != 1:
        raise ConfigError(f"this command takes one Sobolev index, got {args.s!r}")
    return indices[0]


def _law(args) -> DispersionLaw:
    return DispersionLaw(gravity=args.g, surface_tension=args.tau)


def _emit(payload: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(payload)
    else:
        Path(out).write_text(payload)


def _report_lines(reports) -> str:
    lines = []
    for r in reports:
        lines.append(
            f"{r.status} {r.check}: measured [{r.measured_min:.6g}, {r.measured_max:.6g}]"
            f" vs band [{r.claimed_band[0]:.6g}, {r.claimed_band[1]:.6g}] ({r.samples} samples)"
        )
    return "\n".join(lines) + "\n"


def _emit_reports(reports, args) -> int:
    payload = reports_to_json(reports) if args.fmt == "json" else _report_lines(reports)
    _emit(payload, args.out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


def cmd_verify(args) -> int:
    return _emit_reports(run_verify_suite(seed=args.seed), args)


def cmd_dno_selftest(args) -> int:
    return _emit_reports(dno_selftest(seed=args.seed), args)


def _sweep_config(args, sobolev_index: float, default_scales) -> SweepConfig:
    scales = _parse_scales(args.scales) if args.scales else tuple(default_scales)
    return SweepConfig(
        law=_law(args),
        dim=args.dim,
        sobolev_index=sobolev_index,
        epsilon=args.epsilon,
        cap_exponent=args.a,
        scales=scales,
        backend=args.backend,
        outer_nodes=args.time_nodes,
        inner_nodes=args.time_nodes,
        radial_nodes=args.radial_nodes,
        angular_nodes=args.angular_nodes,
        out=args.out,
        seed=args.seed,
    )


def _run_sweep(args, order: str, fallback_index: float) -> int:
    config = _sweep_config(args, _single_index(args, fallback_index), DEFAULT_SCALES)
    records = scaling_sweep(config, order)
    payload = records_to_json(records) if args.fmt == "json" else records_to_csv(records)
    _emit(payload, args.out)
    summary = [f"ratio slope {fit_exponent(records, 'ratio').slope:+.4f}"]
    if order == "cubic":
        summary.append(f"qtilde slope {fit_exponent(records, 'qtilde_norm').slope:+.4f}")
        summary.append(f"ctilde slope {fit_exponent(records, 'ctilde_norm').slope:+.4f}")
    print(f"{order} sweep: " + ", ".join(summary), file=sys.stderr)
    return EXIT_OK


def cmd_quadratic(args) -> int:
    return _run_sweep(args, "quadratic", 1.0)


def cmd_cubic(args) -> int:
    return _run_sweep(args, "cubic", 2.0)


def cmd_threshold(args) -> int:
    law = _law(args)
    order = 3 if law.surface_tension > 0 else 2
    indices = (
        _parse_indices(str(args.s)) if args.s is not None
        else default_threshold_indices(law, args.dim, order)
    )
    config = _sweep_config(args, indices[0], THRESHOLD_SCALES)
    report = threshold_report(law, args.dim, indices, config, order)
    if args.fmt == "json":
        _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    else:
        _emit(report.table() + "\n", args.out)
    return EXIT_OK if report.brackets_threshold else EXIT_CHECK


def cmd_model_scaling(args) -> int:
    probe = None if args.s is None else _single_index(args, 0.0)
    chunks, ok = [], True
    for system in (SURFACE_TENSION_MODEL, GRAVITY_MODEL):
        report = model_scaling_degrees(MODEL_WEIGHTS[system], system, args.dim, probe)
        chunks.append(report)
        ok = ok and report.scale_invariant and report.critical_index is not None
    if args.fmt == "json":
        payload = json.dumps([c.to_dict() for c in chunks], indent=2) + "\n"
    else:
        payload = "\n\n".join(c.table() for c in chunks) + "\n"
    _emit(payload, args.out)
    return EXIT_OK if ok else EXIT_CHECK


def _spectrum_columns(result):
    """Final-time spectrum as flat coordinate/value columns."""
    state = result.states[-1]
    if result.backend == "sector":
        grid = state.grid
        return (
            grid.x.ravel(),
            grid.y.ravel(),
            grid.weight.ravel(),
            state.height.ravel(),
            state.potential.ravel(),
        )
    lattice = state.lattice
    keep = result.region.mask(lattice)
    return (
        lattice.kx[keep],
        lattice.ky[keep],
        np.ones(int(keep.sum())),
        state.height.hat[keep],
        state.potential.hat[keep],
    )


def cmd_iterate(args) -> int:
    law = _law(args)
    scales = _parse_scales(args.scales) if args.scales else (16,)
    if len(scales) != 1:
        raise ConfigError(f"iterate takes a single scale, got {args.scales!r}")
    scale = float(scales[0])
    index = _single_index(args, 1.0)
    delta = scale ** (-2.0 * args.epsilon)
    datum = SectorDatum(args.dim, scale, delta, index)
    cap = args.a if args.a is not None else (1.5 if law.surface_tension > 0 else 0.5)
    quad = QuadratureSpec.for_scale(
        scale, cap_exponent=cap, outer_nodes=args.time_nodes, inner_nodes=args.time_nodes
    )
    run = second_iterate if args.order == 2 else third_iterate
    result = run(
        law,
        datum,
        quad.time_cap,
        quad,
        args.backend,
        radial_nodes=args.radial_nodes,
        angular_nodes=args.angular_nodes,
    )
    x, y, weight, height, potential = _spectrum_columns(result)
    if args.fmt == "json":
        payload = json.dumps(
            {
                "order": args.order,
                "backend": result.backend,
                "N": scale,
                "delta": delta,
                "s": index,
                "time": float(result.times[-1]),
                "data_norm": datum_norm(datum),
                "sup_norms": {k: float(v) for k, v in result.sup_norms.items()},
                "x": np.asarray(x, dtype=float).tolist(),
                "y": np.asarray(y, dtype=float).tolist(),
                "weight": np.asarray(weight, dtype=float).tolist(),
                "height_re": np.asarray(height.real, dtype=float).tolist(),
                "height_im": np.asarray(height.imag, dtype=float).tolist(),
                "potential_re": np.asarray(potential.real, dtype=float).tolist(),
                "potential_im": np.asarray(potential.imag, dtype=float).tolist(),
            },
            indent=2,
        ) + "\n"
    else:
        lines = ["x,y,weight,height_re,height_im,potential_re,potential_im"]
        for row in zip(x, y, weight, height.real, height.imag, potential.real, potential.imag):
            lines.append(",".join(repr(float(v)) for v in row))
        payload = "\n".join(lines) + "\n"
    _emit(payload, args.out)
    norms = ", ".join(f"{k}={v:.6g}" for k, v in result.sup_norms.items())
    print(f"order-{args.order} iterate at scale {scale:g}: {norms}", file=sys.stderr)
    return EXIT_OK


_COMMANDS = {
    "verify": cmd_verify,
    "quadratic-scaling": cmd_quadratic,
    "cubic-scaling": cmd_cubic,
    "threshold": cmd_threshold,
    "dno-selftest": cmd_dno_selftest,
    "model-scaling": cmd_model_scaling,
    "iterate": cmd_iterate,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    peek = argparse.ArgumentParser(add_help=False)
    peek.add_argument("--config")
    known, _ = peek.parse_known_args(argv)
    try:
        defaults = load_config_file(known.config) if known.config else {}
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    args = build_parser(defaults).parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except QuadratureConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapwaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
