"""Command line interface: tripodsim {run|sweep|check|plot}."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..bloch import magnetic_route_difference
from ..errors import TripodError
from ..propagator import convergence_probe, run_simulation
from .config import parse_config
from .outputs import write_outputs
from .sweep import SWEEP_PARAMETERS, SweepSpec, run_sweep

__all__ = ["main", "build_parser"]


def _load_scenario(path: str):
    cfg = Path(path)
    if not cfg.exists():
        raise TripodError(f"no such config file: {cfg}")
    return parse_config(cfg.read_text(encoding="utf-8"))


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _cmd_run(args) -> int:
    scenario = _load_scenario(args.config)
    record = run_simulation(scenario, backend=args.backend)
    paths = write_outputs(record, args.out)
    for warning in record.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    m = record.metrics
    _say(args, f"wrote {', '.join(str(p) for p in paths.values())}")
    _say(
        args,
        "transmitted_peak={transmitted_peak:.6g} released_peak={released_peak:.6g} "
        "group_delay={group_delay:.6g} trace_error={trace_error_max:.3g}".format(**m),
    )
    return 0


def _cmd_sweep(args) -> int:
    scenario = _load_scenario(args.config)
    try:
        values = tuple(float(tok) for tok in args.values.split(",") if tok.strip())
    except ValueError:
        raise TripodError(f"malformed --values list: {args.values!r}") from None
    spec = SweepSpec(
        parameter=args.param,
        values=values,
        base_scenario=scenario,
        outputs_dir=Path(args.out),
    )
    summary, _ = run_sweep(spec, backend=args.backend)
    _say(args, f"wrote {Path(args.out) / 'summary.csv'}")
    for row in summary.rows:
        _say(
            args,
            f"{args.param}={row.value:.6g}: released_ratio={row.released_peak_ratio:.4f} "
            f"predicted={row.predicted_ratio:.4f} z_ratio={row.z_peak_ratio:.4f}",
        )
    return 0


def _cmd_check(args) -> int:
    scenario = _load_scenario(args.config)
    failures = 0

    def report(name: str, ok: bool, detail: str) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1

    record = run_simulation(scenario, backend=args.backend)
    trace_err = record.metrics["trace_error_max"]
    report("trace-conservation", trace_err <= 1e-6, f"max drift {trace_err:.3e} (limit 1e-6)")
    min_pop = record.metrics["min_population"]
    report("population-positivity", min_pop >= -1e-9, f"min population {min_pop:.3e} (limit -1e-9)")

    if scenario.magnetic is not None:
        ref_tau = record.metrics["dark_reference_tau"]
        frame = record.snapshot_at(ref_tau)
        diff = magnetic_route_difference(frame.sigma, scenario, backend=args.backend)
        report(
            "magnetic-dual-route", diff <= 1e-6,
            f"grid integration vs phase kick differ by {diff:.3e} (limit 1e-6)",
        )

    probe = convergence_probe(scenario, args.refine, backend=args.backend)
    report(
        "grid-convergence", probe <= 0.01,
        f"released-peak change {probe:.3e} under x{args.refine} refinement (limit 0.01)",
    )
    return 1 if failures else 0


def _cmd_plot(args) -> int:
    from .plots import render_plot

    out_dir = Path(args.out) if args.out else None
    for path in args.files:
        target = out_dir / (Path(path).stem + ".svg") if out_dir else None
        written = render_plot(path, target)
        _say(args, f"wrote {written}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tripodsim",
        description=(
            "Simulate light storage, magnetic phase manipulation and release "
            "in a tripod-configuration atomic medium."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
        p.add_argument(
            "--backend", choices=("numba", "numpy"), default=None,
            help="kernel backend (default: TRIPODSIM_BACKEND or numba)",
        )

    p_run = sub.add_parser("run", help="run one scenario and write its outputs")
    p_run.add_argument("--config", required=True, help="scenario config file")
    p_run.add_argument("--out", required=True, help="output directory")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run one scenario over a list of parameter values")
    p_sweep.add_argument("--config", required=True, help="base scenario config file")
    p_sweep.add_argument("--param", required=True, choices=SWEEP_PARAMETERS,
                         help="swept parameter (delta is in radians, b_field in tesla, "
                              "control3_lead in microseconds)")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--out", required=True, help="output directory")
    common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_check = sub.add_parser("check", help="run the invariant suite and convergence probe")
    p_check.add_argument("--config", required=True, help="scenario config file")
    p_check.add_argument("--refine", type=int, default=2, choices=(1, 2, 4),
                         help="grid refinement factor for the convergence probe")
    common(p_check)
    p_check.set_defaults(func=_cmd_check)

    p_plot = sub.add_parser("plot", help="render emitted CSV files to SVG line plots")
    p_plot.add_argument("files", nargs="+", help="CSV files to plot")
    p_plot.add_argument("--out", default=None, help="directory for the SVG files")
    common(p_plot)
    p_plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TripodError as exc:
        print(f"tripodsim: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
