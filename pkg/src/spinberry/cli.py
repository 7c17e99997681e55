"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 assertion or
numerical failure (structured errors from the pipeline, failed scenario
checks).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import SpinberryError, UsageError
from .eigensystem import eigenframes_at, track_loop
from .model import ModelParams
from .phases import (
    DEFAULT_MAGNETIC_STEPS,
    DEFAULT_QUANTIZED_STEPS,
    DEFAULT_TWOMODE_STEPS,
    berry_magnetic_numeric,
    berry_quantized_numeric,
    two_mode_berry_numeric,
)
from .subsystem import concurrence_pure, mixed_phase_numeric, mixed_phase_two_mode_numeric
from .sweeps import (
    GENERIC_PARAMS,
    GENERIC_THETA,
    OUTPUTS,
    SCENARIOS,
    SweepSpec,
    run_scenario,
    run_sweep,
    rows_to_csv,
)
from .svgplot import emit_plot


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self.exit_code(message))

    @staticmethod
    def exit_code(message) -> int:
        print(f"error: {message}", file=sys.stderr)
        return 1


def _add_param_options(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("model parameters")
    group.add_argument("--omega1", type=float, default=GENERIC_PARAMS.omega1)
    group.add_argument("--nu", type=float, default=GENERIC_PARAMS.nu)
    group.add_argument("--lambda", dest="lam", type=float, default=GENERIC_PARAMS.lam)
    group.add_argument("--coupling-j", type=float, default=GENERIC_PARAMS.coupling_j)
    group.add_argument("--omega2", type=float, default=GENERIC_PARAMS.omega2)
    group.add_argument("--n-photon", type=int, default=0)
    group.add_argument("--n-prime", type=int, default=0)


def _add_level_option(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--level",
        default="1,2,3,4",
        help="comma-separated subset of 1..4 (default all)",
    )


def _params_from(args) -> ModelParams:
    try:
        return ModelParams(
            omega1=args.omega1,
            nu=args.nu,
            lam=args.lam,
            coupling_j=args.coupling_j,
            omega2=args.omega2,
            n_photon=args.n_photon,
            n_prime=args.n_prime,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _levels_from(args) -> list[int]:
    try:
        levels = sorted({int(tok) for tok in args.level.split(",") if tok.strip()})
    except ValueError as exc:
        raise UsageError(f"bad --level value {args.level!r}") from exc
    if not levels or any(j not in (1, 2, 3, 4) for j in levels):
        raise UsageError(f"--level must select from 1..4, got {args.level!r}")
    return levels


def _parse_values(spec: str) -> list[float]:
    values: list[float] = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        if ":" in token:
            try:
                start, stop, count = token.split(":")
                start, stop, count = float(start), float(stop), int(count)
            except ValueError as exc:
                raise UsageError(f"bad range {token!r}; expected start:stop:count") from exc
            if count < 1:
                raise UsageError(f"range count must be positive in {token!r}")
            step = (stop - start) / (count - 1) if count > 1 else 0.0
            values.extend(start + k * step for k in range(count))
        else:
            try:
                values.append(float(token))
            except ValueError as exc:
                raise UsageError(f"bad value {token!r}") from exc
    if not values:
        raise UsageError(f"no values parsed from {spec!r}")
    return values


def _print_phase_table(title: str, reports: dict[int, object]):
    print(title)
    print(f"{'level':>5} {'numeric':>22} {'analytic':>22} {'diff mod 2pi':>14} {'converged':>10}")
    for level, report in reports.items():
        print(
            f"{level:>5} {report.numeric_phase:>22.15f} {report.analytic_phase:>22.15f} "
            f"{report.difference_mod_2pi:>14.3e} {str(report.converged).lower():>10}"
        )


def _cmd_eig(args) -> int:
    params = _params_from(args)
    levels = _levels_from(args)
    frames = eigenframes_at(params, args.phi)
    energies = [f.energy for f in frames]
    print(f"{'level':>5} {'energy':>20} {'chi':>12} {'xi':>12} {'eta':>12} {'concurrence':>12}")
    for j in levels:
        frame = frames[j - 1]
        print(
            f"{j:>5} {frame.energy:>20.15f} {frame.chi:>12.8f} {frame.xi:>12.8f} "
            f"{frame.eta:>12.8f} {concurrence_pure(frame):>12.3e}"
        )
    gaps = [b - a for a, b in zip(energies, energies[1:])]
    print(f"adjacent gaps: {', '.join(f'{g:.6e}' for g in gaps)}")
    return 0


def _cmd_berry_magnetic(args) -> int:
    params = _params_from(args)
    reports = {
        j: berry_magnetic_numeric(params, j, args.loop_steps) for j in _levels_from(args)
    }
    _print_phase_table(
        "magnetic azimuth loop: Wilson loop vs weighted solid angles", reports
    )
    return 0


def _cmd_berry_quantized(args) -> int:
    params = _params_from(args)
    reports = {
        j: berry_quantized_numeric(params, j, args.loop_steps) for j in _levels_from(args)
    }
    _print_phase_table(
        "photon-number phase-shift loop: Wilson loop vs pi(1-cos chi) + 2 pi n",
        reports,
    )
    return 0


def _cmd_berry_twomode(args) -> int:
    params = _params_from(args)
    reports = {
        j: two_mode_berry_numeric(params, j, args.theta, args.loop_steps)
        for j in _levels_from(args)
    }
    _print_phase_table(
        f"two-mode rotation loop at theta = {args.theta:.6f}: Wilson loop vs "
        "solid-angle form (difference reported, not asserted)",
        reports,
    )
    return 0


def _cmd_mixed_phase(args) -> int:
    params = _params_from(args)
    levels = _levels_from(args)
    if args.two_mode:
        print(
            f"two-mode subsystem (particle 1 + fields) mixed phase at theta = {args.theta:.6f}"
        )
        for j in levels:
            report = mixed_phase_two_mode_numeric(params, j, args.theta, args.loop_steps)
            flags = []
            if report.branch_singular:
                flags.append("branch-singular")
            if report.at_concurrence_limit:
                flags.append("concurrence-limit")
            print(
                f"level {j}: Gamma {report.gamma:+.12f}, closed form "
                f"{report.analytic_gamma:+.12f} (unreduced), difference mod 2pi "
                f"{report.difference_mod_2pi:+.6e}"
                + (f"  [{', '.join(flags)}]" if flags else "")
            )
            print(
                "         weights "
                + ", ".join(f"{p:.6f}" for p in report.weights)
                + "; eigenvector phases "
                + ", ".join(f"{b:+.6f}" for b in report.eigenvector_phases)
            )
        return 0
    print("particle-2 mixed phase around the magnetic loop")
    for j in levels:
        trace = track_loop(params, j, args.loop_steps)
        report = mixed_phase_numeric(trace)
        print(
            f"level {j}: Gamma {report.gamma:+.12f}, closed form "
            f"{report.analytic_gamma:+.12f}, difference mod 2pi "
            f"{report.difference_mod_2pi:+.3e}"
        )
        print(
            "         weights "
            + ", ".join(f"{p:.6f}" for p in report.weights)
            + "; eigenvector phases "
            + ", ".join(f"{b:+.6f}" for b in report.eigenvector_phases)
        )
    return 0


def _cmd_concurrence(args) -> int:
    params = _params_from(args)
    frames = eigenframes_at(params)
    print(f"{'level':>5} {'concurrence':>16}")
    for j in _levels_from(args):
        print(f"{j:>5} {concurrence_pure(frames[j - 1]):>16.12f}")
    return 0


def _cmd_sweep(args) -> int:
    config = {}
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(config, dict):
            raise UsageError("config must be a JSON object mirroring the sweep fields")

    base_cfg = dict(config.get("base", {}))
    for key, flag in (
        ("omega1", "omega1"),
        ("nu", "nu"),
        ("lambda", "lam"),
        ("coupling_J", "coupling_j"),
        ("omega2", "omega2"),
        ("n_photon", "n_photon"),
        ("n_prime", "n_prime"),
    ):
        value = getattr(args, flag)
        if value is not None:
            base_cfg[key] = value
    config["base"] = base_cfg
    if args.axis is not None:
        config["axis"] = args.axis
    if args.values is not None:
        config["values"] = _parse_values(args.values)
    if args.level is not None:
        config["levels"] = [int(tok) for tok in args.level.split(",") if tok.strip()]
    if args.loop_steps is not None:
        config["loop_steps"] = args.loop_steps
    if args.theta is not None:
        config["theta"] = args.theta
    if args.outputs is not None:
        config["outputs"] = [tok.strip() for tok in args.outputs.split(",") if tok.strip()]

    spec = SweepSpec.from_config(config)
    rows = run_sweep(spec, Path(args.out), workers=args.workers)
    failed = sum(1 for row in rows if row.get("error"))
    print(f"wrote {len(rows)} rows to {args.out}" + (f" ({failed} failed rows)" if failed else ""))
    return 2 if failed else 0


def _cmd_scenario(args) -> int:
    name = args.name or args.name_flag
    if name is None:
        raise UsageError("give a scenario name (positionally or with --scenario)")
    names = SCENARIOS if name == "all" else (name,)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    all_passed = True
    for name in names:
        result = run_scenario(name, loop_steps=args.loop_steps)
        rows_to_csv(result.rows, result.columns, out_dir / f"{name}.csv")
        print(result.report())
        all_passed &= result.passed
    return 0 if all_passed else 2


def _cmd_plot(args) -> int:
    y_columns = [tok.strip() for tok in args.y.split(",") if tok.strip()]
    if not y_columns:
        raise UsageError("--y needs at least one column")
    out = Path(args.out) if args.out else Path(args.csv).with_suffix(".svg")
    emit_plot(Path(args.csv), args.x, y_columns, out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="spinberry",
        description=(
            "Berry phases, mixed-state phases and concurrence for two coupled "
            "spins driven by a classical magnetic field and quantized field modes."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text, steps_default=None, theta=False, phi=False):
        p = sub.add_parser(name, help=help_text)
        _add_param_options(p)
        _add_level_option(p)
        if steps_default is not None:
            p.add_argument("--loop-steps", type=int, default=steps_default)
        if theta:
            p.add_argument("--theta", type=float, default=GENERIC_THETA)
        if phi:
            p.add_argument("--phi", type=float, default=0.0)
        p.set_defaults(func=func)
        return p

    command("eig", _cmd_eig, "energies, angles and concurrence at one point", phi=True)
    command(
        "berry-magnetic",
        _cmd_berry_magnetic,
        "Wilson loop over the magnetic azimuth vs the solid-angle form",
        steps_default=DEFAULT_MAGNETIC_STEPS,
    )
    command(
        "berry-quantized",
        _cmd_berry_quantized,
        "Wilson loop over the photon-number phase shift vs its closed form",
        steps_default=DEFAULT_QUANTIZED_STEPS,
    )
    command(
        "berry-twomode",
        _cmd_berry_twomode,
        "Wilson loop over the two-mode rotation vs the solid-angle form",
        steps_default=DEFAULT_TWOMODE_STEPS,
        theta=True,
    )
    mixed = command(
        "mixed-phase",
        _cmd_mixed_phase,
        "mixed-state phase of a subsystem",
        steps_default=DEFAULT_TWOMODE_STEPS,
        theta=True,
    )
    mixed.add_argument(
        "--two-mode",
        action="store_true",
        help="keep particle 1 plus both field modes under the two-mode loop "
        "instead of particle 2 under the magnetic loop",
    )
    command("concurrence", _cmd_concurrence, "pure-state concurrence per level")

    sweep = sub.add_parser("sweep", help="sweep one parameter and write a CSV")
    group = sweep.add_argument_group("model parameters (override config)")
    group.add_argument("--omega1", type=float, default=None)
    group.add_argument("--nu", type=float, default=None)
    group.add_argument("--lambda", dest="lam", type=float, default=None)
    group.add_argument("--coupling-j", type=float, default=None)
    group.add_argument("--omega2", type=float, default=None)
    group.add_argument("--n-photon", type=int, default=None)
    group.add_argument("--n-prime", type=int, default=None)
    sweep.add_argument("--config", default=None, help="JSON file mirroring the sweep fields")
    sweep.add_argument("--axis", default=None, help="parameter to sweep")
    sweep.add_argument(
        "--values", default=None, help="comma list and/or start:stop:count ranges"
    )
    sweep.add_argument("--level", default=None)
    sweep.add_argument("--loop-steps", type=int, default=None)
    sweep.add_argument("--theta", type=float, default=None)
    sweep.add_argument("--outputs", default=None, help=f"comma list from {OUTPUTS}")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--out", default="sweep.csv")
    sweep.set_defaults(func=_cmd_sweep)

    scenario = sub.add_parser(
        "scenario", help="run a named reproduction scenario and assert its claims"
    )
    scenario.add_argument("name", nargs="?", choices=SCENARIOS + ("all",))
    scenario.add_argument(
        "--scenario", dest="name_flag", choices=SCENARIOS + ("all",), default=None
    )
    scenario.add_argument("--loop-steps", type=int, default=4096)
    scenario.add_argument("--out", default="out")
    scenario.set_defaults(func=_cmd_scenario)

    plot = sub.add_parser("plot", help="render sweep columns to a standalone SVG")
    plot.add_argument("csv")
    plot.add_argument("--x", required=True)
    plot.add_argument("--y", required=True, help="comma-separated y columns")
    plot.add_argument("--out", default=None)
    plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SpinberryError as exc:
        print(f"failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
