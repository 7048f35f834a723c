"""Command-line front end: bounds tables, analytic predictions, seeded
Monte Carlo runs, (N, phi) sweeps, and the property-check suites.

Output is CSV with a commented manifest header (or a JSON mirror via
--format json).  Angles are printed in degrees with 2 decimals; correlation
sums and bounds with 4 decimals.  Exit codes: 0 success, 1 usage/config
error, 2 property-check failure, 3 degenerate data.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, _checks, inequality, quantum, simulate
from .simulate import DegenerateDataError, ExperimentConfig, derive_seed
from .sphere import PlaneFrame, UnitVector, default_frames

__all__ = ["main", "ConfigError", "RunManifest", "load_config", "read_manifest"]

_MANIFEST_PREFIX = "# nlvtest-manifest "


class ConfigError(ValueError):
    """A configuration file or state spec could not be parsed."""


@dataclasses.dataclass(frozen=True)
class RunManifest:
    """Provenance block attached to every output: tool version, command,
    seed, config snapshot, and timestamp, sufficient to reproduce the data
    section bit-exactly."""

    entries: tuple[tuple[str, str], ...]

    def as_dict(self) -> dict[str, str]:
        return dict(self.entries)

    def lines(self) -> list[str]:
        return [f"{_MANIFEST_PREFIX}{key}={value}" for key, value in self.entries]


# ---------------------------------------------------------------------------
# configuration files


_CONFIG_KEYS = {
    "pair_rate",
    "accidental_rate",
    "integration_time",
    "state",
    "visibilities",
    "seed",
    "subtract_accidentals",
    "plane1_normal",
    "plane1_seed",
    "plane2_normal",
    "plane2_seed",
}


def _parse_vector(text: str) -> UnitVector:
    parts = [float(s) for s in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three components, got {len(parts)}")
    return UnitVector(*parts)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a flat key = value config file into an ExperimentConfig."""
    values: dict[str, str] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return config_from_values(values, source=str(path))


def config_from_values(values: dict[str, str], source: str = "<args>") -> ExperimentConfig:
    if "state" in values and "visibilities" in values:
        raise ConfigError(f"{source}: 'state' and 'visibilities' are mutually exclusive")
    kwargs: dict = {}
    try:
        if "pair_rate" in values:
            kwargs["pair_rate"] = float(values["pair_rate"])
        if "accidental_rate" in values:
            kwargs["accidental_rate"] = float(values["accidental_rate"])
        if "integration_time" in values:
            kwargs["integration_time"] = float(values["integration_time"])
        if "state" in values:
            quantum.parse_state(values["state"])  # validate early
            kwargs["state"] = values["state"]
        if "visibilities" in values:
            spec = "visibilities:" + values["visibilities"]
            quantum.parse_state(spec)
            kwargs["state"] = spec
        if "seed" in values:
            kwargs["rng_seed"] = int(values["seed"])
        if "subtract_accidentals" in values:
            kwargs["subtract_accidentals"] = _parse_bool(values["subtract_accidentals"])
        frame_keys = ("plane1_normal", "plane1_seed", "plane2_normal", "plane2_seed")
        if any(k in values for k in frame_keys):
            d1, d2 = default_frames()
            frame1 = PlaneFrame(
                normal=_parse_vector(values["plane1_normal"]) if "plane1_normal" in values else d1.normal,
                seed=_parse_vector(values["plane1_seed"]) if "plane1_seed" in values else d1.seed,
            )
            frame2 = PlaneFrame(
                normal=_parse_vector(values["plane2_normal"]) if "plane2_normal" in values else d2.normal,
                seed=_parse_vector(values["plane2_seed"]) if "plane2_seed" in values else d2.seed,
            )
            kwargs["frames"] = (frame1, frame2)
        return ExperimentConfig(**kwargs)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{source}: {exc}") from None


# ---------------------------------------------------------------------------
# manifests and output


def _vector_text(v: UnitVector) -> str:
    return f"{v.x!r},{v.y!r},{v.z!r}"


def build_manifest(command: str, args: argparse.Namespace, config: ExperimentConfig | None) -> RunManifest:
    manifest = {
        "tool": "nlvtest",
        "version": __version__,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    for key in ("n", "runs"):
        if getattr(args, key, None) is not None:
            manifest[key] = str(getattr(args, key))
    if getattr(args, "n_list", None):
        manifest["n_list"] = ",".join(str(n) for n in args.n_list)
    if getattr(args, "phi", None) is not None:
        manifest["phi_deg"] = repr(args.phi)
    if getattr(args, "phi_range", None) is not None:
        manifest["phi_range_deg"] = f"{args.phi_range[0]!r}:{args.phi_range[1]!r}"
        manifest["step_deg"] = repr(args.step)
    if getattr(args, "state", None):
        manifest["state"] = args.state
    if config is not None:
        manifest["seed"] = str(config.rng_seed)
        manifest["config.pair_rate"] = repr(config.pair_rate)
        manifest["config.accidental_rate"] = repr(config.accidental_rate)
        manifest["config.integration_time"] = repr(config.integration_time)
        manifest["config.state"] = config.state
        manifest["config.subtract_accidentals"] = str(config.subtract_accidentals).lower()
        manifest["config.plane1_normal"] = _vector_text(config.frames[0].normal)
        manifest["config.plane1_seed"] = _vector_text(config.frames[0].seed)
        manifest["config.plane2_normal"] = _vector_text(config.frames[1].normal)
        manifest["config.plane2_seed"] = _vector_text(config.frames[1].seed)
    return RunManifest(entries=tuple(manifest.items()))


def read_manifest(path: str | Path) -> dict[str, str]:
    """Recover the manifest embedded in a CSV output file."""
    manifest = {}
    for line in Path(path).read_text().splitlines():
        if line.startswith(_MANIFEST_PREFIX):
            key, _, value = line[len(_MANIFEST_PREFIX):].partition("=")
            manifest[key] = value
    return manifest


def _emit(args: argparse.Namespace, manifest: RunManifest, columns: list[str],
          rows: list[list[str]]) -> None:
    if args.format == "json":
        payload = {
            "manifest": manifest.as_dict(),
            "records": [dict(zip(columns, row)) for row in rows],
        }
        text = json.dumps(payload, indent=2) + "\n"
    else:
        buf = io.StringIO()
        for line in manifest.lines():
            buf.write(line + "\n")
        buf.write(",".join(columns) + "\n")
        for row in rows:
            buf.write(",".join(row) + "\n")
        text = buf.getvalue()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt_deg(x: float) -> str:
    return f"{x:.2f}"


def _fmt4(x: float) -> str:
    return f"{x:.4f}"


def _phi_grid_deg(args: argparse.Namespace) -> list[float]:
    if getattr(args, "phi", None) is not None:
        return [args.phi]
    lo, hi = args.phi_range
    if args.step is None or args.step <= 0.0:
        raise ConfigError("--phi-range requires a positive --step")
    grid = []
    k = 0
    while True:
        value = lo + k * args.step
        if value > hi + 1e-9:
            break
        grid.append(value)
        k += 1
    return grid


# ---------------------------------------------------------------------------
# subcommands


def cmd_bounds(args: argparse.Namespace) -> int:
    grid = _phi_grid_deg(args)
    columns = ["phi_deg"] + [f"bound_n{n}" for n in args.n_list] + ["singlet_l"]
    rows = []
    for deg in grid:
        phi = math.radians(deg)
        row = [_fmt_deg(deg)]
        row += [_fmt4(inequality.nlv_bound(n, phi)) for n in args.n_list]
        row.append(_fmt4(quantum.singlet_L(phi)))
        rows.append(row)
    _emit(args, build_manifest("bounds", args, None), columns, rows)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else ExperimentConfig()
    if args.state:
        try:
            quantum.parse_state(args.state)
        except ValueError as exc:
            raise ConfigError(f"--state: {exc}") from None
        config = dataclasses.replace(config, state=args.state)
    state = config.resolve_state()
    phi = math.radians(args.phi)
    report = inequality.l_n(state, config.frames, args.n, phi)
    best_phi, best_violation = inequality.max_violation_phi(
        state, config.frames, args.n
    )
    columns = [
        "n", "phi_deg", "l_value", "bound", "violation",
        "best_phi_deg", "best_violation",
    ]
    rows = [[
        str(args.n),
        _fmt_deg(args.phi),
        _fmt4(report.l_value),
        _fmt4(report.bound),
        _fmt4(report.violation),
        _fmt_deg(math.degrees(best_phi)),
        _fmt4(best_violation),
    ]]
    _emit(args, build_manifest("predict", args, config), columns, rows)
    return 0


_SIM_COLUMNS = [
    "run", "n", "phi_deg", "l_exp", "sigma", "bound", "violation_sigmas",
    "seed", "status", "std_l", "std_over_sigma",
]


def _simulate_cell(config: ExperimentConfig, n: int, phi_deg: float, runs: int,
                   cell_parts: tuple[int, ...]) -> tuple[list[list[str]], int, int]:
    """Per-run rows plus a summary row for one (N, phi) cell."""
    phi = math.radians(phi_deg)
    rows = []
    reports = []
    failures = 0
    for run_idx in range(runs):
        seed = derive_seed(config.rng_seed, *cell_parts, run_idx)
        run_config = dataclasses.replace(config, rng_seed=seed)
        seed_text = "-".join(str(s) for s in seed)
        try:
            report = simulate.run_experiment(run_config, n, phi)
        except DegenerateDataError as exc:
            failures += 1
            rows.append([
                str(run_idx), str(n), _fmt_deg(phi_deg), "", "", "", "",
                seed_text, f"degenerate-data ({exc})", "", "",
            ])
            continue
        reports.append(report)
        rows.append([
            str(run_idx), str(n), _fmt_deg(phi_deg),
            _fmt4(report.l_value), _fmt4(report.sigma), _fmt4(report.bound),
            f"{report.violation_sigmas:.2f}" if report.violation_sigmas is not None else "",
            seed_text, "ok", "", "",
        ])
    if reports:
        l_values = np.array([r.l_value for r in reports])
        sigmas = np.array([r.sigma for r in reports])
        violations = np.array(
            [r.violation_sigmas for r in reports if r.violation_sigmas is not None]
        )
        std_l = float(l_values.std(ddof=1)) if len(reports) > 1 else 0.0
        mean_sigma = float(sigmas.mean())
        rows.append([
            "summary", str(n), _fmt_deg(phi_deg),
            _fmt4(float(l_values.mean())), _fmt4(mean_sigma),
            _fmt4(inequality.nlv_bound(n, phi)),
            f"{float(violations.mean()):.2f}" if violations.size else "",
            "", "summary", _fmt4(std_l),
            f"{std_l / mean_sigma:.3f}" if mean_sigma > 0.0 else "",
        ])
    return rows, len(reports), failures


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    rows, succeeded, _ = _simulate_cell(config, args.n, args.phi, args.runs, ())
    _emit(args, build_manifest("simulate", args, config), _SIM_COLUMNS, rows)
    if succeeded == 0:
        print("error: every run produced degenerate data", file=sys.stderr)
        return 3
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    state = config.resolve_state()
    grid = _phi_grid_deg(args)
    columns = [
        "n", "phi_deg", "bound", "analytic_l", "singlet_l",
        "mean_l_exp", "std_l", "mean_sigma", "mean_violation", "runs", "status",
    ]
    rows = []
    any_success = False
    for n in args.n_list:
        for phi_idx, deg in enumerate(grid):
            phi = math.radians(deg)
            analytic = inequality.l_n(state, config.frames, n, phi)
            cell_rows, succeeded, failures = _simulate_cell(
                config, n, deg, args.runs, (n, phi_idx)
            )
            summary = cell_rows[-1] if succeeded else None
            any_success = any_success or succeeded > 0
            rows.append([
                str(n), _fmt_deg(deg), _fmt4(analytic.bound),
                _fmt4(analytic.l_value), _fmt4(quantum.singlet_L(phi)),
                summary[3] if summary else "",
                summary[9] if summary else "",
                summary[4] if summary else "",
                summary[6] if summary else "",
                str(succeeded),
                "ok" if failures == 0 else f"degenerate-data x{failures}",
            ])
    _emit(args, build_manifest("sweep", args, config), columns, rows)
    return 0 if any_success else 3


def cmd_check(args: argparse.Namespace) -> int:
    results = []
    if args.suite in ("lemma", "all"):
        results += _checks.lemma_suite(trials=args.trials, seed=args.seed or 0)
    if args.suite in ("leggett", "all"):
        results += _checks.leggett_suite(
            trials=args.trials,
            seed=args.seed or 0,
            ensembles=args.ensembles,
            grid_deg=args.grid_deg,
        )
    failed = 0
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        if not result.passed:
            failed += 1
        print(f"{status} {result.name}: {result.detail}")
    print(f"{len(results) - failed}/{len(results)} properties passed")
    return 2 if failed else 0


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        config = dataclasses.replace(config, rng_seed=args.seed)
    if getattr(args, "subtract_accidentals", False):
        config = dataclasses.replace(config, subtract_accidentals=True)
    return config


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_n_list(text: str) -> list[int]:
    try:
        values = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad setting-count list {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"need positive setting counts, got {text!r}")
    return values


def _parse_phi_range(text: str) -> tuple[float, float]:
    try:
        lo, _, hi = text.partition(":")
        lo_f, hi_f = float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad angle range {text!r}, expected LO:HI")
    if hi_f < lo_f:
        raise argparse.ArgumentTypeError(f"empty angle range {text!r}")
    return (lo_f, hi_f)


def _add_output_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--output", metavar="PATH", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="nlvtest",
        description="Finite-setting inequality tests of non-local-variable models",
    )
    parser.add_argument("--version", action="version", version=f"nlvtest {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    bounds = subs.add_parser("bounds", help="tabulate the model bound and singlet curve")
    bounds.add_argument("--n-list", type=_parse_n_list, required=True)
    group = bounds.add_mutually_exclusive_group(required=True)
    group.add_argument("--phi", type=float, help="difference angle in degrees")
    group.add_argument("--phi-range", type=_parse_phi_range, metavar="LO:HI")
    bounds.add_argument("--step", type=float, default=None, help="grid step in degrees")
    _add_output_flags(bounds)
    bounds.set_defaults(func=cmd_bounds)

    predict = subs.add_parser("predict", help="analytic prediction for a state")
    predict.add_argument("--state", default=None,
                         help="state spec, e.g. singlet or werner:0.96")
    predict.add_argument("--config", metavar="PATH", default=None)
    predict.add_argument("--n", type=int, required=True)
    predict.add_argument("--phi", type=float, required=True, help="degrees")
    _add_output_flags(predict)
    predict.set_defaults(func=cmd_predict)

    sim = subs.add_parser("simulate", help="seeded Monte Carlo counting runs")
    sim.add_argument("--config", metavar="PATH", default=None)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--phi", type=float, required=True, help="degrees")
    sim.add_argument("--runs", type=int, default=1)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--subtract-accidentals", action="store_true")
    _add_output_flags(sim)
    sim.set_defaults(func=cmd_simulate)

    sweep = subs.add_parser("sweep", help="grid of simulations over (N, phi)")
    sweep.add_argument("--config", metavar="PATH", default=None)
    sweep.add_argument("--n-list", type=_parse_n_list, required=True)
    sweep.add_argument("--phi-range", type=_parse_phi_range, required=True, metavar="LO:HI")
    sweep.add_argument("--step", type=float, required=True, help="degrees")
    sweep.add_argument("--runs", type=int, default=10)
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--subtract-accidentals", action="store_true")
    _add_output_flags(sweep)
    sweep.set_defaults(func=cmd_sweep)

    check = subs.add_parser("check", help="run the property suites")
    check.add_argument("suite", choices=("lemma", "leggett", "all"))
    check.add_argument("--trials", type=int, default=100_000)
    check.add_argument("--ensembles", type=int, default=100)
    check.add_argument("--grid-deg", type=float, default=0.0,
                       help="also scan the two-setting schedule at this resolution")
    check.add_argument("--seed", type=int, default=None)
    check.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits for usage errors, --help, --version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
