#!/usr/bin/env python3
"""
Command: cvrx

Error-rate sweeps, parameter optimization and verification for binary
coherent-state receivers.

Usage:
    cvrx sweep --receiver FAMILY [receiver flags] [grid flags] [--optimize]
    cvrx optimize-beta --receiver cat_rotation|coherent_rotation [grid flags]
    cvrx fit-scaling --receiver cat_rotation|coherent_rotation [grid flags]
    cvrx compare FILE [FILE ...]
    cvrx table1
    cvrx verify [--only SUITE] [--tolerance-scale X]

Examples:
    # Homodyne error curve as CSV
    cvrx sweep --receiver homodyne --alpha-sq-min 0.1 --alpha-sq-max 1.0 --alpha-sq-step 0.1

    # Coherent-state rotation with beta re-optimized at every point
    cvrx sweep --receiver coherent_rotation --optimize --alpha-sq-min 0.5 --alpha-sq-max 3 \\
        --alpha-sq-step 0.05 --out coherent.csv

    # Overlay several sweeps on one alpha_sq column
    cvrx compare homodyne.csv coherent.csv legendre.csv --out overlay.csv

    # Run only the nested Fock-set suite
    cvrx verify --only appendix_b
"""

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from cvreceivers.lib.acceptance import run_check, select_suites, suite_artifact, SuiteContext
from cvreceivers.lib.discrim import gaussian_limit, helstrom_bpsk, kennedy_error
from cvreceivers.lib.errors import AccuracyWarning, ReceiverError, SpecError
from cvreceivers.lib.optimize import SWEEP_HEADER, ErrorCurve, fit_beta_scaling, sweep_error_curve
from cvreceivers.lib.progress import LoaderStyle, track_progress
from cvreceivers.lib.receivers import Family, ReceiverSpec, rotation_receiver
from cvreceivers.lib.states import RotationKind
from cvreceivers.lib.stellar import table_one
from cvreceivers.lib.utils import (
    csv_text,
    error,
    format_number,
    load_config_file,
    parse_bool,
    read_csv,
    round_nested,
    set_debug,
    status,
    warn,
    write_csv,
    write_json,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

RECEIVERS = ('homodyne', 'rotation_homodyne', 'legendre', 'laguerre', 'pacs', 'cpg',
             'heterodyne', 'cat_rotation', 'coherent_rotation', 'fock_rotation')
ALIAS_ROTATIONS = {
    'cat_rotation': RotationKind.CAT,
    'coherent_rotation': RotationKind.COHERENT,
    'fock_rotation': RotationKind.FOCK,
}
# beta used to size a cat/coherent rotation whose beta is re-optimized anyway
PLACEHOLDER_BETA = 1.0

GRID_DEFAULTS = {
    'sweep': (0.1, 3.0, 0.1),
    'optimize-beta': (0.1, 3.0, 0.1),
    'fit-scaling': (0.01, 3.0, 0.01),
}


class UsageError(ValueError):
    """Invalid command-line or config-file input."""


@dataclass
class RunConfig:
    command: str
    receiver: Optional[str] = None
    rotation_state: Optional[str] = None
    fock_set: Optional[str] = None
    beta: Optional[float] = None
    theta: Optional[str] = None
    nu: Optional[float] = None
    n_add: Optional[int] = None
    gamma: Optional[float] = None
    alpha_sq_min: Optional[float] = None
    alpha_sq_max: Optional[float] = None
    alpha_sq_step: Optional[float] = None
    optimize: bool = False
    out: Optional[str] = None
    format: str = 'csv'
    only: Optional[str] = None
    tolerance_scale: float = 1.0
    workers: int = 1
    debug: bool = False
    files: Tuple[str, ...] = ()


_CONVERTERS: Dict[str, Callable[[str], Any]] = {
    'receiver': str, 'rotation_state': str, 'fock_set': str, 'theta': str,
    'beta': float, 'nu': float, 'gamma': float, 'n_add': int,
    'alpha_sq_min': float, 'alpha_sq_max': float, 'alpha_sq_step': float,
    'optimize': parse_bool, 'debug': parse_bool,
    'out': str, 'format': str, 'only': str,
    'tolerance_scale': float, 'workers': int,
}


def check_out_path(path: str) -> None:
    """Fail unless --out names a file whose nearest existing ancestor is a writable directory."""
    if os.path.isdir(path):
        raise UsageError(f"--out {path} is a directory")
    parent = os.path.dirname(os.path.abspath(path))
    while not os.path.exists(parent):
        parent = os.path.dirname(parent)
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise UsageError(f"--out {path}: {parent} is not a writable directory")


def build_config(args: argparse.Namespace, file_values: Dict[str, str]) -> RunConfig:
    """
    Merge flags, config-file values and defaults (in that order of precedence).

    Raises:
        UsageError: On unknown config keys or unparsable values
    """
    unknown = sorted(set(file_values) - set(_CONVERTERS))
    if unknown:
        raise UsageError(f"Unknown config key(s): {', '.join(unknown)}")

    merged: Dict[str, Any] = {'command': args.command, 'files': tuple(getattr(args, 'files', None) or ())}
    for name, convert in _CONVERTERS.items():
        value = getattr(args, name, None)
        if value is None and name in file_values:
            try:
                value = convert(file_values[name])
            except ValueError:
                raise UsageError(f"Config key {name}: cannot parse {file_values[name]!r}") from None
        if value is not None:
            merged[name] = value

    defaults = GRID_DEFAULTS.get(args.command)
    if defaults:
        for name, default in zip(('alpha_sq_min', 'alpha_sq_max', 'alpha_sq_step'), defaults):
            merged.setdefault(name, default)

    config = RunConfig(**merged)
    if config.format not in ('csv', 'json'):
        raise UsageError(f"--format must be csv or json, got {config.format}")
    if config.workers < 1:
        raise UsageError(f"--workers must be at least 1, got {config.workers}")
    if config.out:
        check_out_path(config.out)
    return config


def alpha_sq_grid(config: RunConfig) -> List[float]:
    """Inclusive grid min, min + step, ..., max."""
    lo, hi, step = config.alpha_sq_min, config.alpha_sq_max, config.alpha_sq_step
    if not all(math.isfinite(v) for v in (lo, hi, step)):
        raise UsageError("grid bounds and step must be finite")
    if step <= 0.0:
        raise UsageError(f"--alpha-sq-step must be positive, got {format_number(step)}")
    if lo <= 0.0:
        raise UsageError(f"--alpha-sq-min must be positive, got {format_number(lo)}")
    if hi <= lo:
        raise UsageError(f"empty grid: --alpha-sq-max ({format_number(hi)}) must exceed "
                         f"--alpha-sq-min ({format_number(lo)})")
    count = int(round((hi - lo) / step)) + 1
    grid = [round(lo + k * step, 10) for k in range(count)]
    return [a for a in grid if a <= hi + 1e-9]


def parse_fock_set(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(',') if part.strip())
    except ValueError:
        raise UsageError(f"--fock-set must be a comma list of integers, got {text!r}") from None


def parse_thetas(text: Optional[str], count: int) -> Optional[Tuple[float, ...]]:
    """Angles from a comma list; ``pi`` alone means pi for every projector."""
    if text is None or text.strip().lower() == 'pi':
        return None
    values = []
    for part in text.split(','):
        part = part.strip().lower()
        try:
            values.append(math.pi if part == 'pi' else float(part))
        except ValueError:
            raise UsageError(f"--theta entries must be numbers or pi, got {part!r}") from None
    if len(values) != count:
        raise UsageError(f"--theta has {len(values)} angles for {count} Fock states")
    return tuple(values)


def build_receiver(config: RunConfig, alpha: float) -> ReceiverSpec:
    """
    ReceiverSpec for the configured family, sized for amplitudes up to ``alpha``.

    Raises:
        UsageError: On a missing receiver or a flag that does not belong to it
        ReceiverError: When the receiver itself rejects its parameters
    """
    name = config.receiver
    if not name:
        raise UsageError("--receiver is required")
    if name not in RECEIVERS:
        raise UsageError(f"Unknown receiver {name!r}; choose from {', '.join(RECEIVERS)}")

    rotation_flags = {flag: getattr(config, attr) for flag, attr in (
        ('--rotation-state', 'rotation_state'), ('--fock-set', 'fock_set'),
        ('--beta', 'beta'), ('--theta', 'theta'))}

    if name in ALIAS_ROTATIONS or name == 'rotation_homodyne':
        if name in ALIAS_ROTATIONS:
            kind = ALIAS_ROTATIONS[name]
            if config.rotation_state and config.rotation_state != kind.value:
                raise UsageError(f"{name} conflicts with --rotation-state {config.rotation_state}")
        else:
            if not config.rotation_state:
                raise UsageError("rotation_homodyne needs --rotation-state")
            try:
                kind = RotationKind(config.rotation_state)
            except ValueError:
                raise UsageError(f"--rotation-state must be cat, coherent or fock, "
                                 f"got {config.rotation_state!r}") from None
        for flag, attr in (('--nu', 'nu'), ('--n-add', 'n_add'), ('--gamma', 'gamma')):
            if getattr(config, attr) is not None:
                raise SpecError(f"{flag} does not apply to rotation receivers")
        if kind is RotationKind.FOCK:
            if config.beta is not None:
                raise SpecError("--beta does not apply to Fock rotations")
            if not config.fock_set:
                raise UsageError("Fock rotations need --fock-set")
            fock_set = parse_fock_set(config.fock_set)
            return rotation_receiver(kind, alpha, thetas=parse_thetas(config.theta, len(fock_set)),
                                     fock_set=fock_set)
        if config.fock_set is not None:
            raise SpecError(f"--fock-set does not apply to {kind.value} rotations")
        if config.theta is not None and parse_thetas(config.theta, 1) not in (None, (math.pi,)):
            raise SpecError(f"{kind.value} rotations fix theta at pi")
        beta = config.beta
        if beta is None:
            if not config.optimize:
                raise UsageError(f"{kind.value} rotations need --beta (or --optimize)")
            beta = PLACEHOLDER_BETA
        return rotation_receiver(kind, alpha, beta=beta)

    given = [flag for flag, value in rotation_flags.items() if value is not None]
    if given:
        raise SpecError(f"{', '.join(given)} only apply to rotation receivers")
    if name == 'heterodyne':
        if config.n_add not in (None, 0):
            raise SpecError("heterodyne is PACS with --n-add 0")
        return ReceiverSpec(Family.PACS, n_add=0, nu=config.nu, gamma=config.gamma)
    return ReceiverSpec(Family(name), nu=config.nu, n_add=config.n_add, gamma=config.gamma)


def curve_document(curve: ErrorCurve) -> Dict[str, Any]:
    points = []
    for row in curve.rows():
        point = dict(zip(SWEEP_HEADER, row))
        point['param_json'] = json.loads(point['param_json'])
        points.append(point)
    return {"receiver": curve.label, "points": points}


def emit(config: RunConfig, header: Sequence[str], rows: List[List[Any]], document: Any) -> None:
    """Write rows as CSV or a document as JSON to --out, or to stdout."""
    if config.format == 'json':
        if config.out:
            write_json(config.out, document)
        else:
            print(json.dumps(round_nested(document), indent=2, sort_keys=True, ensure_ascii=False))
    elif config.out:
        write_csv(config.out, header, rows)
    else:
        sys.stdout.write(csv_text(header, rows))
    if config.out:
        status(f"Wrote {config.out}")


def run_sweep(config: RunConfig, optimize: bool) -> ErrorCurve:
    grid = alpha_sq_grid(config)
    spec = build_receiver(config, math.sqrt(grid[-1]))
    mode = "optimized " if optimize else ""
    with track_progress(f"Sweeping {mode}{spec.label} over {len(grid)} points...", LoaderStyle.DOTS) as step:
        curve = sweep_error_curve(spec, grid, optimize=optimize, workers=config.workers)
        flagged = sum(1 for flag in curve.column('flag') if flag != 'ok')
        step.detail = f"{len(curve.points)} points, {flagged} flagged"
    return curve


def cmd_sweep(config: RunConfig) -> int:
    curve = run_sweep(config, config.optimize)
    emit(config, SWEEP_HEADER, curve.rows(), curve_document(curve))
    return EXIT_OK


def _beta_family(config: RunConfig) -> RotationKind:
    if config.receiver in ('cat_rotation', 'coherent_rotation'):
        return ALIAS_ROTATIONS[config.receiver]
    if config.receiver == 'rotation_homodyne' and config.rotation_state in ('cat', 'coherent'):
        return RotationKind(config.rotation_state)
    raise UsageError("beta optimization needs --receiver cat_rotation or coherent_rotation")


def cmd_optimize_beta(config: RunConfig) -> int:
    _beta_family(config)
    config.optimize = True
    curve = run_sweep(config, True)
    emit(config, SWEEP_HEADER, curve.rows(), curve_document(curve))
    return EXIT_OK


def cmd_fit_scaling(config: RunConfig) -> int:
    kind = _beta_family(config)
    grid = alpha_sq_grid(config)
    with track_progress(f"Fitting optimal beta for {kind.value} rotations over {len(grid)} points...",
                        LoaderStyle.PULSE) as step:
        curve, fit = fit_beta_scaling(kind, grid)
        step.detail = f"slope {fit.slope:.4g}, intercept {fit.intercept:.4g}"
    document = curve_document(curve)
    document['fit'] = fit.as_dict()
    emit(config, SWEEP_HEADER, curve.rows(), document)
    if config.format == 'csv':
        print(json.dumps(round_nested(fit.as_dict()), sort_keys=True))
    return EXIT_OK


def _benchmarks(alpha_sq: float) -> List[float]:
    alpha = math.sqrt(alpha_sq)
    return [helstrom_bpsk(alpha), gaussian_limit(alpha), kennedy_error(alpha)]


def cmd_compare(config: RunConfig) -> int:
    """Join sweep files on alpha_sq into one wide table."""
    if not config.files:
        raise UsageError("compare needs at least one sweep file")
    columns: Dict[str, Dict[float, float]] = {}
    for path in config.files:
        try:
            rows = read_csv(path)
        except FileNotFoundError:
            raise UsageError(f"Sweep file not found: {path}") from None
        if not rows or set(SWEEP_HEADER) - set(rows[0]):
            raise UsageError(f"{path} is not a sweep file")
        label = rows[0]['receiver']
        if label in columns:
            raise UsageError(f"receiver {label} appears in more than one file")
        columns[label] = {float(r['alpha_sq']): float(r['pe']) for r in rows}

    labels = list(columns)
    header = ['alpha_sq'] + [f"pe_{label}" for label in labels] + ['pe_helstrom', 'pe_gaussian', 'pe_kennedy']
    table = []
    for alpha_sq in sorted(set().union(*columns.values())):
        cells = [columns[label].get(alpha_sq, '') for label in labels]
        table.append([alpha_sq] + cells + _benchmarks(alpha_sq))
    document = {"columns": header, "rows": [dict(zip(header, row)) for row in table]}
    emit(config, header, table, document)
    return EXIT_OK


def cmd_table1(config: RunConfig) -> int:
    rows = table_one()
    if config.out:
        write_json(config.out, rows)
        status(f"Wrote {config.out}")
    else:
        print(json.dumps(rows, indent=2, sort_keys=True, ensure_ascii=False))
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    names = select_suites(config.only)
    ctx = SuiteContext(config.tolerance_scale)
    results = []
    for name in names:
        with track_progress(f"Checking {name}...", LoaderStyle.BRAILLE) as step:
            result = run_check(name, ctx)
            step.detail = "pass" if result.passed else "FAIL"
        results.append(result)

    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}")
    if config.out:
        write_json(config.out, suite_artifact(results, config.tolerance_scale))
        status(f"Wrote {config.out}")

    failed = [r.name for r in results if not r.passed]
    if failed:
        error(f"{len(failed)} of {len(results)} checks failed: {', '.join(failed)}")
        return EXIT_FAILED
    status(f"All {len(results)} checks passed")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    'sweep': cmd_sweep,
    'optimize-beta': cmd_optimize_beta,
    'fit-scaling': cmd_fit_scaling,
    'compare': cmd_compare,
    'table1': cmd_table1,
    'verify': cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file (flags take precedence)")
    common.add_argument("--debug", action="store_true", default=None, help="Print debug details to stderr")
    common.add_argument("--workers", type=int, help="Threads for independent sweep points")
    common.add_argument("--out", help="Output path (default: stdout)")
    common.add_argument("--format", choices=('csv', 'json'), help="Output format (default: csv)")

    receiver = argparse.ArgumentParser(add_help=False)
    receiver.add_argument("--receiver", help=f"Receiver family: {', '.join(RECEIVERS)}")
    receiver.add_argument("--rotation-state", choices=('cat', 'coherent', 'fock'))
    receiver.add_argument("--fock-set", help="Comma list of Fock indices, e.g. 0,1,2")
    receiver.add_argument("--beta", type=float, help="Cat/coherent rotation amplitude")
    receiver.add_argument("--theta", help="Comma list of rotation angles, or pi")
    receiver.add_argument("--nu", type=float, help="Laguerre order")
    receiver.add_argument("--n-add", type=int, help="PACS photon additions")
    receiver.add_argument("--gamma", type=float, help="Cubic phase gate strength")
    receiver.add_argument("--alpha-sq-min", type=float)
    receiver.add_argument("--alpha-sq-max", type=float)
    receiver.add_argument("--alpha-sq-step", type=float)
    receiver.add_argument("--optimize", action="store_true", default=None,
                          help="Re-optimize rotation parameters at every grid point")

    parser = argparse.ArgumentParser(
        description="Error rates of continuously labelled receivers for BPSK coherent states",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("Examples:", 1)[1],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common, receiver], help="Error curve of one receiver")
    sub.add_parser("optimize-beta", parents=[common, receiver], help="Optimal beta per grid point")
    sub.add_parser("fit-scaling", parents=[common, receiver], help="Linear fit of optimal beta")
    compare = sub.add_parser("compare", parents=[common], help="Join sweep files on alpha_sq")
    compare.add_argument("files", nargs="+", help="Sweep CSV files")
    sub.add_parser("table1", parents=[common], help="Receiver metadata with stellar ranks")
    verify = sub.add_parser("verify", parents=[common], help="Run the acceptance checks")
    verify.add_argument("--only", help="Comma list of suites to run")
    verify.add_argument("--tolerance-scale", type=float, help="Multiply every tolerance by this factor")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    try:
        config = build_config(args, load_config_file(args.config))
    except (UsageError, FileNotFoundError) as e:
        error(str(e))
        return EXIT_USAGE
    set_debug(config.debug)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AccuracyWarning)
        try:
            code = COMMANDS[config.command](config)
        except (UsageError, ReceiverError) as e:
            error(str(e))
            return EXIT_USAGE
        except OSError as e:
            error(f"I/O error: {e}")
            return EXIT_USAGE
    for message in sorted({str(w.message) for w in caught if issubclass(w.category, AccuracyWarning)}):
        warn(message)
    return code


if __name__ == "__main__":
    sys.exit(main())
