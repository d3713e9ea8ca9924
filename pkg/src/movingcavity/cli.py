"""Command-line interface: spectra, resonances, coefficient evolution, checks.

Subcommands read a flat JSON configuration file, run one computation, and
write a table as CSV or JSON.  Output is deterministic: fixed column order
and 17 significant digits.  Complex values serialize as [re, im] pairs in
JSON and as paired re_*/im_* columns in CSV.

Exit codes: 0 success, 2 configuration error, 3 numerical or stability
error, 4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import warnings
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import BoundaryCondition, FieldParams
from .exact1d import (
    BoundaryTrajectory,
    InvalidTrajectoryError,
    SolverError,
    StabilityError,
    assemble_vhat,
    bogoliubov_identity_residual,
    evolve_transformation,
    generator_matrix,
    solve_instantaneous_basis,
)
from .perturb import (
    ValidityWindowWarning,
    build_coupling_matrices,
    bogoliubov_perturbative,
    find_resonances,
)
from .scenarios import (
    SCENARIO_NAMES,
    DceConfig,
    DceVariant,
    GwConfig,
    build_dce,
    build_gw,
)
from .staticmodes import (
    Box,
    Interval,
    orthonormality_residual,
    solve_box_modes,
    solve_interval_modes,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VALIDATION = 4


class ConfigError(ValueError):
    """Raised for a missing, malformed, or out-of-range config field."""


# ---------------------------------------------------------------------------
# configuration


_KNOWN_KEYS = {
    "scenario", "bc", "mass", "epsilon", "omega_drive", "length",
    "lx", "ly", "lz", "frequency_cutoff", "bands", "t0", "tf",
    "dt", "dt_fd", "quad_points", "samples", "tolerance",
    "pairs", "mode", "inject_error", "epsilons", "duration",
}

_GW_NAMES = ("gw-rigid",)


@dataclasses.dataclass
class RunConfig:
    """Resolved run configuration with defaults applied."""

    scenario: str = "dce-i"
    bc: BoundaryCondition = BoundaryCondition.DIRICHLET
    mass: float = 0.0
    epsilon: float = 1e-3
    omega_drive: float = 3.0
    length: float = math.pi
    lx: float = 1.0
    ly: float = 1.3
    lz: float = 0.9
    frequency_cutoff: float = 25.0
    bands: int = 5
    t0: float = 0.0
    tf: float = 10.0
    dt: Optional[float] = None
    dt_fd: Optional[float] = None
    quad_points: Optional[int] = None
    samples: int = 25
    tolerance: float = 1e-9
    pairs: Tuple[Tuple[int, int], ...] = ()
    mode: str = "default"
    inject_error: str = ""
    epsilons: Tuple[float, ...] = (1e-2, 3e-3, 1e-3)
    duration: float = 6.0

    def meta(self) -> Dict[str, Any]:
        out = dataclasses.asdict(self)
        out["bc"] = self.bc.value
        out["pairs"] = [list(p) for p in self.pairs]
        out["epsilons"] = list(self.epsilons)
        return out


def _coerce(name: str, value: Any, kind: type) -> Any:
    try:
        coerced = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(
            f"field '{name}': expected {kind.__name__}, got {value!r}"
        )
    if kind is float and not math.isfinite(coerced):
        raise ConfigError(f"field '{name}': must be finite, got {value!r}")
    return coerced


def load_config(path: Optional[str], overrides: Dict[str, Any]) -> RunConfig:
    """Read a flat JSON config file and apply command-line overrides."""
    raw: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as handle:
                raw = json.load(handle)
        except OSError as err:
            raise ConfigError(f"cannot read config file: {err}")
        except json.JSONDecodeError as err:
            raise ConfigError(f"config is not valid JSON: {err}")
        if not isinstance(raw, dict):
            raise ConfigError("config must be a flat JSON object")
    raw.update(overrides)
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")

    config = RunConfig()
    for name in ("mass", "epsilon", "omega_drive", "length", "lx", "ly",
                 "lz", "frequency_cutoff", "t0", "tf", "tolerance",
                 "duration"):
        if name in raw:
            setattr(config, name, _coerce(name, raw[name], float))
    for name in ("bands", "samples"):
        if name in raw:
            setattr(config, name, _coerce(name, raw[name], int))
    for name in ("dt", "dt_fd"):
        if name in raw and raw[name] is not None:
            setattr(config, name, _coerce(name, raw[name], float))
    if "quad_points" in raw and raw["quad_points"] is not None:
        config.quad_points = _coerce("quad_points", raw["quad_points"], int)
    if "scenario" in raw:
        name = str(raw["scenario"])
        if name not in SCENARIO_NAMES:
            raise ConfigError(
                f"field 'scenario': unknown scenario {name!r}; "
                f"choose one of {', '.join(SCENARIO_NAMES)}"
            )
        config.scenario = name
    if "bc" in raw:
        try:
            config.bc = BoundaryCondition(str(raw["bc"]).lower())
        except ValueError:
            raise ConfigError(
                f"field 'bc': expected 'dirichlet' or 'neumann', "
                f"got {raw['bc']!r}"
            )
    if "pairs" in raw:
        try:
            config.pairs = tuple(
                (int(a), int(b)) for a, b in raw["pairs"]
            )
        except (TypeError, ValueError):
            raise ConfigError(
                "field 'pairs': expected a list of [n, m] index pairs"
            )
    if "mode" in raw:
        config.mode = str(raw["mode"])
        if config.mode not in ("default", "epsilon-sweep"):
            raise ConfigError(
                f"field 'mode': expected 'default' or 'epsilon-sweep', "
                f"got {config.mode!r}"
            )
    if "inject_error" in raw:
        config.inject_error = str(raw["inject_error"])
    if "epsilons" in raw:
        try:
            config.epsilons = tuple(float(e) for e in raw["epsilons"])
        except (TypeError, ValueError):
            raise ConfigError("field 'epsilons': expected a list of numbers")
    if config.tf <= config.t0:
        raise ConfigError(
            f"field 'window': requires t0 < tf, got [{config.t0}, {config.tf}]"
        )
    if config.bands < 1:
        raise ConfigError(f"field 'bands': must be >= 1, got {config.bands}")
    if config.epsilon < 0:
        raise ConfigError(
            f"field 'epsilon': must be >= 0, got {config.epsilon}"
        )
    return config


def _build_scenario_objects(config: RunConfig):
    """Scenario spec and friends for the configured scenario name."""
    if config.scenario in _GW_NAMES:
        gw = GwConfig(
            lx=config.lx, ly=config.ly, lz=config.lz, bc=config.bc,
            epsilon=max(config.epsilon, 1e-12),
            omega_drive=config.omega_drive,
            frequency_cutoff=config.frequency_cutoff,
        )
        spec, predictor = build_gw(gw)
        return spec, None, predictor
    variant = DceVariant(config.scenario.split("-", 1)[1])
    dce = DceConfig(
        variant=variant, length=config.length, bc=config.bc,
        epsilon=max(config.epsilon, 1e-12), omega_drive=config.omega_drive,
        mass=config.mass,
    )
    return build_dce(dce)


def _static_basis(config: RunConfig):
    if config.scenario in _GW_NAMES:
        return solve_box_modes(
            Box(config.lx, config.ly, config.lz),
            FieldParams(mass=config.mass), config.bc,
            frequency_cutoff=config.frequency_cutoff,
        )
    return solve_interval_modes(
        Interval(config.length), FieldParams(mass=config.mass),
        config.bc, config.bands,
    )


# ---------------------------------------------------------------------------
# serialization


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _flatten_row(row: Sequence[Any]) -> List[Any]:
    """Expand complex entries into re/im pairs, keep others as-is."""
    flat: List[Any] = []
    for item in row:
        if isinstance(item, complex) or isinstance(item, np.complexfloating):
            flat.append(float(item.real))
            flat.append(float(item.imag))
        else:
            flat.append(item)
    return flat


def _flatten_columns(columns: Sequence[str], row: Sequence[Any]) -> List[str]:
    flat: List[str] = []
    for name, item in zip(columns, row):
        if isinstance(item, complex) or isinstance(item, np.complexfloating):
            flat.append(f"re_{name}")
            flat.append(f"im_{name}")
        else:
            flat.append(name)
    return flat


def write_table(
    columns: Sequence[str],
    rows: Sequence[Sequence[Any]],
    meta: Dict[str, Any],
    fmt: str,
    output: Optional[str],
) -> str:
    """Serialize a table to CSV or JSON; write to file or stdout."""
    if fmt == "json":
        data = []
        for row in rows:
            record = []
            for item in row:
                if isinstance(item, complex) or isinstance(
                    item, np.complexfloating
                ):
                    record.append([float(item.real), float(item.imag)])
                elif isinstance(item, (float, np.floating)):
                    record.append(float(item))
                elif isinstance(item, (int, np.integer)):
                    record.append(int(item))
                else:
                    record.append(item)
            data.append(record)
        document = {"meta": meta, "columns": list(columns), "data": data}
        text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        header_row = rows[0] if rows else [0.0] * len(columns)
        writer.writerow(_flatten_columns(columns, header_row))
        for row in rows:
            cells = []
            for item in _flatten_row(row):
                if isinstance(item, (float, np.floating)):
                    cells.append(_fmt(item))
                else:
                    cells.append(str(item))
            writer.writerow(cells)
        text = buffer.getvalue()
    else:
        raise ConfigError(f"field 'format': expected csv or json, got {fmt!r}")
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return text


# ---------------------------------------------------------------------------
# subcommands


def cmd_spectrum(config: RunConfig, fmt: str, output: Optional[str]) -> int:
    basis = _static_basis(config)
    axes = len(basis.modes[0].index)
    columns = (
        [f"index_{i}" for i in range(axes)]
        + [f"wavenumber_{i}" for i in range(axes)]
        + ["frequency"]
    )
    rows = [
        list(mode.index) + [float(k) for k in mode.wavenumbers]
        + [float(mode.frequency)]
        for mode in basis.modes
    ]
    write_table(columns, rows, config.meta(), fmt, output)
    return EXIT_OK


def cmd_resonances(config: RunConfig, fmt: str, output: Optional[str]) -> int:
    basis = _static_basis(config)
    hits = find_resonances(basis, config.omega_drive, config.tolerance)
    columns = ["n", "m", "kind", "detuning"]
    rows = [[r.n, r.m, r.kind.value, float(r.detuning)] for r in hits]
    write_table(columns, rows, config.meta(), fmt, output)
    return EXIT_OK


def _selected_pairs(config: RunConfig, size: int) -> List[Tuple[int, int]]:
    if config.pairs:
        for n, m in config.pairs:
            if not (0 <= n < size and 0 <= m < size):
                raise ConfigError(
                    f"field 'pairs': index pair ({n}, {m}) outside basis "
                    f"of size {size}"
                )
        return list(config.pairs)
    return [(n, m) for n in range(size) for m in range(size)]


def cmd_evolve(config: RunConfig, fmt: str, output: Optional[str]) -> int:
    spec = _build_scenario_objects(config)[0]
    basis = _static_basis(config)
    couplings = build_coupling_matrices(
        spec, basis, config.bc,
        quad_points=config.quad_points or 64,
    )
    pairs = _selected_pairs(config, len(basis))
    times = np.linspace(config.t0, config.tf, config.samples + 1)[1:]
    columns = ["t", "n", "m", "abs_alpha", "arg_alpha", "abs_beta", "arg_beta"]
    rows = []
    epsilon = config.epsilon
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWindowWarning)
        for t in times:
            if epsilon == 0.0:
                size = len(basis)
                result_alpha = np.eye(size, dtype=complex)
                result_beta = np.zeros((size, size), dtype=complex)
            else:
                result = bogoliubov_perturbative(
                    couplings, basis, epsilon, config.t0, float(t)
                )
                result_alpha, result_beta = result.alpha, result.beta
            for n, m in pairs:
                a = result_alpha[n, m]
                b = result_beta[n, m]
                rows.append([
                    float(t), n, m,
                    abs(a), float(np.angle(a)) if a != 0 else 0.0,
                    abs(b), float(np.angle(b)) if b != 0 else 0.0,
                ])
    write_table(columns, rows, config.meta(), fmt, output)
    return EXIT_OK


def cmd_evolve_exact(config: RunConfig, fmt: str, output: Optional[str]) -> int:
    if config.scenario in _GW_NAMES:
        raise ConfigError(
            "field 'scenario': exact evolution supports interval scenarios "
            "only; three-dimensional scenarios have no exact path"
        )
    trajectory = _build_scenario_objects(config)[1]
    checkpoint_times = np.linspace(
        config.t0, config.tf, config.samples + 1
    )[1:-1]
    state = evolve_transformation(
        trajectory, FieldParams(mass=config.mass), config.bc,
        config.t0, config.tf, config.bands,
        step=config.dt, dt_fd=config.dt_fd,
        quad_points=config.quad_points,
        checkpoint_times=[float(t) for t in checkpoint_times],
    )
    snapshots = list(state.checkpoints) + [(state.t_current, state.U)]
    columns = ["t", "i", "j", "U", "identity_residual"]
    rows = []
    for t, u in snapshots:
        snapshot = dataclasses.replace(state, U=u, t_current=t)
        residual = bogoliubov_identity_residual(snapshot)
        for i in range(u.shape[0]):
            for j in range(u.shape[1]):
                rows.append([float(t), i, j, complex(u[i, j]), residual])
    write_table(columns, rows, config.meta(), fmt, output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# validation checks


def _check_dce_closed_form(config: RunConfig, flip: bool) -> Tuple[bool, float]:
    dce = DceConfig(
        variant=DceVariant.RIGHT_ONLY, length=math.pi,
        bc=BoundaryCondition.DIRICHLET, epsilon=1e-3, omega_drive=3.0,
    )
    spec, _, predictor = build_dce(dce)
    basis = solve_interval_modes(
        Interval(math.pi), FieldParams(), BoundaryCondition.DIRICHLET, 4
    )
    couplings = build_coupling_matrices(
        spec, basis, BoundaryCondition.DIRICHLET, resonant=True
    )
    sign = -1.0 if flip else 1.0
    worst = 0.0
    for i in range(4):
        for j in range(4):
            want = sign * predictor.beta_hat(i + 1, j + 1).amplitude_at(3.0)
            got = couplings.beta_hat[i, j].amplitude_at(3.0)
            scale = max(abs(want), 1e-30)
            worst = max(worst, abs(got - want) / scale)
    return worst < 1e-8, worst


def _check_gw_closed_form(config: RunConfig, flip: bool) -> Tuple[bool, float]:
    gw = GwConfig(
        lx=1.0, ly=1.3, lz=0.9, bc=BoundaryCondition.DIRICHLET,
        epsilon=1e-3, omega_drive=5.0, frequency_cutoff=12.0,
    )
    spec, predictor = build_gw(gw)
    basis = solve_box_modes(
        Box(1.0, 1.3, 0.9), FieldParams(), BoundaryCondition.DIRICHLET,
        frequency_cutoff=12.0,
    )
    keep = [i for i, m in enumerate(basis.modes) if max(m.index) <= 3][:5]
    couplings = build_coupling_matrices(
        spec, basis, BoundaryCondition.DIRICHLET, resonant=True
    )
    sign = -1.0 if flip else 1.0
    deviations = []
    magnitudes = []
    for i in keep:
        for j in keep:
            want = sign * predictor.beta_hat(
                basis.modes[i].index, basis.modes[j].index
            ).amplitude_at(5.0)
            got = couplings.beta_hat[i, j].amplitude_at(5.0)
            deviations.append(abs(got - want))
            magnitudes.append(abs(want))
    # near-zero entries (parity cancellations) are judged relative to
    # the largest coupling in the block
    worst = max(deviations) / max(max(magnitudes), 1e-30)
    return worst < 1e-8, worst


def _check_orthonormality(config: RunConfig, flip: bool) -> Tuple[bool, float]:
    basis = solve_interval_modes(
        Interval(1.7), FieldParams(mass=0.6), config.bc, 6
    )
    residual = orthonormality_residual(basis)
    if flip:
        residual += 1.0
    return residual < 1e-10, residual


def _check_static_generator(config: RunConfig, flip: bool) -> Tuple[bool, float]:
    traj = BoundaryTrajectory.static(0.0, math.pi)
    vhat = assemble_vhat(
        traj, FieldParams(), BoundaryCondition.DIRICHLET, 0.0, 1e-4, 4
    )
    gen = generator_matrix(vhat)
    freqs = solve_instantaneous_basis(
        traj, FieldParams(), BoundaryCondition.DIRICHLET, 0.0, 4
    ).frequencies
    deviation = float(np.max(np.abs(gen - 1j * np.diag(freqs))))
    if flip:
        deviation += 1.0
    return deviation < 1e-8, deviation


_CHECKS = {
    "dce-closed-form": _check_dce_closed_form,
    "gw-closed-form": _check_gw_closed_form,
    "orthonormality": _check_orthonormality,
    "static-generator": _check_static_generator,
}


def _envelope_trajectory(
    length: float, epsilon: float, drive: float, duration: float
) -> BoundaryTrajectory:
    """Right-wall drive with a smooth turn-on/off envelope.

    The sin^2 envelope puts the wall at rest, in its rest position, at
    both ends of the window, so the Bogoliubov identities hold there up
    to second order in the drive amplitude.
    """
    half = length / 2.0

    def envelope(t):
        return math.sin(math.pi * t / duration) ** 2

    def x_plus(t):
        return half * (1.0 + epsilon * envelope(t) * math.sin(drive * t))

    def v_plus(t):
        d_env = (
            math.pi / duration * math.sin(2.0 * math.pi * t / duration)
        )
        return half * epsilon * (
            d_env * math.sin(drive * t)
            + envelope(t) * drive * math.cos(drive * t)
        )

    return BoundaryTrajectory(
        lambda t: -half, x_plus,
        v_minus=lambda t: 0.0, v_plus=v_plus,
    )


def _epsilon_sweep(config: RunConfig) -> Tuple[float, List[List[float]]]:
    """Identity residual vs drive amplitude; returns log-log slope."""
    rows = []
    # a small fixed step keeps the integrator error floor below the
    # quadratic residual signal at the smallest amplitudes
    step = config.dt if config.dt is not None else 0.01
    for epsilon in config.epsilons:
        traj = _envelope_trajectory(
            math.pi, epsilon, config.omega_drive, config.duration
        )
        state = evolve_transformation(
            traj, FieldParams(mass=config.mass), config.bc,
            0.0, config.duration, max(config.bands, 3),
            step=step, dt_fd=config.dt_fd,
        )
        rows.append([epsilon, bogoliubov_identity_residual(state)])
    logs = np.log(np.asarray(rows, dtype=float))
    slope = float(np.polyfit(logs[:, 0], logs[:, 1], 1)[0])
    return slope, rows


def cmd_validate(config: RunConfig, fmt: str, output: Optional[str]) -> int:
    if config.mode == "epsilon-sweep":
        slope, samples = _epsilon_sweep(config)
        passed = abs(slope - 2.0) < 0.3
        columns = ["check", "passed", "measure"]
        rows = [["identity-residual-slope", int(passed), slope]]
        rows += [
            [f"residual(eps={eps:g})", 1, res] for eps, res in samples
        ]
        write_table(columns, rows, config.meta(), fmt, output)
        return EXIT_OK if passed else EXIT_VALIDATION
    if config.inject_error and config.inject_error not in _CHECKS:
        raise ConfigError(
            f"field 'inject_error': unknown check {config.inject_error!r}; "
            f"choose one of {', '.join(sorted(_CHECKS))}"
        )
    columns = ["check", "passed", "measure"]
    rows = []
    all_passed = True
    for name, check in _CHECKS.items():
        passed, measure = check(config, flip=(config.inject_error == name))
        rows.append([name, int(passed), float(measure)])
        all_passed = all_passed and passed
    write_table(columns, rows, config.meta(), fmt, output)
    return EXIT_OK if all_passed else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# entry point


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "resonances": cmd_resonances,
    "evolve": cmd_evolve,
    "evolve-exact": cmd_evolve_exact,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="movingcavity",
        description=(
            "Mode spectra, resonances, and Bogoliubov coefficients for a "
            "confined field with moving boundaries"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", default=None, help="JSON config file")
        cmd.add_argument("--output", default=None, help="output file path")
        cmd.add_argument(
            "--format", default="csv", choices=("csv", "json"),
            dest="fmt",
        )
        cmd.add_argument(
            "--seed", type=int, default=None,
            help="reserved; the engine is deterministic",
        )
        cmd.add_argument("--verbose", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, {})
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    handler = _COMMANDS[args.command]
    try:
        return handler(config, args.fmt, args.output)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (KeyError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except StabilityError as err:
        print(
            f"stability error: {err}\n"
            "hint: reduce the integration step (config field 'dt')",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL
    except (SolverError, InvalidTrajectoryError, ArithmeticError) as err:
        print(f"numerical error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
