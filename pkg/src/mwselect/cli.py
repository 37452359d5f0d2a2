"""Command line front end.

Subcommands: scan (energies and transition frequency vs position, CSV),
select (resonance positions and selected widths, JSON), probability
(packet-averaged flip probabilities at the band centers, JSON), bands
(phase-space band and cell geometry, CSV), simulate (Monte Carlo of a
cloud through both pulses, per-atom CSV plus JSON summary) and coils
(gradient-coil diagnostics, JSON).

All commands take a YAML config plus optional --set overrides.  JSON
outputs echo the fully resolved config so a result file is
self-describing.  Exit codes: 0 success, 2 configuration error, 3
physically impossible request.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import apparatus as app
from .breit_rabi import (
    Level,
    StretchedBranch,
    eigenvalue,
    field_coordinate,
    kappa,
    resonant_position,
    transition_angular_frequency,
)
from .config import (
    RunConfig,
    load_config,
    to_dict,
    to_ensemble_spec,
    to_field_config,
    to_pulses,
)
from .constants import CONST
from .dynamics import WavepacketState, spread_width
from .errors import ConfigError, PhysicsDomainError
from .phase_space import (
    MonteCarloResult,
    band_from_first_pulse,
    band_from_second_pulse,
    cell_polygon,
    run_monte_carlo,
    selection_cell,
)
from .probability import transition_probability
from .selection import select, validity_diagnostic

_TWO_PI = 2.0 * np.pi


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.16e}"


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_format_cell(c) for c in row))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    """Coerce numpy scalars and non-finite floats for strict JSON."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else None
    return obj


def _json_doc(command: str, run: RunConfig, result: dict) -> str:
    payload = {"command": command, "config": to_dict(run), "result": result}
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, newline="")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _displacement(run: RunConfig) -> float:
    return run.apparatus.displacement if run.apparatus is not None else 1e-2


def cmd_scan(run: RunConfig, args) -> None:
    _require(run.scan is not None, "scan command needs a 'scan' section")
    cfg = to_field_config(run)
    pulses = to_pulses(run, cfg)
    omega_ref = pulses[0].omega_A if pulses else cfg.species.delta_W
    lower = StretchedBranch(sigma=run.sigma, level=Level.LOWER)
    upper = StretchedBranch(sigma=run.sigma, level=Level.UPPER)
    z = np.linspace(run.scan.z_min, run.scan.z_max, run.scan.points)
    x = field_coordinate(cfg, z)
    v_lower = eigenvalue(lower, x, cfg.species)
    v_upper = eigenvalue(upper, x, cfg.species)
    omega = transition_angular_frequency(lower, z, cfg)
    rows = zip(z, x, v_lower, v_upper, omega / _TWO_PI, omega - omega_ref)
    text = _csv(
        ["z_m", "kz", "V_minus_J", "V_plus_J", "transition_Hz", "detuning_rad_s"],
        rows,
    )
    _emit(text, args.output or run.output.csv)


def cmd_select(run: RunConfig, args) -> None:
    cfg = to_field_config(run)
    pulses = to_pulses(run, cfg)
    _require(len(pulses) >= 1, "select command needs at least one pulse")
    try:
        delta_t = run.effective_delta_t()
    except ConfigError:
        delta_t = None
    displacement = _displacement(run)
    per_pulse = []
    for i, pulse in enumerate(pulses):
        sel = select(pulse, cfg, delta_t=delta_t)
        budget = app.stability_budget(pulse, cfg, displacement)
        entry = {
            "index": i,
            "t0_s": pulse.t0,
            "tau_s": pulse.tau,
            "omega_A_rad_s": pulse.omega_A,
            "z_center_m": sel.z_center,
            "position_width_m": sel.position_width,
            "position_width_low_field_m": sel.position_width_low_field,
            "rabi_at_resonance_rad_s": sel.rabi_at_resonance,
            "transition_slope_rad_s_per_m": sel.transition_slope,
            "velocity_width_m_s": sel.velocity_width,
            "stability": {
                "criterion": budget.criterion,
                "bias_tolerance_T": budget.bias_tolerance_T,
                "bias_tolerance_G": budget.bias_tolerance_G,
                "gradient_fraction": budget.gradient_fraction,
                "displacement_m": budget.displacement_m,
            },
        }
        if run.ensemble is not None:
            dz0 = run.ensemble.dz0
            elapsed = pulse.t0 - pulses[0].t0
            dz_now = spread_width(dz0, elapsed, cfg.species)
            # band-center packet: zero mean momentum offset from resonance
            entry["validity_diagnostic"] = validity_diagnostic(
                pulse,
                cfg,
                momentum=0.0,
                width_initial=dz0,
                width_at_pulse=dz_now,
                t_pulse=elapsed,
            )
            entry["packet_width_at_pulse_m"] = dz_now
        per_pulse.append(entry)
    result: dict = {"pulses": per_pulse, "kappa_per_m": kappa(cfg)}
    if delta_t is None:
        result["note"] = "velocity widths need delta_t or two pulses"
    elif len(pulses) >= 2:
        band1 = band_from_first_pulse(pulses[0], cfg, delta_t)
        band2 = band_from_second_pulse(pulses[1], cfg)
        cell = selection_cell(band1, band2)
        result["pair"] = {
            "delta_t_s": delta_t,
            "v_center_m_s": cell.v_center,
            "velocity_support_m_s": cell.velocity_support,
            "cell_area_m2_s": cell.area,
        }
    _emit(_json_doc("select", run, result), args.output or run.output.json)


def cmd_probability(run: RunConfig, args) -> None:
    cfg = to_field_config(run)
    pulses = to_pulses(run, cfg)
    _require(len(pulses) >= 1, "probability command needs at least one pulse")
    _require(
        run.ensemble is not None,
        "probability command needs an 'ensemble' section (for dz0)",
    )
    dz0 = run.ensemble.dz0
    per_pulse = []
    for i, pulse in enumerate(pulses):
        z_c = resonant_position(pulse.omega_A, pulse.branch, cfg)
        elapsed = pulse.t0 - pulses[0].t0
        dz_now = spread_width(dz0, elapsed, cfg.species)
        state = WavepacketState.minimum_uncertainty(
            z=z_c, v=0.0, dz=dz_now, level=Level.LOWER, sigma=run.sigma
        )
        p, info = transition_probability(
            state, pulse, cfg, settings=run.quadrature, detail=True
        )
        per_pulse.append(
            {
                "index": i,
                "t0_s": pulse.t0,
                "z_center_m": z_c,
                "packet_width_m": dz_now,
                "probability": p,
                "quadrature": {
                    "error": info.error,
                    "evals": info.evals,
                    "intervals": info.intervals,
                },
            }
        )
    result = {"dz0_m": dz0, "pulses": per_pulse}
    _emit(_json_doc("probability", run, result), args.output or run.output.json)


def cmd_bands(run: RunConfig, args) -> None:
    cfg = to_field_config(run)
    pulses = to_pulses(run, cfg)
    _require(len(pulses) >= 2, "bands command needs two pulses")
    delta_t = run.effective_delta_t()
    band1 = band_from_first_pulse(pulses[0], cfg, delta_t)
    band2 = band_from_second_pulse(pulses[1], cfg)
    cell = selection_cell(band1, band2)
    poly = cell_polygon(cell)
    v_half = cell.velocity_support  # draw band edges over twice the cell extent
    v_lo, v_hi = cell.v_center - v_half, cell.v_center + v_half
    rows = []

    def edge_rows(name: str, band, offset: float):
        c = band.center + offset
        for j, v in enumerate((v_lo, v_hi)):
            z = (c - band.a_v * v) / band.a_z
            rows.append((name, j, z, v))

    edge_rows("first_band_low", band1, -band1.half_width)
    edge_rows("first_band_high", band1, band1.half_width)
    edge_rows("second_band_low", band2, -band2.half_width)
    edge_rows("second_band_high", band2, band2.half_width)
    for j, (z, v) in enumerate(poly):
        rows.append(("cell", j, z, v))
    _emit(
        _csv(["element", "vertex", "z_m", "v_m_s"], rows),
        args.output or run.output.csv,
    )


def simulation_csv(result: MonteCarloResult) -> str:
    """Per-atom CSV for a Monte Carlo result; NaN marks lost atoms."""
    rows = zip(
        range(result.n_total),
        result.z0,
        result.v0,
        result.survived_first,
        result.survived_both,
        result.z_final,
        result.v_final,
    )
    return _csv(
        [
            "atom_index",
            "z0_m",
            "v0_m_s",
            "survived_first",
            "survived_both",
            "z_final_m",
            "v_final_m_s",
        ],
        rows,
    )


def cmd_simulate(run: RunConfig, args) -> None:
    cfg = to_field_config(run)
    pulses = to_pulses(run, cfg)
    _require(len(pulses) >= 2, "simulate command needs two pulses")
    spec = to_ensemble_spec(run)
    delta_t = run.effective_delta_t()
    csv_path = args.csv or run.output.csv
    _require(
        csv_path is not None,
        "simulate needs a per-atom CSV path (output.csv in the config or --csv)",
    )
    result = run_monte_carlo(
        spec, pulses[0], pulses[1], cfg, delta_t, workers=run.workers
    )
    _emit(simulation_csv(result), csv_path)
    summary = result.summary()
    inside = result.cell.contains(result.z_final, result.v_final)
    summary["n_survivors_in_cell"] = int(np.count_nonzero(inside))
    summary["n_survivors_outside_cell"] = (
        result.n_survived_both - summary["n_survivors_in_cell"]
    )
    summary["per_atom_csv"] = csv_path
    _emit(_json_doc("simulate", run, summary), args.output or run.output.json)


def cmd_coils(run: RunConfig, args) -> None:
    _require(run.apparatus is not None, "coils command needs an 'apparatus' section")
    a = run.apparatus
    coils = app.CoilPair(
        radius=a.radius,
        current=a.current,
        half_separation=a.half_separation,
        turns=a.turns,
    )
    cfg = to_field_config(run)
    grad = app.gradient_at_center(coils)
    lin = app.linearity_region(coils)
    span = min(coils.radius, coils.half_separation)
    d_opt = app.max_gradient_half_separation(coils.radius)
    result = {
        "gradient_T_per_m": grad,
        "gradient_G_per_cm": grad * 1e2,
        "configured_gradient_T_per_m": run.field.gradient,
        "gradient_ratio_to_configured": (
            grad / run.field.gradient if run.field.gradient != 0.0 else None
        ),
        "current_for_configured_gradient_A": (
            app.current_for_gradient(
                run.field.gradient, a.radius, a.half_separation, a.turns
            )
            if run.field.gradient != 0.0
            else None
        ),
        "linearity_region_m": lin,
        "linearity_fraction_of_geometry": lin / span,
        "optimal_half_separation_m": d_opt,
        "is_max_gradient_geometry": abs(a.half_separation - d_opt) <= 1e-9 * d_opt,
        "shifted_zero_m": (
            app.shifted_zero(run.field.gradient, run.field.bias)
            if run.field.gradient != 0.0
            else None
        ),
    }
    pulses = to_pulses(run, cfg)
    if pulses:
        budget = app.stability_budget(pulses[0], cfg, a.displacement)
        result["stability"] = {
            "criterion": budget.criterion,
            "rabi_rad_s": budget.rabi_rad_s,
            "position_width_m": budget.position_width_m,
            "bias_tolerance_T": budget.bias_tolerance_T,
            "bias_tolerance_G": budget.bias_tolerance_G,
            "gradient_fraction": budget.gradient_fraction,
            "displacement_m": budget.displacement_m,
        }
    _emit(_json_doc("coils", run, result), args.output or run.output.json)


_COMMANDS = {
    "scan": (cmd_scan, "tabulate energies and transition frequency vs position"),
    "select": (cmd_select, "resonance positions, selected widths, stability"),
    "probability": (cmd_probability, "packet-averaged flip probabilities"),
    "bands": (cmd_bands, "phase-space bands and selection cell geometry"),
    "simulate": (cmd_simulate, "Monte Carlo of a cloud through both pulses"),
    "coils": (cmd_coils, "gradient coil diagnostics"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mwselect",
        description=(
            "Position and velocity selection of alkali atoms with microwave "
            "pi pulses in a magnetic field gradient"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (func, help_text) in _COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("config", help="YAML run configuration file")
        sp.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="PATH=VALUE",
            help="override a config entry, e.g. --set ensemble.n=1000",
        )
        sp.add_argument(
            "-o",
            "--output",
            default=None,
            help="write the primary artifact here instead of stdout",
        )
        if name == "simulate":
            sp.add_argument(
                "--csv",
                default=None,
                help="per-atom CSV path (overrides output.csv)",
            )
        sp.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = load_config(args.config, args.overrides)
        args.func(run, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PhysicsDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
