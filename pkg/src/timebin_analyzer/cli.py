"""Command-line interface.

Subcommands cover the main scenarios: visibility scans, the relay ABCD
check, phase sensitivity, CHSH drift simulation, entanglement
verification and its classical boundary, long-term stability, and the
expectation-versus-angle sweep.  Every run writes CSV with a header
that records the tool version, the full parameter set, and the seed, so
identical invocations are byte-reproducible.

Unit-bearing flags accept suffixes (deg, mrad, urad, nrad, rad; m, mm,
um, nm; s, ms, ns); bare numbers are SI base units.  Configuration
precedence: built-in defaults < JSON config file (--config) < explicit
flags.  Exit codes: 0 success, 2 validation error, 3 solver
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, analysis, chsh, geometry, svg, verify, waveoptics
from .measurement import AnalyzerEfficiencies
from .quantum import operator_to_dict
from .states import DepolarizationParams, depolarize, hybrid_bell_state

ENV_OUT_DIR = "TIMEBIN_ANALYZER_OUTDIR"
CONFIG_SCHEMA = 1

_UNITS = {
    "angle": {"rad": 1.0, "mrad": 1e-3, "urad": 1e-6, "nrad": 1e-9,
              "deg": math.pi / 180.0},
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9},
    "time": {"s": 1.0, "ms": 1e-3, "ns": 1e-9},
    "none": {"": 1.0},
}


class CliError(ValueError):
    """Invalid flag or configuration value."""


def parse_quantity(text, kind):
    """Parse '1.49mm' style values into SI base units."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip()
    units = _UNITS[kind]
    for suffix in sorted(units, key=len, reverse=True):
        if suffix and s.endswith(suffix):
            try:
                return float(s[: -len(suffix)]) * units[suffix]
            except ValueError as exc:
                raise CliError(f"cannot parse {kind} quantity {text!r}") from exc
    try:
        return float(s)
    except ValueError as exc:
        raise CliError(
            f"cannot parse {kind} quantity {text!r}; "
            f"known suffixes: {', '.join(u for u in units if u)}"
        ) from exc


def _merge_settings(defaults, config, args_dict, command):
    merged = dict(defaults)
    if config:
        if config.get("schema", CONFIG_SCHEMA) != CONFIG_SCHEMA:
            raise CliError(f"unsupported config schema {config.get('schema')}")
        for scope in ("defaults", command):
            for key, value in config.get(scope, {}).items():
                key = key.replace("-", "_")
                if key not in merged:
                    raise CliError(f"unknown config key {key!r} for {command}")
                merged[key] = value
    for key, value in args_dict.items():
        if key in merged and value is not None:
            merged[key] = value
    return merged


def _write_csv(path, columns, rows, params, fmt="%.12g"):
    lines = [f"# timebin-analyzer {__version__}"]
    for key in sorted(params):
        lines.append(f"# {key}={params[key]}")
    lines.append(",".join(columns))
    for row in rows:
        cells = []
        for value in row:
            if isinstance(value, str):
                cells.append(value)
            elif isinstance(value, (int, np.integer)):
                cells.append(str(int(value)))
            else:
                cells.append(fmt % value)
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def _out_path(settings, filename):
    out_dir = settings.get("out_dir") or os.environ.get(ENV_OUT_DIR) or "."
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path / filename


def _geometry_from(settings):
    return geometry.InterferometerGeometry(
        delta_l0=parse_quantity(settings["delta_l0"], "length"),
        sigma=parse_quantity(settings["sigma"], "length"),
        v0=float(settings["v0"]),
        wavelength=parse_quantity(settings["wavelength"], "length"),
        focal_length=parse_quantity(settings["focal_length"], "length"),
    )


def _maybe_svg(settings, csv_path, series, title, xlabel, ylabel):
    if settings.get("svg"):
        svg.line_plot(
            Path(csv_path).with_suffix(".svg"), series, title, xlabel, ylabel
        )


# --- subcommand implementations -------------------------------------------

_GEOMETRY_DEFAULTS = {
    "delta_l0": "0.6m",
    "sigma": "1.49mm",
    "v0": 0.91,
    "wavelength": "776nm",
    "focal_length": "0.1m",
}


def cmd_visibility_scan(settings):
    geom = _geometry_from(settings)
    alpha_max = parse_quantity(settings["alpha_max"], "angle")
    steps = int(settings["alpha_steps"])
    alphas = np.linspace(0.0, alpha_max, steps)
    relay = settings["relay"] in (True, "on", "true")
    spec = analysis.FieldSpec(
        mode=settings["mode"],
        grid_n=int(settings["grid_n"]),
        mode_count=int(settings["mode_count"]),
        seed=int(settings["seed"]),
    )
    jobs = int(settings["jobs"])
    if jobs > 1:
        input_field = spec.build(geom)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            vis = list(
                pool.map(
                    lambda a: waveoptics.interfere(input_field, geom, a, relay), alphas
                )
            )
        curve = analysis.aoi_sweep(geom, spec, alphas[:0], relay)
        rows = np.column_stack([alphas, vis, geometry.visibility(geom, alphas)])
        curve.rows = rows
    else:
        curve = analysis.aoi_sweep(geom, spec, alphas, relay)
    params = {**curve.params, "seed": settings["seed"], "jobs": jobs}
    path = _out_path(settings, "visibility_scan.csv")
    _write_csv(path, curve.columns, curve.rows, params)
    _maybe_svg(
        settings,
        path,
        [
            ("wave optics", curve.rows[:, 0] * 1e3, curve.rows[:, 1]),
            ("ray model", curve.rows[:, 0] * 1e3, curve.rows[:, 2]),
        ],
        f"visibility vs AOI (relay {'on' if relay else 'off'})",
        "alpha [mrad]",
        "visibility",
    )
    print(f"wrote {path}")
    return 0


def cmd_relay_check(settings):
    f = parse_quantity(settings["focal_length"], "length")
    m = geometry.relay_matrix(f)
    residual = float(np.max(np.abs(m - np.eye(2))))
    det = float(np.linalg.det(m))
    single = geometry.relay_single_pass(f)
    rows = [
        ["round_trip", m[0, 0], m[0, 1], m[1, 0], m[1, 1], residual],
        [
            "single_pass",
            single[0, 0],
            single[0, 1],
            single[1, 0],
            single[1, 1],
            float(np.max(np.abs(single + np.eye(2)))),
        ],
    ]
    path = _out_path(settings, "relay_check.csv")
    _write_csv(
        path,
        ["stage", "a", "b", "c", "d", "identity_residual"],
        rows,
        {"operation": "relay_check", "focal_length_m": f, "determinant": det},
    )
    print(f"relay round trip residual {residual:.3e} (det {det:.12f}); wrote {path}")
    return 0 if residual < 1e-9 else 2


def cmd_phase_sensitivity(settings):
    geom = _geometry_from(settings)
    step = 1e-9
    d1 = (
        geometry.path_difference(geom, step) - geometry.path_difference(geom, -step)
    ) / (2 * step)
    aoi_per_pi = geom.wavelength / (2.0 * abs(d1))
    nominal = 349e-9
    residual = abs(aoi_per_pi - nominal) / nominal
    dphi_5pi = abs(
        geometry.phase(geom, 1.75e-6).unwrapped - geometry.phase(geom, 0.0).unwrapped
    )
    dphi_pi = abs(
        geometry.phase(geom, aoi_per_pi).unwrapped
        - geometry.phase(geom, 0.0).unwrapped
    )
    ratio = abs(
        geometry.phase(geom, 1.75e-6).unwrapped - geometry.phase(geom, 0.0).unwrapped
    ) / abs(
        geometry.phase(geom, 349e-9).unwrapped - geometry.phase(geom, 0.0).unwrapped
    )
    rows = [
        ["slope_m_per_rad", d1],
        ["aoi_per_pi_rad", aoi_per_pi],
        ["nominal_aoi_per_pi_rad", nominal],
        ["relative_residual_vs_nominal", residual],
        ["phase_shift_at_1p75urad_rad", dphi_5pi],
        ["phase_shift_at_1p75urad_over_pi", dphi_5pi / math.pi],
        ["ratio_1p75urad_over_349nrad", ratio],
        ["phase_check_at_aoi_per_pi_rad", dphi_pi],
    ]
    path = _out_path(settings, "phase_sensitivity.csv")
    _write_csv(
        path,
        ["quantity", "value"],
        rows,
        {
            "operation": "phase_sensitivity",
            "delta_l0_m": geom.delta_l0,
            "wavelength_m": geom.wavelength,
        },
    )
    print(
        f"path-difference slope {d1:.6g} m/rad; pi shift per {aoi_per_pi * 1e9:.1f} nrad "
        f"({100 * residual:.1f}% from the nominal 349 nrad); "
        f"5 pi check: {dphi_5pi / math.pi:.3f} pi at 1.75 urad; wrote {path}"
    )
    return 0


def cmd_chsh_scan(settings):
    params = DepolarizationParams.unbiased(
        float(settings["p_xy"]), float(settings["p_z"])
    )
    rho = depolarize(hybrid_bell_state(), params)
    eff = AnalyzerEfficiencies(float(settings["eta_l"]), float(settings["eta_s"]))
    duration = parse_quantity(settings["duration"], "time")
    bucket = parse_quantity(settings["bucket"], "time")
    drift = chsh.DriftModel(
        kind=settings["drift"],
        amount=parse_quantity(settings["drift_amount"], "angle"),
        period=parse_quantity(settings["drift_period"], "time"),
    )
    rate = float(settings["rate"])
    seed = settings["seed"]
    seed = None if seed in (None, "none") else int(seed)
    traces = {}
    for idx, axis in enumerate(("z+x", "z-x")):
        scan_seed = None if seed is None else seed + idx
        traces[axis] = chsh.simulate_drift_scan(
            rho, eff, drift, alice_axis=axis, rate=rate, duration=duration,
            bucket=bucket, seed=scan_seed,
        )
    est = chsh.estimate_chsh(traces["z+x"], traces["z-x"], split=seed is not None)
    base_params = {
        "operation": "chsh_scan",
        "p_xy": params.p_x,
        "p_z": params.p_z,
        "eta_l": eff.eta_l,
        "eta_s": eff.eta_s,
        "rate_per_s": rate,
        "duration_s": duration,
        "bucket_s": bucket,
        "drift_kind": drift.kind,
        "drift_amount_rad": drift.amount,
        "drift_period_s": drift.period,
        "seed": seed,
    }
    for axis, tag in (("z+x", "a1"), ("z-x", "a2")):
        header, rows = chsh.trace_to_rows(traces[axis])
        path = _out_path(settings, f"chsh_trace_{tag}.csv")
        _write_csv(path, header, rows, {**base_params, "alice_axis": axis})
        surface = chsh.max_expectation_surface(traces[axis])
        sheader, srows = chsh.surface_to_rows(surface)
        spath = _out_path(settings, f"chsh_surface_{tag}.csv")
        _write_csv(spath, sheader, srows, {**base_params, "alice_axis": axis})
    summary_rows = [
        ["S", est.s],
        ["E_A1_B1", est.e11],
        ["E_A1_B2", est.e12],
        ["E_A2_B1", est.e21],
        ["E_A2_B2", est.e22],
    ]
    path = _out_path(settings, "chsh_summary.csv")
    _write_csv(path, ["quantity", "value"], summary_rows, base_params)
    tr = traces["z+x"]
    _maybe_svg(
        settings,
        _out_path(settings, "chsh_trace_a1.csv"),
        [
            (f"{det} {b}", tr.times, tr.counts[(det, b)])
            for det in chsh.DETECTORS
            for b in chsh.BINS
        ],
        "drift-scan coincidences (setting z+x)",
        "time [s]",
        "counts per bucket",
    )
    print(f"S = {est.s:.4f}; wrote {path}")
    return 0


def cmd_npt_verify(settings):
    eff = AnalyzerEfficiencies(float(settings["eta_l"]), float(settings["eta_s"]))
    cs = verify.build_constraints(
        float(settings["vz"]), float(settings["vxy"]), eff,
        qubit_mass=float(settings["qubit_mass"]),
    )
    report = verify.sdp_feasible(cs, tol=float(settings["tol"]))
    rows = [
        ["verdict", report.verdict],
        ["margin", report.margin],
        ["iterations", report.iterations],
    ]
    path = _out_path(settings, "npt_verify.csv")
    _write_csv(
        path,
        ["quantity", "value"],
        rows,
        {
            "operation": "npt_verify",
            "v_z": settings["vz"],
            "v_xy": settings["vxy"],
            "eta_l": eff.eta_l,
            "eta_s": eff.eta_s,
            "tol": settings["tol"],
            "qubit_mass": settings["qubit_mass"],
        },
    )
    if report.feasible:
        witness_path = _out_path(settings, "npt_witness.json")
        witness_path.write_text(
            json.dumps(operator_to_dict(report.witness, 2, 3), indent=1)
        )
        print(
            f"FEASIBLE: a PPT state matches the visibilities "
            f"(margin {report.margin:.3e}); entanglement is not certified; "
            f"wrote {path} and {witness_path}"
        )
    else:
        print(
            f"INFEASIBLE/ENTANGLED: no PPT state matches the visibilities "
            f"(margin {report.margin:.3e}); wrote {path}"
        )
    return 0


def cmd_npt_boundary(settings):
    eff = AnalyzerEfficiencies(float(settings["eta_l"]), float(settings["eta_s"]))
    grid = [float(v) for v in str(settings["vz_grid"]).split(",")]
    jobs = int(settings["jobs"])
    tol = float(settings["tol"])
    resolution = float(settings["resolution"])
    mass = float(settings["qubit_mass"])
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(
                pool.map(
                    lambda v: verify.boundary_scan([v], eff, tol, resolution, mass)[0],
                    grid,
                )
            )
    else:
        results = verify.boundary_scan(grid, eff, tol, resolution, mass)
    header, rows = verify.boundary_to_rows(results)
    path = _out_path(settings, "npt_boundary.csv")
    _write_csv(
        path,
        header,
        rows,
        {
            "operation": "npt_boundary",
            "eta_l": eff.eta_l,
            "eta_s": eff.eta_s,
            "tol": tol,
            "resolution": resolution,
            "qubit_mass": mass,
            "jobs": jobs,
        },
    )
    finite = [
        (p.v_z, p.threshold) for p in results if math.isfinite(p.threshold)
    ]
    _maybe_svg(
        settings,
        path,
        [("classical bound", [v for v, _ in finite], [t for _, t in finite])],
        "entanglement verification boundary",
        "v_z",
        "v_xy threshold",
    )
    print(f"wrote {path}")
    return 0


def cmd_stability(settings):
    drift = chsh.DriftModel(
        kind=settings["drift"],
        amount=parse_quantity(settings["drift_amount"], "angle"),
        period=parse_quantity(settings["drift_period"], "time"),
    )
    rate = settings["rate"]
    rate = None if rate in (None, "none") else float(rate)
    curve = analysis.stability_series(
        v_xy=float(settings["vxy"]),
        drift=drift,
        duration=parse_quantity(settings["duration"], "time"),
        bucket=parse_quantity(settings["bucket"], "time"),
        rate=rate,
        seed=int(settings["seed"]),
    )
    path = _out_path(settings, "stability.csv")
    _write_csv(path, curve.columns, curve.rows, curve.params)
    _maybe_svg(
        settings,
        path,
        [
            ("E_phi", curve.rows[:, 0], curve.rows[:, 1]),
            ("E_phi+pi/2", curve.rows[:, 0], curve.rows[:, 2]),
            ("combined", curve.rows[:, 0], curve.rows[:, 3]),
        ],
        "long-term stability",
        "time [s]",
        "expectation value",
    )
    print(f"wrote {path}")
    return 0


def cmd_expectation_aoi(settings):
    geom = _geometry_from(settings)
    alpha_max = parse_quantity(settings["alpha_max"], "angle")
    steps = int(settings["alpha_steps"])
    alphas = np.linspace(-alpha_max, alpha_max, steps)
    relay = settings["relay"] in (True, "on", "true")
    curve = analysis.expectation_vs_aoi(
        geom, float(settings["vxy"]), alphas, relay,
        fixed_phase=parse_quantity(settings["fixed_phase"], "angle"),
    )
    path = _out_path(settings, "expectation_aoi.csv")
    _write_csv(path, curve.columns, curve.rows, curve.params)
    _maybe_svg(
        settings,
        path,
        [("expectation", curve.rows[:, 0] * 1e3, curve.rows[:, 1])],
        f"expectation vs AOI (relay {'on' if relay else 'off'})",
        "alpha [mrad]",
        "E",
    )
    print(f"wrote {path}")
    return 0


_COMMANDS = {
    "visibility-scan": (
        cmd_visibility_scan,
        {
            **_GEOMETRY_DEFAULTS,
            "mode": "gaussian",
            "relay": "off",
            "alpha_max": "2mrad",
            "alpha_steps": 21,
            "grid_n": 512,
            "mode_count": 50,
            "seed": 0,
            "jobs": 1,
        },
    ),
    "relay-check": (cmd_relay_check, {"focal_length": "0.1m"}),
    "phase-sensitivity": (cmd_phase_sensitivity, dict(_GEOMETRY_DEFAULTS)),
    "chsh-scan": (
        cmd_chsh_scan,
        {
            "p_xy": 0.012,
            "p_z": 0.086,
            "eta_l": 0.9,
            "eta_s": 0.9,
            "rate": 1000.0,
            "duration": "120s",
            "bucket": "0.5s",
            "drift": "linear",
            "drift_amount": "6.283185307179586rad",
            "drift_period": "120s",
            "seed": 1,
        },
    ),
    "npt-verify": (
        cmd_npt_verify,
        {
            "vz": 0.952,
            "vxy": 0.804,
            "eta_l": 0.9,
            "eta_s": 0.9,
            "tol": 1e-7,
            "qubit_mass": verify.DEFAULT_QUBIT_MASS,
        },
    ),
    "npt-boundary": (
        cmd_npt_boundary,
        {
            "vz_grid": "0.5,0.7,0.8,0.9,0.952,1.0",
            "eta_l": 0.9,
            "eta_s": 0.9,
            "tol": 1e-7,
            "resolution": 1e-3,
            "qubit_mass": verify.DEFAULT_QUBIT_MASS,
            "jobs": 1,
        },
    ),
    "stability": (
        cmd_stability,
        {
            "vxy": 0.804,
            "drift": "linear",
            "drift_amount": "1.5707963267948966rad",
            "drift_period": "1800s",
            "duration": "1800s",
            "bucket": "180s",
            "rate": 1000.0,
            "seed": 0,
        },
    ),
    "expectation-aoi": (
        cmd_expectation_aoi,
        {
            **_GEOMETRY_DEFAULTS,
            "relay": "on",
            "vxy": 0.80,
            "alpha_max": "0.2deg",
            "alpha_steps": 801,
            "fixed_phase": "0rad",
        },
    ),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="timebin-analyzer",
        description="Angle-tolerant time-bin qubit analyzer simulations",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")
    for name, (_, defaults) in _COMMANDS.items():
        p = sub.add_parser(name, help=f"{name} scenario")
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out-dir", dest="out_dir", default=None)
        p.add_argument("--svg", action="store_const", const=True, default=None,
                       help="also write SVG plots")
        for key in defaults:
            flag = "--" + key.replace("_", "-")
            if key == "focal_length":
                p.add_argument(flag, "--f", dest=key, default=None)
            else:
                p.add_argument(flag, dest=key, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage()
        return 2
    func, defaults = _COMMANDS[args.command]
    try:
        config = None
        if args.config:
            config = json.loads(Path(args.config).read_text())
        settings = _merge_settings(
            {**defaults, "out_dir": None, "svg": None},
            config,
            vars(args),
            args.command,
        )
        return func(settings)
    except verify.NonConvergenceError as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
