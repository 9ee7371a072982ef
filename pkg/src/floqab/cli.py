"""Command-line interface.

Subcommands: ``absorption`` (undriven isotropic spectrum + peak table),
``cd-map`` (isotropically averaged CD versus drive ellipticity),
``ab-sweep`` (Wilson-loop phases and the equivalent magnetic field),
``validate`` (time-domain cross-checks of the Floquet construction) and
``print-defaults``.  CSV files are the data contract; JSON sidecars carry
metadata; SVG plots are emitted when requested.  Every output directory
receives a manifest with checksums.

Exit codes: 0 success, 2 validation failure, 3 scenario schema error,
4 numerical failure.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .abphase import (
    BrokenPathError,
    reference_loop,
    site_phase_decomposition,
    equivalent_magnetic_field,
    wilson_loop,
)
from .floquet import (
    build_full_floquet,
    build_rwa_block,
    central_window,
    quasi_energies,
    rwa_validity_ratio,
)
from .linalg import HermitianInputError, JacobiConvergenceError, eigh
from .model import HermiticityError, LabeledHermitian, build_exciton_hamiltonian, excitonic_transition_dipoles
from .orientation import average_cd, make_rng, rotate_dipoles, sample_orientation
from .output import (
    block_dump_dict,
    write_json,
    write_manifest,
    write_matrix_csv,
    write_spectrum_csv,
)
from .scenario import (
    Scenario,
    ScenarioError,
    default_scenario,
    load_scenario,
    scenario_json,
    scenario_to_dict,
)
from .spectra import ProbeSpec, absorption_undriven_isotropic, band_table, peak_table
from .svgplot import heatmap_svg, line_plot_svg
from .tdse import StepSizeError, compare_quasi_energies, compare_with_energies, propagate_period

TWO_PI = 2.0 * math.pi


def _load(args) -> Scenario:
    scenario = load_scenario(args.scenario) if args.scenario else default_scenario()
    if args.linewidth is not None:
        scenario.probe = ProbeSpec(
            omega_grid=scenario.probe.omega_grid,
            linewidth=args.linewidth,
            lineshape=scenario.probe.lineshape,
            e0_probe=scenario.probe.e0_probe,
        )
    if args.seed is not None:
        scenario.averaging = replace(scenario.averaging, seed=args.seed)
    if getattr(args, "samples", None) is not None:
        scenario.averaging = replace(scenario.averaging, samples=args.samples)
    return scenario


def _formats(args) -> set:
    return {f.strip() for f in args.format.split(",") if f.strip()}


def _dphi_grid(args) -> np.ndarray:
    if args.dphi_list:
        return np.array(
            [math.radians(float(v)) for v in args.dphi_list.split(",")], dtype=float
        )
    n = args.dphi_points
    if n < 1:
        raise ScenarioError("--dphi-points must be >= 1")
    return TWO_PI * np.arange(n) / n


def cmd_print_defaults(args) -> int:
    print(json.dumps(scenario_to_dict(default_scenario()), indent=2))
    return 0


def cmd_absorption(args) -> int:
    scenario = _load(args)
    out = args.out
    os.makedirs(out, exist_ok=True)
    spectrum = absorption_undriven_isotropic(scenario.aggregate, scenario.probe)
    bands = band_table(spectrum)
    peaks = peak_table(spectrum)
    outputs = ["absorption.csv", "absorption_peaks.json"]
    write_spectrum_csv(os.path.join(out, "absorption.csv"), spectrum)
    write_json(
        os.path.join(out, "absorption_peaks.json"),
        {"peaks": peaks, "bands": bands, "meta": spectrum.meta},
    )
    if "svg" in _formats(args):
        line_plot_svg(
            os.path.join(out, "absorption.svg"),
            spectrum.omega,
            spectrum.values,
            title="Undriven isotropic absorption",
            xlabel="probe frequency (cm^-1)",
            ylabel="absorption (arb.)",
        )
        outputs.append("absorption.svg")
    write_manifest(out, scenario_json(scenario), scenario.averaging.seed, "absorption", outputs)
    for band in bands:
        print(
            f"band center {band['center_cm1']:.1f} cm^-1: "
            f"{len(band['peaks'])} peak(s), spread {band['peak_spread_cm1']:.2f} cm^-1"
        )
    return 0


def _cd_map_row(task) -> tuple[float, np.ndarray, np.ndarray | None, dict]:
    """One ellipticity row of the CD map (top-level for process pools)."""
    from .scenario import scenario_from_dict

    doc, dphi, stream = task
    scenario = scenario_from_dict(json.loads(doc))
    drive = replace(scenario.drive, phi_x=dphi, phi_y=0.0)
    result = average_cd(
        scenario.aggregate, drive, scenario.probe, scenario.averaging, stream=stream
    )
    return dphi, result.mean.values, result.stderr, result.mean.meta


def cmd_cd_map(args) -> int:
    scenario = _load(args)
    out = args.out
    os.makedirs(out, exist_ok=True)
    dphis = _dphi_grid(args)
    abs_ref = absorption_undriven_isotropic(scenario.aggregate, scenario.probe)
    norm = float(np.max(abs_ref.values))
    doc = json.dumps(scenario_to_dict(scenario))
    tasks = [(doc, float(dphi), k) for k, dphi in enumerate(dphis)]
    workers = int(os.environ.get("FLOQAB_WORKERS", "1"))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_cd_map_row, tasks))
    else:
        rows = [_cd_map_row(t) for t in tasks]

    omega = scenario.probe.omega_grid
    matrix = np.array([values for _, values, _, _ in rows]) / norm
    has_stderr = rows[0][2] is not None
    stderr = (
        np.array([se for _, _, se, _ in rows]) / norm if has_stderr else None
    )
    outputs = ["cd_map.csv", "cd_map.json"]
    dphi_deg = np.degrees(dphis)
    write_matrix_csv(os.path.join(out, "cd_map.csv"), "delta_phi_deg", dphi_deg, omega, matrix)
    if stderr is not None:
        write_matrix_csv(
            os.path.join(out, "cd_map_stderr.csv"), "delta_phi_deg", dphi_deg, omega, stderr
        )
        outputs.append("cd_map_stderr.csv")
    meta = {
        "normalization_constant": norm,
        "seed_policy": "per-row substream (seed, stream=row_index) of the Philox generator",
        "rows": [
            {"delta_phi_deg": float(np.degrees(d)), "stream": k, "meta": m}
            for k, (d, _, _, m) in enumerate(rows)
        ],
    }
    write_json(os.path.join(out, "cd_map.json"), meta)
    if "svg" in _formats(args):
        heatmap_svg(
            os.path.join(out, "cd_map.svg"),
            omega,
            dphi_deg,
            matrix,
            title="Isotropic CD vs drive ellipticity (normalized)",
            xlabel="probe frequency (cm^-1)",
            ylabel="delta_phi (deg)",
        )
        outputs.append("cd_map.svg")
    write_manifest(out, scenario_json(scenario), scenario.averaging.seed, "cd-map", outputs)
    print(f"cd-map: {len(dphis)} ellipticity rows, normalization {norm:.6g}")
    return 0


def _loop_area(scenario: Scenario, path) -> float:
    """Shoelace area (Angstrom^2) of the loop's site polygon, in visit order."""
    sites = []
    for label in path.states[:-1]:
        if label.state.site is not None and label.state.site not in sites:
            sites.append(label.state.site)
    pos = scenario.aggregate.positions
    xy = [(pos[s][0], pos[s][1]) for s in sites]
    area = 0.0
    for (x1, y1), (x2, y2) in zip(xy, xy[1:] + xy[:1]):
        area += x1 * y2 - x2 * y1
    return abs(area) / 2.0


def cmd_ab_sweep(args) -> int:
    scenario = _load(args)
    out = args.out
    os.makedirs(out, exist_ok=True)
    dphis = _dphi_grid(args)
    path = reference_loop()
    dipoles = excitonic_transition_dipoles(scenario.aggregate)
    area = _loop_area(scenario, path)
    header = "delta_phi_deg,phase_rad,phase_mod_2pi_rad,magnitude,phi2_rad,phi4_rad,b_tesla,status"
    lines = [header]
    print(f"{'dphi(deg)':>10} {'Phi(rad)':>10} {'|W|':>12} {'phi2':>8} {'phi4':>8} {'B(T)':>10}")
    for dphi in dphis:
        drive = replace(scenario.drive, phi_x=float(dphi), phi_y=0.0)
        block = build_rwa_block(scenario.aggregate, drive, dipoles)
        try:
            result = wilson_loop(block, path)
            phi2, phi4 = site_phase_decomposition(block, path)
            b = equivalent_magnetic_field(result.phase, area)
            lines.append(
                f"{math.degrees(dphi):.6g},{result.phase:.12g},{result.phase_mod_2pi:.12g},"
                f"{result.magnitude:.12g},{phi2:.12g},{phi4:.12g},{b:.12g},ok"
            )
            print(
                f"{math.degrees(dphi):10.2f} {result.phase:10.6f} {result.magnitude:12.5e} "
                f"{phi2:8.4f} {phi4:8.4f} {b:10.1f}"
            )
        except BrokenPathError as exc:
            lines.append(f"{math.degrees(dphi):.6g},,,,,,,broken: {exc}")
            print(f"{math.degrees(dphi):10.2f} broken path: {exc}")
    outputs = ["ab_sweep.csv"]
    from .output import atomic_write_text

    atomic_write_text(os.path.join(out, "ab_sweep.csv"), "\n".join(lines) + "\n")

    if args.theta_points:
        n = args.theta_points
        tlines = ["theta1_deg,theta3_deg,delta_phi_deg,phase_rad,magnitude,status"]
        thetas = 360.0 * np.arange(n) / n
        from .model import square_tetramer

        dphi0 = scenario.drive.delta_phi
        for t1 in thetas:
            for t3 in thetas:
                agg = square_tetramer(math.radians(t1), math.radians(t3))
                dip = excitonic_transition_dipoles(agg)
                drive = replace(scenario.drive, phi_x=dphi0, phi_y=0.0)
                try:
                    block = build_rwa_block(agg, drive, dip)
                    result = wilson_loop(block, path)
                    tlines.append(
                        f"{t1:.6g},{t3:.6g},{math.degrees(dphi0):.6g},"
                        f"{result.phase:.12g},{result.magnitude:.12g},ok"
                    )
                except BrokenPathError as exc:
                    tlines.append(
                        f"{t1:.6g},{t3:.6g},{math.degrees(dphi0):.6g},,,broken: {exc}"
                    )
        atomic_write_text(os.path.join(out, "ab_theta_sweep.csv"), "\n".join(tlines) + "\n")
        outputs.append("ab_theta_sweep.csv")

    if args.dump_rwa_block:
        block = build_rwa_block(scenario.aggregate, scenario.drive, dipoles)
        write_json(args.dump_rwa_block, block_dump_dict(block))
    write_manifest(out, scenario_json(scenario), scenario.averaging.seed, "ab-sweep", outputs)
    return 0


def _run_validation_checks(scenario: Scenario) -> list[dict]:
    agg = scenario.aggregate
    drive = scenario.drive
    omega = drive.omega(agg.omega_vib)
    omega_t = TWO_PI  # Omega * T
    checks = []

    # Undriven propagator must reproduce exp(-i H T) exactly.
    dip0 = excitonic_transition_dipoles(agg)
    drive_off = replace(drive, e0=0.0)
    prop0 = propagate_period(agg, drive_off, dip0, steps=2000)
    h_static = build_exciton_hamiltonian(agg)
    static_values = eigh(
        LabeledHermitian(h_static.entries[1:, 1:], h_static.labels[1:])
    ).values
    cmp0 = compare_with_energies(prop0, static_values)
    checks.append(
        {
            "name": "undriven_exact_exponential",
            "passed": bool(cmp0.max_distance < 1e-10),
            "max_distance_rad": cmp0.max_distance,
            "threshold_rad": 1e-10,
        }
    )

    # Driven cross-checks at five fixed random orientations.
    rng = make_rng(scenario.averaging.seed, stream=7001)
    validity = rwa_validity_ratio(agg, drive, dip0)
    rwa_worst, full_worst, block_worst = 0.0, 0.0, 0.0
    for _ in range(5):
        lab = rotate_dipoles(agg, sample_orientation(rng))
        prop = propagate_period(agg, drive, lab)
        rwa_quasi = quasi_energies(build_rwa_block(agg, drive, lab))
        full_quasi = quasi_energies(build_full_floquet(agg, drive, lab, n_max=6))
        rwa_worst = max(rwa_worst, compare_quasi_energies(prop, rwa_quasi).max_distance)
        full_worst = max(full_worst, compare_quasi_energies(prop, full_quasi).max_distance)
        # central full window vs RWA block, mod Omega
        central = central_window(full_quasi, drop_ground=True)
        scale = TWO_PI / omega
        d, _ = _circular_pair(central * scale, rwa_quasi.values * scale)
        block_worst = max(block_worst, d / scale)
    checks.append(
        {
            "name": "rwa_vs_tdse",
            "passed": bool(rwa_worst < 0.01 * omega_t),
            "max_distance_rad": rwa_worst,
            "threshold_rad": 0.01 * omega_t,
            "drive_ratio": validity.ratio,
            "drive_field_ratio": validity.field_ratio,
        }
    )
    checks.append(
        {
            "name": "full_floquet_vs_tdse",
            "passed": bool(full_worst < 1e-5 * omega_t),
            "max_distance_rad": full_worst,
            "threshold_rad": 1e-5 * omega_t,
        }
    )
    checks.append(
        {
            "name": "full_vs_rwa_central_window",
            "passed": bool(block_worst < 0.01 * omega),
            "max_distance_cm1": block_worst,
            "threshold_cm1": 0.01 * omega,
        }
    )

    # Replica shift: block n=2 spectrum equals block n=1 shifted by Omega.
    q1 = quasi_energies(build_rwa_block(agg, drive, dip0, n=1))
    q2 = quasi_energies(build_rwa_block(agg, drive, dip0, n=2))
    replica = float(np.max(np.abs(q2.values - q1.values - omega)))
    checks.append(
        {
            "name": "replica_shift",
            "passed": bool(replica < 1e-10),
            "max_deviation_cm1": replica,
            "threshold_cm1": 1e-10,
        }
    )

    # Global polarization-phase gauge shift leaves quasi-energies alone.
    shift = 0.7
    shifted = replace(drive, phi_x=drive.phi_x + shift, phi_y=drive.phi_y + shift)
    q_shift = quasi_energies(build_rwa_block(agg, shifted, dip0))
    gauge = float(np.max(np.abs(q_shift.values - q1.values)))
    checks.append(
        {
            "name": "gauge_phase_shift",
            "passed": bool(gauge < 1e-10),
            "max_deviation_cm1": gauge,
            "threshold_cm1": 1e-10,
        }
    )
    return checks


def _circular_pair(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    from .tdse import _circular_match

    return _circular_match(np.asarray(a), np.asarray(b))


def cmd_validate(args) -> int:
    scenario = _load(args)
    out = args.out
    os.makedirs(out, exist_ok=True)
    checks = _run_validation_checks(scenario)
    passed = all(c["passed"] for c in checks)
    report = {"passed": passed, "checks": checks, "version": __version__}
    write_json(os.path.join(out, "validation.json"), report)
    if args.dump_rwa_block:
        block = build_rwa_block(
            scenario.aggregate, scenario.drive, excitonic_transition_dipoles(scenario.aggregate)
        )
        write_json(args.dump_rwa_block, block_dump_dict(block))
    write_manifest(
        out, scenario_json(scenario), scenario.averaging.seed, "validate", ["validation.json"]
    )
    for check in checks:
        print(f"{'PASS' if check['passed'] else 'FAIL'} {check['name']}")
    return 0 if passed else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floqab",
        description="Driven exciton rings: synthetic AB phases and ellipticity-controlled CD",
    )
    parser.add_argument("--version", action="version", version=f"floqab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, samples=True):
        p.add_argument("--scenario", help="scenario JSON file (defaults when omitted)")
        p.add_argument("--out", default="floqab-out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the averaging seed")
        if samples:
            p.add_argument(
                "--samples", type=int, default=None, help="override the Monte Carlo sample count"
            )
        p.add_argument(
            "--linewidth", type=float, default=None, help="override the probe HWHM (cm^-1)"
        )
        p.add_argument(
            "--format",
            default="csv,json,svg",
            help="comma-separated outputs to emit (csv,json,svg); csv/json always written",
        )

    p_abs = sub.add_parser("absorption", help="undriven isotropic absorption spectrum")
    common(p_abs, samples=False)
    p_abs.set_defaults(func=cmd_absorption)

    p_map = sub.add_parser("cd-map", help="isotropically averaged CD vs drive ellipticity")
    common(p_map)
    p_map.add_argument("--dphi-points", type=int, default=16, help="ellipticity grid size")
    p_map.add_argument(
        "--dphi-list", default=None, help="explicit delta_phi values in degrees, comma-separated"
    )
    p_map.set_defaults(func=cmd_cd_map)

    p_ab = sub.add_parser("ab-sweep", help="Wilson-loop AB phases over ellipticity")
    common(p_ab, samples=False)
    p_ab.add_argument("--dphi-points", type=int, default=16)
    p_ab.add_argument("--dphi-list", default=None)
    p_ab.add_argument(
        "--theta-points", type=int, default=0, help="also sweep (theta1, theta3) on an NxN grid"
    )
    p_ab.add_argument("--dump-rwa-block", default=None, help="write the RWA block as JSON")
    p_ab.set_defaults(func=cmd_ab_sweep)

    p_val = sub.add_parser("validate", help="time-domain cross-checks; nonzero exit on failure")
    common(p_val, samples=False)
    p_val.add_argument("--dump-rwa-block", default=None, help="write the RWA block as JSON")
    p_val.set_defaults(func=cmd_validate)

    p_def = sub.add_parser("print-defaults", help="dump the default scenario JSON")
    p_def.set_defaults(func=cmd_print_defaults)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 3
    except (
        HermitianInputError,
        HermiticityError,
        JacobiConvergenceError,
        StepSizeError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        target = getattr(exc, "filename", None)
        where = f" ({target})" if target else ""
        print(f"i/o error{where}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
