"""Scenario documents: one JSON file describing a full simulation setup.

Every physical quantity carries a unit suffix in its key name
(``omega_e_cm1``, ``e0_v_per_m``, ...) and all angles are stored in degrees
in files while the library works in radians.  Keys starting with an
underscore are informational and ignored on load; unknown keys are
rejected so unit mistakes fail loudly.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .floquet import DriveSpec
from .model import AggregateSpec, ChromophoreSpec, square_tetramer
from .orientation import AveragingPlan
from .spectra import ProbeSpec

__all__ = [
    "ScenarioError",
    "Scenario",
    "default_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "load_scenario",
    "scenario_json",
]


class ScenarioError(ValueError):
    """Scenario document violates the schema."""


@dataclass(eq=False)
class Scenario:
    """A complete run description: the physical system, both fields and the
    orientation-averaging plan."""

    aggregate: AggregateSpec
    drive: DriveSpec
    probe: ProbeSpec
    averaging: AveragingPlan
    tetramer_params: dict | None = None  # remembered builder arguments, if any


def default_scenario() -> Scenario:
    """All defaults: the reference square tetramer (theta1 = 45 deg,
    theta3 = 315 deg), the standard drive amplitude with 10% red detuning,
    the two-band probe grid and 20,000-sample Monte Carlo averaging."""
    tetramer = {"side_angstrom": 3.5, "theta1_deg": 45.0, "theta3_deg": 315.0}
    return Scenario(
        aggregate=square_tetramer(
            math.radians(tetramer["theta1_deg"]),
            math.radians(tetramer["theta3_deg"]),
            side=tetramer["side_angstrom"],
        ),
        drive=DriveSpec(e0=2.7e8, detuning=-38.5, phi_x=0.0, phi_y=0.0),
        probe=ProbeSpec.default(),
        averaging=AveragingPlan(method="monte_carlo", samples=20000, seed=42),
        tetramer_params=tetramer,
    )


def _require_mapping(doc, path: str) -> dict:
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: expected an object, got {type(doc).__name__}")
    return doc


def _reject_unknown(doc: dict, allowed: set, path: str):
    unknown = [k for k in doc if k not in allowed and not k.startswith("_")]
    if unknown:
        raise ScenarioError(f"{path}: unknown keys {sorted(unknown)}")


def _number(doc: dict, key: str, path: str, default=None) -> float:
    if key not in doc:
        if default is None:
            raise ScenarioError(f"{path}.{key}: required")
        return float(default)
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}.{key}: expected a number, got {value!r}")
    return float(value)


def _integer(doc: dict, key: str, path: str, default=None) -> int:
    if key not in doc:
        if default is None:
            raise ScenarioError(f"{path}.{key}: required")
        return int(default)
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path}.{key}: expected an integer, got {value!r}")
    return value


def _vector3(doc: dict, key: str, path: str) -> np.ndarray:
    value = doc.get(key)
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 3
        or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in value)
    ):
        raise ScenarioError(f"{path}.{key}: expected a list of three numbers")
    return np.asarray(value, dtype=float)


def _parse_chromophore(doc, path: str) -> ChromophoreSpec:
    doc = _require_mapping(doc, path)
    _reject_unknown(
        doc,
        {
            "position_angstrom",
            "dipole_dir",
            "dipole_azimuth_deg",
            "mu_00_debye",
            "mu_01_debye",
            "mu_vib_debye",
        },
        path,
    )
    position = _vector3(doc, "position_angstrom", path)
    magnitudes = dict(
        mu_00=_number(doc, "mu_00_debye", path, default=0.90),
        mu_01=_number(doc, "mu_01_debye", path, default=0.74),
        mu_vib=_number(doc, "mu_vib_debye", path, default=0.15),
    )
    has_dir = "dipole_dir" in doc
    has_angle = "dipole_azimuth_deg" in doc
    if has_dir == has_angle:
        raise ScenarioError(f"{path}: give exactly one of dipole_dir / dipole_azimuth_deg")
    try:
        if has_dir:
            return ChromophoreSpec(position, _vector3(doc, "dipole_dir", path), **magnitudes)
        angle = math.radians(_number(doc, "dipole_azimuth_deg", path))
        return ChromophoreSpec.in_plane(position, angle, **magnitudes)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def _parse_aggregate(doc, path: str) -> tuple[AggregateSpec, dict | None]:
    doc = _require_mapping(doc, path)
    _reject_unknown(
        doc,
        {
            "square_tetramer",
            "chromophores",
            "neighbor_pairs",
            "omega_e_cm1",
            "omega_vib_cm1",
            "huang_rhys",
            "eta_cm1_ang3",
        },
        path,
    )
    common = dict(
        omega_e=_number(doc, "omega_e_cm1", path, default=27695.0),
        omega_vib=_number(doc, "omega_vib_cm1", path, default=385.0),
        huang_rhys=_number(doc, "huang_rhys", path, default=0.31),
        eta=_number(doc, "eta_cm1_ang3", path, default=982.0),
    )
    has_builder = "square_tetramer" in doc
    has_explicit = "chromophores" in doc
    if has_builder == has_explicit:
        raise ScenarioError(f"{path}: give exactly one of square_tetramer / chromophores")
    try:
        if has_builder:
            b = _require_mapping(doc["square_tetramer"], f"{path}.square_tetramer")
            _reject_unknown(
                b, {"side_angstrom", "theta1_deg", "theta3_deg"}, f"{path}.square_tetramer"
            )
            params = {
                "side_angstrom": _number(b, "side_angstrom", path, default=3.5),
                "theta1_deg": _number(b, "theta1_deg", path, default=45.0),
                "theta3_deg": _number(b, "theta3_deg", path, default=315.0),
            }
            agg = square_tetramer(
                math.radians(params["theta1_deg"]),
                math.radians(params["theta3_deg"]),
                side=params["side_angstrom"],
                **common,
            )
            return agg, params
        chroms = doc["chromophores"]
        if not isinstance(chroms, list) or not chroms:
            raise ScenarioError(f"{path}.chromophores: expected a non-empty list")
        chromophores = [
            _parse_chromophore(c, f"{path}.chromophores[{k}]") for k, c in enumerate(chroms)
        ]
        pairs = doc.get("neighbor_pairs")
        if not isinstance(pairs, list) or not all(
            isinstance(p, (list, tuple)) and len(p) == 2 for p in pairs or []
        ):
            raise ScenarioError(f"{path}.neighbor_pairs: expected a list of [i, j] pairs")
        agg = AggregateSpec(
            chromophores=chromophores,
            neighbor_pairs=[(int(i), int(j)) for i, j in pairs],
            **common,
        )
        return agg, None
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def scenario_from_dict(doc) -> Scenario:
    """Parse and validate a scenario document; raises
    :class:`ScenarioError` with the offending key path."""
    doc = _require_mapping(doc, "scenario")
    _reject_unknown(doc, {"aggregate", "drive", "probe", "averaging"}, "scenario")
    aggregate, tetramer_params = _parse_aggregate(doc.get("aggregate", {}), "aggregate")

    drive_doc = _require_mapping(doc.get("drive", {}), "drive")
    _reject_unknown(
        drive_doc, {"e0_v_per_m", "detuning_cm1", "phi_x_deg", "phi_y_deg"}, "drive"
    )
    try:
        drive = DriveSpec(
            e0=_number(drive_doc, "e0_v_per_m", "drive", default=2.7e8),
            detuning=_number(drive_doc, "detuning_cm1", "drive", default=-38.5),
            phi_x=math.radians(_number(drive_doc, "phi_x_deg", "drive", default=0.0)),
            phi_y=math.radians(_number(drive_doc, "phi_y_deg", "drive", default=0.0)),
        )
        drive.omega(aggregate.omega_vib)  # validate Omega > 0 up front
    except ValueError as exc:
        raise ScenarioError(f"drive: {exc}") from exc

    probe_doc = _require_mapping(doc.get("probe", {}), "probe")
    _reject_unknown(
        probe_doc,
        {"omega_min_cm1", "omega_max_cm1", "omega_step_cm1", "linewidth_cm1", "lineshape"},
        "probe",
    )
    lineshape = probe_doc.get("lineshape", "lorentzian")
    if not isinstance(lineshape, str):
        raise ScenarioError(f"probe.lineshape: expected a string, got {lineshape!r}")
    try:
        probe = ProbeSpec.default(
            omega_min=_number(probe_doc, "omega_min_cm1", "probe", default=27540.0),
            omega_max=_number(probe_doc, "omega_max_cm1", "probe", default=28180.0),
            step=_number(probe_doc, "omega_step_cm1", "probe", default=0.25),
            linewidth=_number(probe_doc, "linewidth_cm1", "probe", default=2.0),
            lineshape=lineshape,
        )
    except ValueError as exc:
        raise ScenarioError(f"probe: {exc}") from exc

    avg_doc = _require_mapping(doc.get("averaging", {}), "averaging")
    _reject_unknown(
        avg_doc, {"method", "samples", "seed", "n_theta", "n_chi", "n_psi"}, "averaging"
    )
    method = avg_doc.get("method", "monte_carlo")
    if not isinstance(method, str):
        raise ScenarioError(f"averaging.method: expected a string, got {method!r}")
    try:
        averaging = AveragingPlan(
            method=method,
            samples=_integer(avg_doc, "samples", "averaging", default=20000),
            seed=_integer(avg_doc, "seed", "averaging", default=42),
            n_theta=_integer(avg_doc, "n_theta", "averaging", default=8),
            n_chi=_integer(avg_doc, "n_chi", "averaging", default=8),
            n_psi=_integer(avg_doc, "n_psi", "averaging", default=8),
        )
    except ValueError as exc:
        raise ScenarioError(f"averaging: {exc}") from exc

    return Scenario(
        aggregate=aggregate,
        drive=drive,
        probe=probe,
        averaging=averaging,
        tetramer_params=tetramer_params,
    )


def scenario_to_dict(s: Scenario) -> dict:
    """Canonical document form: explicit chromophores (degrees for angles in
    drive phases), with the square-tetramer builder parameters echoed as an
    informational block when available."""
    agg = s.aggregate
    grid = s.probe.omega_grid
    doc = {
        "aggregate": {
            "chromophores": [
                {
                    "position_angstrom": [float(x) for x in c.position],
                    "dipole_dir": [float(x) for x in c.dipole_dir],
                    "mu_00_debye": c.mu_00,
                    "mu_01_debye": c.mu_01,
                    "mu_vib_debye": c.mu_vib,
                }
                for c in agg.chromophores
            ],
            "neighbor_pairs": [[i, j] for i, j in agg.neighbor_pairs],
            "omega_e_cm1": agg.omega_e,
            "omega_vib_cm1": agg.omega_vib,
            "huang_rhys": agg.huang_rhys,
            "eta_cm1_ang3": agg.eta,
        },
        "drive": {
            "e0_v_per_m": s.drive.e0,
            "detuning_cm1": s.drive.detuning,
            "phi_x_deg": math.degrees(s.drive.phi_x),
            "phi_y_deg": math.degrees(s.drive.phi_y),
        },
        "probe": {
            "omega_min_cm1": float(grid[0]),
            "omega_max_cm1": float(grid[-1]),
            "omega_step_cm1": float(grid[1] - grid[0]),
            "linewidth_cm1": s.probe.linewidth,
            "lineshape": s.probe.lineshape,
        },
        "averaging": {
            "method": s.averaging.method,
            "samples": s.averaging.samples,
            "seed": s.averaging.seed,
            "n_theta": s.averaging.n_theta,
            "n_chi": s.averaging.n_chi,
            "n_psi": s.averaging.n_psi,
        },
    }
    if s.tetramer_params is not None:
        doc["aggregate"]["_square_tetramer"] = dict(s.tetramer_params)
    return doc


def scenario_json(s: Scenario) -> str:
    """Canonical JSON text (sorted keys) used for hashing and manifests."""
    return json.dumps(scenario_to_dict(s), sort_keys=True, separators=(",", ":"))


def load_scenario(path) -> Scenario:
    """Read and validate a scenario JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)
