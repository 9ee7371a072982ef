"""Probe-response spectra.

Two observables are computed on a common frequency grid: the undriven
isotropic absorption (used for normalization) and the circular-dichroism
response of one driven, oriented aggregate, evaluated from the modes of the
rotating-wave Floquet block.  Stick transitions are broadened with a
normalized Lorentzian or Gaussian profile whose ``linewidth`` is the
half width at half maximum.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import eigh
from .model import (
    AggregateSpec,
    LabeledHermitian,
    build_exciton_hamiltonian,
    excitonic_transition_dipoles,
)

__all__ = [
    "ProbeSpec",
    "SpectrumGrid",
    "lineshape_profile",
    "cd_single_orientation",
    "absorption_undriven_isotropic",
    "normalize_to_undriven_max",
    "peak_table",
    "band_table",
]

LINESHAPES = ("lorentzian", "gaussian")


@dataclass(eq=False)
class ProbeSpec:
    """Weak circular probe: frequency grid (cm^-1), broadening half-width
    gamma (cm^-1), profile kind, and the field-intensity scale |E_p0|^2
    entering only as a global prefactor."""

    omega_grid: np.ndarray
    linewidth: float = 2.0
    lineshape: str = "lorentzian"
    e0_probe: float = 1.0

    def __post_init__(self):
        self.omega_grid = np.asarray(self.omega_grid, dtype=float).reshape(-1)
        if self.omega_grid.size < 2:
            raise ValueError("probe grid needs at least two points")
        if not np.all(np.diff(self.omega_grid) > 0.0):
            raise ValueError("probe grid must be strictly ascending")
        if self.linewidth <= 0.0:
            raise ValueError("linewidth must be positive")
        if self.lineshape not in LINESHAPES:
            raise ValueError(f"lineshape must be one of {LINESHAPES}")
        if self.e0_probe <= 0.0:
            raise ValueError("probe field scale must be positive")

    @classmethod
    def default(
        cls,
        omega_min: float = 27540.0,
        omega_max: float = 28180.0,
        step: float = 0.25,
        **kwargs,
    ) -> "ProbeSpec":
        """Grid covering both exciton bands with margins, 0.25 cm^-1 step."""
        grid = np.arange(omega_min, omega_max + 0.5 * step, step)
        return cls(omega_grid=grid, **kwargs)


@dataclass(eq=False)
class SpectrumGrid:
    """A signal on a frequency grid plus provenance metadata."""

    omega: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float).reshape(-1)
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.omega.shape != self.values.shape:
            raise ValueError("omega and values must have equal length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spectrum contains non-finite values")


def lineshape_profile(
    kind: str, omega: np.ndarray, centers: np.ndarray, hwhm: float
) -> np.ndarray:
    """Normalized profile rows, one per center: shape (len(centers), len(omega)).

    The Lorentzian is gamma/pi / ((w-w0)^2 + gamma^2); the Gaussian uses the
    same half width at half maximum (sigma = gamma / sqrt(2 ln 2)).  Both
    integrate to 1 over the real line.
    """
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    # One allocation plus in-place updates: this sits in the orientation
    # averaging hot loop.
    work = np.subtract.outer(centers, omega)
    if kind == "lorentzian":
        np.multiply(work, work, out=work)
        work += hwhm * hwhm
        np.divide(hwhm / math.pi, work, out=work)
        return work
    if kind == "gaussian":
        sigma = hwhm / math.sqrt(2.0 * math.log(2.0))
        work /= sigma
        np.multiply(work, work, out=work)
        work *= -0.5
        np.exp(work, out=work)
        work /= sigma * math.sqrt(2.0 * math.pi)
        return work
    raise ValueError(f"unknown lineshape {kind!r}")


def _cd_stick_terms(
    values: np.ndarray,
    vectors: np.ndarray,
    e_rows: np.ndarray,
    f_rows: np.ndarray,
    eg_lab: np.ndarray,
    fg_lab: np.ndarray,
    photon_index: int,
    omega_drive: float,
    e0_probe: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Stick positions and signed weights of the circular-dichroism response.

    Each Floquet mode contributes an E-band stick at eps - (n+1) Omega with
    weight -pi |Ep0|^2 Im[(sum_i mu^y_EiG <phi|E_i>)(sum_j mu^x_EjG <E_j|phi>)]
    and an F-band stick at eps - n Omega with the analogous F projections.
    """
    ce = vectors[e_rows, :]
    cf = vectors[f_rows, :]
    scale = -math.pi * e0_probe**2
    ax_e = eg_lab[:, 0] @ ce
    ay_e = eg_lab[:, 1] @ ce
    w_e = scale * np.imag(np.conj(ay_e) * ax_e)
    ax_f = fg_lab[:, 0] @ cf
    ay_f = fg_lab[:, 1] @ cf
    w_f = scale * np.imag(np.conj(ay_f) * ax_f)
    pos_e = values - (photon_index + 1) * omega_drive
    pos_f = values - photon_index * omega_drive
    return np.concatenate([pos_e, pos_f]), np.concatenate([w_e, w_f])


def cd_single_orientation(quasi, lab_dipoles_eg, lab_dipoles_fg, probe: ProbeSpec) -> SpectrumGrid:
    """Circular-dichroism spectrum of one oriented aggregate.

    Parameters
    ----------
    quasi : QuasiEnergySpectrum
        Modes of the rotating-wave block (photon index n), labels included.
    lab_dipoles_eg, lab_dipoles_fg : (N, 3) arrays
        G->E and G->F transition dipoles rotated to the lab frame (Debye).
    probe : ProbeSpec
        Grid, broadening and probe intensity scale.
    """
    if quasi.block_kind != "rwa_f":
        raise ValueError("cd_single_orientation expects a rotating-wave block spectrum")
    n = quasi.photon_index
    eg = np.atleast_2d(np.asarray(lab_dipoles_eg, dtype=float))
    fg = np.atleast_2d(np.asarray(lab_dipoles_fg, dtype=float))
    e_rows, f_rows = [], []
    for row, label in enumerate(quasi.labels):
        if label.state.kind == "E" and label.photon == n + 1:
            e_rows.append((label.state.site, row))
        elif label.state.kind == "F" and label.photon == n:
            f_rows.append((label.state.site, row))
    e_rows = np.array([row for _, row in sorted(e_rows)])
    f_rows = np.array([row for _, row in sorted(f_rows)])
    if len(e_rows) != eg.shape[0] or len(f_rows) != fg.shape[0]:
        raise ValueError("dipole table does not match the block's site count")
    positions, weights = _cd_stick_terms(
        quasi.values,
        quasi.vectors,
        e_rows,
        f_rows,
        eg,
        fg,
        n,
        quasi.omega_drive,
        probe.e0_probe,
    )
    profile = lineshape_profile(probe.lineshape, probe.omega_grid, positions, probe.linewidth)
    values = weights @ profile
    meta = {
        "kind": "cd_single_orientation",
        "photon_index": n,
        "linewidth_cm1": probe.linewidth,
        "lineshape": probe.lineshape,
    }
    return SpectrumGrid(probe.omega_grid, values, meta)


def absorption_undriven_isotropic(agg: AggregateSpec, probe: ProbeSpec) -> SpectrumGrid:
    """Isotropically averaged absorption of the undriven aggregate.

    The exciton Hamiltonian restricted to the single-excitation space is
    diagonalized; each eigenstate absorbs with strength |mu_lambda|^2 / 3
    (the analytic isotropic average), where mu_lambda collects the E and F
    site dipoles with the eigenvector coefficients.
    """
    h = build_exciton_hamiltonian(agg)
    sub = LabeledHermitian(h.entries[1:, 1:], h.labels[1:])
    es = eigh(sub)
    dip = excitonic_transition_dipoles(agg)
    site_dipoles = np.vstack([dip.eg, dip.fg])  # matches (E_1..E_N, F_1..F_N) order
    mu = site_dipoles.T @ es.vectors  # (3, 2N), complex
    strength = np.sum(np.abs(mu) ** 2, axis=0)
    weights = math.pi * probe.e0_probe**2 * strength / 3.0
    profile = lineshape_profile(probe.lineshape, probe.omega_grid, es.values, probe.linewidth)
    values = weights @ profile
    meta = {
        "kind": "absorption_isotropic",
        "linewidth_cm1": probe.linewidth,
        "lineshape": probe.lineshape,
        "stick_energies_cm1": es.values.tolist(),
        "stick_weights": weights.tolist(),
    }
    return SpectrumGrid(probe.omega_grid, values, meta)


def normalize_to_undriven_max(cd: SpectrumGrid, abs_ref: SpectrumGrid) -> SpectrumGrid:
    """Scale a CD spectrum by the maximum of the undriven absorption.

    The probe intensity |E_p0|^2 cancels between numerator and reference as
    long as both were computed with the same probe scale.
    """
    norm = float(np.max(abs_ref.values))
    if norm <= 0.0:
        raise ValueError(f"reference absorption maximum must be positive, got {norm}")
    meta = dict(cd.meta)
    meta["normalization_constant"] = norm
    return SpectrumGrid(cd.omega, cd.values / norm, meta)


def peak_table(grid: SpectrumGrid, rel_threshold: float = 1e-9) -> list[dict]:
    """Local maxima of a spectrum as (position, height) records.

    Positions are refined by a three-point parabola; peaks below
    ``rel_threshold`` times the global maximum are discarded.
    """
    v = grid.values
    w = grid.omega
    top = float(np.max(np.abs(v))) if v.size else 0.0
    peaks = []
    for i in range(1, len(v) - 1):
        if v[i] > v[i - 1] and v[i] >= v[i + 1] and v[i] > rel_threshold * top:
            denom = v[i - 1] - 2.0 * v[i] + v[i + 1]
            offset = 0.0 if denom == 0.0 else 0.5 * (v[i - 1] - v[i + 1]) / denom
            step = w[i + 1] - w[i]
            peaks.append(
                {"omega_cm1": float(w[i] + offset * step), "height": float(v[i])}
            )
    return peaks


def _split_two_clusters(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split sorted values into two groups at the largest consecutive gap."""
    values = np.sort(np.asarray(values, dtype=float))
    if len(values) < 2:
        raise ValueError("need at least two values to form two clusters")
    gaps = np.diff(values)
    cut = int(np.argmax(gaps)) + 1
    return values[:cut], values[cut:]


def band_table(spectrum: SpectrumGrid) -> list[dict]:
    """Two-band summary of an absorption spectrum carrying stick metadata.

    The eigen-transitions are split into two clusters at their largest gap;
    each band reports the mean of its transition energies (its center), the
    visible-peak list, the height-weighted peak centroid and the peak spread.
    """
    if "stick_energies_cm1" not in spectrum.meta:
        raise ValueError("band_table needs stick metadata from the absorption calculation")
    low, high = _split_two_clusters(np.array(spectrum.meta["stick_energies_cm1"]))
    boundary = 0.5 * (low[-1] + high[0])
    peaks = peak_table(spectrum)
    bands = []
    for cluster in (low, high):
        in_band = [
            p
            for p in peaks
            if (p["omega_cm1"] <= boundary) == (cluster[-1] <= boundary)
        ]
        heights = np.array([p["height"] for p in in_band])
        positions = np.array([p["omega_cm1"] for p in in_band])
        centroid = float(positions @ heights / heights.sum()) if len(in_band) else None
        spread = float(positions.max() - positions.min()) if len(in_band) > 1 else 0.0
        bands.append(
            {
                "center_cm1": float(np.mean(cluster)),
                "eigen_min_cm1": float(cluster[0]),
                "eigen_max_cm1": float(cluster[-1]),
                "n_transitions": int(len(cluster)),
                "peaks": in_band,
                "peak_centroid_cm1": centroid,
                "peak_spread_cm1": spread,
            }
        )
    return bands
