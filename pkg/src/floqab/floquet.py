"""Floquet construction for the infrared-driven exciton ring.

The elliptically polarized drive is near-resonant with the intra-site
E -> F vibrational transition.  In the photon-number-augmented picture the
static couplings conserve photon number while the drive exchanges exactly
one quantum, carrying the polarization phases phi_x, phi_y into the
off-diagonal elements.  Two constructions are provided:

* ``build_full_floquet`` -- the truncated Fourier-space Hamiltonian over
  photon sectors -n_max..n_max, keeping both co- and counter-rotating
  drive terms and the E-F cross couplings;
* ``build_rwa_block`` -- the rotating-wave 2N-dimensional block over
  ``{|E_i, n+1>, |F_i, n>}``, which drops counter-rotating terms and the
  E-F cross couplings.

The drive matrix element <E_i, n+1|H|F_i, n> is the single source of truth
for the light-matter coupling strength; the time-domain integrator in
:mod:`floqab.tdse` reconstructs its field from the same element so the two
routes describe one physical problem.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import DEBYE_VM_TO_CM1
from .linalg import EigenSystem, eigh
from .model import (
    AggregateSpec,
    ExcitonBasisLabel,
    LabeledHermitian,
    TransitionDipoles,
    build_exciton_hamiltonian,
    dipole_coupling,
    franck_condon_overlap,
)

__all__ = [
    "DriveSpec",
    "FloquetLabel",
    "FloquetBlock",
    "QuasiEnergySpectrum",
    "RwaValidity",
    "RwaValidityWarning",
    "drive_coupling_element",
    "build_rwa_block",
    "build_full_floquet",
    "rwa_validity_ratio",
    "quasi_energies",
    "central_window",
]

TWO_PI = 2.0 * math.pi

# Above this validity ratio the rotating-wave block is built anyway, but a
# warning is emitted (Bloch-Siegert-type corrections become visible).
RWA_WARN_RATIO = 0.1


class RwaValidityWarning(UserWarning):
    """Drive or coupling strength is no longer small against the drive frequency."""


def _wrap_angle(angle: float) -> float:
    """Map an angle to [0, 2*pi)."""
    return float(angle) % TWO_PI


@dataclass
class DriveSpec:
    """Continuous-wave elliptical infrared drive.

    ``e0`` is the field amplitude in V/m, ``detuning`` the offset of the
    drive frequency from the vibrational transition (cm^-1), so
    Omega = omega_vib + detuning.  ``phi_x``/``phi_y`` are the phases of the
    two linear polarization components (radians, stored mod 2*pi); only
    their difference is physical.
    """

    e0: float
    detuning: float = 0.0
    phi_x: float = 0.0
    phi_y: float = 0.0

    def __post_init__(self):
        if self.e0 < 0.0:
            raise ValueError("field amplitude e0 must be non-negative")
        self.phi_x = _wrap_angle(self.phi_x)
        self.phi_y = _wrap_angle(self.phi_y)

    def omega(self, omega_vib: float) -> float:
        """Drive frequency Omega = omega_vib + detuning (cm^-1); must be > 0."""
        value = omega_vib + self.detuning
        if value <= 0.0:
            raise ValueError(f"drive frequency must be positive, got {value} cm^-1")
        return value

    @property
    def delta_phi(self) -> float:
        """Ellipticity phase lag phi_x - phi_y in [0, 2*pi)."""
        return _wrap_angle(self.phi_x - self.phi_y)


@dataclass(frozen=True)
class FloquetLabel:
    """Basis label in the augmented space: exciton state times photon number."""

    state: ExcitonBasisLabel
    photon: int

    def __str__(self):
        return f"{self.state}|n={self.photon}"


@dataclass(eq=False)
class FloquetBlock:
    """A Hermitian block of the Floquet Hamiltonian with its bookkeeping."""

    matrix: LabeledHermitian
    block_kind: str  # "rwa_f" or "full"
    omega_drive: float
    photon_index: int | None = None  # n for the RWA block
    n_max: int | None = None  # truncation for the full form

    @property
    def dim(self) -> int:
        return self.matrix.dim


@dataclass(eq=False)
class QuasiEnergySpectrum:
    """Quasi-energies and Floquet modes of one block, with labels kept for
    downstream projections onto |E_j, n+1> and |F_j, n>."""

    eigensystem: EigenSystem
    omega_drive: float
    block_kind: str
    photon_index: int | None = None
    n_max: int | None = None

    @property
    def values(self) -> np.ndarray:
        return self.eigensystem.values

    @property
    def vectors(self) -> np.ndarray:
        return self.eigensystem.vectors

    @property
    def labels(self) -> tuple:
        return self.eigensystem.labels


def drive_coupling_element(drive: DriveSpec, mu_vib_lab: np.ndarray) -> complex:
    """Rotating-frame drive matrix element <E_i, n+1|H|F_i, n> in cm^-1:

        -(E0 / sqrt(2)) * kappa * (mu_x e^{-i phi_x} + mu_y e^{-i phi_y})

    where mu_x, mu_y are the lab-frame Cartesian components of the site's
    vibrational transition dipole (Debye) and kappa converts Debye*(V/m)
    to cm^-1.  The field propagates along z, so the z component of the
    dipole does not couple.
    """
    mu = np.asarray(mu_vib_lab, dtype=float)
    scale = -drive.e0 * DEBYE_VM_TO_CM1 / math.sqrt(2.0)
    return scale * (
        mu[0] * complex(math.cos(drive.phi_x), -math.sin(drive.phi_x))
        + mu[1] * complex(math.cos(drive.phi_y), -math.sin(drive.phi_y))
    )


@dataclass(frozen=True)
class RwaValidity:
    """Validity diagnostics for the rotating-wave approximation.

    ``field_ratio`` is max_i |mu_i . E| / Omega with the in-plane projection
    of the vibrational dipole; ``coupling_ratio`` is max_ij |J_EF| / Omega.
    ``float()`` returns the governing (larger) ratio.
    """

    field_ratio: float
    coupling_ratio: float

    @property
    def ratio(self) -> float:
        return max(self.field_ratio, self.coupling_ratio)

    def __float__(self) -> float:
        return self.ratio


def _neighbor_couplings(agg: AggregateSpec) -> list[tuple[int, int, float]]:
    return [
        (i, j, dipole_coupling(agg.chromophores[i], agg.chromophores[j], agg.eta))
        for i, j in agg.neighbor_pairs
    ]


def rwa_validity_ratio(
    agg: AggregateSpec, drive: DriveSpec, lab_dipoles: TransitionDipoles
) -> RwaValidity:
    """Sizes of the terms the rotating-wave approximation neglects, relative
    to the drive frequency."""
    omega = drive.omega(agg.omega_vib)
    vib = lab_dipoles.vib
    in_plane = float(np.max(np.hypot(vib[:, 0], vib[:, 1]))) if len(vib) else 0.0
    field = drive.e0 * DEBYE_VM_TO_CM1 * in_plane
    fc0 = franck_condon_overlap(0, agg.huang_rhys)
    fc1 = franck_condon_overlap(1, agg.huang_rhys)
    couplings = [abs(v) for _, _, v in _neighbor_couplings(agg)]
    jef = max(couplings) * fc0 * fc1 if couplings else 0.0
    return RwaValidity(field_ratio=field / omega, coupling_ratio=jef / omega)


def _rwa_static_matrix(agg: AggregateSpec, omega: float, n: int) -> np.ndarray:
    """Drive-free part of the RWA block: diagonal energies plus the
    photon-conserving J_EE and J_FF couplings (E states at photon n+1,
    F states at photon n)."""
    n_sites = agg.n_sites
    fc0 = franck_condon_overlap(0, agg.huang_rhys)
    fc1 = franck_condon_overlap(1, agg.huang_rhys)
    h = np.zeros((2 * n_sites, 2 * n_sites), dtype=complex)
    for i in range(n_sites):
        h[i, i] = agg.omega_e + (n + 1) * omega
        h[n_sites + i, n_sites + i] = agg.omega_f + n * omega
    for i, j, v in _neighbor_couplings(agg):
        h[i, j] = h[j, i] = v * fc0 * fc0
        h[n_sites + i, n_sites + j] = h[n_sites + j, n_sites + i] = v * fc1 * fc1
    return h


def _rwa_labels(n_sites: int, n: int) -> tuple[FloquetLabel, ...]:
    labels = [FloquetLabel(ExcitonBasisLabel("E", i), n + 1) for i in range(n_sites)]
    labels += [FloquetLabel(ExcitonBasisLabel("F", i), n) for i in range(n_sites)]
    return tuple(labels)


def build_rwa_block(
    agg: AggregateSpec,
    drive: DriveSpec,
    lab_dipoles: TransitionDipoles,
    n: int = 1,
) -> FloquetBlock:
    """Rotating-wave block h_n over ``{|E_i, n+1>, |F_i, n>}``.

    Diagonals sit at omega_e + (n+1) Omega and omega_f + n Omega; J_EE and
    J_FF couplings conserve photon number; the drive couples |E_i, n+1> to
    |F_i, n> on the same site with the complex element of
    :func:`drive_coupling_element`.  The E-F cross couplings are dropped
    (rotating-wave approximation).  Warns, without failing, when the
    validity ratio exceeds 0.1.
    """
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError(f"photon index n must be an int, got {n!r}")
    omega = drive.omega(agg.omega_vib)
    validity = rwa_validity_ratio(agg, drive, lab_dipoles)
    if validity.ratio >= RWA_WARN_RATIO:
        warnings.warn(
            f"RWA validity ratio {validity.ratio:.3g} >= {RWA_WARN_RATIO}; "
            "rotating-wave results may be inaccurate",
            RwaValidityWarning,
            stacklevel=2,
        )
    n_sites = agg.n_sites
    h = _rwa_static_matrix(agg, omega, n)
    for i in range(n_sites):
        g = drive_coupling_element(drive, lab_dipoles.vib[i])
        h[i, n_sites + i] = g
        h[n_sites + i, i] = g.conjugate()
    matrix = LabeledHermitian(h, _rwa_labels(n_sites, n))
    return FloquetBlock(matrix=matrix, block_kind="rwa_f", omega_drive=omega, photon_index=n)


def build_full_floquet(
    agg: AggregateSpec,
    drive: DriveSpec,
    lab_dipoles: TransitionDipoles,
    n_max: int = 6,
) -> FloquetBlock:
    """Truncated Fourier-space Floquet Hamiltonian over photon sectors
    -n_max..n_max, dimension (2N+1)(2 n_max + 1).

    Each sector carries the full undriven Hamiltonian (including the E-F
    cross couplings) shifted by n Omega.  Adjacent sectors are connected by
    both drive terms: <E_i, n+1|H|F_i, n> = g_i and
    <E_i, n|H|F_i, n+1> = conj(g_i), the counter-rotating partner.
    """
    if not isinstance(n_max, int) or isinstance(n_max, bool):
        raise TypeError(f"n_max must be an int, got {n_max!r}")
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    omega = drive.omega(agg.omega_vib)
    n_sites = agg.n_sites
    base = build_exciton_hamiltonian(agg)
    block_dim = base.dim  # 2N + 1
    sectors = range(-n_max, n_max + 1)
    dim = block_dim * len(sectors)
    h = np.zeros((dim, dim), dtype=complex)
    labels = []
    for si, n in enumerate(sectors):
        start = si * block_dim
        h[start : start + block_dim, start : start + block_dim] = (
            base.entries + n * omega * np.eye(block_dim)
        )
        labels.extend(FloquetLabel(state, n) for state in base.labels)

    def e_index(site: int, sector_pos: int) -> int:
        return sector_pos * block_dim + 1 + site

    def f_index(site: int, sector_pos: int) -> int:
        return sector_pos * block_dim + 1 + n_sites + site

    g = [drive_coupling_element(drive, lab_dipoles.vib[i]) for i in range(n_sites)]
    for si in range(len(sectors) - 1):
        lo, hi = si, si + 1  # photon sectors n and n+1
        for i in range(n_sites):
            # co-rotating: E at n+1 <-> F at n
            h[e_index(i, hi), f_index(i, lo)] += g[i]
            h[f_index(i, lo), e_index(i, hi)] += g[i].conjugate()
            # counter-rotating: E at n <-> F at n+1
            h[e_index(i, lo), f_index(i, hi)] += g[i].conjugate()
            h[f_index(i, hi), e_index(i, lo)] += g[i]
    matrix = LabeledHermitian(h, tuple(labels))
    return FloquetBlock(matrix=matrix, block_kind="full", omega_drive=omega, n_max=n_max)


def quasi_energies(block: FloquetBlock) -> QuasiEnergySpectrum:
    """Diagonalize a Floquet block, carrying its labels and bookkeeping."""
    es = eigh(block.matrix)
    return QuasiEnergySpectrum(
        eigensystem=es,
        omega_drive=block.omega_drive,
        block_kind=block.block_kind,
        photon_index=block.photon_index,
        n_max=block.n_max,
    )


def central_window(spectrum: QuasiEnergySpectrum, drop_ground: bool = True) -> np.ndarray:
    """Representative quasi-energies of a full-Floquet spectrum, one per
    replica family.

    Every physical mode reappears shifted by integer multiples of Omega with
    its mean photon number shifted by the same integer, so selecting modes
    whose mean photon number falls in (-1/2, 1/2] picks exactly one member
    per family.  Modes dominated by the uncoupled ground state are excluded
    when ``drop_ground`` is set.
    """
    if spectrum.block_kind != "full":
        raise ValueError("central_window expects a full-Floquet spectrum")
    photons = np.array([label.photon for label in spectrum.labels])
    ground = np.array([label.state.kind == "G" for label in spectrum.labels])
    weights = np.abs(spectrum.vectors) ** 2
    nbar = photons @ weights
    gweight = weights[ground].sum(axis=0)
    keep = (nbar > -0.5) & (nbar <= 0.5)
    if drop_ground:
        keep &= gweight <= 0.5
    return np.sort(spectrum.values[keep])
