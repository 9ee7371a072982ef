"""Chromophore aggregate model and the undriven exciton Hamiltonian.

A ring of identical three-level chromophores is described by
:class:`AggregateSpec`.  Each site carries a shared ground state and two
local excitations: ``E`` (electronic excitation, no phonon) and ``F``
(electronic excitation plus one quantum of an intramolecular vibration).
Excitations hop between neighboring sites through point dipole-dipole
couplings dressed by Franck-Condon overlap factors; the single-excitation
basis is ``{G, E_1..E_N, F_1..F_N}``.

Units: energies in cm^-1, positions in Angstrom, dipoles in Debye.
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GeometryError",
    "HermiticityError",
    "ExcitonBasisLabel",
    "exciton_basis",
    "LabeledHermitian",
    "ChromophoreSpec",
    "AggregateSpec",
    "TransitionDipoles",
    "franck_condon_overlap",
    "dipole_coupling",
    "build_exciton_hamiltonian",
    "excitonic_transition_dipoles",
    "square_tetramer",
]

_UNIT_NORM_TOL = 1e-12


class GeometryError(ValueError):
    """Degenerate aggregate geometry (e.g. coincident chromophores)."""


class HermiticityError(ValueError):
    """Matrix entries violate the Hermitian symmetry tolerance."""


@dataclass(frozen=True)
class ExcitonBasisLabel:
    """Single-excitation basis label: the shared ground state ``G`` or a
    site excitation ``E``/``F`` on chromophore ``site`` (0-based)."""

    kind: str
    site: int | None = None

    def __post_init__(self):
        if self.kind not in ("G", "E", "F"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind == "G":
            if self.site is not None:
                raise ValueError("ground-state label carries no site index")
        else:
            if self.site is None or self.site < 0:
                raise ValueError(f"{self.kind} label requires a site index >= 0")

    def __str__(self):
        if self.kind == "G":
            return "G"
        return f"{self.kind}{self.site + 1}"


def exciton_basis(n_sites: int) -> tuple[ExcitonBasisLabel, ...]:
    """Ordered single-excitation basis ``(G, E_1..E_N, F_1..F_N)``."""
    if n_sites < 1:
        raise ValueError("need at least one site")
    labels = [ExcitonBasisLabel("G")]
    labels += [ExcitonBasisLabel("E", i) for i in range(n_sites)]
    labels += [ExcitonBasisLabel("F", i) for i in range(n_sites)]
    return tuple(labels)


@dataclass(eq=False)
class LabeledHermitian:
    """Complex Hermitian matrix (cm^-1) with one basis label per row.

    Hermiticity is enforced on construction to within
    ``1e-10 * max|entry|``.
    """

    entries: np.ndarray
    labels: tuple

    def __post_init__(self):
        self.entries = np.array(self.entries, dtype=complex)
        self.labels = tuple(self.labels)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {self.entries.shape}")
        if len(self.labels) != self.entries.shape[0]:
            raise ValueError(
                f"{len(self.labels)} labels for a {self.entries.shape[0]}-dim matrix"
            )
        scale = np.max(np.abs(self.entries)) if self.entries.size else 0.0
        defect = np.max(np.abs(self.entries - self.entries.conj().T)) if self.entries.size else 0.0
        if defect > 1e-10 * max(scale, 1e-300):
            raise HermiticityError(
                f"Hermiticity defect {defect:.3e} exceeds 1e-10 * max|entry| = {1e-10 * scale:.3e}"
            )

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def index(self, label) -> int:
        """Row index of ``label``; raises ``KeyError`` if absent."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"label {label} not in basis") from None


@dataclass(eq=False)
class ChromophoreSpec:
    """One chromophore: position (Angstrom), unit transition-dipole
    direction in the aggregate frame, and the three transition dipole
    magnitudes (Debye): ``mu_00`` for G->E, ``mu_01`` for G->F and
    ``mu_vib`` for the intramolecular E->F vibrational transition."""

    position: np.ndarray
    dipole_dir: np.ndarray
    mu_00: float = 0.90
    mu_01: float = 0.74
    mu_vib: float = 0.15

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.dipole_dir = np.asarray(self.dipole_dir, dtype=float).reshape(3)
        norm = float(np.linalg.norm(self.dipole_dir))
        if abs(norm - 1.0) > _UNIT_NORM_TOL:
            raise ValueError(f"dipole_dir must be a unit vector, |d| = {norm!r}")
        for name in ("mu_00", "mu_01", "mu_vib"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def in_plane(cls, position, angle: float, **magnitudes) -> "ChromophoreSpec":
        """Chromophore with its dipole in the xy-plane at ``angle`` radians
        from the x axis."""
        direction = np.array([math.cos(angle), math.sin(angle), 0.0])
        return cls(position=position, dipole_dir=direction, **magnitudes)


@dataclass(eq=False)
class AggregateSpec:
    """Full aggregate: chromophores, monomer energetics and the coupling
    constant.  ``neighbor_pairs`` lists the (0-based) site pairs that carry
    dipolar couplings; for the square tetramer these are the four edges."""

    chromophores: list[ChromophoreSpec]
    neighbor_pairs: list[tuple[int, int]]
    omega_e: float = 27695.0
    omega_vib: float = 385.0
    huang_rhys: float = 0.31
    eta: float = 982.0

    def __post_init__(self):
        n = len(self.chromophores)
        if n < 2:
            raise ValueError("an aggregate needs at least two chromophores")
        if self.omega_vib <= 0.0:
            raise ValueError("omega_vib must be positive")
        if self.huang_rhys < 0.0:
            raise ValueError("huang_rhys must be non-negative")
        seen = set()
        pairs = []
        for pair in self.neighbor_pairs:
            i, j = int(pair[0]), int(pair[1])
            if i == j:
                raise ValueError(f"self-pair ({i}, {j}) not allowed")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"pair ({i}, {j}) out of range for {n} sites")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate neighbor pair {key}")
            seen.add(key)
            pairs.append((i, j))
        self.neighbor_pairs = pairs
        pos = self.positions
        for i in range(n):
            for j in range(i + 1, n):
                if np.linalg.norm(pos[j] - pos[i]) <= 0.0:
                    raise GeometryError(f"chromophores {i} and {j} coincide")

    @property
    def n_sites(self) -> int:
        return len(self.chromophores)

    @property
    def positions(self) -> np.ndarray:
        return np.array([c.position for c in self.chromophores])

    @property
    def omega_f(self) -> float:
        """Energy of the F (one-phonon) excitation, omega_e + omega_vib."""
        return self.omega_e + self.omega_vib


@dataclass(eq=False)
class TransitionDipoles:
    """Per-site transition dipole vectors in Debye, one row per site:
    ``eg`` for G->E, ``fg`` for G->F, ``vib`` for E->F."""

    eg: np.ndarray
    fg: np.ndarray
    vib: np.ndarray

    def rotated(self, r: np.ndarray) -> "TransitionDipoles":
        """All dipole sets mapped through the 3x3 matrix ``r``."""
        return TransitionDipoles(self.eg @ r.T, self.fg @ r.T, self.vib @ r.T)


def franck_condon_overlap(n: int, huang_rhys: float) -> float:
    """Vibrational overlap <n'|0> between the displaced excited-state level
    n' and the vibrationless ground state, taken positive:
    sqrt(exp(-D) * D**n / n!).
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ValueError(f"vibrational quantum number must be a non-negative int, got {n!r}")
    if huang_rhys < 0.0:
        raise ValueError("Huang-Rhys parameter must be non-negative")
    return math.sqrt(math.exp(-huang_rhys) * huang_rhys**n / math.factorial(n))


def dipole_coupling(chrom_i: ChromophoreSpec, chrom_j: ChromophoreSpec, eta: float) -> float:
    """Electronic (Condon-factor-free) point dipole-dipole coupling in cm^-1:

        eta * [mu_i.mu_j - 3 (mu_i.r)(mu_j.r)] / |r_ij|^3

    with unit dipole directions and the unit separation vector r.
    Symmetric under i<->j; raises :class:`GeometryError` for coincident
    positions.
    """
    rvec = chrom_j.position - chrom_i.position
    dist = float(np.linalg.norm(rvec))
    if dist < 1e-9:
        raise GeometryError("dipole coupling singular: coincident chromophores")
    rhat = rvec / dist
    mi, mj = chrom_i.dipole_dir, chrom_j.dipole_dir
    # (mi.r)(mj.r) is multiplied before the factor 3 so the result is
    # bit-identical under i <-> j (both projections just flip sign).
    orientation = float(mi @ mj) - 3.0 * (float(mi @ rhat) * float(mj @ rhat))
    return eta * orientation / dist**3


def build_exciton_hamiltonian(spec: AggregateSpec) -> LabeledHermitian:
    """Undriven exciton Hamiltonian over ``{G, E_i, F_i}`` (cm^-1).

    Diagonal: 0 on G, omega_e on each E, omega_e + omega_vib on each F.
    For every neighbor pair the electronic coupling V_ij is dressed by
    Franck-Condon factors:

        J_EE = V <0'|0>^2,   J_EF = V <0'|0><1'|0>,   J_FF = V <1'|0>^2.

    The ground state is uncoupled; the matrix is real symmetric.
    """
    n = spec.n_sites
    dim = 2 * n + 1
    h = np.zeros((dim, dim), dtype=complex)
    fc0 = franck_condon_overlap(0, spec.huang_rhys)
    fc1 = franck_condon_overlap(1, spec.huang_rhys)
    for i in range(n):
        h[1 + i, 1 + i] = spec.omega_e
        h[1 + n + i, 1 + n + i] = spec.omega_f
    for i, j in spec.neighbor_pairs:
        v = dipole_coupling(spec.chromophores[i], spec.chromophores[j], spec.eta)
        ei, ej = 1 + i, 1 + j
        fi, fj = 1 + n + i, 1 + n + j
        h[ei, ej] = h[ej, ei] = v * fc0 * fc0
        h[fi, fj] = h[fj, fi] = v * fc1 * fc1
        h[ei, fj] = h[fj, ei] = v * fc0 * fc1
        h[fi, ej] = h[ej, fi] = v * fc0 * fc1
    return LabeledHermitian(h, exciton_basis(n))


def excitonic_transition_dipoles(spec: AggregateSpec) -> TransitionDipoles:
    """Transition dipole vectors (Debye) in the aggregate frame:
    mu_EG = mu_00 * d_i, mu_FG = mu_01 * d_i, mu_EF = mu_vib * d_i."""
    dirs = np.array([c.dipole_dir for c in spec.chromophores])
    mu00 = np.array([c.mu_00 for c in spec.chromophores])
    mu01 = np.array([c.mu_01 for c in spec.chromophores])
    muv = np.array([c.mu_vib for c in spec.chromophores])
    return TransitionDipoles(
        eg=dirs * mu00[:, None], fg=dirs * mu01[:, None], vib=dirs * muv[:, None]
    )


def square_tetramer(
    theta1: float = math.radians(45.0),
    theta3: float = math.radians(315.0),
    *,
    side: float = 3.5,
    omega_e: float = 27695.0,
    omega_vib: float = 385.0,
    huang_rhys: float = 0.31,
    eta: float = 982.0,
    mu_00: float = 0.90,
    mu_01: float = 0.74,
    mu_vib: float = 0.15,
) -> AggregateSpec:
    """Reference four-site ring: chromophores on the vertices of a square of
    the given side, numbered counterclockwise at (0,0), (a,0), (a,a), (0,a).

    Dipole 2 points along x, dipole 4 along y; dipoles 1 and 3 lie in-plane
    at ``theta1`` and ``theta3`` (radians from the x axis).  Couplings act on
    the four edges only.
    """
    a = float(side)
    positions = [(0.0, 0.0, 0.0), (a, 0.0, 0.0), (a, a, 0.0), (0.0, a, 0.0)]
    angles = [theta1, 0.0, theta3, math.pi / 2.0]
    mags = dict(mu_00=mu_00, mu_01=mu_01, mu_vib=mu_vib)
    chromophores = [
        ChromophoreSpec.in_plane(p, ang, **mags) for p, ang in zip(positions, angles)
    ]
    return AggregateSpec(
        chromophores=chromophores,
        neighbor_pairs=[(0, 1), (1, 2), (2, 3), (3, 0)],
        omega_e=omega_e,
        omega_vib=omega_vib,
        huang_rhys=huang_rhys,
        eta=eta,
    )
