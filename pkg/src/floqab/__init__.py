"""floqab: laser-dressed exciton rings.

Builds the driven Frenkel-exciton Hamiltonian of a small cyclic aggregate,
extracts quasi-energies from its photon-number-augmented (Floquet) form,
evaluates Wilson-loop Aharonov-Bohm phases controlled by the drive
ellipticity, and computes isotropically averaged circular-dichroism
spectra.  See the CLI (``floqab --help``) for the batch interface.
"""

__version__ = "0.1.0"

from .constants import DEBYE_VM_TO_CM1, INV_CM_TIME_TO_PS
from .model import (
    AggregateSpec,
    ChromophoreSpec,
    ExcitonBasisLabel,
    GeometryError,
    LabeledHermitian,
    TransitionDipoles,
    build_exciton_hamiltonian,
    dipole_coupling,
    exciton_basis,
    excitonic_transition_dipoles,
    franck_condon_overlap,
    square_tetramer,
)
from .linalg import EigenSystem, eigh, jacobi_eigh, unitary_eigenphases
from .floquet import (
    DriveSpec,
    FloquetBlock,
    FloquetLabel,
    QuasiEnergySpectrum,
    build_full_floquet,
    build_rwa_block,
    central_window,
    drive_coupling_element,
    quasi_energies,
    rwa_validity_ratio,
)
from .spectra import (
    ProbeSpec,
    SpectrumGrid,
    absorption_undriven_isotropic,
    cd_single_orientation,
    normalize_to_undriven_max,
    peak_table,
)
from .orientation import (
    AveragingPlan,
    Orientation,
    average_cd,
    make_rng,
    rotate_dipoles,
    rotation_matrix,
    sample_orientation,
)
from .abphase import (
    BrokenPathError,
    LoopPath,
    WilsonLoopResult,
    equivalent_magnetic_field,
    intensity_independence_check,
    reference_loop,
    site_phase_decomposition,
    wilson_loop,
)
from .tdse import (
    PropagatorResult,
    build_time_hamiltonian,
    compare_quasi_energies,
    compare_with_energies,
    propagate_period,
)
from .scenario import Scenario, ScenarioError, default_scenario, load_scenario
