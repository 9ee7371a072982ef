"""Wilson loops and synthetic Aharonov-Bohm phases of the driven ring.

A closed pathway through the rotating-wave block alternates dipolar hops
(real couplings) with drive-mediated vibrational transitions, which carry
the polarization phases.  The product of transition amplitudes around the
loop is the Wilson loop W; its argument is the gauge-invariant AB phase.
The amplitude for the step s_k -> s_{k+1} is <s_{k+1}|h|s_k>, so the loop
product multiplies matrix elements right-to-left along the traversal.

For the reference square geometry the six-hop loop
E1 -> E2 -> F2 -> F3 -> F4 -> E4 -> E1 yields arg(W) = delta_phi + pi.
"""

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import ELEMENTARY_CHARGE_C, HBAR_J_S
from .floquet import DriveSpec, FloquetBlock, FloquetLabel, build_rwa_block
from .model import AggregateSpec, ExcitonBasisLabel, excitonic_transition_dipoles

__all__ = [
    "BrokenPathError",
    "PathTopologyError",
    "LoopPath",
    "WilsonLoopResult",
    "reference_loop",
    "wilson_loop",
    "site_phase_decomposition",
    "equivalent_magnetic_field",
    "intensity_independence_check",
    "IntensityIndependenceReport",
]

# Hops with amplitudes at or below this magnitude (cm^-1) are treated as
# broken: arg(0) is meaningless and signals a degenerate geometry.
BROKEN_HOP_TOL = 1e-14


class PathTopologyError(ValueError):
    """Path does not have the expected drive-hop structure."""


class BrokenPathError(ValueError):
    """A hop along the loop has (numerically) zero amplitude."""

    def __init__(self, hop: int, source, target, magnitude: float):
        super().__init__(
            f"hop {hop} ({source} -> {target}) has amplitude {magnitude:.3e} <= {BROKEN_HOP_TOL}"
        )
        self.hop = hop
        self.source = source
        self.target = target


@dataclass(frozen=True)
class LoopPath:
    """Closed ordered pathway through a Floquet block's coupling graph."""

    states: tuple

    def __post_init__(self):
        if len(self.states) < 3:
            raise ValueError("a loop needs at least two distinct states")
        if self.states[0] != self.states[-1]:
            raise ValueError("path must close: first and last states differ")

    @property
    def n_hops(self) -> int:
        return len(self.states) - 1

    def hops(self):
        return list(zip(self.states[:-1], self.states[1:]))


@dataclass(frozen=True)
class WilsonLoopResult:
    """Loop amplitude product, its argument in (-pi, pi] and magnitude."""

    w: complex
    phase: float
    magnitude: float
    amplitudes: tuple

    @property
    def phase_mod_2pi(self) -> float:
        """The AB phase mapped to [0, 2*pi) for direct comparison with
        delta_phi + pi."""
        return self.phase % (2.0 * math.pi)


def reference_loop(photon_index: int = 1) -> LoopPath:
    """The six-hop loop of the reference tetramer:
    E1 -> E2 -> F2 -> F3 -> F4 -> E4 -> E1, with E states at photon n+1 and
    F states at photon n (0-based site indices internally)."""
    n = photon_index

    def e(site):
        return FloquetLabel(ExcitonBasisLabel("E", site), n + 1)

    def f(site):
        return FloquetLabel(ExcitonBasisLabel("F", site), n)

    return LoopPath(states=(e(0), e(1), f(1), f(2), f(3), e(3), e(0)))


def _hop_amplitudes(block: FloquetBlock, path: LoopPath) -> list[complex]:
    entries = block.matrix.entries
    amps = []
    for k, (src, dst) in enumerate(path.hops()):
        amp = complex(entries[block.matrix.index(dst), block.matrix.index(src)])
        if abs(amp) <= BROKEN_HOP_TOL:
            raise BrokenPathError(k, src, dst, abs(amp))
        amps.append(amp)
    return amps


def wilson_loop(block: FloquetBlock, path: LoopPath) -> WilsonLoopResult:
    """Product of transition amplitudes <s_{k+1}|h|s_k> around the loop.

    Raises :class:`BrokenPathError` naming the first vanishing hop.
    """
    amps = _hop_amplitudes(block, path)
    w = complex(np.prod(amps))
    return WilsonLoopResult(w=w, phase=cmath.phase(w), magnitude=abs(w), amplitudes=tuple(amps))


def _is_drive_hop(src: FloquetLabel, dst: FloquetLabel) -> bool:
    return (
        src.state.site == dst.state.site
        and {src.state.kind, dst.state.kind} == {"E", "F"}
        and abs(src.photon - dst.photon) == 1
    )


def site_phase_decomposition(block: FloquetBlock, path: LoopPath) -> tuple[float, float]:
    """Partial-product phases (phi_2, phi_4) of a two-drive-hop loop.

    phi_2 groups the vibrational absorption hop (E -> F along the path) with
    its nearest dipolar hops, phi_4 the emission hop likewise; the drive
    amplitudes enter with their sign flipped (the two flips cancel in the
    loop), so phi_2 - phi_4 equals the Wilson-loop phase mod 2*pi.
    """
    amps = _hop_amplitudes(block, path)
    hops = path.hops()
    drive_positions = [k for k, (src, dst) in enumerate(hops) if _is_drive_hop(src, dst)]
    if len(drive_positions) != 2:
        raise PathTopologyError(
            f"decomposition needs exactly two drive hops, found {len(drive_positions)}"
        )
    first, second = drive_positions
    if hops[first][0].state.kind != "E":
        first, second = second, first  # phi_2 belongs to the E -> F absorption hop
    m = len(hops)
    groups = {first: [], second: []}
    for k in range(m):
        if k in (first, second):
            continue
        dist_first = min((k - first) % m, (first - k) % m)
        dist_second = min((k - second) % m, (second - k) % m)
        groups[first if dist_first <= dist_second else second].append(k)
    product_2 = -amps[first]
    for k in groups[first]:
        product_2 *= amps[k]
    product_4 = -amps[second]
    for k in groups[second]:
        product_4 *= amps[k]
    return cmath.phase(product_2), -cmath.phase(product_4)


def equivalent_magnetic_field(phi: float, loop_area: float) -> float:
    """Static magnetic field (Tesla) that would thread the same AB phase
    through a loop of the given area (Angstrom^2): B = phi * hbar / (e * A)."""
    if loop_area <= 0.0:
        raise ValueError("loop area must be positive")
    area_m2 = loop_area * 1e-20
    return phi * HBAR_J_S / (ELEMENTARY_CHARGE_C * area_m2)


@dataclass(eq=False)
class IntensityIndependenceReport:
    """AB phase versus drive amplitude; the phase must not move while the
    rotating-wave approximation holds."""

    e0_values: list[float]
    phases: list[float]
    magnitudes: list[float]
    max_phase_deviation: float


def intensity_independence_check(
    agg: AggregateSpec,
    drive: DriveSpec,
    path: LoopPath,
    e0_values: list[float],
) -> IntensityIndependenceReport:
    """Evaluate the loop phase at several drive amplitudes (aggregate held at
    the identity orientation) and report the maximal circular deviation."""
    if not e0_values:
        raise ValueError("need at least one amplitude")
    if any(e0 <= 0.0 for e0 in e0_values):
        raise ValueError("amplitudes must be positive (zero breaks the loop)")
    dipoles = excitonic_transition_dipoles(agg)
    phases = []
    magnitudes = []
    for e0 in e0_values:
        block = build_rwa_block(agg, replace(drive, e0=e0), dipoles)
        result = wilson_loop(block, path)
        phases.append(result.phase)
        magnitudes.append(result.magnitude)
    ref = phases[0]
    deviation = max(
        abs(math.remainder(p - ref, 2.0 * math.pi)) for p in phases
    )
    return IntensityIndependenceReport(
        e0_values=list(e0_values),
        phases=phases,
        magnitudes=magnitudes,
        max_phase_deviation=deviation,
    )
