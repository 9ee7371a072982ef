import math
from dataclasses import replace

import numpy as np
import pytest

import floqab
from floqab.abphase import (
    BrokenPathError,
    LoopPath,
    PathTopologyError,
    equivalent_magnetic_field,
    intensity_independence_check,
    reference_loop,
    site_phase_decomposition,
    wilson_loop,
)
from floqab.floquet import FloquetBlock, FloquetLabel
from floqab.model import ExcitonBasisLabel, LabeledHermitian

from conftest import circ_diff

TWO_PI = 2.0 * math.pi


@pytest.fixture
def dipoles(agg):
    return floqab.excitonic_transition_dipoles(agg)


def block_at(agg, dipoles, delta_phi, e0=2.7e8):
    drive = floqab.DriveSpec(e0=e0, detuning=-38.5, phi_x=delta_phi, phi_y=0.0)
    return floqab.build_rwa_block(agg, drive, dipoles)


class TestWilsonLoop:
    def test_phase_law_over_grid(self, agg, dipoles):
        path = reference_loop()
        for k in range(16):
            dphi = TWO_PI * k / 16
            result = wilson_loop(block_at(agg, dipoles, dphi), path)
            assert circ_diff(result.phase, dphi + math.pi) < 1e-10

    def test_right_circular_gives_quarter_turn(self, agg, dipoles):
        result = wilson_loop(block_at(agg, dipoles, -math.pi / 2), reference_loop())
        assert result.phase == pytest.approx(math.pi / 2, abs=1e-12)

    def test_linear_drive_is_trivial(self, agg, dipoles):
        result = wilson_loop(block_at(agg, dipoles, 0.0), reference_loop())
        assert min(circ_diff(result.phase, 0.0), circ_diff(result.phase, math.pi)) < 1e-12

    def test_reversal_conjugates(self, agg, dipoles):
        path = reference_loop()
        back = LoopPath(states=tuple(reversed(path.states)))
        block = block_at(agg, dipoles, 0.8)
        fw = wilson_loop(block, path)
        bw = wilson_loop(block, back)
        assert bw.w == pytest.approx(np.conj(fw.w), rel=1e-12)
        assert circ_diff(bw.phase, -fw.phase) < 1e-12

    def test_broken_hop_reported(self, dipoles):
        # theta1 = 90 deg makes the 1-2 edge coupling vanish.
        agg = floqab.square_tetramer(math.pi / 2, math.radians(315.0))
        dip = floqab.excitonic_transition_dipoles(agg)
        with pytest.raises(BrokenPathError) as err:
            wilson_loop(block_at(agg, dip, 0.5), reference_loop())
        assert err.value.hop == 0
        assert "E1" in str(err.value.source)

    def test_path_validation(self):
        e1 = FloquetLabel(ExcitonBasisLabel("E", 0), 2)
        e2 = FloquetLabel(ExcitonBasisLabel("E", 1), 2)
        with pytest.raises(ValueError):
            LoopPath(states=(e1, e2))  # not closed
        with pytest.raises(ValueError):
            LoopPath(states=(e1, e1))  # degenerate

    def test_magnitude_and_units(self, agg, dipoles):
        result = wilson_loop(block_at(agg, dipoles, 1.0), reference_loop())
        assert result.magnitude == pytest.approx(abs(result.w))
        assert result.magnitude > 0.0


class TestSitePhases:
    def test_reference_values_at_zero_phases(self, agg, dipoles):
        block = block_at(agg, dipoles, 0.0)
        phi2, phi4 = site_phase_decomposition(block, reference_loop())
        assert circ_diff(phi2, math.pi) < 1e-12
        assert circ_diff(phi4, 0.0) < 1e-12

    def test_consistency_with_wilson_loop(self, agg, dipoles, rng):
        path = reference_loop()
        for _ in range(6):
            dphi = float(rng.uniform(0, TWO_PI))
            block = block_at(agg, dipoles, dphi)
            phi2, phi4 = site_phase_decomposition(block, path)
            result = wilson_loop(block, path)
            assert circ_diff(phi2 - phi4, result.phase) < 1e-12

    def test_gauge_shift_cancels(self, agg, dipoles):
        path = reference_loop()
        shift = 1.1
        drive_a = floqab.DriveSpec(e0=2.7e8, detuning=-38.5, phi_x=0.4, phi_y=0.9)
        drive_b = replace(drive_a, phi_x=drive_a.phi_x + shift, phi_y=drive_a.phi_y + shift)
        pa = wilson_loop(floqab.build_rwa_block(agg, drive_a, dipoles), path).phase
        pb = wilson_loop(floqab.build_rwa_block(agg, drive_b, dipoles), path).phase
        assert circ_diff(pa, pb) < 1e-12

    def test_requires_two_drive_hops(self, agg, dipoles):
        e = lambda s: FloquetLabel(ExcitonBasisLabel("E", s), 2)
        pure_j = LoopPath(states=(e(0), e(1), e(2), e(3), e(0)))
        block = block_at(agg, dipoles, 0.3)
        with pytest.raises(PathTopologyError):
            site_phase_decomposition(block, pure_j)


class TestMagneticEquivalence:
    def test_reference_field(self):
        b = equivalent_magnetic_field(math.pi / 2, 3.5**2)
        assert b == pytest.approx(8400.0, rel=0.01)

    def test_zero_phase(self):
        assert equivalent_magnetic_field(0.0, 12.25) == 0.0

    def test_linearity(self):
        assert equivalent_magnetic_field(math.pi, 12.25) == pytest.approx(
            2.0 * equivalent_magnetic_field(math.pi / 2, 12.25), rel=1e-12
        )

    def test_rejects_nonpositive_area(self):
        with pytest.raises(ValueError):
            equivalent_magnetic_field(1.0, 0.0)


class TestIntensityIndependence:
    def test_phase_locked_over_amplitudes(self, agg, drive):
        path = reference_loop()
        e0s = [0.5 * drive.e0, drive.e0, 2.0 * drive.e0]
        report = intensity_independence_check(agg, replace(drive, phi_x=0.7), path, e0s)
        assert report.max_phase_deviation < 1e-12

    def test_magnitude_scales_with_square(self, agg, drive):
        path = reference_loop()
        e0s = [drive.e0, 2.0 * drive.e0]
        report = intensity_independence_check(agg, replace(drive, phi_x=0.7), path, e0s)
        assert report.magnitudes[1] / report.magnitudes[0] == pytest.approx(4.0, rel=1e-10)

    def test_trivial_path_stays_trivial(self, agg, drive, dipoles):
        e = lambda s: FloquetLabel(ExcitonBasisLabel("E", s), 2)
        pure_j = LoopPath(states=(e(0), e(1), e(2), e(3), e(0)))
        for e0 in (1e8, 2.7e8, 5e8):
            block = block_at(agg, dipoles, 1.234, e0=e0)
            phase = wilson_loop(block, pure_j).phase
            assert min(circ_diff(phase, 0.0), circ_diff(phase, math.pi)) < 1e-12

    def test_rejects_zero_amplitude(self, agg, drive):
        with pytest.raises(ValueError):
            intensity_independence_check(agg, drive, reference_loop(), [0.0, drive.e0])


def _flip_f_gauge(block: FloquetBlock) -> FloquetBlock:
    """Site-gauge transformation |F_i> -> -|F_i>, equivalent to flipping the
    sign of every one-phonon Franck-Condon overlap."""
    signs = np.array(
        [-1.0 if label.state.kind == "F" else 1.0 for label in block.matrix.labels]
    )
    flipped = signs[:, None] * block.matrix.entries * signs[None, :]
    return FloquetBlock(
        matrix=LabeledHermitian(flipped, block.matrix.labels),
        block_kind=block.block_kind,
        omega_drive=block.omega_drive,
        photon_index=block.photon_index,
        n_max=block.n_max,
    )


class TestGaugeInvariance:
    def test_fc_sign_flip_on_rwa_loop(self, agg, dipoles):
        path = reference_loop()
        block = block_at(agg, dipoles, 0.8)
        flipped = _flip_f_gauge(block)
        assert circ_diff(wilson_loop(block, path).phase, wilson_loop(flipped, path).phase) < 1e-12

    def test_fc_sign_flip_on_full_block_cross_coupling_loop(self, agg, dipoles):
        drive = floqab.DriveSpec(e0=2.7e8, detuning=-38.5, phi_x=0.8, phi_y=0.0)
        block = floqab.build_full_floquet(agg, drive, dipoles, n_max=1)
        e = lambda s: FloquetLabel(ExcitonBasisLabel("E", s), 0)
        f = lambda s: FloquetLabel(ExcitonBasisLabel("F", s), 0)
        # Closed loop with two E-F cross-coupling hops (photon conserving).
        loop = LoopPath(states=(e(0), f(1), f(2), e(3), e(0)))
        flipped = _flip_f_gauge(block)
        a = wilson_loop(block, loop)
        b = wilson_loop(flipped, loop)
        assert circ_diff(a.phase, b.phase) < 1e-12
        assert a.magnitude == pytest.approx(b.magnitude, rel=1e-12)

    def test_trs_phases_for_linear_drive_any_loop(self, agg, dipoles):
        drive = floqab.DriveSpec(e0=2.7e8, detuning=-38.5, phi_x=math.pi, phi_y=0.0)
        block = floqab.build_rwa_block(agg, drive, dipoles)
        e = lambda s: FloquetLabel(ExcitonBasisLabel("E", s), 2)
        f = lambda s: FloquetLabel(ExcitonBasisLabel("F", s), 1)
        loops = [
            reference_loop(),
            LoopPath(states=(e(0), e(1), f(1), e(1), e(0))),  # up-down retrace
            LoopPath(states=(f(0), f(1), f(2), f(3), f(0))),
        ]
        for loop in loops:
            phase = wilson_loop(block, loop).phase
            assert min(circ_diff(phase, 0.0), circ_diff(phase, math.pi)) < 1e-12
