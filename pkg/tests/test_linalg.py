import math

import numpy as np
import pytest

from floqab.linalg import (
    EigenSystem,
    HermitianInputError,
    JacobiConvergenceError,
    _jacobi,
    eigh,
    jacobi_eigh,
    unitary_eigenphases,
)

from conftest import circ_diff


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def two_level_closed_form(a, b, z):
    mean = 0.5 * (a + b)
    split = math.hypot(0.5 * (a - b), abs(z))
    return np.array([mean - split, mean + split])


def hermitian_3x3_closed_form(h):
    # Trigonometric solution of the cubic characteristic polynomial.
    q = np.trace(h).real / 3.0
    p2 = (
        2.0 * (abs(h[0, 1]) ** 2 + abs(h[0, 2]) ** 2 + abs(h[1, 2]) ** 2)
        + sum((h[i, i].real - q) ** 2 for i in range(3))
    )
    p = math.sqrt(p2 / 6.0)
    b = (h - q * np.eye(3)) / p
    r = float(np.clip(np.linalg.det(b).real / 2.0, -1.0, 1.0))
    phi = math.acos(r) / 3.0
    e1 = q + 2.0 * p * math.cos(phi)
    e3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    return np.sort([e1, 3.0 * q - e1 - e3, e3])


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
class TestEigh:
    def test_identity(self, method):
        es = eigh(np.eye(4), method=method)
        assert np.allclose(es.values, 1.0)
        assert np.allclose(es.vectors, np.eye(4))

    def test_two_level_splitting(self, method):
        g = 22.9
        es = eigh(np.array([[0.0, g], [g, 0.0]]), method=method)
        assert np.allclose(es.values, [-g, g])
        s2 = math.sqrt(0.5)
        assert np.allclose(es.vectors[:, 0], [s2, -s2])
        assert np.allclose(es.vectors[:, 1], [s2, s2])

    def test_against_characteristic_polynomial_roots(self, method, rng):
        h = random_hermitian(rng, 8)
        es = eigh(h, method=method)
        roots = np.sort(np.roots(np.poly(h)).real)
        assert np.max(np.abs(es.values - roots)) < 1e-8

    def test_unitarity_and_reconstruction(self, method, rng):
        for n in (3, 7, 12):
            h = random_hermitian(rng, n)
            es = eigh(h, method=method)
            v = es.vectors
            assert np.max(np.abs(v.conj().T @ v - np.eye(n))) < 1e-10
            recon = v @ np.diag(es.values) @ v.conj().T
            assert np.max(np.abs(recon - h)) < 1e-8 * np.max(np.abs(h))

    def test_ascending_order(self, method, rng):
        es = eigh(random_hermitian(rng, 9), method=method)
        assert np.all(np.diff(es.values) >= 0.0)

    def test_deterministic(self, method, rng):
        h = random_hermitian(rng, 6)
        a = eigh(h.copy(), method=method)
        b = eigh(h.copy(), method=method)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.vectors, b.vectors)

    def test_closed_form_2x2_and_3x3(self, method, rng):
        for _ in range(15):
            a, b = rng.normal(size=2)
            z = complex(rng.normal(), rng.normal())
            h2 = np.array([[a, z], [np.conj(z), b]])
            assert np.max(np.abs(eigh(h2, method=method).values - two_level_closed_form(a, b, z))) < 1e-12
            h3 = random_hermitian(rng, 3)
            got = eigh(h3, method=method).values
            want = hermitian_3x3_closed_form(h3)
            assert np.max(np.abs(got - want)) < 1e-12 * max(1.0, np.max(np.abs(want)))

    def test_phase_convention(self, method, rng):
        es = eigh(random_hermitian(rng, 10), method=method)
        for k in range(10):
            col = es.vectors[:, k]
            pivot = col[np.argmax(np.abs(col))]
            assert pivot.imag == pytest.approx(0.0, abs=1e-12)
            assert pivot.real > 0.0


def test_rejects_non_hermitian():
    with pytest.raises(HermitianInputError):
        eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(HermitianInputError):
        eigh(np.zeros((2, 3)))


def test_jacobi_matches_lapack(rng):
    h = random_hermitian(rng, 16)
    a = eigh(h, method="lapack")
    b = jacobi_eigh(h)
    assert np.max(np.abs(a.values - b.values)) < 1e-10 * np.max(np.abs(a.values))


def test_jacobi_zero_matrix():
    values, vectors = _jacobi(np.zeros((3, 3), dtype=complex))
    assert np.array_equal(values, np.zeros(3))
    assert np.array_equal(vectors, np.eye(3))


def test_jacobi_convergence_error(rng):
    with pytest.raises(JacobiConvergenceError):
        _jacobi(random_hermitian(rng, 6), max_sweeps=0)


def test_labels_carried_through():
    import floqab

    h = floqab.build_exciton_hamiltonian(floqab.square_tetramer())
    es = eigh(h)
    assert es.labels == h.labels
    assert len(es.component(h.labels[1])) == h.dim


class TestUnitaryEigenphases:
    def test_identity(self):
        assert np.allclose(unitary_eigenphases(np.eye(5)), 0.0)

    def test_diagonal_case(self):
        u = np.diag([np.exp(1j * math.pi / 3.0), 1.0, 1.0])
        phases = unitary_eigenphases(u)
        assert np.allclose(np.sort(phases), [0.0, 0.0, math.pi / 3.0], atol=1e-12)

    def test_matrix_exponential(self, rng):
        h = random_hermitian(rng, 6)
        es = eigh(h)
        t = 0.05
        u = es.vectors @ np.diag(np.exp(-1j * es.values * t)) @ es.vectors.conj().T
        phases = unitary_eigenphases(u)
        expected = np.sort(
            np.mod(-es.values * t + math.pi, 2.0 * math.pi) - math.pi
        )
        assert np.max(np.abs(phases - expected)) < 1e-8

    def test_degenerate_phases(self, rng):
        theta = np.array([0.4, 0.4, -0.4, 1.7])
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        u = q @ np.diag(np.exp(1j * theta)) @ q.conj().T
        phases = unitary_eigenphases(u)
        expected = np.sort(theta)
        for got, want in zip(phases, expected):
            assert circ_diff(got, want) < 1e-9

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            unitary_eigenphases(1.5 * np.eye(3))

    def test_count_equals_dimension(self, rng):
        q, _ = np.linalg.qr(rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7)))
        assert len(unitary_eigenphases(q)) == 7
