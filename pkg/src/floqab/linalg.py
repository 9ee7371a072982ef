"""Dense complex-Hermitian eigensolvers and unitary eigenphase extraction.

``eigh`` validates its input, diagonalizes (LAPACK by default, with a
self-contained cyclic Jacobi backend as an alternative and cross-check)
and applies a deterministic eigenvector phase convention: the largest-
magnitude component of each column is made real and positive.  All
dimensions in this package are small (<= a few hundred), so robustness
beats asymptotic speed.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import LabeledHermitian

__all__ = [
    "HermitianInputError",
    "JacobiConvergenceError",
    "EigenSystem",
    "eigh",
    "jacobi_eigh",
    "unitary_eigenphases",
]


class HermitianInputError(ValueError):
    """Input matrix is not Hermitian within tolerance."""


class JacobiConvergenceError(RuntimeError):
    """Jacobi sweeps failed to reach the off-diagonal threshold."""

    def __init__(self, off_norm: float, sweeps: int):
        super().__init__(
            f"Jacobi did not converge in {sweeps} sweeps (off-diagonal norm {off_norm:.3e})"
        )
        self.off_norm = off_norm


@dataclass(eq=False)
class EigenSystem:
    """Spectral decomposition: ``values`` ascending (cm^-1), eigenvectors as
    the columns of ``vectors``, basis ``labels`` carried from the input."""

    values: np.ndarray
    vectors: np.ndarray
    labels: tuple | None = None

    @property
    def dim(self) -> int:
        return len(self.values)

    def label_index(self, label) -> int:
        if self.labels is None:
            raise KeyError("eigensystem carries no labels")
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"label {label} not in basis") from None

    def component(self, label) -> np.ndarray:
        """Amplitudes <label|v_k> for every eigenvector, as a 1-d array."""
        return self.vectors[self.label_index(label), :]


def _validated_matrix(h) -> tuple[np.ndarray, tuple | None]:
    if isinstance(h, LabeledHermitian):
        return h.entries.copy(), h.labels
    a = np.array(h, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise HermitianInputError(f"expected a square matrix, got shape {a.shape}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    defect = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if defect > 1e-10 * max(scale, 1e-300):
        raise HermitianInputError(f"Hermiticity defect {defect:.3e} at scale {scale:.3e}")
    return a, None


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column real positive
    (first such index on ties), fixing the eigenvector gauge deterministically."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col)))
        pivot = col[idx]
        mag = abs(pivot)
        if mag > 0.0:
            out[:, k] = col * (pivot.conjugate() / mag)
    return out


def eigh(h, method: str = "lapack") -> EigenSystem:
    """Full spectral decomposition of a Hermitian matrix.

    Parameters
    ----------
    h : LabeledHermitian or array_like
        Matrix to diagonalize; Hermiticity is checked.
    method : str
        "lapack" (numpy.linalg.eigh) or "jacobi" (cyclic complex Jacobi).

    Returns
    -------
    EigenSystem with ascending eigenvalues and phase-fixed eigenvectors;
    deterministic for bit-identical input.
    """
    a, labels = _validated_matrix(h)
    a = 0.5 * (a + a.conj().T)
    if method == "lapack":
        values, vectors = np.linalg.eigh(a)
    elif method == "jacobi":
        values, vectors = _jacobi(a)
    else:
        raise ValueError(f"unknown method {method!r}")
    return EigenSystem(values=values, vectors=_fix_phases(vectors), labels=labels)


def jacobi_eigh(h) -> EigenSystem:
    """Shorthand for ``eigh(h, method="jacobi")``."""
    return eigh(h, method="jacobi")


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def _jacobi(a: np.ndarray, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi for complex Hermitian matrices.

    Sweeps rotate out every off-diagonal pair (p, q) in a fixed order until
    the off-diagonal Frobenius norm drops below 1e-12 * ||a||_F.
    """
    n = a.shape[0]
    h = a.copy()
    v = np.eye(n, dtype=complex)
    fro = float(np.linalg.norm(h))
    if fro == 0.0 or n < 2:
        return np.real(np.diag(h)).copy(), v
    threshold = 1e-12 * fro
    converged = _off_norm(h) <= threshold
    for _ in range(max_sweeps):
        if converged:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                z = h[p, q]
                if abs(z) == 0.0:
                    continue
                # Unitary plane rotation zeroing h[p, q]:  g = [[c, s], [-conj(s), c]]
                # with s = sin(t) e^{i arg z} and 2t = atan2(2|z|, h_qq - h_pp).
                phase = z / abs(z)
                angle = 0.5 * math.atan2(2.0 * abs(z), float(h[q, q].real - h[p, p].real))
                c = math.cos(angle)
                s = math.sin(angle) * phase
                g = np.array([[c, s], [-s.conjugate(), c]])
                h[:, [p, q]] = h[:, [p, q]] @ g
                h[[p, q], :] = g.conj().T @ h[[p, q], :]
                h[p, q] = 0.0
                h[q, p] = 0.0
                h[p, p] = h[p, p].real
                h[q, q] = h[q, q].real
                v[:, [p, q]] = v[:, [p, q]] @ g
        converged = _off_norm(h) <= threshold
    else:
        raise JacobiConvergenceError(_off_norm(h), max_sweeps)
    values = np.real(np.diag(h)).copy()
    order = np.argsort(values, kind="stable")
    return values[order], v[:, order]


def unitary_eigenphases(u, tol: float = 1e-6) -> np.ndarray:
    """Eigenphases of a unitary matrix, ascending in (-pi, pi].

    The phases are recovered through a Hermitian embedding: K = (U + U^+)/2
    and S = (U - U^+)/(2i) commute for unitary U, so diagonalizing K and then
    S compressed onto each degenerate K-subspace yields a common eigenbasis;
    each phase follows from the Rayleigh quotient arg(v^+ U v).
    """
    a = np.array(u, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    defect = np.max(np.abs(a.conj().T @ a - np.eye(n)))
    if defect > tol:
        raise ValueError(f"matrix is not unitary: ||U+U - I||_max = {defect:.3e}")
    k = 0.5 * (a + a.conj().T)
    s = (a - a.conj().T) / 2.0j
    base = eigh(k)
    phases = np.empty(n)
    pos = 0
    group_tol = 1e-8 * max(1.0, float(np.max(np.abs(base.values))))
    while pos < n:
        end = pos + 1
        while end < n and base.values[end] - base.values[end - 1] <= group_tol:
            end += 1
        block = base.vectors[:, pos:end]
        if end - pos > 1:
            sub = eigh(block.conj().T @ s @ block)
            block = block @ sub.vectors
        for col in range(block.shape[1]):
            vec = block[:, col]
            phases[pos + col] = np.angle(np.vdot(vec, a @ vec))
        pos = end
    return np.sort(phases)
