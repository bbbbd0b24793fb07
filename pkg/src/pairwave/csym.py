"""Linear algebra for complex-symmetric kernels: Takagi factorization,
Hermitian square roots and norms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInput


@dataclass(frozen=True)
class TakagiDecomposition:
    """K = sum_j z_j e_j e_j^T with orthonormal columns e_j.

    ``vectors`` holds e_j as columns, ordered by |z_j| descending.  Only
    the first ``rank`` modes carry nonzero z_j.
    """

    vectors: np.ndarray
    z: np.ndarray
    rank: int

    @property
    def modes(self):
        return [(self.vectors[:, j], complex(self.z[j])) for j in range(len(self.z))]

    def reconstruct(self) -> np.ndarray:
        E = self.vectors
        return (E * self.z) @ E.T


def _phase_fix(e: np.ndarray) -> np.ndarray:
    j = int(np.argmax(np.abs(e)))
    return e * (abs(e[j]) / e[j])


def takagi(K, tol: float = 1e-10, zero_tol: float = 1e-12) -> TakagiDecomposition:
    """Takagi factorization of a complex-symmetric matrix.

    Writing K = A + iB, a vector e = a + ib with K conj(e) = s e and s >= 0
    is the same as an eigenvector (a, b) of the real symmetric matrix
    [[A, B], [B, -A]] with eigenvalue s.  Eigenvectors for distinct
    positive eigenvalues give orthonormal complex vectors even inside
    degenerate clusters, so no extra block step is needed.  Each vector
    is then rotated so its largest entry is real positive and z_j is read
    off as e_j^dagger K conj(e_j).
    """
    K = np.asarray(K, dtype=complex)
    M = K.shape[0]
    scale = max(1.0, float(np.linalg.norm(K)))
    if np.linalg.norm(K - K.T) > 1e-10 * scale:
        raise InvalidInput("takagi needs a complex-symmetric matrix")
    A, B = K.real, K.imag
    R = np.block([[A, B], [B, -A]])
    s, V = np.linalg.eigh(0.5 * (R + R.T))
    order = np.argsort(-s)
    cut = zero_tol * scale
    vecs, zs = [], []
    for idx in order[:M]:
        if s[idx] <= cut:
            break
        e = V[:M, idx] + 1j * V[M:, idx]
        e = _phase_fix(e / np.linalg.norm(e))
        vecs.append(e)
    E = np.array(vecs).T.reshape(M, len(vecs))
    if E.shape[1]:
        # clean up rounding so the columns are orthonormal to machine precision
        U, _, Vh = np.linalg.svd(E, full_matrices=False)
        E = U @ Vh
        E = np.column_stack([_phase_fix(E[:, j]) for j in range(E.shape[1])])
    rank = E.shape[1]
    if rank < M:
        # complete with an orthonormal basis of the null part
        if rank:
            P = np.eye(M) - E @ E.conj().T
        else:
            P = np.eye(M, dtype=complex)
        w, Z = np.linalg.eigh(P)
        comp = Z[:, np.argsort(-w)[:M - rank]]
        comp = np.column_stack([_phase_fix(comp[:, j]) for j in range(comp.shape[1])])
        E = np.column_stack([E, comp]) if rank else comp
    z = np.einsum("ij,ik,kj->j", E.conj(), K, E.conj())
    z[rank:] = 0.0
    order = np.argsort(-np.abs(z), kind="stable")
    E, z = E[:, order], z[order]
    return TakagiDecomposition(vectors=E, z=z, rank=rank)


def _hermitian_eig(A, what):
    A = np.asarray(A)
    if np.linalg.norm(A - A.conj().T) > 1e-10 * max(1.0, np.linalg.norm(A)):
        raise DomainError(f"{what}: matrix is not Hermitian")
    return np.linalg.eigh(0.5 * (A + A.conj().T))


def sqrt_psd(A) -> np.ndarray:
    w, V = _hermitian_eig(A, "sqrt_psd")
    if w.min() < -1e-12:
        raise DomainError(f"sqrt_psd: negative eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def inv_sqrt_psd(A) -> np.ndarray:
    w, V = _hermitian_eig(A, "inv_sqrt_psd")
    if w.min() <= 1e-10:
        raise DomainError(f"inv_sqrt_psd: eigenvalue {w.min():.3e} too small")
    return (V / np.sqrt(w)) @ V.conj().T


def op_norm(K) -> float:
    return float(np.linalg.norm(np.asarray(K), 2))


def hs_norm(K) -> float:
    return float(np.linalg.norm(np.asarray(K)))
