"""Excitation spectrum of h_ph = h + k f-bar, the (omega, u, v) families and
the block symplectic system.

Spectral work is done on an orthonormal basis of the complement of phi
(reduced coordinates); results are lifted back to the Hermite basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _bdg
from .csym import inv_sqrt_psd, op_norm, sqrt_psd
from .errors import OutOfDomain
from .model import QuadraticModel


def _reduce(qm, k):
    Qb = qm.perp_basis()
    hr = Qb.conj().T @ qm.h @ Qb
    fr = Qb.conj().T @ qm.f @ Qb.conj()
    kr = Qb.conj().T @ np.asarray(k) @ Qb.conj()
    return Qb, hr, fr, kr


def build_hph(qm: QuadraticModel, k) -> np.ndarray:
    """h_ph = h + k f-bar in the full basis."""
    return qm.h + np.asarray(k) @ qm.f.conj()


def hph_spectrum(qm: QuadraticModel, k) -> np.ndarray:
    """Eigenvalues of h_ph on the complement of phi, sorted by real part."""
    Qb, hr, fr, kr = _reduce(qm, k)
    w = np.linalg.eigvals(hr + kr @ fr.conj())
    return w[np.argsort(w.real, kind="stable")]


@dataclass(frozen=True)
class ExcitationSet:
    """Eigen-data of h_ph; vector families are stored as matrix columns."""

    E: np.ndarray
    omega: np.ndarray
    u: np.ndarray
    v: np.ndarray
    eta: np.ndarray
    residuals: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.E)


def excitation_spectrum(qm: QuadraticModel, k) -> ExcitationSet:
    """Diagonalize kappa = S^{-1} h_ph S with S = (1 - k k-bar)^{1/2} on phi-perp.

    kappa is Hermitian when k solves the Riccati equation; its orthonormal
    eigenvectors eta_j give omega_j = S eta_j, u_j = S^{-1} eta_j and
    v_j = -k-bar u_j.
    """
    k = np.asarray(k)
    if op_norm(k) >= 1.0:
        raise OutOfDomain("excitation_spectrum needs op_norm(k) < 1")
    Qb, hr, fr, kr = _reduce(qm, k)
    n = hr.shape[0]
    A = np.eye(n) - kr @ kr.conj()
    S = sqrt_psd(A)
    Si = inv_sqrt_psd(A)
    hph = hr + kr @ fr.conj()
    kappa = Si @ hph @ S
    herm = float(np.linalg.norm(kappa - kappa.conj().T))
    E, eta = np.linalg.eigh(0.5 * (kappa + kappa.conj().T))
    om = S @ eta
    u = Si @ eta
    v = -kr.conj() @ u
    res = {
        "kappa_hermitian": herm,
        "omega_eig": float(np.linalg.norm(hph @ om - om * E)),
        "u_eig": float(np.linalg.norm(hph.conj().T @ u - u * E)),
        "biorthogonality": float(np.linalg.norm(u.conj().T @ om - np.eye(n))),
        "completeness": float(np.linalg.norm(om.conj() @ u.T - np.eye(n))),
        "fetter_second_row": float(np.linalg.norm(fr.conj() @ u - hr @ v - v * E)),
    }
    return ExcitationSet(E=E, omega=Qb @ om, u=Qb @ u, v=Qb.conj() @ v,
                         eta=Qb @ eta, residuals=res)


@dataclass(frozen=True)
class SymplecticSystem:
    """Block matrices on phi-perp (+) phi-perp in reduced coordinates."""

    M_mat: np.ndarray
    W_mat: np.ndarray
    W_inv: np.ndarray | None
    D_mat: np.ndarray
    basis: np.ndarray  # orthonormal basis of phi-perp
    singular: bool = False

    def similarity_residual(self) -> float:
        return float(np.linalg.norm(self.D_mat @ self.W_mat - self.W_mat @ self.M_mat, 2))

    def inverse_residual(self) -> float:
        if self.W_inv is None:
            return float("nan")
        n2 = self.W_mat.shape[0]
        return float(np.linalg.norm(self.W_mat @ self.W_inv - np.eye(n2), 2))


def build_symplectic(qm: QuadraticModel, k) -> SymplecticSystem:
    Qb, hr, fr, kr = _reduce(qm, k)
    n = hr.shape[0]
    I = np.eye(n)
    Mm = _bdg.fetter_matrix(hr, fr)
    W = np.block([[I, kr], [kr.conj(), I]])
    D = np.block([[hr.T + kr @ fr.conj(), np.zeros((n, n))],
                  [np.zeros((n, n)), -hr - kr.conj() @ fr]])
    singular = op_norm(kr) >= 1.0
    Winv = None
    if not singular:
        a = np.linalg.inv(I - kr @ kr.conj())
        b = np.linalg.inv(I - kr.conj() @ kr)
        Winv = np.block([[a, -kr @ b], [-kr.conj() @ a, b]])
    return SymplecticSystem(M_mat=Mm, W_mat=W, W_inv=Winv, D_mat=D, basis=Qb,
                            singular=singular)


def untruncated_null_residual(qm: QuadraticModel) -> float:
    """|| [[h^T, -f], [f-bar, -h]] (phi, phi-bar) || on the full space."""
    phi = qm.phi
    top = qm.h.T @ phi - qm.f @ phi.conj()
    bot = qm.f.conj() @ phi - qm.h @ phi.conj()
    return float(np.linalg.norm(np.concatenate([top, bot])))


@dataclass(frozen=True)
class FetterSolution:
    E: np.ndarray
    u: np.ndarray
    v: np.ndarray
    E_minus: np.ndarray
    u_minus: np.ndarray
    v_minus: np.ndarray

    def spectrum(self) -> np.ndarray:
        w = np.concatenate([self.E_minus, self.E])
        return w[np.argsort(w.real, kind="stable")]


def solve_fetter(sys: SymplecticSystem) -> FetterSolution:
    """General eigensolve of M, split into positive and negative energies."""
    n = sys.basis.shape[1]
    hr_T = sys.M_mat[:n, :n]
    fr = -sys.M_mat[:n, n:]
    Ep, U, V, Em, Um, Vm = _bdg.fetter_pairs(hr_T.T, fr)
    Qb = sys.basis
    return FetterSolution(E=Ep, u=Qb @ U, v=Qb.conj() @ V, E_minus=Em,
                          u_minus=Qb @ Um, v_minus=Qb.conj() @ Vm)


def spectral_union_residual(qm: QuadraticModel, k) -> float:
    """Max gap between sigma(M) and sigma(h_ph) U sigma(-h_ph), sorted pairing."""
    Qb, hr, fr, kr = _reduce(qm, k)
    wm = np.linalg.eigvals(_bdg.fetter_matrix(hr, fr))
    wh = np.linalg.eigvals(hr + kr @ fr.conj())
    both = np.concatenate([wh, -wh])
    return float(np.max(np.abs(np.sort(wm.real) - np.sort(both.real))
                        + np.abs(np.sort(np.abs(wm.imag)) - np.sort(np.abs(both.imag)))))


def verify_uv_relations(u, v, k, phi) -> dict:
    """Residuals of the orthogonality, completeness and closed-sum relations.

    ``u`` and ``v`` hold the families as columns in the full basis.
    """
    u, v, k, phi = map(np.asarray, (u, v, k, phi))
    M, n = u.shape
    P = np.eye(M) - np.outer(phi, phi.conj())
    # pseudo-inverse of (P - k k-bar) on the range of P
    A = P - k @ k.conj()
    w, Z = np.linalg.eigh(0.5 * (A + A.conj().T))
    keep = np.abs(w) > 1e-12
    Ainv = (Z[:, keep] / w[keep]) @ Z[:, keep].conj().T
    return {
        "orthogonality_uv": float(np.linalg.norm(u.T @ v - v.T @ u)),
        "orthonormality": float(np.linalg.norm(u.conj().T @ u - v.conj().T @ v - np.eye(n))),
        "completeness": float(np.linalg.norm(u @ u.conj().T - v.conj() @ v.T - P)),
        "completeness_mixed": float(np.linalg.norm(u @ v.conj().T - v.conj() @ u.T)),
        "closed_sum_u": float(np.linalg.norm(u @ u.conj().T - Ainv)),
        "closed_sum_v": float(np.linalg.norm(v.conj() @ v.T - k @ k.conj() @ Ainv)),
    }


def flip_spectrum_residual(qm: QuadraticModel, k_flipped, E, indices) -> float:
    """Distance between sigma(h_ph) for a flipped kernel and the principal
    energies ``E`` with the 1-based labels in ``indices`` negated."""
    target = np.array(E, dtype=float)
    for j in set(int(i) for i in indices):
        target[j - 1] = -target[j - 1]
    w = hph_spectrum(qm, k_flipped)
    return float(np.max(np.abs(np.sort(w.real) - np.sort(target)) + np.abs(np.sort(np.abs(w.imag)))))
