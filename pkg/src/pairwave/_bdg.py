"""Block eigenproblem shared by the Riccati and excitation modules.

Everything here works in reduced coordinates, i.e. on an orthonormal basis
of the complement of the condensate, so there are no spurious null
vectors along phi.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import DegeneracyError


def fetter_matrix(h_r: np.ndarray, f_r: np.ndarray) -> np.ndarray:
    """[[h^T, -f], [f-bar, -h]] on the reduced space."""
    return np.block([[h_r.T, -f_r], [f_r.conj(), -h_r]])


def fetter_pairs(h_r: np.ndarray, f_r: np.ndarray, defect_tol: float = 1e-6):
    """Eigenpairs of the block matrix split by sign of the eigenvalue.

    Returns ``(E_plus, U, V, E_minus, Um, Vm)``.  Columns of ``U``/``V``
    are the upper and lower halves of the positive-energy eigenvectors,
    sorted ascending and normalized by ||u||^2 - ||v||^2 = 1.  The
    negative-energy vectors are returned with unit 2-norm.
    """
    n = h_r.shape[0]
    Mm = fetter_matrix(h_r, f_r)
    w, X = sla.eig(Mm)
    # a defective matrix shows up as a nearly singular eigenvector matrix
    cond = np.linalg.cond(X)
    if not np.isfinite(cond) or cond > 1.0 / defect_tol ** 2:
        raise DegeneracyError(f"block matrix looks defective (cond {cond:.3e})")
    order = np.argsort(w.real)
    w, X = w[order], X[:, order]
    pos = w.real > 0
    if pos.sum() != n:
        raise DegeneracyError("eigenvalues do not split evenly by sign")
    Ep, Xp = w[pos], X[:, pos]
    Em, Xm = w[~pos], X[:, ~pos]
    U, V = Xp[:n], Xp[n:]
    norms = np.sum(np.abs(U) ** 2, axis=0) - np.sum(np.abs(V) ** 2, axis=0)
    if np.any(norms <= 0):
        raise DegeneracyError("positive-energy vector with nonpositive norm")
    U = U / np.sqrt(norms)
    V = V / np.sqrt(norms)
    # fix the phase by the largest component of u
    for j in range(n):
        i = int(np.argmax(np.abs(U[:, j])))
        ph = abs(U[i, j]) / U[i, j]
        U[:, j] *= ph
        V[:, j] *= ph
    _rebiorthogonalize(Ep, U, V)
    return Ep, U, V, Em, Xm[:n], Xm[n:]


def _rebiorthogonalize(E, U, V, gap=1e-9):
    """Make (u, v) pairs inside nearly degenerate clusters orthonormal in
    the indefinite product <u, u'> - <v, v'>."""
    n = len(E)
    j = 0
    while j < n:
        stop = j + 1
        while stop < n and abs(E[stop] - E[stop - 1]) < gap:
            stop += 1
        if stop - j > 1:
            sl = slice(j, stop)
            G = U[:, sl].conj().T @ U[:, sl] - V[:, sl].conj().T @ V[:, sl]
            L = np.linalg.cholesky(0.5 * (G + G.conj().T))
            T = np.linalg.inv(L).conj().T
            U[:, sl] = U[:, sl] @ T
            V[:, sl] = V[:, sl] @ T
        j = stop


def kernel_from_pairs(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """k with k-bar = -V U^{-1} (reduced coordinates)."""
    kbar = -np.linalg.solve(U.T, V.T).T
    return kbar.conj()
