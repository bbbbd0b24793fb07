"""Quadratic-model kernels h, f and gamma, the projector off the condensate,
and the spectral-gap check that the pair-kernel solvers rely on."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .condensate import CondensateSolution
from .errors import GapConditionViolated
from .spectral import (Kernel, SpectralBasis, TrapModel, assemble_kinetic_trap,
                       grid_to_operator, interaction_on_grid, weighted_density)


@dataclass(frozen=True)
class QuadraticModel:
    """Kernels of the quadratic Hamiltonian in the Hermite basis.

    ``h`` and ``gamma`` are Hermitian, ``f`` is complex symmetric and
    ``proj`` is the orthogonal projector onto the complement of ``phi``.
    Plain numpy arrays are stored; bilinear kernels like ``f`` act on
    coefficient vectors without conjugation, so ``f(a, b) = a @ f @ b``.
    """

    h: np.ndarray
    f: np.ndarray
    gamma: np.ndarray
    proj: np.ndarray
    phi: np.ndarray
    E_H: float
    mu: float
    N: int
    eps: np.ndarray
    hartree_potential: np.ndarray  # grid values of N (v * |phi|^2)

    @property
    def M(self) -> int:
        return self.h.shape[0]

    @property
    def h_perp(self) -> np.ndarray:
        return self.proj @ self.h @ self.proj

    @property
    def f_perp(self) -> np.ndarray:
        return self.proj @ self.f @ self.proj.T

    def perp_basis(self) -> np.ndarray:
        """Orthonormal columns spanning the range of ``proj`` (M x (M-1))."""
        return perp_basis(self.phi)

    def scaled(self, f_factor: float) -> "QuadraticModel":
        """Copy with ``f`` multiplied by a constant (for stress tests)."""
        return QuadraticModel(self.h, f_factor * self.f, self.gamma, self.proj,
                              self.phi, self.E_H, self.mu, self.N, self.eps,
                              self.hartree_potential)


def perp_basis(phi) -> np.ndarray:
    phi = np.asarray(phi)
    M = phi.size
    # the last M-1 columns of a full QR with phi first span phi-perp
    q, _ = np.linalg.qr(np.column_stack([phi, np.eye(M, dtype=phi.dtype)]),
                        mode="complete")
    basis = q[:, 1:M]
    # drop any residual overlap with phi
    basis = basis - np.outer(phi, phi.conj() @ basis)
    q2, _ = np.linalg.qr(basis)
    return q2


def projector(phi) -> np.ndarray:
    phi = np.asarray(phi)
    return np.eye(phi.size) - np.outer(phi, phi.conj())


def project_perp(A, phi) -> np.ndarray:
    """delta_hat A delta_hat with delta_hat = I - phi phi^dagger."""
    P = projector(phi)
    return P @ np.asarray(A) @ P


def build_model(sol: CondensateSolution, model: TrapModel,
                basis: SpectralBasis) -> QuadraticModel:
    phi = np.asarray(sol.phi)
    N = model.N
    eps = assemble_kinetic_trap(basis, model.omega).entries
    vt = interaction_on_grid(basis, model.g, model.sigma)
    B = basis.eval_table
    amp = B @ phi  # sqrt(w_q) phi(x_q)
    conv = vt @ weighted_density(basis, phi)
    left = B * amp[:, None]
    right_conj = B * amp.conj()[:, None]
    gamma = left.T @ vt @ right_conj
    f = N * (left.T @ vt @ left)
    gamma = 0.5 * (gamma + gamma.conj().T)
    f = 0.5 * (f + f.T)
    hartree = N * grid_to_operator(basis, conv).entries
    h = eps + hartree + N * gamma - sol.mu * np.eye(basis.M)
    h = 0.5 * (h + h.conj().T)
    return QuadraticModel(h=h, f=f, gamma=gamma, proj=projector(phi), phi=phi,
                          E_H=sol.E_H, mu=sol.mu, N=N, eps=eps,
                          hartree_potential=N * conv)


def _pair_form(qm, e):
    """h(e-bar, e) and f(e-bar, e-bar) for a coefficient vector e."""
    he = float(np.real(np.vdot(e, qm.h @ e)))
    fe = complex(e.conj() @ qm.f @ e.conj())
    return he, fe


def gap_exact(qm: QuadraticModel) -> float:
    """min over unit e in phi-perp of h(e-bar, e) - |f(e-bar, e-bar)|.

    Rotating the phase of e turns |f| into Re f, so the minimum is the
    lowest eigenvalue of the real quadratic form on (e, e-bar).
    """
    Qb = qm.perp_basis()
    hr = Qb.conj().T @ qm.h @ Qb
    fr = Qb.conj().T @ qm.f @ Qb.conj()
    big = np.block([[hr, -fr], [-fr.conj(), hr.conj()]])
    return float(np.linalg.eigvalsh(0.5 * (big + big.conj().T))[0])


@dataclass(frozen=True)
class GapReport:
    c_estimate: float
    certificate: float
    c_exact: float


def check_gap_condition(qm: QuadraticModel, restarts: int = 16, iters: int = 200,
                        seed: int = 0, force: bool = False) -> GapReport:
    """Estimate the gap constant by projected descent on the unit sphere.

    Each restart uses its own generator derived from ``seed``.  The
    certificate lambda_min(h_perp) - sigma_max(f_perp) is a lower bound on
    the true minimum.
    """
    P = qm.proj
    hp = qm.h_perp
    Qb = qm.perp_basis()
    lam_min = float(np.linalg.eigvalsh(Qb.conj().T @ qm.h @ Qb)[0])
    smax = float(np.linalg.norm(qm.f_perp, 2))
    certificate = lam_min - smax
    hnorm = max(float(np.linalg.norm(hp, 2)), 1e-12)
    step = 0.5 / (hnorm + smax)
    best = np.inf
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    for ss in seeds:
        rng = np.random.default_rng(ss)
        e = P @ (rng.standard_normal(qm.M) + 1j * rng.standard_normal(qm.M))
        e /= np.linalg.norm(e)
        for _ in range(iters):
            he, fe = _pair_form(qm, e)
            grad = qm.h @ e
            if abs(fe) > 0:
                grad = grad - (np.conj(fe) / abs(fe)) * (qm.f @ e.conj())
            grad = P @ grad
            grad -= np.real(np.vdot(e, grad)) * e
            e = e - step * grad
            e = P @ e
            e /= np.linalg.norm(e)
        he, fe = _pair_form(qm, e)
        best = min(best, he - abs(fe))
    rep = GapReport(c_estimate=float(best), certificate=certificate,
                    c_exact=gap_exact(qm))
    if rep.c_estimate <= 0 and not force:
        raise GapConditionViolated(
            f"gap condition fails: estimate {rep.c_estimate:.6g}",
            c_estimate=rep.c_estimate, certificate=certificate)
    return rep


def depletion_bound_report(qm: QuadraticModel, c: float | None = None) -> dict:
    """Size of the pair term relative to N and to the gap."""
    if c is None:
        c = gap_exact(qm)
    fhs = float(np.linalg.norm(qm.f))
    smax = float(np.linalg.norm(qm.f_perp, 2))
    return {"N": int(qm.N), "f_hs_over_N": fhs / qm.N,
            "fperp_over_c": smax / c if c > 0 else float("inf")}
