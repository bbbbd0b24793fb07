"""Self-consistent Hartree ground state of the trapped gas."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure
from .spectral import (SpectralBasis, TrapModel, assemble_kinetic_trap,
                       grid_to_operator, interaction_on_grid,
                       weighted_density)


@dataclass(frozen=True)
class CondensateSolution:
    phi: np.ndarray
    mu: float
    E_H: float
    residual: float
    iterations: int
    N: int
    trace: list = field(default_factory=list, repr=False)


def _sign_normalize(phi: np.ndarray) -> np.ndarray:
    phi = phi / np.linalg.norm(phi)
    # remove the global phase, then fix the sign by the largest entry
    j = int(np.argmax(np.abs(phi)))
    phi = phi * (abs(phi[j]) / phi[j])
    if np.allclose(phi.imag, 0.0, atol=1e-14):
        phi = phi.real.copy()
    return phi


def _pieces(basis: SpectralBasis, model: TrapModel):
    eps = assemble_kinetic_trap(basis, model.omega).entries
    vt = interaction_on_grid(basis, model.g, model.sigma)
    return eps, vt


def hartree_operator(phi, model: TrapModel, basis: SpectralBasis, eps=None, vt=None):
    """H_H = eps + N (v * |phi|^2) as a dense matrix."""
    if eps is None or vt is None:
        eps, vt = _pieces(basis, model)
    d = weighted_density(basis, phi)
    return eps + model.N * grid_to_operator(basis, vt @ d).entries


def _interaction_term(phi, basis, vt):
    d = weighted_density(basis, phi)
    return float(d @ vt @ d)


def hartree_energy(phi, model: TrapModel, basis: SpectralBasis, eps=None, vt=None) -> float:
    """<phi, eps phi> + (N/2) <|phi|^2, v * |phi|^2>."""
    if eps is None or vt is None:
        eps, vt = _pieces(basis, model)
    phi = np.asarray(phi)
    kin = float(np.real(np.vdot(phi, eps @ phi)))
    return kin + 0.5 * model.N * _interaction_term(phi, basis, vt)


def chemical_potential(phi, model: TrapModel, basis: SpectralBasis, eps=None, vt=None) -> float:
    """<phi, eps phi> + N <|phi|^2, v * |phi|^2>."""
    if eps is None or vt is None:
        eps, vt = _pieces(basis, model)
    phi = np.asarray(phi)
    kin = float(np.real(np.vdot(phi, eps @ phi)))
    return kin + model.N * _interaction_term(phi, basis, vt)


def _newton_finish(phi, eps, vt, basis, N, tol, residual_of, max_steps=20):
    """Newton steps on H_H[phi] phi = mu phi, |phi| = 1 (real phi).

    Returns (phi, steps) once the residual is below ``tol``, or None if
    a step fails to reduce the residual.
    """
    B = basis.eval_table
    res, mu = residual_of(phi)
    M = phi.size
    for step in range(1, max_steps + 1):
        a = B @ phi
        H = eps + N * grid_to_operator(basis, vt @ (a * a)).entries
        r = H @ phi - mu * phi
        J = H - mu * np.eye(M) + 2 * N * (B * a[:, None]).T @ vt @ (B * a[:, None])
        big = np.block([[J, -phi[:, None]], [-phi[None, :], np.zeros((1, 1))]])
        rhs = np.concatenate([-r, [0.5 * (phi @ phi - 1.0)]])
        try:
            sol = np.linalg.solve(big, rhs)
        except np.linalg.LinAlgError:
            return None
        cand = _sign_normalize(phi + sol[:M])
        new_res, new_mu = residual_of(cand)
        if not new_res < res:
            return None
        phi, res, mu = cand, new_res, new_mu
        if res < tol:
            return phi, step
    return None


def solve_hartree(model: TrapModel, basis: SpectralBasis, tol: float = 1e-10,
                  max_iter: int = 500, alpha: float = 0.5,
                  newton_switch: float = 1e-2) -> CondensateSolution:
    """Damped self-consistent field iteration for the Hartree equation.

    The iteration runs on the one-body density matrix D (a mixture of
    the iterates).  Each step diagonalizes H_H[D], takes the lowest
    eigenvector and mixes D toward its projector with factor ``alpha``.
    The Hartree energy is exactly quadratic along that segment, so the
    mix is accepted only if the energy does not rise; otherwise the exact
    minimizer on the segment is used instead.  This keeps the energy
    trace monotone and removes the oscillations of plain mixing at
    strong coupling.

    Once the residual drops below ``newton_switch`` the iteration hands
    over to Newton steps on the Hartree equation, since plain mixing can
    be unstable near the fixed point when N g is large.  Set
    ``newton_switch=0`` to use mixing alone.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    eps, vt = _pieces(basis, model)
    N = model.N
    B = basis.eval_table

    def density(D):
        return np.einsum("qm,mn,qn->q", B, D, B)

    def energy_of(D, d):
        return float(np.trace(eps @ D)) + 0.5 * N * float(d @ vt @ d)

    def residual_of(phi):
        H = eps + N * grid_to_operator(basis, vt @ weighted_density(basis, phi)).entries
        mu = float(np.real(np.vdot(phi, H @ phi)))
        return float(np.linalg.norm(H @ phi - mu * phi)), mu

    phi = np.zeros(basis.M)
    phi[0] = 1.0
    D = np.outer(phi, phi)
    dens = density(D)
    energy = energy_of(D, dens)
    res, mu = residual_of(phi)
    trace = [(0, energy, res)]
    it = 0
    slack = 1e-13
    while res >= tol:
        if res < newton_switch and np.isrealobj(phi):
            out = _newton_finish(phi, eps, vt, basis, N, tol, residual_of)
            if out is not None:
                phi, steps = out
                it += steps
                res, mu = residual_of(phi)
                D = np.outer(phi, phi)
                dens = weighted_density(basis, phi)
                trace.append((it, energy_of(D, dens), res))
                break
            newton_switch = 0.0  # Newton did not help; keep mixing
        if it >= max_iter:
            raise ConvergenceFailure(
                f"Hartree iteration did not converge in {max_iter} steps",
                residual=res, trace=trace)
        it += 1
        H = eps + N * grid_to_operator(basis, vt @ dens).entries
        w, vecs = np.linalg.eigh(H)
        phi = _sign_normalize(vecs[:, 0])
        Dc = np.outer(phi, phi)
        dd = weighted_density(basis, phi) - dens
        # directional derivative of the energy toward Dc; form Dc - D first so
        # the small difference is not lost against O(1) traces
        slope = float(np.sum(H * (Dc - D)))         # <= 0 up to rounding
        curv = 0.5 * N * float(dd @ vt @ dd)        # >= 0 for a positive-type kernel
        t = alpha
        # predicted energy change of the trial mix; changes below rounding
        # of E cannot be resolved and are accepted
        if slope * t + curv * t * t > slack * max(1.0, abs(energy)) and curv > 0:
            t = min(1.0, -slope / (2 * curv)) if slope < 0 else 0.0
        D = (1 - t) * D + t * Dc
        dens = (1 - t) * dens + t * (dd + dens)
        energy = energy_of(D, dens)
        res, mu = residual_of(phi)
        trace.append((it, energy, res))
    energy = hartree_energy(phi, model, basis, eps, vt)
    mu_closed = chemical_potential(phi, model, basis, eps, vt)
    return CondensateSolution(phi=phi, mu=mu_closed, E_H=energy, residual=res,
                              iterations=it, N=N, trace=trace)
