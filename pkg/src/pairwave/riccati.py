"""Energy functional of the pair kernel, its gradient, and three solvers for
the Riccati equation h k + k h^T + f + k f-bar k = lambda (x)_s phi.

Conventions: kernels are dense matrices in the Hermite basis.  A pair
kernel ``k`` is complex symmetric and satisfies ``k @ conj(phi) = 0``.
Bilinear evaluations such as f(e-bar, e-bar) are ``conj(e) @ f @ conj(e)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from . import _bdg
from .csym import TakagiDecomposition, op_norm, takagi
from .errors import (ConvergenceFailure, DegenerateBasis, InvalidInput,
                     OutOfDomain, PerModeGapViolated)
from .model import QuadraticModel

SQRT2 = np.sqrt(2.0)
CLAMP = 1.0 - 1e-6


@dataclass(frozen=True)
class PairKernel:
    k: np.ndarray
    op_norm: float
    takagi: TakagiDecomposition
    solver_tag: str
    riccati_residual: float
    lam: np.ndarray
    energy: float = float("nan")
    trace: list = field(default_factory=list, repr=False)


# ----------------------------------------------------------------------------
# reduced coordinates on the complement of phi

def _reduce_op(Qb, A):
    return Qb.conj().T @ A @ Qb


def _reduce_pair(Qb, k):
    return Qb.conj().T @ k @ Qb.conj()


def _lift_pair(Qb, kr):
    return Qb @ kr @ Qb.T


def constrain(k, qm: QuadraticModel) -> np.ndarray:
    """Symmetrize and project so that k conj(phi) = 0 on both sides."""
    k = 0.5 * (k + k.T)
    return qm.proj @ k @ qm.proj.T


# ----------------------------------------------------------------------------
# functional, gradient, Riccati kernel

def ric(k, qm: QuadraticModel) -> np.ndarray:
    """Ric(k) = h k + k h^T + f + k f-bar k."""
    h, f = qm.h, qm.f
    return h @ k + k @ h.T + f + k @ f.conj() @ k


def _check_domain(k):
    nk = op_norm(k)
    if nk >= 1.0:
        raise OutOfDomain(f"operator norm {nk:.6g} is not below 1")
    return nk


def energy_functional(k, qm: QuadraticModel, check: bool = True) -> float:
    """tr{(1 - k-bar k)^{-1} (k-bar h k + f k-bar / 2 + f-bar k / 2)}."""
    k = np.asarray(k)
    if check:
        _check_domain(k)
    kb = k.conj()
    inner = kb @ qm.h @ k + 0.5 * kb @ qm.f + 0.5 * qm.f.conj() @ k
    val = np.trace(np.linalg.solve(np.eye(k.shape[0]) - kb @ k, inner))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise AssertionError(f"energy has imaginary part {val.imag:.3e}")
    return float(val.real)


def energy_gradient(k, qm: QuadraticModel, check: bool = True) -> np.ndarray:
    """Derivative of the functional with respect to k-bar.

    Along a symmetric direction l the real directional derivative is
    2 Re sum(conj(l) * grad).
    """
    k = np.asarray(k)
    if check:
        _check_domain(k)
    I = np.eye(k.shape[0])
    kb = k.conj()
    left = np.linalg.solve(I - k @ kb, ric(k, qm))
    g = 0.5 * np.linalg.solve((I - kb @ k).T, left.T).T
    return 0.5 * (g + g.T)


def lagrange_multiplier(k, qm: QuadraticModel) -> np.ndarray:
    """lambda = sqrt2 {N (k gamma^T)(x, phi-bar) + f(x, phi-bar) - f(phi-bar, phi-bar) phi / 2}."""
    phib = qm.phi.conj()
    f_pp = phib @ qm.f @ phib
    return SQRT2 * (qm.N * (k @ qm.gamma.T @ phib) + qm.f @ phib - 0.5 * f_pp * qm.phi)


def lagrange_multiplier_alt(k, qm: QuadraticModel) -> np.ndarray:
    """C1 phi + sqrt2 (k h^T + f)(x, phi-bar), with C1 fixed by the phi-phi component."""
    phib = qm.phi.conj()
    rest = SQRT2 * ((k @ qm.h.T + qm.f) @ phib)
    # C1 = -<phi-bar, lambda> and <phi-bar, rest> = sqrt2 f(phi-bar, phi-bar)
    c1 = -0.5 * (qm.phi.conj() @ rest)
    return c1 * qm.phi + rest


def riccati_residual(k, lam, qm: QuadraticModel) -> float:
    phi = qm.phi
    sym = (np.outer(lam, phi) + np.outer(phi, lam)) / SQRT2
    return float(np.linalg.norm(ric(k, qm) - sym))


def pack_kernel(k, qm: QuadraticModel, tag: str = "given") -> PairKernel:
    """Wrap a kernel with its Takagi data, multiplier and residual."""
    return _pack(np.asarray(k, dtype=complex), qm, tag)


def _pack(k, qm, tag, trace=(), energy=None) -> PairKernel:
    k = 0.5 * (k + k.T)
    lam = lagrange_multiplier(k, qm)
    nk = op_norm(k)
    if energy is None:
        energy = energy_functional(k, qm) if nk < 1 else float("nan")
    return PairKernel(k=k, op_norm=nk, takagi=takagi(k), solver_tag=tag,
                      riccati_residual=riccati_residual(k, lam, qm), lam=lam,
                      energy=energy, trace=list(trace))


# ----------------------------------------------------------------------------
# per-mode algebra

def mode_roots(h_ee: float, f_ee: complex):
    """Roots of the per-mode stationarity condition.

    With ``f_ee = f(e-bar, e-bar)`` the condition on z is
    2 h z + f_ee + conj(f_ee) z^2 = 0.  The root inside the unit disk is
    returned first, in the cancellation-free form -f_ee / (h + s).
    """
    h_ee = float(h_ee)
    a = complex(f_ee)
    if not h_ee > abs(a):
        raise PerModeGapViolated(f"need h > |f|, got h={h_ee}, |f|={abs(a)}")
    s = np.sqrt(h_ee * h_ee - abs(a) ** 2)
    zp = -a / (h_ee + s)
    zm = -(h_ee + s) / np.conj(a) if a != 0 else complex(np.inf)
    return complex(zp), complex(zm)


def mode_F(h_ee: float, f_ee: complex) -> float:
    """F(e) = h - sqrt(h^2 - |f|^2), written to avoid cancellation."""
    a2 = abs(f_ee) ** 2
    return float(a2 / (h_ee + np.sqrt(max(h_ee * h_ee - a2, 0.0))))


def pair_form(qm: QuadraticModel, e):
    he = float(np.real(np.vdot(e, qm.h @ e)))
    fe = complex(e.conj() @ qm.f @ e.conj())
    return he, fe


def mode_identity_residuals(pk: PairKernel, qm: QuadraticModel, count=None):
    """(h + k f-bar)(e-bar_j, e_j) - sqrt(h^2 - |f|^2) over the Takagi modes."""
    E = pk.takagi.vectors
    n = pk.takagi.rank if count is None else count
    hph = qm.h + pk.k @ qm.f.conj()
    out = []
    for j in range(n):
        e = E[:, j]
        he, fe = pair_form(qm, e)
        lhs = np.vdot(e, hph @ e)
        out.append(abs(lhs - np.sqrt(he * he - abs(fe) ** 2)))
    return np.array(out)


def functional_from_modes(pk: PairKernel, qm: QuadraticModel) -> float:
    """-1/2 sum_j F(e_j) over the Takagi frame of k."""
    return -0.5 * sum(mode_F(*pair_form(qm, e)) for e in perp_frame(pk, qm).T)


def perp_frame(pk: PairKernel, qm: QuadraticModel) -> np.ndarray:
    """Takagi vectors of k completed to an orthonormal basis of phi-perp."""
    E = pk.takagi.vectors[:, : pk.takagi.rank]
    Qb = qm.perp_basis().astype(complex)
    rest = Qb - E @ (E.conj().T @ Qb)
    w, Z = np.linalg.eigh(rest @ rest.conj().T)
    extra = Z[:, np.argsort(-w)[: Qb.shape[1] - E.shape[1]]]
    return np.column_stack([E, extra])


# ----------------------------------------------------------------------------
# solver 1: projected descent on the functional

def _sylvester_inverse(hr_w, hr_V, R):
    """Solve h X + X h^T = R for symmetric R given h = V diag(w) V^H."""
    Y = hr_V.conj().T @ R @ hr_V.conj()
    Y = Y / (hr_w[:, None] + hr_w[None, :])
    return hr_V @ Y @ hr_V.T


def solve_riccati_variational(qm: QuadraticModel, tol: float = 1e-8,
                              max_iter: int = 500, step: float = 1.0,
                              k0=None, newton_switch: float = 1e-5) -> PairKernel:
    """Minimize the energy functional over symmetric k with k conj(phi) = 0.

    Each step moves along the gradient preconditioned by the map
    X -> h X + X h^T (positive on the complement of phi), with Armijo
    backtracking.  Iterates are symmetrized, projected and clamped to
    operator norm 1 - 1e-6.

    Near the minimizer the energy changes by less than its rounding error
    long before the Riccati residual reaches a tight ``tol``, so once the
    residual is below ``newton_switch`` the iterate is finished with
    Newton steps on the stationarity condition.  The Newton result is kept
    only if it lowers the residual and stays inside the unit ball;
    otherwise descent continues.  ``newton_switch=0`` disables this.
    """
    Qb = qm.perp_basis()
    hr = _reduce_op(Qb, qm.h)
    w, V = np.linalg.eigh(0.5 * (hr + hr.conj().T))
    if w[0] <= 0:
        raise InvalidInput("h is not positive on the complement of phi")
    if k0 is None:
        fp = constrain(qm.f, qm)
        k = -0.5 * fp / max(1.0, 2.0 * op_norm(fp))
    else:
        k = constrain(np.asarray(k0, dtype=complex), qm)
    k = _clamp(k)
    energy = energy_functional(k, qm)
    res = riccati_residual(k, lagrange_multiplier(k, qm), qm)
    trace = [(0, energy, res)]
    stall = 0
    for it in range(1, max_iter + 1):
        if res < tol:
            break
        if res < newton_switch:
            k2 = constrain(_newton_polish(qm, k, tol), qm)
            r2 = riccati_residual(k2, lagrange_multiplier(k2, qm), qm)
            if r2 < res and op_norm(k2) < 1.0:
                k, res = k2, r2
                energy = energy_functional(k, qm)
                trace.append((it, energy, res))
                if res < tol:
                    break
            newton_switch = 0.0
        G = constrain(energy_gradient(k, qm), qm)
        Gr = _reduce_pair(Qb, G)
        D = _lift_pair(Qb, -2.0 * _sylvester_inverse(w, V, Gr))
        slope = 2.0 * float(np.real(np.vdot(D, G)))
        t = step
        while True:
            cand = _clamp(constrain(k + t * D, qm))
            e_c = energy_functional(cand, qm)
            if e_c <= energy + 1e-4 * t * slope:
                break
            # below rounding the energy cannot resolve progress
            if abs(e_c - energy) <= 64 * np.finfo(float).eps * max(1.0, abs(energy)):
                break
            t *= 0.5
            if t < 1e-12:
                raise ConvergenceFailure("line search failed", residual=res, trace=trace)
        rel = abs(e_c - energy) / max(1.0, abs(energy))
        k, energy = cand, e_c
        new_res = riccati_residual(k, lagrange_multiplier(k, qm), qm)
        stall = stall + 1 if (rel < 1e-12 and new_res >= res) else 0
        res = new_res
        trace.append((it, energy, res))
        if stall >= 5:
            break
    if res >= tol:
        raise ConvergenceFailure(
            f"variational solver stopped at residual {res:.3e}", residual=res, trace=trace)
    return _pack(k, qm, "variational", trace, energy)


def _clamp(k):
    nk = op_norm(k)
    if nk > CLAMP:
        k = k * (CLAMP / nk)
    return k


# ----------------------------------------------------------------------------
# solver 2: mode-by-mode maximization of F

def _F_and_grad(qm, e):
    he, a = pair_form(qm, e)
    s = np.sqrt(max(he * he - abs(a) ** 2, 1e-300))
    F = abs(a) ** 2 / (he + s)
    he_vec = qm.h @ e
    fe_vec = qm.f @ e.conj()
    grad = (1.0 - he / s) * he_vec + (np.conj(a) / s) * fe_vec
    return F, grad


def _F_batch(qm, X):
    """F and its conjugate gradient for each column of X."""
    HX = qm.h @ X
    FX = qm.f @ X.conj()
    he = np.real(np.sum(X.conj() * HX, axis=0))
    a = np.sum(X.conj() * FX, axis=0)
    s = np.sqrt(np.maximum(he * he - np.abs(a) ** 2, 1e-300))
    F = np.abs(a) ** 2 / (he + s)
    G = (1.0 - he / s) * HX + (np.conj(a) / s) * FX
    return F, G


def _maximize_F(qm, P, rng, restarts, iters):
    """Projected ascent of F on the unit sphere of range(P), all restarts at once.

    Every restart keeps its own step length, grown after an accepted step
    and halved after a rejected one.
    """
    M = qm.M
    X = P @ (rng.standard_normal((M, restarts)) + 1j * rng.standard_normal((M, restarts)))
    X /= np.linalg.norm(X, axis=0)
    F, G = _F_batch(qm, X)
    t = np.full(restarts, 1.0 / max(1.0, float(np.linalg.norm(qm.f, 2))))
    for _ in range(iters):
        D = P @ G
        D -= np.real(np.sum(X.conj() * D, axis=0)) * X
        Y = P @ (X + t * D)
        Y /= np.linalg.norm(Y, axis=0)
        Fy, Gy = _F_batch(qm, Y)
        ok = Fy >= F
        X[:, ok], F[ok], G[:, ok] = Y[:, ok], Fy[ok], Gy[:, ok]
        t = np.where(ok, 1.5 * t, 0.5 * t)
    # ties go to the first restart that reached the best value
    j = int(np.argmax(F >= F.max() - 1e-14))
    return X[:, j], float(F[j])


def _frame_ascent(qm, E, iters=200, tol=1e-12):
    """Rotate a complete orthonormal frame of phi-perp to increase sum_j F(e_j)."""
    n = E.shape[1]

    def total(E):
        return sum(_F_and_grad(qm, E[:, j])[0] for j in range(n))

    cur = total(E)
    t = 1.0 / max(1.0, float(np.linalg.norm(qm.h, 2)))
    for _ in range(iters):
        G = np.column_stack([_F_and_grad(qm, E[:, j])[1] for j in range(n)])
        A = E.conj().T @ G
        X = 0.5 * (A - A.conj().T)
        if np.linalg.norm(X) < tol:
            break
        while t > 1e-14:
            cand = E @ sla.expm(t * X)
            val = total(cand)
            if val >= cur:
                E, cur = cand, val
                t *= 1.5
                break
            t *= 0.5
        else:
            break
    return E


def _newton_polish(qm, k, tol, max_iter=30):
    """Newton iteration on the Riccati equation restricted to phi-perp."""
    Qb = qm.perp_basis()
    hr = _reduce_op(Qb, qm.h)
    fr = _reduce_pair(Qb, qm.f)
    kr = _reduce_pair(Qb, k)
    for _ in range(max_iter):
        hph = hr + kr @ fr.conj()
        R = hr @ kr + kr @ hr.T + fr + kr @ fr.conj() @ kr
        if np.linalg.norm(R) < 0.1 * tol:
            break
        dk = sla.solve_sylvester(hph, hph.T, -R)
        kr = kr + 0.5 * (dk + dk.T)
    return _lift_pair(Qb, kr)


def solve_riccati_greedy(qm: QuadraticModel, n_modes: int | None = None,
                         restarts: int = 16, iters: int = 200, seed: int = 0,
                         tol: float = 1e-8, refine: bool = True) -> PairKernel:
    """Build k = sum_j z_j e_j e_j^T one mode at a time.

    Each e_j maximizes F(e) = h - sqrt(h^2 - |f|^2) over unit vectors
    orthogonal to phi and to the modes already found, and z_j is the root
    of the per-mode condition inside the unit disk.  Mode-by-mode
    maximization alone does not maximize the sum of F over the frame when
    modes are coupled, so by default the frame is then rotated to increase
    sum_j F and the result is polished with Newton steps on the Riccati
    equation.
    """
    M = qm.M
    if n_modes is None:
        n_modes = M - 1
    rng = np.random.default_rng(seed)
    P = qm.proj.astype(complex)
    vecs, zs = [], []
    for _ in range(n_modes):
        e, F = _maximize_F(qm, P, rng, restarts, iters)
        he, a = pair_form(qm, e)
        zp, _ = mode_roots(he, a)
        if abs(zp) < 1e-10:
            break
        vecs.append(e)
        zs.append(zp)
        P = P - np.outer(e, e.conj())
    trace = [(j + 1, float("nan"), abs(zs[j])) for j in range(len(zs))]
    if not vecs:
        return _pack(np.zeros((M, M), dtype=complex), qm, "greedy", trace)
    if not refine:
        E = np.column_stack(vecs)
        return _pack((E * np.array(zs)) @ E.T, qm, "greedy", trace)
    # complete the frame inside phi-perp and refine it
    E = np.column_stack(vecs)
    Qb = qm.perp_basis().astype(complex)
    rest = Qb - E @ (E.conj().T @ Qb)
    u, s, _ = np.linalg.svd(rest, full_matrices=False)
    E = np.column_stack([E, u[:, : M - 1 - E.shape[1]]])
    E = _frame_ascent(qm, E)
    z = []
    for j in range(E.shape[1]):
        he, a = pair_form(qm, E[:, j])
        z.append(mode_roots(he, a)[0])
    k = (E * np.array(z)) @ E.T
    k = _newton_polish(qm, constrain(k, qm), tol)
    return _pack(constrain(k, qm), qm, "greedy", trace)


# ----------------------------------------------------------------------------
# solver 3: from the positive-energy eigenvectors of the block system

def solve_riccati_bdg(qm: QuadraticModel, excitations=None) -> PairKernel:
    """k-bar = -V U^{-1} from the (u_j, v_j) pairs with E_j > 0.

    ``excitations`` may be an ExcitationSet; without it the block system
    is solved directly, which does not need a pair kernel.
    """
    Qb = qm.perp_basis()
    if excitations is not None:
        if np.any(np.asarray(excitations.E) <= 0):
            raise InvalidInput("all excitation energies must be positive")
        U = Qb.conj().T @ excitations.u
        V = Qb.T @ excitations.v
    else:
        hr = _reduce_op(Qb, qm.h)
        fr = _reduce_pair(Qb, qm.f)
        _, U, V, *_ = _bdg.fetter_pairs(hr, fr)
    if np.linalg.cond(U) > 1e12:
        raise DegenerateBasis("matrix of u vectors is singular")
    kr = _bdg.kernel_from_pairs(U, V)
    asym = float(np.linalg.norm(kr - kr.T))
    if asym > 1e-8:
        raise AssertionError(f"k from the block system is not symmetric ({asym:.3e})")
    return _pack(_lift_pair(Qb, 0.5 * (kr + kr.T)), qm, "bdg")


# ----------------------------------------------------------------------------
# saddle branches

def flip_branch(pk: PairKernel, indices, qm: QuadraticModel) -> PairKernel:
    """Critical point with the selected excitation branches reversed.

    ``indices`` are 1-based excitation labels (ascending E_j of the
    principal solution).  For each selected j the pair (u_j, v_j) is
    replaced by its partner (conj v_j, conj u_j) with energy -E_j and the
    kernel is rebuilt as k-bar = -V U^{-1}.
    """
    indices = sorted(set(int(i) for i in indices))
    if not indices:
        return pk
    Qb = qm.perp_basis()
    hr = _reduce_op(Qb, qm.h)
    fr = _reduce_pair(Qb, qm.f)
    kr = _reduce_pair(Qb, pk.k)
    n = hr.shape[0]
    if indices[0] < 1 or indices[-1] > n:
        raise InvalidInput(f"flip indices must lie in 1..{n}")
    E, U, V = _principal_pairs(hr, fr, kr)
    U2, V2 = U.copy(), V.copy()
    for j in indices:
        U2[:, j - 1] = V[:, j - 1].conj()
        V2[:, j - 1] = U[:, j - 1].conj()
    if np.linalg.cond(U2) > 1e12:
        raise DegenerateBasis("flipped branch has a singular u matrix")
    k2 = _bdg.kernel_from_pairs(U2, V2)
    k2 = _lift_pair(Qb, 0.5 * (k2 + k2.T))
    # the saddle kernel is large, so tighten it with Newton steps
    k2 = constrain(_newton_polish(qm, k2, 1e-12, max_iter=5), qm)
    out = _pack(k2, qm, "saddle")
    return replace(out, trace=[("flipped", tuple(indices))])


def _principal_pairs(hr, fr, kr):
    """(E, u, v) of h_ph = h + k f-bar in reduced coordinates, v = -k-bar u."""
    n = hr.shape[0]
    A = np.eye(n) - kr @ kr.conj()
    wA, VA = np.linalg.eigh(0.5 * (A + A.conj().T))
    S = (VA * np.sqrt(wA)) @ VA.conj().T
    Si = (VA / np.sqrt(wA)) @ VA.conj().T
    kappa = Si @ (hr + kr @ fr.conj()) @ S
    E, eta = np.linalg.eigh(0.5 * (kappa + kappa.conj().T))
    U = Si @ eta
    V = -kr.conj() @ U
    return E, U, V
