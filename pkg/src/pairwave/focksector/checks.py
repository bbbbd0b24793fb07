"""Many-body checks on small Fock spaces.

Mode 0 is the condensate.  Modes 1..m-1 span the invariant subspace of
h_ph generated by the lowest m-1 eigenvectors omega_j; an orthonormal
basis of that span is used, so h_ph restricted to it has exactly the
eigenvalues E_1..E_{m-1}.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from math import factorial, prod, sqrt

import numpy as np

from .. import _bdg
from ..errors import DimensionMismatch, ResonanceError
from ..excitations import ExcitationSet, build_hph
from ..model import QuadraticModel
from .sector import FockSector, enumerate_sector

# ----------------------------------------------------------------------------
# one-particle blocks in the truncated mode set


@dataclass(frozen=True)
class ModeBlocks:
    """One-particle kernels re-expressed on the orthonormal sub-basis B."""

    B: np.ndarray          # M x (m-1), columns orthonormal, inside phi-perp
    E: np.ndarray          # E_1..E_{m-1}
    w: np.ndarray          # coordinates of omega_j in B (columns)
    hph: np.ndarray        # B^H h_ph B
    h: np.ndarray          # B^H h B
    f_cc: np.ndarray       # kernel of f(a*, a*):  B^H f conj(B)
    fbar_aa: np.ndarray    # kernel of f-bar(a, a): B^T f-bar B


def mode_blocks(qm: QuadraticModel, k, ex: ExcitationSet, m: int) -> ModeBlocks:
    n = m - 1
    if n > len(ex.E):
        raise DimensionMismatch(f"need {n} excitation modes, have {len(ex.E)}")
    om = ex.omega[:, :n]
    B, _ = np.linalg.qr(om)
    # keep the columns close to omega_j (fixes the QR sign freedom)
    sgn = np.sign(np.real(np.sum(B.conj() * om, axis=0)))
    sgn[sgn == 0] = 1.0
    B = B * sgn
    hph = build_hph(qm, k)
    return ModeBlocks(
        B=B, E=np.real(ex.E[:n]), w=B.conj().T @ om,
        hph=B.conj().T @ hph @ B, h=B.conj().T @ qm.h @ B,
        f_cc=B.conj().T @ qm.f @ B.conj(), fbar_aa=B.T @ qm.f.conj() @ B)


def _embed_quadratic(m, block):
    A = np.zeros((m, m), dtype=complex)
    A[1:, 1:] = block
    return A


def _pair_lower(m, block):
    """C with C[0,0,i,j] = block[i,j]: a+_0 a+_0 a_i a_j."""
    C = np.zeros((m,) * 4, dtype=complex)
    C[0, 0, 1:, 1:] = block
    return C


def _pair_raise(m, block):
    """C with C[i,j,0,0] = block[i,j]: a+_i a+_j a_0 a_0."""
    C = np.zeros((m,) * 4, dtype=complex)
    C[1:, 1:, 0, 0] = block
    return C


# ----------------------------------------------------------------------------
# H_ph and the spectral equality


def build_Hph_fock(sector: FockSector, hph_block, fbar_block, N: int | None = None,
                   pair_coeff: float | None = None) -> np.ndarray:
    """h_ph(a*, a) + c (a_0*)^2 f-bar(a, a) on the N-particle sector; c = 1/N by default."""
    m = sector.m
    if np.shape(hph_block) != (m - 1, m - 1) or np.shape(fbar_block) != (m - 1, m - 1):
        raise DimensionMismatch("one-particle blocks do not match the sector")
    N = sector.N if N is None else N
    c = 1.0 / N if pair_coeff is None else pair_coeff
    return sector.operator(_embed_quadratic(m, hph_block), _pair_lower(m, c * np.asarray(fbar_block)))


def combinatorial_sums(E, N: int) -> np.ndarray:
    """All sums of at most N energies drawn with repetition from E, sorted."""
    E = np.asarray(E)
    out = [0.0]
    for n in range(1, N + 1):
        out.extend(sum(E[list(c)]) for c in combinations_with_replacement(range(len(E)), n))
    return np.sort(np.array(out))


@dataclass(frozen=True)
class SectorSpectrumReport:
    m: int
    N: int
    max_deviation: float
    max_imag: float
    nonnormality: float
    block_offdiag: float
    passed: bool


def theorem2_check(qm: QuadraticModel, k, ex: ExcitationSet, m: int, N: int,
                   tol: float = 1e-8) -> SectorSpectrumReport:
    sec = enumerate_sector(m, N)
    mb = mode_blocks(qm, k, ex, m)
    H = build_Hph_fock(sec, mb.hph, mb.fbar_aa)
    w = np.linalg.eigvals(H)
    got = np.sort(w.real)
    expected = combinatorial_sums(mb.E, N)
    dev = float(np.abs(got - expected).max())
    imag = float(np.abs(w.imag).max())
    nn = float(np.linalg.norm(H @ H.conj().T - H.conj().T @ H))
    # H_ph may lower N_perp by two but never raises it; report the raising part
    raise_mask = sec.occupation(0)[:, None] < sec.occupation(0)[None, :]
    off = float(np.abs(H[raise_mask]).max()) if raise_mask.any() else 0.0
    return SectorSpectrumReport(m=m, N=N, max_deviation=dev, max_imag=imag,
                          nonnormality=nn, block_offdiag=off,
                          passed=bool(dev < tol and imag < tol))


# ----------------------------------------------------------------------------
# upper-triangular eigenvector construction


@dataclass(frozen=True)
class ConstructedState:
    vector: np.ndarray
    energy: float
    residual: float
    selection: tuple


def level_factor(N: int, n: int) -> float:
    """Matrix element of (a_0*)^2 / N between condensate numbers N-n-2 and N-n.

    Equals sqrt((N-n)(N-n-1)) / N for the level with n noncondensate
    particles, as follows from the ladder algebra.
    """
    return sqrt((N - n) * (N - n - 1)) / N


def construct_eigenvector(qm: QuadraticModel, k, ex: ExcitationSet, m: int, N: int,
                          selection) -> ConstructedState:
    """Eigenvector of H_ph on the N-sector whose top level is prod_p a*(omega_{j_p}).

    ``selection`` is a sequence of 1-based mode labels (repeats allowed),
    of length n <= N.  Lower levels follow from solving the triangular
    system level by level: removing the pair (l, m) from a product state
    carries the factor 2 f-bar(omega_l, omega_m) and the energy
    denominator is the total energy removed so far.
    """
    sel = tuple(int(j) for j in selection)
    n = len(sel)
    if n > N:
        raise ValueError("selection larger than the particle number")
    if any(j < 1 or j > m - 1 for j in sel):
        raise ValueError(f"mode labels must lie in 1..{m - 1}")
    mb = mode_blocks(qm, k, ex, m)
    E_sel = np.array([mb.E[j - 1] for j in sel])
    for a, b in combinations(range(n), 2):
        if abs(E_sel[a] + E_sel[b]) <= 1e-10:
            raise ResonanceError(f"E_{sel[a]} + E_{sel[b]} vanishes")
    E_tot = float(E_sel.sum())
    W = [mb.w[:, j - 1] for j in sel]
    pair = np.array([[W[a] @ mb.fbar_aa @ W[b] for b in range(n)] for a in range(n)])

    coeffs = {frozenset(range(n)): 1.0 + 0j}
    levels = [dict(coeffs)]
    current = coeffs
    while True:
        size = len(next(iter(current)))
        if size < 2:
            break
        nxt: dict = {}
        amp = level_factor(N, size - 2)
        for R, c in current.items():
            for a, b in combinations(sorted(R), 2):
                Rp = R - {a, b}
                nxt[Rp] = nxt.get(Rp, 0.0) + c * amp * 2.0 * pair[a, b]
        for Rp in nxt:
            removed = E_tot - sum(E_sel[list(Rp)])
            if abs(removed) <= 1e-10:
                raise ResonanceError("vanishing energy denominator")
            nxt[Rp] /= removed
        levels.append(nxt)
        current = nxt

    sec = enumerate_sector(m, N)
    hops = []
    for j in range(n):
        A = np.zeros((m, m), dtype=complex)
        A[1:, 0] = W[j]
        hops.append(sec.operator(A))
    vac = np.zeros(sec.dim, dtype=complex)
    vac[0] = 1.0  # (N, 0, ..., 0)
    psi = np.zeros(sec.dim, dtype=complex)
    for lvl in levels:
        for R, c in lvl.items():
            v = vac
            for j in sorted(R):
                v = hops[j] @ v
            norm = sqrt(factorial(N) / factorial(N - len(R)))
            psi += c * v / norm
    H = build_Hph_fock(sec, mb.hph, mb.fbar_aa)
    res = float(np.linalg.norm(H @ psi - E_tot * psi) / np.linalg.norm(psi))
    return ConstructedState(vector=psi, energy=E_tot, residual=res, selection=sel)


# ----------------------------------------------------------------------------
# projector identities


def _poly_P(n: int, x: np.ndarray) -> np.ndarray:
    """P_n(x) = ((-1)^n / n!) prod_{j=1..n} (x - j)."""
    out = np.ones_like(x, dtype=float)
    for j in range(1, n + 1):
        out = out * (x - j)
    return (-1) ** n / factorial(n) * out


def verify_projector_lemmas(m: int, N: int) -> dict:
    """Residuals of the number-projector identities on the capped space.

    Reported entries:
      display_polynomial  sum_n ((-1)^N/(N-n)!) a*^{N-n} P_{n,n} a^{N-n} minus the
                          polynomial form sum_n ((-1)^{N-n}/((N-n)! n!)) prod_{p != N-n}(N_phi - p)
      display_sign        the same sum minus (-1)^N times the projector onto F_N
      resolution          sum_n U_n* U_n minus the projector onto F_N
      orthogonality       max over (m', n) of |U_m' U_n* - delta P_{n,n}|
      n_phi               max over n of |N_phi U_n* - (N-n) U_n*|
    """
    sp = enumerate_sector(m, N, capped=True)
    tot = sp.totals
    nphi = sp.occupation(0).astype(float)
    a = np.real(sp.ladder(0))
    ad = a.T
    inN = tot == N

    def restrict(op, rows, cols):
        return op[np.ix_(rows, cols)]

    def Pnn(n):
        return np.diag(np.where(tot == n, _poly_P(n, nphi), 0.0))

    def mpow(A, p):
        return np.linalg.matrix_power(A, p) if p else np.eye(A.shape[0])

    lhs = np.zeros((sp.dim, sp.dim))
    for n in range(N + 1):
        lhs += ((-1) ** N / factorial(N - n)) * mpow(ad, N - n) @ Pnn(n) @ mpow(a, N - n)
    poly = np.zeros(sp.dim)
    for n in range(N + 1):
        term = np.ones(sp.dim)
        for p in range(N + 1):
            if p != N - n:
                term = term * (nphi - p)
        poly += (-1) ** (N - n) / (factorial(N - n) * factorial(n)) * term
    lhs_N = restrict(lhs, inN, inN)
    poly_N = np.diag(poly[inN])
    I_N = np.eye(int(inN.sum()))

    U = {}
    for n in range(N + 1):
        full = Pnn(n) @ mpow(a, N - n) / sqrt(factorial(N - n))
        U[n] = restrict(full, tot == n, inN)
    resolution = sum(U[n].T @ U[n] for n in range(N + 1)) - I_N
    orth = 0.0
    nphi_res = 0.0
    for n in range(N + 1):
        Pn = np.diag(_poly_P(n, nphi[tot == n]))
        for mm in range(N + 1):
            target = Pn if mm == n else 0.0
            orth = max(orth, float(np.abs(U[mm] @ U[n].T - target).max(initial=0.0)))
        Ustar = U[n].T
        nphi_res = max(nphi_res, float(np.abs(np.diag(nphi[inN]) @ Ustar - (N - n) * Ustar).max(initial=0.0)))
    return {
        "display_polynomial": float(np.abs(lhs_N - poly_N).max()),
        "display_sign": float(np.abs(lhs_N - (-1) ** N * I_N).max()),
        "resolution": float(np.abs(resolution).max()),
        "orthogonality": orth,
        "n_phi": nphi_res,
    }


# ----------------------------------------------------------------------------
# exact conjugation by e^W and the quadratic approximation


def _nilpotent_exp(W: np.ndarray, max_power: int) -> np.ndarray:
    out = np.eye(W.shape[0], dtype=complex)
    term = np.eye(W.shape[0], dtype=complex)
    for p in range(1, max_power + 1):
        term = term @ W / p
        out = out + term
    return out


def submodel(qm: QuadraticModel, k, ex: ExcitationSet, m: int):
    """Blocks of the truncated model and its own principal pair kernel."""
    mb = mode_blocks(qm, k, ex, m)
    Et, U, V, *_ = _bdg.fetter_pairs(mb.h, mb.f_cc)
    kt = _bdg.kernel_from_pairs(U, V)
    kt = 0.5 * (kt + kt.T)
    return mb, np.real(Et), U, V, kt


def conjugation_scaling_check(qm: QuadraticModel, k, ex: ExcitationSet, m: int,
                              N_list, n_eig: int = 10) -> list[dict]:
    """Compare e^W H_app e^{-W} with its quadratic approximation.

    The reported ``deviation`` is sum_i |x_i - q_i| / sum_i |q_i| over the
    ``n_eig`` lowest levels (exact x, quadratic q); the largest single
    difference is reported as ``max_abs_deviation``.

    H_app = h(a*,a) + (1/2N) f(a*,a*) a_0^2 + h.c. on the modes of
    ``mode_blocks`` (the constant N E_H is dropped on both sides).  The
    truncated model is solved for its own pair kernel k_t, and
    W = -(1/2N) k_t(a*,a*) a_0^2.  Dropping the terms that vanish when
    N_phi is replaced by N gives
    H~ = (1/2) tr(k_t f-bar) + h_ph(a*,a) + (1/2N) (a_0*)^2 f-bar(a,a),
    whose spectrum is the constant plus sums of the truncated energies.
    """
    mb, Et, U, V, kt = submodel(qm, k, ex, m)
    hph_t = mb.h + kt @ mb.f_cc.conj()
    const = 0.5 * np.trace(kt @ mb.f_cc.conj())
    rows = []
    for N in N_list:
        sec = enumerate_sector(m, N)
        H_app = sec.operator(_embed_quadratic(m, mb.h),
                             _pair_raise(m, mb.f_cc / (2 * N)) + _pair_lower(m, mb.fbar_aa / (2 * N)))
        W = sec.operator(None, _pair_raise(m, -kt / (2 * N)))
        p = N // 2 + 1
        nil = float(np.abs(np.linalg.matrix_power(W, p)).max())
        Htil = _nilpotent_exp(W, p) @ H_app @ _nilpotent_exp(-W, p)
        exact = np.sort(np.linalg.eigvals(Htil).real)[:n_eig]
        quad = (const.real + combinatorial_sums(Et, N))[:n_eig]
        Hq = sec.operator(_embed_quadratic(m, hph_t), _pair_lower(m, mb.fbar_aa / (2 * N)))
        quad_dense = np.sort(np.linalg.eigvals(Hq).real + const.real)[:n_eig]
        rows.append({
            "N": int(N),
            "deviation": float(np.abs(exact - quad).sum() / np.abs(quad).sum()),
            "max_abs_deviation": float(np.abs(exact - quad).max()),
            "quadratic_dense_vs_sums": float(np.abs(quad_dense - quad).max()),
            "nilpotency": nil,
            "similarity": float(np.abs(np.sort(np.linalg.eigvalsh(0.5 * (H_app + H_app.conj().T)))[:n_eig] - exact).max()),
        })
    return rows


# ----------------------------------------------------------------------------
# Bogoliubov Hamiltonian on a capped space


def bogoliubov_gap_check(qm: QuadraticModel, k, ex: ExcitationSet, m: int,
                         N_cap: int, n_gaps: int = 4) -> dict:
    mb, Et, U, V, _ = submodel(qm, k, ex, m)
    sp = enumerate_sector(m - 1, N_cap, capped=True)
    H = (sp.operator(mb.h) + 0.5 * sp.pair_creation(mb.f_cc)
         + 0.5 * sp.pair_annihilation(mb.fbar_aa))
    w = np.linalg.eigvalsh(0.5 * (H + H.conj().T))
    gaps = w[1:n_gaps + 1] - w[0]
    expected = combinatorial_sums(Et, 3)[1:n_gaps + 1]
    # quasiparticle operators gamma_j = sum conj(u) a + conj(v) a*
    gam = [sp.annihilation(U[:, j].conj()) + sp.creation(V[:, j].conj())
           for j in range(U.shape[1])]
    inside = sp.interior(2)
    ccr = 0.0
    for i, gi in enumerate(gam):
        for j, gj in enumerate(gam):
            c1 = gi @ gj.conj().T - gj.conj().T @ gi - (np.eye(sp.dim) if i == j else 0.0)
            c2 = gi @ gj - gj @ gi
            ccr = max(ccr, float(np.abs(c1[:, inside]).max()), float(np.abs(c2[:, inside]).max()))
    return {
        "N_cap": int(N_cap),
        "gaps": gaps.tolist(),
        "expected": expected.tolist(),
        "truncation_error": float(np.abs(gaps - expected).max()),
        "lowest_gap_rel_error_full": float(abs(gaps[0] - ex.E[0]) / ex.E[0]),
        "lowest_gap_rel_error_sub": float(abs(gaps[0] - Et[0]) / Et[0]),
        "ccr": ccr,
    }


# ----------------------------------------------------------------------------
# depletion


def depletion_diagnostic(psi, sector: FockSector, l: int = 1) -> float:
    """<psi| N_perp^l |psi> / N^l for the N-particle sector."""
    if not 1 <= l <= 4:
        raise ValueError("l must be between 1 and 4")
    psi = np.asarray(psi)
    nperp = (sector.N - sector.occupation(0)).astype(float)
    p = np.abs(psi) ** 2
    p = p / p.sum()
    return float(p @ nperp ** l / sector.N ** l)


def ground_state_depletion(qm: QuadraticModel, k, ex: ExcitationSet, m: int, N: int,
                           l: int = 1) -> float:
    """Depletion of e^{-W} applied to the pure condensate (truncated model)."""
    mb, Et, U, V, kt = submodel(qm, k, ex, m)
    sec = enumerate_sector(m, N)
    W = sec.operator(None, _pair_raise(m, -kt / (2 * N)))
    psi = _nilpotent_exp(-W, N // 2 + 1)[:, 0]
    return depletion_diagnostic(psi, sec, l)
