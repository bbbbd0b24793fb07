"""Occupation-number bases and many-body operators on truncated Fock spaces."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from ..errors import DimensionMismatch, SizeCapExceeded
from . import _backend

DIM_CAP = 20_000


@dataclass(frozen=True, eq=False)
class FockSector:
    """Basis of a truncated bosonic Fock space over ``m`` modes.

    With ``capped`` false this is the fixed-N sector (mode 0 is the
    condensate mode).  With ``capped`` true it is the union of all sectors
    with total occupation <= N; it is stored with an extra leading slack
    mode so that every operator is assembled by the same kernel.
    """

    m: int
    N: int
    capped: bool
    states: np.ndarray = field(repr=False)
    _ext: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    @property
    def totals(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def occupation(self, mode: int) -> np.ndarray:
        return self.states[:, mode]

    def index(self, state) -> int:
        state = np.asarray(state, dtype=np.int64)
        if self.capped:
            state = np.concatenate([[self.N - state.sum()], state])
        return _backend.get("python").rank_state(state, self.N)

    def basis_vector(self, state) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(state)] = 1.0
        return v

    # -- operator assembly -------------------------------------------------

    def _shift(self):
        return 1 if self.capped else 0

    def operator(self, A=None, C=None, backend=None) -> np.ndarray:
        """sum A[p,q] a+_p a_q + sum C[p,q,r,s] a+_p a+_q a_r a_s over physical modes."""
        m, s = self.m, self._shift()
        me = m + s
        Ae = np.zeros((me, me), dtype=complex)
        Ce = np.zeros((me,) * 4, dtype=complex)
        if A is not None:
            A = np.asarray(A)
            if A.shape != (m, m):
                raise DimensionMismatch(f"quadratic block must be {m}x{m}")
            Ae[s:, s:] = A
        if C is not None:
            C = np.asarray(C)
            if C.shape != (m,) * 4:
                raise DimensionMismatch(f"quartic block must have shape {(m,) * 4}")
            Ce[s:, s:, s:, s:] = C
        return _backend.assemble(self._ext, self.N, Ae, Ce, self.capped, backend)

    def _slack_op(self, A=None, C=None, backend=None):
        """Operators in the extended (slack) indexing; capped spaces only."""
        me = self.m + 1
        Ae = np.zeros((me, me), dtype=complex) if A is None else np.asarray(A, dtype=complex)
        Ce = np.zeros((me,) * 4, dtype=complex) if C is None else np.asarray(C, dtype=complex)
        return _backend.assemble(self._ext, self.N, Ae, Ce, True, backend)

    def creation(self, coeffs) -> np.ndarray:
        """sum_p c_p a+_p on a capped space (truncated at the cap)."""
        self._need_capped()
        A = np.zeros((self.m + 1, self.m + 1), dtype=complex)
        A[1:, 0] = coeffs
        return self._slack_op(A)

    def annihilation(self, coeffs) -> np.ndarray:
        """sum_p c_p a_p on a capped space."""
        self._need_capped()
        A = np.zeros((self.m + 1, self.m + 1), dtype=complex)
        A[0, 1:] = coeffs
        return self._slack_op(A)

    def ladder(self, mode: int) -> np.ndarray:
        e = np.zeros(self.m)
        e[mode] = 1.0
        return self.annihilation(e)

    def pair_creation(self, B) -> np.ndarray:
        """sum B[p,q] a+_p a+_q on a capped space."""
        self._need_capped()
        C = np.zeros((self.m + 1,) * 4, dtype=complex)
        C[1:, 1:, 0, 0] = B
        return self._slack_op(C=C)

    def pair_annihilation(self, B) -> np.ndarray:
        """sum B[p,q] a_p a_q on a capped space."""
        self._need_capped()
        C = np.zeros((self.m + 1,) * 4, dtype=complex)
        C[0, 0, 1:, 1:] = B
        return self._slack_op(C=C)

    def _need_capped(self):
        if not self.capped:
            raise DimensionMismatch("this operator changes the particle number; use a capped space")

    def interior(self, margin: int = 1) -> np.ndarray:
        """Boolean mask of states at least ``margin`` below the cap."""
        return self.totals <= self.N - margin


def sector_dim(m: int, N: int, capped: bool = False) -> int:
    return comb(N + m, m) if capped else comb(N + m - 1, m - 1)


@lru_cache(maxsize=64)
def _build(m: int, N: int, capped: bool) -> FockSector:
    me = m + 1 if capped else m
    ext = _backend.get("python").enumerate_states(me, N)
    ext.setflags(write=False)
    states = ext[:, 1:] if capped else ext
    return FockSector(m=m, N=N, capped=capped, states=states, _ext=ext)


def enumerate_sector(m: int, N: int, capped: bool = False) -> FockSector:
    """Occupation basis of the N-particle sector (or the capped union)."""
    if m < 1 or N < 0:
        raise ValueError("need m >= 1 and N >= 0")
    if not capped and m < 2:
        raise ValueError("a sector needs the condensate mode and at least one other")
    if sector_dim(m, N, capped) > DIM_CAP:
        raise SizeCapExceeded(f"dimension {sector_dim(m, N, capped)} exceeds {DIM_CAP}")
    return _build(int(m), int(N), bool(capped))


def ccr_residual(m: int, N: int) -> float:
    """max |[a_i, a+_j] - delta_ij| over states of total <= N, using cap N+1."""
    sp = enumerate_sector(m, N + 1, capped=True)
    inside = sp.interior(1)
    worst = 0.0
    a = [sp.ladder(i) for i in range(m)]
    for i in range(m):
        for j in range(m):
            comm = a[i] @ a[j].conj().T - a[j].conj().T @ a[i]
            target = np.eye(sp.dim) if i == j else 0.0
            d = (comm - target)[:, inside]
            worst = max(worst, float(np.abs(d).max()))
            comm2 = a[i] @ a[j] - a[j] @ a[i]
            worst = max(worst, float(np.abs(comm2[:, inside]).max()))
    return worst


def block_offdiag_norm(op: np.ndarray, totals: np.ndarray) -> float:
    """Largest matrix element connecting different total occupations."""
    mask = totals[:, None] != totals[None, :]
    return float(np.abs(op[mask]).max()) if mask.any() else 0.0
