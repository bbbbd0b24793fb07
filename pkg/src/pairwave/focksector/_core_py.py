"""Pure-Python occupation-basis kernels (fallback for the compiled core).

States are rows of an integer array, ordered reverse-lexicographically so
that index 0 is (N, 0, ..., 0).  When ``slack`` is true, mode 0 is a
bookkeeping mode whose ladder operators carry no square-root factors; this
turns a capped union of sectors into a single fixed-total sector.
"""
from __future__ import annotations

from math import comb, sqrt

import numpy as np


def enumerate_states(m: int, N: int) -> np.ndarray:
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + [remaining])
            return
        for v in range(remaining, -1, -1):
            rec(prefix + [v], remaining - v, slots - 1)

    rec([], N, m)
    return np.array(out, dtype=np.int64).reshape(-1, m)


def rank_state(state, N: int) -> int:
    """Position of ``state`` in the reverse-lexicographic order."""
    m = len(state)
    idx = 0
    R = N
    for i in range(m - 1):
        k = m - i - 1
        n = int(state[i])
        if R - n - 1 >= 0:
            idx += comb(R - n - 1 + k, k)
        R -= n
    return idx


def _apply(state, ops, slack):
    """Apply ladder ops (mode, +1 create / -1 annihilate) right to left."""
    amp = 1.0
    for mode, kind in reversed(ops):
        n = state[mode]
        if kind < 0:
            if n == 0:
                return 0.0
            if not (slack and mode == 0):
                amp *= sqrt(n)
            state[mode] = n - 1
        else:
            if not (slack and mode == 0):
                amp *= sqrt(n + 1)
            state[mode] = n + 1
    return amp


def assemble(states, N, A, C, slack):
    """Dense matrix of sum A[p,q] a+_p a_q + sum C[p,q,r,s] a+_p a+_q a_r a_s."""
    dim, m = states.shape
    out = np.zeros((dim, dim), dtype=complex)
    quad = [(p, q, A[p, q]) for p in range(m) for q in range(m) if A[p, q] != 0]
    quart = [(p, q, r, s, C[p, q, r, s]) for p in range(m) for q in range(m)
             for r in range(m) for s in range(m) if C[p, q, r, s] != 0]
    for col in range(dim):
        base = [int(x) for x in states[col]]
        for p, q, c in quad:
            st = list(base)
            amp = _apply(st, [(p, 1), (q, -1)], slack)
            if amp:
                out[rank_state(st, N), col] += c * amp
        for p, q, r, s, c in quart:
            st = list(base)
            amp = _apply(st, [(p, 1), (q, 1), (r, -1), (s, -1)], slack)
            if amp:
                out[rank_state(st, N), col] += c * amp
    return out
