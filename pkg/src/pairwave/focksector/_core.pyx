# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled occupation-basis kernels; same interface as ``_core_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def enumerate_states(int m, int N):
    from ._core_py import enumerate_states as _py
    return _py(m, N)


cdef cnp.int64_t[:, ::1] _binom_table(int n):
    cdef cnp.int64_t[:, ::1] t = np.zeros((n + 1, n + 1), dtype=np.int64)
    cdef int i, j
    for i in range(n + 1):
        t[i, 0] = 1
        for j in range(1, i + 1):
            t[i, j] = t[i - 1, j - 1] + (t[i - 1, j] if j <= i - 1 else 0)
    return t


cdef inline Py_ssize_t _rank(cnp.int64_t* st, int m, int N,
                             cnp.int64_t[:, ::1] binom) nogil:
    cdef Py_ssize_t idx = 0
    cdef int i, k, R = N, n
    for i in range(m - 1):
        k = m - i - 1
        n = <int>st[i]
        if R - n - 1 >= 0:
            idx += binom[R - n - 1 + k, k]
        R -= n
    return idx


def rank_state(state, int N):
    cdef cnp.int64_t[::1] st = np.ascontiguousarray(state, dtype=np.int64)
    cdef int m = st.shape[0]
    cdef cnp.int64_t[:, ::1] binom = _binom_table(N + m)
    return int(_rank(&st[0], m, N, binom))


cdef inline double _op(cnp.int64_t* st, int mode, int kind, bint slack) nogil:
    cdef cnp.int64_t n = st[mode]
    cdef double amp = 1.0
    if kind < 0:
        if n == 0:
            return 0.0
        if not (slack and mode == 0):
            amp = sqrt(<double>n)
        st[mode] = n - 1
    else:
        if not (slack and mode == 0):
            amp = sqrt(<double>(n + 1))
        st[mode] = n + 1
    return amp


def assemble(const cnp.int64_t[:, ::1] states, int N, A, C, bint slack):
    cdef Py_ssize_t dim = states.shape[0]
    cdef int m = states.shape[1]
    cdef double complex[:, ::1] Av = np.ascontiguousarray(A, dtype=complex)
    cdef double complex[:, :, :, ::1] Cv = np.ascontiguousarray(C, dtype=complex)
    out_arr = np.zeros((dim, dim), dtype=complex)
    cdef double complex[:, ::1] out = out_arr
    cdef cnp.int64_t[:, ::1] binom = _binom_table(N + m)
    # gather nonzero terms once
    qi = [(p, q) for p in range(m) for q in range(m) if A[p, q] != 0]
    ci = [(p, q, r, s) for p in range(m) for q in range(m) for r in range(m)
          for s in range(m) if C[p, q, r, s] != 0]
    cdef cnp.int64_t[:, ::1] qidx = np.array(qi, dtype=np.int64).reshape(-1, 2)
    cdef cnp.int64_t[:, ::1] cidx = np.array(ci, dtype=np.int64).reshape(-1, 4)
    cdef Py_ssize_t nq = qidx.shape[0], nc = cidx.shape[0]
    cdef cnp.int64_t[::1] st = np.zeros(m, dtype=np.int64)
    cdef Py_ssize_t col, t, row
    cdef int i, p, q, r, s
    cdef double amp
    with nogil:
        for col in range(dim):
            for t in range(nq):
                p = <int>qidx[t, 0]
                q = <int>qidx[t, 1]
                for i in range(m):
                    st[i] = states[col, i]
                amp = _op(&st[0], q, -1, slack)
                if amp == 0.0:
                    continue
                amp *= _op(&st[0], p, 1, slack)
                row = _rank(&st[0], m, N, binom)
                out[row, col] = out[row, col] + Av[p, q] * amp
            for t in range(nc):
                p = <int>cidx[t, 0]
                q = <int>cidx[t, 1]
                r = <int>cidx[t, 2]
                s = <int>cidx[t, 3]
                for i in range(m):
                    st[i] = states[col, i]
                amp = _op(&st[0], s, -1, slack)
                if amp == 0.0:
                    continue
                amp *= _op(&st[0], r, -1, slack)
                if amp == 0.0:
                    continue
                amp *= _op(&st[0], q, 1, slack)
                amp *= _op(&st[0], p, 1, slack)
                row = _rank(&st[0], m, N, binom)
                out[row, col] = out[row, col] + Cv[p, q, r, s] * amp
    return out_arr
