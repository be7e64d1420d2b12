# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: flooding q-ary BP and zigzag-cycle enumeration.

Semantics are identical to ``nbldpc._pykernels``; the test-suite checks the
two against each other.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite
from libc.string cimport memcpy, memcmp

cnp.import_array()

ctypedef cnp.int64_t i64


cdef inline void _wht(double* x, int q) noexcept nogil:
    cdef int h = 1, i, j
    cdef double a, b
    while h < q:
        i = 0
        while i < q:
            for j in range(i, i + h):
                a = x[j]
                b = x[j + h]
                x[j] = a + b
                x[j + h] = a - b
            i += 2 * h
        h *= 2


cdef inline void _xor_conv(const double* a, const double* b, double* out, int q) noexcept nogil:
    cdef int x, y
    cdef double acc
    for x in range(q):
        acc = 0.0
        for y in range(q):
            acc += a[y] * b[x ^ y]
        out[x] = acc


cdef inline void _rescale(double* x, int q) noexcept nogil:
    cdef int i
    cdef double m = x[0]
    for i in range(1, q):
        if x[i] > m:
            m = x[i]
    if m > 0:
        for i in range(q):
            x[i] = x[i] / m


cdef inline int _normalize_floor(double* x, int q, double floor) noexcept nogil:
    cdef int i
    cdef double s = 0.0
    for i in range(q):
        s += x[i]
    if not (s > 0) or not isfinite(s):
        for i in range(q):
            x[i] = 1.0 / q
        return 1
    for i in range(q):
        x[i] = x[i] / s
        if x[i] < floor:
            x[i] = floor
    s = 0.0
    for i in range(q):
        s += x[i]
    for i in range(q):
        x[i] = x[i] / s
    return 0


cdef inline void _mul(const double* a, const double* b, double* out, int q) noexcept nogil:
    cdef int i
    for i in range(q):
        out[i] = a[i] * b[i]


def bp_decode(const double[:, ::1] C, const i64[:, ::1] perm,
              const i64[::1] var_ptr, const i64[::1] chk_ptr,
              const i64[::1] chk_edges, long max_iter, double floor,
              double tie_rtol, bint direct, i64[:, ::1] trace_argmax=None,
              i64[:, ::1] trace_ties=None):
    """Flooding q-ary BP with exact periodicity detection.

    Returns ``(last_bad, D, iterations_run, period, extinctions)``.
    """
    cdef Py_ssize_t N = C.shape[0]
    cdef int q = C.shape[1]
    cdef Py_ssize_t E = perm.shape[0]
    cdef Py_ssize_t M = chk_ptr.shape[0] - 1
    cdef Py_ssize_t v, c, e, j, k, d, base, x
    cdef long it, saved_it = 0, power = 1, lam = 1, period = 0
    cdef long extinctions = 0
    cdef bint tracing = trace_argmax is not None

    dmax = 1
    for v in range(N):
        dmax = max(dmax, var_ptr[v + 1] - var_ptr[v])
    kmax = 1
    for c in range(M):
        kmax = max(kmax, chk_ptr[c + 1] - chk_ptr[c])

    phi_a = np.full((max(E, 1), q), 1.0 / q)
    saved_a = phi_a.copy()
    psi_a = np.zeros((max(E, 1), q))
    D_a = np.zeros((N, q))
    last_bad_a = np.full(N, -1, dtype=np.int64)
    pre_a = np.zeros((dmax + 1, q))
    suf_a = np.ones((dmax + 2, q))
    chk_a = np.zeros((kmax, q))
    L_a = np.zeros((kmax, q))
    R_a = np.zeros((kmax, q))
    tmp_a = np.zeros(q)

    cdef double[:, ::1] phi = phi_a
    cdef double[:, ::1] saved = saved_a
    cdef double[:, ::1] psi = psi_a
    cdef double[:, ::1] D = D_a
    cdef i64[::1] last_bad = last_bad_a
    cdef double[:, ::1] pre = pre_a
    cdef double[:, ::1] suf = suf_a
    cdef double[:, ::1] chk = chk_a
    cdef double[:, ::1] L = L_a
    cdef double[:, ::1] R = R_a
    cdef double[::1] tmp = tmp_a
    cdef size_t nbytes = E * q * sizeof(double)
    cdef double mx, s, thr
    cdef int amax, ties

    with nogil:
        it = 0
        while True:
            if it > 0:
                # variable-node update
                for v in range(N):
                    base = var_ptr[v]
                    d = var_ptr[v + 1] - base
                    if d == 0:
                        continue
                    memcpy(&pre[0, 0], &C[v, 0], q * sizeof(double))
                    for j in range(1, d):
                        _mul(&pre[j - 1, 0], &phi[base + j - 1, 0], &pre[j, 0], q)
                        _rescale(&pre[j, 0], q)
                    memcpy(&suf[d, 0], &phi[base + d - 1, 0], q * sizeof(double))
                    _rescale(&suf[d, 0], q)
                    for j in range(d - 1, 1, -1):
                        _mul(&phi[base + j - 1, 0], &suf[j + 1, 0], &suf[j, 0], q)
                        _rescale(&suf[j, 0], q)
                    for j in range(1, d + 1):
                        e = base + j - 1
                        if j == d:
                            memcpy(&psi[e, 0], &pre[j - 1, 0], q * sizeof(double))
                        else:
                            _mul(&pre[j - 1, 0], &suf[j + 1, 0], &psi[e, 0], q)
                        extinctions += _normalize_floor(&psi[e, 0], q, floor)

                # check-node update
                for c in range(M):
                    base = chk_ptr[c]
                    k = chk_ptr[c + 1] - base
                    for j in range(k):
                        e = chk_edges[base + j]
                        for x in range(q):
                            chk[j, perm[e, x]] = psi[e, x]
                    if k == 1:
                        e = chk_edges[base]
                        for x in range(q):
                            phi[e, x] = 1.0 if x == 0 else 0.0
                        continue
                    if k == 2:
                        memcpy(&L[0, 0], &chk[1, 0], q * sizeof(double))
                        memcpy(&L[1, 0], &chk[0, 0], q * sizeof(double))
                    elif not direct:
                        for j in range(k):
                            _wht(&chk[j, 0], q)
                        for x in range(q):
                            L[0, x] = 1.0
                            R[k - 1, x] = 1.0
                        for j in range(1, k):
                            _mul(&L[j - 1, 0], &chk[j - 1, 0], &L[j, 0], q)
                        for j in range(k - 2, -1, -1):
                            _mul(&R[j + 1, 0], &chk[j + 1, 0], &R[j, 0], q)
                        for j in range(k):
                            _mul(&L[j, 0], &R[j, 0], &L[j, 0], q)
                            _wht(&L[j, 0], q)
                            for x in range(q):
                                L[j, x] = L[j, x] / q
                    else:
                        for x in range(q):
                            L[0, x] = 1.0 if x == 0 else 0.0
                            R[k - 1, x] = 1.0 if x == 0 else 0.0
                        for j in range(1, k):
                            _xor_conv(&L[j - 1, 0], &chk[j - 1, 0], &L[j, 0], q)
                        for j in range(k - 2, -1, -1):
                            _xor_conv(&chk[j + 1, 0], &R[j + 1, 0], &R[j, 0], q)
                        for j in range(k):
                            _xor_conv(&L[j, 0], &R[j, 0], &tmp[0], q)
                            memcpy(&L[j, 0], &tmp[0], q * sizeof(double))
                    for j in range(k):
                        e = chk_edges[base + j]
                        for x in range(q):
                            phi[e, x] = L[j, perm[e, x]]
                        extinctions += _normalize_floor(&phi[e, 0], q, floor)

            # decision
            for v in range(N):
                base = var_ptr[v]
                d = var_ptr[v + 1] - base
                memcpy(&D[v, 0], &C[v, 0], q * sizeof(double))
                for j in range(d):
                    _mul(&D[v, 0], &phi[base + j, 0], &D[v, 0], q)
                    _rescale(&D[v, 0], q)
                s = 0.0
                for x in range(q):
                    s += D[v, x]
                mx = -1.0
                amax = 0
                for x in range(q):
                    D[v, x] = D[v, x] / s
                    if D[v, x] > mx:
                        mx = D[v, x]
                        amax = x
                thr = mx * (1.0 - tie_rtol)
                ties = 0
                for x in range(q):
                    if D[v, x] >= thr:
                        ties += 1
                if amax != 0 or ties != 1:
                    last_bad[v] = it
                if tracing:
                    trace_argmax[it, v] = amax
                    trace_ties[it, v] = ties

            if it > 0:
                if memcmp(&phi[0, 0], &saved[0, 0], nbytes) == 0:
                    period = it - saved_it
                    break
                if lam == power:
                    memcpy(&saved[0, 0], &phi[0, 0], nbytes)
                    saved_it = it
                    power *= 2
                    lam = 0
                lam += 1
            if it >= max_iter:
                break
            it += 1

    return last_bad_a, D_a, it, period, extinctions


cdef class _CycleWalker:
    cdef const i64[::1] ptr
    cdef const i64[::1] nbr
    cdef const i64[::1] var
    cdef int max_len
    cdef unsigned char[::1] onpath
    cdef i64[::1] path_c
    cdef i64[::1] path_u
    cdef i64[::1] counts
    cdef bint store
    cdef list lengths, chks, vars_

    def __init__(self, ptr, nbr, var, long n_checks, int max_len, bint store):
        self.ptr = ptr
        self.nbr = nbr
        self.var = var
        self.max_len = max_len
        self.onpath = np.zeros(max(n_checks, 1), dtype=np.uint8)
        self.path_c = np.zeros(max_len + 1, dtype=np.int64)
        self.path_u = np.zeros(max_len + 1, dtype=np.int64)
        self.counts = np.zeros(max_len + 1, dtype=np.int64)
        self.store = store
        self.lengths = []
        self.chks = []
        self.vars_ = []

    cdef void _record(self, int depth, i64 u):
        cdef int i
        self.lengths.append(depth + 1)
        for i in range(depth + 1):
            self.chks.append(self.path_c[i])
        for i in range(depth):
            self.vars_.append(self.path_u[i])
        self.vars_.append(u)

    cdef void dfs(self, i64 c0, i64 cur, int depth):
        cdef i64 k, nb, u
        self.path_c[depth] = cur
        for k in range(self.ptr[cur], self.ptr[cur + 1]):
            nb = self.nbr[k]
            u = self.var[k]
            if nb == c0:
                if depth >= 1 and self.path_u[0] < u:
                    self.counts[depth + 1] += 1
                    if self.store:
                        self._record(depth, u)
            elif nb > c0 and not self.onpath[nb] and depth + 1 < self.max_len:
                self.path_u[depth] = u
                self.onpath[nb] = 1
                self.dfs(c0, nb, depth + 1)
                self.onpath[nb] = 0

    def run(self, long n_checks):
        cdef i64 c0
        for c0 in range(n_checks):
            self.onpath[c0] = 1
            self.dfs(c0, c0, 0)
            self.onpath[c0] = 0


def count_cycles(ptr, nbr, var, long n_checks, int max_len):
    """Number of simple cycles of each length ``0..max_len``."""
    w = _CycleWalker(ptr, nbr, var, n_checks, max_len, False)
    w.run(n_checks)
    return np.asarray(w.counts)


def enumerate_cycles(ptr, nbr, var, long n_checks, int max_len):
    """``(lengths, checks_flat, vars_flat)`` of every simple cycle."""
    w = _CycleWalker(ptr, nbr, var, n_checks, max_len, True)
    w.run(n_checks)
    return (np.array(w.lengths, dtype=np.int64), np.array(w.chks, dtype=np.int64),
            np.array(w.vars_, dtype=np.int64))
