# cython: language_level=3
"""Compiled hot kernels. Signatures match ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, fabs, INFINITY

cnp.import_array()

NUM_ACTIONS = 5


cdef void _q_row(const double[::1] rewards, const cnp.int64_t[:, ::1] succ,
                 double d, double gamma, const double[::1] v, Py_ssize_t s,
                 double* out) noexcept nogil:
    cdef Py_ssize_t a, na = succ.shape[1]
    cdef double shared = 0.0
    for a in range(na):
        shared += v[succ[s, a]]
    shared *= (1.0 - d) / na
    for a in range(na):
        out[a] = rewards[s] + gamma * (d * v[succ[s, a]] + shared)


def q_values(rewards, succ, double d, double gamma, v):
    cdef const double[::1] r = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef const cnp.int64_t[:, ::1] sc = np.ascontiguousarray(succ, dtype=np.int64)
    cdef const double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = sc.shape[0], na = sc.shape[1], s
    q = np.empty((n, na), dtype=np.float64)
    cdef double[:, ::1] qv = q
    with nogil:
        for s in range(n):
            _q_row(r, sc, d, gamma, vv, s, &qv[s, 0])
    return q


def value_iteration(rewards, succ, double d, double gamma, double tol, long max_iters):
    cdef const double[::1] r = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef const cnp.int64_t[:, ::1] sc = np.ascontiguousarray(succ, dtype=np.int64)
    cdef Py_ssize_t n = sc.shape[0], na = sc.shape[1], s, a
    v_arr = np.zeros(n, dtype=np.float64)
    w_arr = np.zeros(n, dtype=np.float64)
    q_arr = np.empty(na, dtype=np.float64)
    cdef double[::1] v = v_arr
    cdef double[::1] w = w_arr
    cdef double[::1] q = q_arr
    cdef double best, delta = INFINITY
    cdef long it = 0
    with nogil:
        while it < max_iters:
            it += 1
            delta = 0.0
            for s in range(n):
                _q_row(r, sc, d, gamma, v, s, &q[0])
                best = q[0]
                for a in range(1, na):
                    if q[a] > best:
                        best = q[a]
                w[s] = best
                if fabs(best - v[s]) > delta:
                    delta = fabs(best - v[s])
            for s in range(n):
                v[s] = w[s]
            if delta < tol:
                break
    return v_arr, it, delta


def lmdp_power_iteration(neg_cost, indptr, indices, log_p, double tol, long max_iters):
    cdef const double[::1] g = np.ascontiguousarray(neg_cost, dtype=np.float64)
    cdef const cnp.int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int64_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] lp = np.ascontiguousarray(log_p, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0], s, k
    v_arr = np.zeros(n, dtype=np.float64)
    w_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] v = v_arr
    cdef double[::1] w = w_arr
    cdef double m, acc, x, top, delta = INFINITY
    cdef long it = 0
    with nogil:
        while it < max_iters:
            it += 1
            top = -INFINITY
            for s in range(n):
                m = -INFINITY
                for k in range(ptr[s], ptr[s + 1]):
                    x = lp[k] + v[idx[k]]
                    if x > m:
                        m = x
                acc = 0.0
                for k in range(ptr[s], ptr[s + 1]):
                    acc += exp(lp[k] + v[idx[k]] - m)
                w[s] = g[s] + m + log(acc)
                if w[s] > top:
                    top = w[s]
            delta = 0.0
            for s in range(n):
                x = w[s] - top
                if fabs(x - v[s]) > delta:
                    delta = fabs(x - v[s])
                v[s] = x
            if delta < tol:
                break
    return v_arr, it, delta


def log_matmul(a, b):
    cdef const double[:, ::1] A = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, ::1] BT = np.ascontiguousarray(np.asarray(b, dtype=np.float64).T)
    cdef Py_ssize_t n = A.shape[0], m = A.shape[1], p = BT.shape[0], i, j, k
    out = np.empty((n, p), dtype=np.float64)
    cdef double[:, ::1] C = out
    cdef double peak, acc, t
    with nogil:
        for i in range(n):
            for j in range(p):
                peak = -INFINITY
                for k in range(m):
                    t = A[i, k] + BT[j, k]
                    if t > peak:
                        peak = t
                if peak == -INFINITY:
                    C[i, j] = -INFINITY
                    continue
                acc = 0.0
                for k in range(m):
                    t = A[i, k] + BT[j, k]
                    if t > -INFINITY:
                        acc += exp(t - peak)
                C[i, j] = peak + log(acc)
    return out


def feedforward(inputs, long num_nodes, eval_nodes, is_sigmoid, indptr, src, weights, long out_node):
    cdef const double[:, ::1] x = np.ascontiguousarray(inputs, dtype=np.float64)
    cdef const cnp.int64_t[::1] ev = np.ascontiguousarray(eval_nodes, dtype=np.int64)
    cdef const cnp.uint8_t[::1] sig = np.ascontiguousarray(is_sigmoid, dtype=np.uint8)
    cdef const cnp.int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int64_t[::1] sr = np.ascontiguousarray(src, dtype=np.int64)
    cdef const double[::1] wt = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n_rows = x.shape[0], n_in = x.shape[1], i, j, k, e
    values_arr = np.zeros(num_nodes, dtype=np.float64)
    out_arr = np.empty(n_rows, dtype=np.float64)
    cdef double[::1] values = values_arr
    cdef double[::1] out = out_arr
    cdef double acc
    with nogil:
        for i in range(n_rows):
            for j in range(n_in):
                values[j] = x[i, j]
            for k in range(ev.shape[0]):
                acc = 0.0
                for e in range(ptr[k], ptr[k + 1]):
                    acc += wt[e] * values[sr[e]]
                if sig[k]:
                    acc = 1.0 / (1.0 + exp(-4.9 * acc))
                values[ev[k]] = acc
            out[i] = values[out_node]
    return out_arr
