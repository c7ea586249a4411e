# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; same signatures as ``_pykernels``."""
import numpy as np

from libc.math cimport cos, sin, log, hypot, floor, fabs, isnan, M_PI
from libc.stdint cimport uint64_t, int64_t

NAME = "cython"

cdef double TWO_PI = 2.0 * M_PI
cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef double EPS = 2.220446049250313e-16


cdef inline double _logabs_point(const uint64_t* u, const int64_t[:, :] exps,
                                 const double complex[:] coefs, Py_ssize_t lo, Py_ssize_t hi,
                                 double log_clip) noexcept nogil:
    cdef double re = 0.0, im = 0.0, ang, c, s, v
    cdef uint64_t ph
    cdef Py_ssize_t t, j, n = exps.shape[1]
    for t in range(lo, hi):
        ph = 0
        for j in range(n):
            ph += u[j] * <uint64_t> exps[t, j]
        ang = <double> (ph >> 11) * (INV_2_53 * TWO_PI)
        c = cos(ang)
        s = sin(ang)
        re += coefs[t].real * c - coefs[t].imag * s
        im += coefs[t].real * s + coefs[t].imag * c
    v = hypot(re, im)
    if v == 0.0:
        return log_clip
    v = log(v)
    return v if v > log_clip else log_clip


def torus_sum(const uint64_t[:] alpha, const uint64_t[:] shift, long long start, long long count,
              const int64_t[:, :] exps, const double complex[:] coefs, const int64_t[:] offsets,
              const double[:] const_logs, int kind, double log_clip):
    """Sum of the integrand over Kronecker points ``start .. start+count-1``."""
    cdef Py_ssize_t n = alpha.shape[0], k = offsets.shape[0] - 1
    cdef Py_ssize_t i, j
    cdef long long idx
    cdef uint64_t u[64]
    cdef double total = 0.0, acc, val
    if n > 64:
        raise ValueError("at most 64 variables")
    with nogil:
        for idx in range(start, start + count):
            for j in range(n):
                u[j] = (<uint64_t> idx) * alpha[j] + shift[j]
            acc = 0.0
            for i in range(k):
                if not isnan(const_logs[i]):
                    val = const_logs[i]
                else:
                    val = _logabs_point(u, exps, coefs, offsets[i], offsets[i + 1], log_clip)
                if i == 0:
                    acc = val
                elif kind == 1:
                    if val > acc:
                        acc = val
                elif kind == 2:
                    acc = acc * val
                else:
                    acc = acc + val
            total += acc
    return total


def circle_logabs(const int64_t[:] exps, const double complex[:] coefs, const int64_t[:] offsets,
                  const double[:] const_logs, t_in, double log_clip):
    """``log|P_i(exp(2 pi i t))|`` for each packed 1-variable polynomial."""
    cdef const double[:] t = np.ascontiguousarray(t_in, dtype=np.float64)
    cdef Py_ssize_t k = offsets.shape[0] - 1, N = t.shape[0]
    out_arr = np.empty((k, N))
    cdef double[:, :] out = out_arr
    cdef Py_ssize_t i, j, p
    cdef double re, im, ph, ang, c, s, v
    with nogil:
        for i in range(k):
            if not isnan(const_logs[i]):
                for p in range(N):
                    out[i, p] = const_logs[i]
                continue
            for p in range(N):
                re = 0.0
                im = 0.0
                for j in range(offsets[i], offsets[i + 1]):
                    ph = exps[j] * t[p]
                    ph -= floor(ph)
                    ang = TWO_PI * ph
                    c = cos(ang)
                    s = sin(ang)
                    re += coefs[j].real * c - coefs[j].imag * s
                    im += coefs[j].real * s + coefs[j].imag * c
                v = hypot(re, im)
                if v == 0.0:
                    out[i, p] = log_clip
                else:
                    v = log(v)
                    out[i, p] = v if v > log_clip else log_clip
    return out_arr


cdef extern from "complex.h" nogil:
    double complex cpow(double complex, double complex)
    double cabs(double complex)


cdef inline double complex _ipow(double complex z, int64_t e) noexcept nogil:
    cdef double complex r = 1.0
    cdef double complex b = z
    while e > 0:
        if e & 1:
            r = r * b
        b = b * b
        e >>= 1
    return r


cdef inline void _newton(double complex z, const int64_t[:] exps, const double complex[:] coefs,
                         int64_t deg, double complex* ratio, double* berr) noexcept nogil:
    cdef Py_ssize_t t, T = exps.shape[0]
    cdef double complex p = 0.0, dp = 0.0, w, pw
    cdef double az = cabs(z), aw, asum = 0.0
    if az <= 1.0:
        for t in range(T):
            pw = _ipow(z, exps[t])
            p = p + coefs[t] * pw
            asum += cabs(coefs[t]) * cabs(pw)
            if exps[t] > 0:
                dp = dp + (<double> exps[t]) * coefs[t] * _ipow(z, exps[t] - 1)
        ratio[0] = p / dp
    else:
        w = 1.0 / z
        for t in range(T):
            pw = _ipow(w, deg - exps[t])
            p = p + coefs[t] * pw
            dp = dp + (<double> exps[t]) * coefs[t] * pw
            asum += cabs(coefs[t]) * cabs(pw)
        ratio[0] = z * p / dp
    berr[0] = cabs(p) / asum


def aberth(const int64_t[:] exps, const double complex[:] coefs, double complex[:] z,
           double tol, int maxiter):
    """Aberth-Ehrlich iteration (Gauss-Seidel form), updating ``z`` in place."""
    cdef Py_ssize_t d = z.shape[0], i, j
    cdef int64_t deg = 0
    cdef Py_ssize_t t
    for t in range(exps.shape[0]):
        if exps[t] > deg:
            deg = exps[t]
    done_arr = np.zeros(d, dtype=np.uint8)
    cdef unsigned char[:] done = done_arr
    cdef double be_tol = EPS * (4 * deg + 8)
    cdef double complex ratio, S, corr, zi
    cdef double berr
    cdef int it = 0, active
    with nogil:
        while it < maxiter:
            active = 0
            for i in range(d):
                if done[i]:
                    continue
                active += 1
                zi = z[i]
                _newton(zi, exps, coefs, deg, &ratio, &berr)
                if berr <= be_tol:
                    done[i] = 1
                    continue
                S = 0.0
                for j in range(d):
                    if j != i:
                        S = S + 1.0 / (zi - z[j])
                corr = ratio / (1.0 - ratio * S)
                if corr.real != corr.real or corr.imag != corr.imag or cabs(corr) > 1e300:
                    continue
                z[i] = zi - corr
                if cabs(corr) <= tol * cabs(z[i]):
                    done[i] = 1
            if active == 0:
                break
            it += 1
    return it, done_arr.astype(bool)


def shell_hits(N_in, long long D, pivots, free, Py_ssize_t n, long long s, long long bound):
    """Integer kernel vectors whose free part lies on the shell ``||c||_inf = s``."""
    cdef Py_ssize_t k = len(free), r = len(pivots)
    cdef const int64_t[:, :] N = np.ascontiguousarray(np.asarray(N_in, dtype=np.int64).reshape(r, k))
    cdef const int64_t[:] fr = np.asarray(free, dtype=np.int64)
    cdef const int64_t[:] pv = np.asarray(pivots, dtype=np.int64)
    c_arr = np.full(k, -s, dtype=np.int64)
    cdef int64_t[:] c = c_arr
    v_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[:] v = v_arr
    cdef Py_ssize_t a, b
    cdef int64_t acc, cmax
    cdef bint ok
    out = []
    while True:
        cmax = 0
        for a in range(k):
            if c[a] > cmax:
                cmax = c[a]
            elif -c[a] > cmax:
                cmax = -c[a]
        if cmax == s:
            ok = True
            for a in range(r):
                acc = 0
                for b in range(k):
                    acc += N[a, b] * c[b]
                if acc % D != 0:
                    ok = False
                    break
                acc = -(acc // D)
                if acc > bound or -acc > bound:
                    ok = False
                    break
                v[pv[a]] = acc
            if ok:
                for b in range(k):
                    v[fr[b]] = c[b]
                out.append(tuple(v_arr.tolist()))
        # odometer, last coordinate fastest
        a = k - 1
        while a >= 0:
            if c[a] < s:
                c[a] += 1
                break
            c[a] = -s
            a -= 1
        if a < 0:
            break
    return out
