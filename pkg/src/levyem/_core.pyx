# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: Philox4x64-10 streams, unit samplers, EM chains, CF products.

The pure-numpy twin lives in ``_fallback.py`` and exposes the same functions.
"""

from libc.math cimport sin, cos, log, log1p, sqrt, pow, fabs, isfinite, exp
from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free

import numpy as np

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t levyem_mulhilo64(uint64_t a, uint64_t b, uint64_t *hi) {
        unsigned __int128 p = (unsigned __int128)a * (unsigned __int128)b;
        *hi = (uint64_t)(p >> 64);
        return (uint64_t)p;
    }
    """
    uint64_t levyem_mulhilo64(uint64_t a, uint64_t b, uint64_t *hi) nogil

cdef double PI = 3.141592653589793
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.1102230246251565e-16

cdef uint64_t M0 = 0xD2E7470EE14C6C93ULL
cdef uint64_t M1 = 0xCA5A826395121157ULL
cdef uint64_t W0 = 0x9E3779B97F4A7C15ULL
cdef uint64_t W1 = 0xBB67AE8584CAA73BULL

# draw kinds, drift codes and modes are mirrored in _fallback
cdef enum:
    KIND_SYM1D = 0
    KIND_ISO = 1
    KIND_POS = 2
    KIND_PARETO = 3

cdef enum:
    DRIFT_OU = 0
    DRIFT_LINEAR = 1
    DRIFT_OU_SINE = 2

cdef enum:
    MODE_FINAL = 0
    MODE_MOMENT = 1
    MODE_COUPLED = 2


cdef inline void philox_block(uint64_t k0, uint64_t k1, uint64_t c0, uint64_t *out) noexcept nogil:
    cdef uint64_t x0 = c0, x1 = 0, x2 = 0, x3 = 0
    cdef uint64_t hi0, hi1, lo0, lo1
    cdef int r
    for r in range(10):
        if r > 0:
            k0 += W0
            k1 += W1
        lo0 = levyem_mulhilo64(M0, x0, &hi0)
        lo1 = levyem_mulhilo64(M1, x2, &hi1)
        x0 = hi1 ^ x1 ^ k0
        x1 = lo1
        x2 = hi0 ^ x3 ^ k1
        x3 = lo0
    out[0] = x0
    out[1] = x1
    out[2] = x2
    out[3] = x3


cdef inline double to_open_unit(uint64_t x) noexcept nogil:
    return (<double>(x >> 11) + 0.5) * INV_2_53


cdef inline void fill_uniforms(uint64_t seed, uint64_t stream, uint64_t first_block,
                               int n_blocks, double *u) noexcept nogil:
    cdef uint64_t raw[4]
    cdef int b, j
    for b in range(n_blocks):
        philox_block(seed, stream, first_block + <uint64_t>b, raw)
        for j in range(4):
            u[4 * b + j] = to_open_unit(raw[j])


cpdef int uniforms_per_draw(int kind, int d):
    if kind == KIND_SYM1D or kind == KIND_POS:
        return 2
    if kind == KIND_ISO:
        return 2 + 2 * ((d + 1) // 2)
    if d == 1:
        return 2
    return 1 + 2 * ((d + 1) // 2)


cpdef int blocks_per_draw(int kind, int d):
    return (uniforms_per_draw(kind, d) + 3) // 4


cdef inline void gaussians(const double *u, int d, double *g) noexcept nogil:
    # Box-Muller on consecutive uniform pairs
    cdef int i = 0
    cdef double r, th
    while i < d:
        r = sqrt(-2.0 * log(u[i]))
        th = TWO_PI * u[i + 1]
        g[i] = r * cos(th)
        if i + 1 < d:
            g[i + 1] = r * sin(th)
        i += 2


cdef inline double cms_symmetric(double alpha, double u1, double u2) noexcept nogil:
    cdef double v = PI * (u1 - 0.5)
    cdef double w = -log(u2)
    return sin(alpha * v) / pow(cos(v), 1.0 / alpha) * pow(cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha)


cdef inline double kanter_positive(double a, double u1, double u2) noexcept nogil:
    cdef double v = PI * u1
    cdef double w = -log(u2)
    return sin(a * v) / pow(sin(v), 1.0 / a) * pow(sin((1.0 - a) * v) / w, (1.0 - a) / a)


cdef inline void unit_draw(int kind, int d, double alpha, const double *u, double *out) noexcept nogil:
    cdef double s, r, nrm
    cdef int i
    if kind == KIND_SYM1D:
        out[0] = cms_symmetric(alpha, u[0], u[1])
    elif kind == KIND_POS:
        out[0] = kanter_positive(alpha, u[0], u[1])
    elif kind == KIND_ISO:
        s = kanter_positive(0.5 * alpha, u[0], u[1])
        gaussians(u + 2, d, out)
        r = sqrt(2.0 * s)
        for i in range(d):
            out[i] = r * out[i]
    else:
        r = pow(u[0], -1.0 / alpha)
        if d == 1:
            out[0] = -r if u[1] < 0.5 else r
        else:
            gaussians(u + 1, d, out)
            nrm = 0.0
            for i in range(d):
                nrm += out[i] * out[i]
            nrm = sqrt(nrm)
            for i in range(d):
                out[i] = r * out[i] / nrm


def philox_raw(uint64_t seed, uint64_t stream, uint64_t first_block, Py_ssize_t n_blocks):
    """Raw 64-bit outputs, four per counter block."""
    out = np.empty(4 * n_blocks, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t b
    with nogil:
        for b in range(n_blocks):
            philox_block(seed, stream, first_block + <uint64_t>b, &o[4 * b])
    return out


def draw_units(int kind, int d, double alpha, uint64_t seed, uint64_t stream,
               uint64_t first_draw, Py_ssize_t n):
    """``n`` unit-scale draws; draw i consumes blocks ``(first_draw + i) * B ...``."""
    cdef int nb = blocks_per_draw(kind, d)
    out = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double *u = <double *> malloc(4 * nb * sizeof(double))
    cdef Py_ssize_t i
    try:
        with nogil:
            for i in range(n):
                fill_uniforms(seed, stream, (first_draw + <uint64_t>i) * <uint64_t>nb, nb, u)
                unit_draw(kind, d, alpha, u, &o[i, 0])
    finally:
        free(u)
    return out


cdef inline void drift_eval(int code, int d, const double *y, const double *A, double c,
                            double *b) noexcept nogil:
    cdef int i, j
    cdef double s
    if code == DRIFT_OU:
        for i in range(d):
            b[i] = -y[i]
    elif code == DRIFT_LINEAR:
        for i in range(d):
            s = 0.0
            for j in range(d):
                s += A[i * d + j] * y[j]
            b[i] = -s
    else:
        for i in range(d):
            b[i] = -y[i] + c * sin(y[i])


cdef inline void drift_diff(int code, int d, const double *y, const double *D, const double *A,
                            double c, double *out) noexcept nogil:
    # b(y) - b(y - D) without cancellation against the common noise
    cdef int i, j
    cdef double s
    if code == DRIFT_OU:
        for i in range(d):
            out[i] = -D[i]
    elif code == DRIFT_LINEAR:
        for i in range(d):
            s = 0.0
            for j in range(d):
                s += A[i * d + j] * D[j]
            out[i] = -s
    else:
        for i in range(d):
            out[i] = -D[i] + 2.0 * c * cos(y[i] - 0.5 * D[i]) * sin(0.5 * D[i])


def simulate_chunk(int mode, int scheme_kind, int drift_code, double[:, ::1] A, double c,
                   double[::1] x0, double[::1] y0, double eta, Py_ssize_t steps,
                   double alpha, double scale, uint64_t seed, uint64_t first_chain,
                   Py_ssize_t n_chains, bint noise_off, double beta):
    """Run ``n_chains`` EM chains; chain j uses stream ``(seed, first_chain + j)``.

    Returns ``(final_states, acc, status, bad_chain, bad_step)``; ``acc`` holds
    per-step sums of ``|Y_k|^beta`` (moment mode) or ``|X_k - Y_k|`` (coupled mode).
    Coupled mode evolves ``X`` and the difference ``D = X - Y``, so the shared
    increments never enter ``D``. A nonzero status flags a non-finite state.
    """
    cdef int d = x0.shape[0]
    cdef int nb = blocks_per_draw(scheme_kind, d)
    final = np.empty((n_chains, d), dtype=np.float64)
    acc_arr = np.zeros(steps + 1, dtype=np.float64)
    cdef double[:, ::1] fin = final
    cdef double[::1] acc = acc_arr
    cdef double *u = <double *> malloc(4 * nb * sizeof(double))
    cdef double *y = <double *> malloc(d * sizeof(double))
    cdef double *z = <double *> malloc(d * sizeof(double))
    cdef double *inc = <double *> malloc(d * sizeof(double))
    cdef double *b = <double *> malloc(d * sizeof(double))
    cdef double *b2 = <double *> malloc(d * sizeof(double))
    cdef const double *Ap = &A[0, 0]
    cdef Py_ssize_t j, k
    cdef int i, status = 0
    cdef Py_ssize_t bad_chain = -1, bad_step = -1
    cdef double nrm, dist
    cdef bint ok
    try:
        with nogil:
            for j in range(n_chains):
                for i in range(d):
                    y[i] = x0[i]
                    z[i] = x0[i] - y0[i]
                if mode == MODE_MOMENT:
                    nrm = 0.0
                    for i in range(d):
                        nrm += y[i] * y[i]
                    acc[0] += pow(sqrt(nrm), beta)
                elif mode == MODE_COUPLED:
                    nrm = 0.0
                    for i in range(d):
                        nrm += z[i] * z[i]
                    acc[0] += sqrt(nrm)
                for k in range(steps):
                    if noise_off:
                        for i in range(d):
                            inc[i] = 0.0
                    else:
                        fill_uniforms(seed, first_chain + <uint64_t>j, <uint64_t>k * <uint64_t>nb, nb, u)
                        unit_draw(scheme_kind, d, alpha, u, inc)
                    drift_eval(drift_code, d, y, Ap, c, b)
                    if mode == MODE_COUPLED:
                        drift_diff(drift_code, d, y, z, Ap, c, b2)
                    ok = True
                    for i in range(d):
                        y[i] = y[i] + eta * b[i] + scale * inc[i]
                        if not isfinite(y[i]):
                            ok = False
                    if mode == MODE_COUPLED:
                        for i in range(d):
                            z[i] = z[i] + eta * b2[i]
                            if not isfinite(z[i]):
                                ok = False
                    if not ok:
                        status = 1
                        bad_chain = first_chain + j
                        bad_step = k
                        break
                    if mode == MODE_MOMENT:
                        nrm = 0.0
                        for i in range(d):
                            nrm += y[i] * y[i]
                        acc[k + 1] += pow(sqrt(nrm), beta)
                    elif mode == MODE_COUPLED:
                        nrm = 0.0
                        for i in range(d):
                            nrm += z[i] * z[i]
                        acc[k + 1] += sqrt(nrm)
                if status:
                    break
                for i in range(d):
                    fin[j, i] = y[i]
    finally:
        free(u)
        free(y)
        free(z)
        free(inc)
        free(b)
        free(b2)
    return final, acc_arr, status, bad_chain, bad_step


cdef inline double pareto_phim1_series(double u, double alpha, double sigma_alpha) noexcept nogil:
    # phi(u) - 1 for u >= 0 via the convergent series of the rearranged integral
    cdef double u2 = u * u
    cdef double t = 1.0
    cdef double s = 0.0
    cdef double term
    cdef int k
    for k in range(1, 60):
        t = t * u2 / ((2.0 * k - 1.0) * (2.0 * k))
        term = t / (2.0 * k - alpha)
        if k % 2 == 1:
            s += term
        else:
            s -= term
        if term <= 1e-18 * fabs(s):
            break
    return -sigma_alpha * pow(u, alpha) + alpha * s


def phim1_series(double[::1] u, double alpha, double sigma_alpha):
    out = np.empty(u.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(u.shape[0]):
            o[i] = pareto_phim1_series(fabs(u[i]), alpha, sigma_alpha)
    return out


def log_pareto_product(double u0, double ratio, Py_ssize_t start, Py_ssize_t stop,
                       double alpha, double sigma_alpha):
    """Neumaier-compensated sum of ``log phi(u0 * ratio**i)`` for ``start <= i < stop``.

    Returns NaN when a factor is nonpositive.
    """
    cdef double s = 0.0, comp = 0.0, v, t
    cdef Py_ssize_t i
    cdef double lr = log(ratio)
    cdef double p
    with nogil:
        for i in range(start, stop):
            p = pareto_phim1_series(fabs(u0) * exp(<double>i * lr), alpha, sigma_alpha)
            if p <= -1.0:
                s = 0.0 / 0.0
                break
            v = log1p(p)
            t = s + v
            if fabs(s) >= fabs(v):
                comp += (s - t) + v
            else:
                comp += (v - t) + s
            s = t
    return s + comp
