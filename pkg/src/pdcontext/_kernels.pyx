# cython: language_level=3
"""Compiled fixed-step RK4 loop for the replicator fields.

Mirrors ``_purepy.rk4_integrate`` exactly; see that module for the contract.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite

cnp.import_array()

DEF REDUCED3 = 0
DEF REDUCED4 = 1
DEF GENERAL = 2

DEF MAX_STEPS_DONE = 0
DEF CONVERGED = 1
DEF ABSORBED = 2
DEF NONFINITE = -1
DEF LEFT_SIMPLEX = -2


cdef void _field(int code, const double* x, double* out, const double* prm, int n, double scale) noexcept nogil:
    cdef double x1, x2, x3, a, b, c, f, common, beta, z, gam, u, w, g1, g2, avg
    cdef int i, j
    if code == REDUCED3:
        x1 = x[0]; x2 = x[1]
        a = prm[0]; b = prm[1]; c = prm[2]; f = prm[3]
        common = c * x1 * x1 + (f + c - a) * x1 * x2 + (f - b) * x2 * x2
        out[0] = scale * x1 * (common - c * x1 - f * x2)
        out[1] = scale * x2 * (common + (a - c) * x1 + (b - f) * x2)
    elif code == REDUCED4:
        x1 = x[0]; x2 = x[1]; x3 = x[2]
        beta = prm[0]; z = prm[1]
        gam = 1.0 - beta
        u = x1 + x3
        w = gam * x1 + x3
        g1 = u * (1.0 - u) * (3.0 - z) + (2.0 * z - 5.0) * w * x2 + ((z - 1.0) * x2 - gam * z) * x2
        g2 = u * u * (z - 3.0) + ((5.0 - z) + (2.0 * z - 5.0) * x2) * w + (1.0 - z) * (1.0 - x2) * x2
        out[0] = scale * x1 * g1
        out[1] = scale * x2 * g2
        out[2] = scale * x3 * (g1 - beta * z * x2)
    else:
        avg = 0.0
        for i in range(n):
            out[i] = 0.0
            for j in range(n):
                out[i] += prm[i * n + j] * x[j]
            avg += x[i] * out[i]
        for i in range(n):
            out[i] = scale * x[i] * (out[i] - avg)


def rk4_integrate(int code, x0, params, double scale, double step, long max_steps,
                  double conv_tol, double clip_tol, bint full_form):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] start = np.ascontiguousarray(x0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] prm = np.ascontiguousarray(params, dtype=np.float64)
    cdef int n = start.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.empty((max_steps + 1, n), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] work = np.empty(6 * n, dtype=np.float64)
    cdef double* x = &pts[0, 0]
    cdef double* xn
    cdef double* k1 = &work[0]
    cdef double* k2 = &work[n]
    cdef double* k3 = &work[2 * n]
    cdef double* k4 = &work[3 * n]
    cdef double* tmp = &work[4 * n]
    cdef const double* p = &prm[0]
    cdef const double* s0 = &start[0]
    cdef double h = step, hh = 0.5 * step, h6 = step / 6.0
    cdef double norm, tot, start_resid
    cdef long i, count = 0
    cdef int j, status = MAX_STEPS_DONE
    cdef bint absorbed = False

    tot = 0.0
    for j in range(n):
        x[j] = s0[j]
        tot += s0[j]
    start_resid = 1.0 - tot

    with nogil:
        for i in range(max_steps):
            _field(code, x, k1, p, n, scale)
            norm = 0.0
            for j in range(n):
                if fabs(k1[j]) > norm:
                    norm = fabs(k1[j])
            if norm < conv_tol:
                status = CONVERGED
                break
            for j in range(n):
                tmp[j] = x[j] + hh * k1[j]
            _field(code, tmp, k2, p, n, scale)
            for j in range(n):
                tmp[j] = x[j] + hh * k2[j]
            _field(code, tmp, k3, p, n, scale)
            for j in range(n):
                tmp[j] = x[j] + h * k3[j]
            _field(code, tmp, k4, p, n, scale)

            xn = x + n
            tot = 0.0
            for j in range(n):
                xn[j] = x[j] + h6 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
                if not isfinite(xn[j]):
                    status = NONFINITE
                    break
                if xn[j] < 0.0:
                    if xn[j] > -clip_tol:
                        xn[j] = 0.0
                    else:
                        status = LEFT_SIMPLEX
                        break
                tot += xn[j]
            if status < 0:
                break
            if full_form:
                for j in range(n):
                    xn[j] /= tot
            elif tot > 1.0:
                if tot - 1.0 < clip_tol:
                    for j in range(n):
                        xn[j] /= tot
                else:
                    status = LEFT_SIMPLEX
                    break
            count += 1
            x = xn
            for j in range(n):
                if s0[j] > 0.0 and xn[j] == 0.0:
                    absorbed = True
            if not full_form and start_resid > 0.0 and tot >= 1.0:
                absorbed = True

    if status == MAX_STEPS_DONE and absorbed:
        status = ABSORBED
    return pts[: count + 1].copy(), status
