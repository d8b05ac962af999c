# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled fixed-point kernel for per-team allocation solves.

Must stay arithmetically identical to ``fixedpoint_py.solve_team`` (same
operations in the same order, IEEE double semantics, no fused or reordered
math) so the two backends return bit-identical allocations.
"""

from libc.math cimport fabs
from libc.stdlib cimport free, malloc

CONVERGED = 0
MAX_ITERATIONS = 1
ZERO_DENOMINATOR = 2


def solve_team(x0, base, race_ptr, race_idx, race_coef, race_pts,
               double tolerance, long max_iterations, long damp_after):
    """See ``fixedpoint_py.solve_team``; same contract, compiled inner loop."""
    cdef Py_ssize_t n = len(x0)
    cdef Py_ssize_t n_races = len(race_pts)
    cdef Py_ssize_t total = len(race_idx)

    cdef double *x = <double *> malloc(n * sizeof(double))
    cdef double *xn = <double *> malloc(n * sizeof(double))
    cdef double *cbase = <double *> malloc(n * sizeof(double))
    cdef Py_ssize_t *ptr = <Py_ssize_t *> malloc((n_races + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *idx = <Py_ssize_t *> malloc((total if total else 1) * sizeof(Py_ssize_t))
    cdef double *coef = <double *> malloc((total if total else 1) * sizeof(double))
    cdef double *pts = <double *> malloc((n_races if n_races else 1) * sizeof(double))
    if x is NULL or xn is NULL or cbase is NULL or ptr is NULL or idx is NULL \
            or coef is NULL or pts is NULL:
        free(x); free(xn); free(cbase); free(ptr); free(idx); free(coef); free(pts)
        raise MemoryError()

    cdef Py_ssize_t i, k, m, lo, hi, j
    for i in range(n):
        x[i] = x0[i]
        cbase[i] = base[i]
    for k in range(n_races + 1):
        ptr[k] = race_ptr[k]
    for m in range(total):
        idx[m] = race_idx[m]
        coef[m] = race_coef[m]
    for k in range(n_races):
        pts[k] = race_pts[k]

    cdef double residual = float("inf")
    cdef double s, scale, den, diff
    cdef bint damped = False
    cdef long iterations = 0
    cdef int status = MAX_ITERATIONS
    try:
        while iterations < max_iterations:
            iterations += 1
            for i in range(n):
                xn[i] = cbase[i]
            for k in range(n_races):
                lo = ptr[k]
                hi = ptr[k + 1]
                s = 0.0
                for m in range(lo, hi):
                    s += coef[m] * x[idx[m]]
                if not s > 0.0:
                    return ([x[i] for i in range(n)], iterations, residual,
                            ZERO_DENOMINATOR)
                scale = pts[k] / s
                for m in range(lo, hi):
                    j = idx[m]
                    xn[j] += coef[m] * x[j] * scale
            residual = 0.0
            for i in range(n):
                den = x[i] if x[i] > 1.0 else 1.0
                diff = fabs(xn[i] - x[i]) / den
                if diff > residual:
                    residual = diff
            if residual <= tolerance:
                return [x[i] for i in range(n)], iterations, residual, CONVERGED
            if iterations == damp_after:
                damped = True
            if damped:
                for i in range(n):
                    x[i] = 0.5 * xn[i] + 0.5 * x[i]
            else:
                for i in range(n):
                    x[i] = xn[i]
        return [x[i] for i in range(n)], max_iterations, residual, MAX_ITERATIONS
    finally:
        free(x); free(xn); free(cbase); free(ptr); free(idx); free(coef); free(pts)
