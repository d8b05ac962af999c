"""Pure-Python fixed-point kernel, the fallback when the compiled one is absent.

The iteration, the damping rule, and every arithmetic expression mirror the
Cython kernel operation for operation; both backends therefore produce
bit-identical allocations.  Keep the two files in lockstep when editing.
"""

from __future__ import annotations

CONVERGED = 0
MAX_ITERATIONS = 1
ZERO_DENOMINATOR = 2


def solve_team(x0, base, race_ptr, race_idx, race_coef, race_pts,
               tolerance, max_iterations, damp_after):
    """Iterate x <- base + sum_r pts_r * coef_i x_i / (sum_j coef_j x_j).

    ``race_ptr`` delimits per-race segments of ``race_idx``/``race_coef``;
    ``race_pts`` is the race's distributable value (already scaled by the
    share's mixing weight).  Returns ``(x, iterations, residual, status)``
    where ``x`` is the last iterate whose image moved it by at most
    ``tolerance`` in the sup-norm relative metric, so the fixed-point residual
    of the returned vector is certified, not just the step size.

    Damping (x <- (F(x) + x) / 2) engages only after ``damp_after`` undamped
    sweeps fail to converge; it guards against oscillating maps.
    """
    n = len(x0)
    n_races = len(race_pts)
    x = [float(v) for v in x0]
    base = [float(v) for v in base]
    ptr = [int(v) for v in race_ptr]
    idx = [int(v) for v in race_idx]
    coef = [float(v) for v in race_coef]
    pts = [float(v) for v in race_pts]

    residual = float("inf")
    damped = False
    iterations = 0
    while iterations < max_iterations:
        iterations += 1
        xn = list(base)
        for k in range(n_races):
            lo = ptr[k]
            hi = ptr[k + 1]
            s = 0.0
            for m in range(lo, hi):
                s += coef[m] * x[idx[m]]
            if not s > 0.0:
                return x, iterations, residual, ZERO_DENOMINATOR
            scale = pts[k] / s
            for m in range(lo, hi):
                j = idx[m]
                xn[j] += coef[m] * x[j] * scale
        residual = 0.0
        for i in range(n):
            den = x[i] if x[i] > 1.0 else 1.0
            diff = abs(xn[i] - x[i]) / den
            if diff > residual:
                residual = diff
        if residual <= tolerance:
            return x, iterations, residual, CONVERGED
        if iterations == damp_after:
            damped = True
        if damped:
            for i in range(n):
                x[i] = 0.5 * xn[i] + 0.5 * x[i]
        else:
            x = xn
    return x, max_iterations, residual, MAX_ITERATIONS
