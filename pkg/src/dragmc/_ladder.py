"""Compiled inner loop for the dragging kernel.

The ladder of intermediate updates dominates the cost of a dragging step,
so for models whose energy reduces to a small closed form we run the whole
ladder in a single compiled call.  The function below is written once in
plain Python and jitted at import time when numba is available; without
numba the same function runs uncompiled, so behaviour is identical either
way (the jit is strict IEEE, no fastmath).

Energy forms, selected by ``EnergyModel.ladder_form``:

  FORM_SCALAR:  E = p0 + p1*(y0 - p2)^2                    (d_fast = 1)
  FORM_PAIR:    E = p0 + p1*(y0 - p2)^2 + 12.5*(y1 - y0)^2  (d_fast = 2)

where p is the float64 payload array of the model's SlowContext.  The
arithmetic here must stay expression-for-expression identical to the
owning model's ``_energy`` so that the compiled and generic paths produce
bit-identical chains.
"""

import math

import numpy as np

FORM_SCALAR = 1
FORM_PAIR = 2

_TINY = float(np.finfo(np.float64).tiny)


def _form_energy(form, p, y):
    d = y[0] - p[2]
    e = p[0] + p[1] * d * d
    if form == FORM_PAIR:
        dz = y[1] - y[0]
        e = e + 12.5 * dz * dz
    return e


def run_ladder(form, p_x, p_star, y, e_x, e_star, n, steps, inner_sds, eps, us):
    """Run intermediate levels i = 1 .. n-1 of the dragging ladder.

    eps has shape ((n-1)*steps, d_fast) and us shape ((n-1)*steps,); both
    are consumed in ladder order.  Returns the final y, the running
    energies E(x, y) and E(x*, y), the two ladder sums over levels
    0 .. n-1, and the number of accepted inner proposals.
    """
    d_fast = y.shape[0]
    y_cur = y.copy()
    y_prop = y.copy()
    sum_x = e_x
    sum_star = e_star
    accepts = 0
    k = 0
    for i in range(1, n):
        w_near = (n - i) / n
        w_far = i / n
        for _ in range(steps):
            for j in range(d_fast):
                y_prop[j] = y_cur[j] + inner_sds[j] * eps[k, j]
            e_x_p = _form_energy(form, p_x, y_prop)
            e_star_p = _form_energy(form, p_star, y_prop)
            log_r = (w_near * e_x + w_far * e_star) - (
                w_near * e_x_p + w_far * e_star_p
            )
            if math.isnan(log_r):
                raise ValueError("NaN in inner acceptance ratio")
            u = us[k]
            if u == 0.0:
                u = _TINY
            if math.log(u) < log_r:
                for j in range(d_fast):
                    y_cur[j] = y_prop[j]
                e_x = e_x_p
                e_star = e_star_p
                accepts += 1
            k += 1
        sum_x += e_x
        sum_star += e_star
    return y_cur, e_x, e_star, sum_x, sum_star, accepts


try:
    from numba import njit

    _form_energy = njit(cache=True, inline="always")(_form_energy)
    run_ladder = njit(cache=True)(run_ladder)
    COMPILED = True
except ImportError:  # pragma: no cover
    COMPILED = False
