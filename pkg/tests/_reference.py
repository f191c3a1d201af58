"""Independent reference implementations the tests check the library
against.

Everything here is written from the definitions, deliberately not sharing
code with the package: direct-sum autocorrelations, quadrature for the
marginal law, a hand-rolled one-intermediate dragging update, and the
telescoping product form of the dragging acceptance ratio.
"""

import math

import numpy as np
from scipy import integrate
from scipy.signal import lfilter

from dragmc.testbed import test1_energy


def product_form_log_ratio(e_x_terms, e_star_terms):
    """Dragging log acceptance ratio as the telescoping product: target
    ratio at the endpoints times the ratio of level densities at each
    handover point.  Level densities are written out from the energies."""
    n = len(e_x_terms)

    def log_rho(i, ex, es):
        return -(((n - i) / n) * ex + (i / n) * es)

    total = e_x_terms[0] - e_star_terms[-1]
    for i in range(1, n):
        total += log_rho(i, e_x_terms[i - 1], e_star_terms[i - 1])
        total -= log_rho(i, e_x_terms[i], e_star_terms[i])
    return total


def fixed_y_metropolis_step(x, y, e, sd, rng):
    """Plain Metropolis on x with y frozen; the n = 1 degenerate case.
    Returns (x', e', accepted).  Consumes one normal and one uniform."""
    x_star = x + sd * rng.standard_normal(1)[0]
    e_star = test1_energy(x_star, y)
    u = rng.random()
    if math.log(u if u > 0.0 else 5e-324) < e - e_star:
        return x_star, e_star, True
    return x, e, False


def one_intermediate_step(x, y, outer_sd, inner_sd, rng):
    """One dragging update with a single intermediate distribution,
    written straight from the two-endpoint geometric bridge: the
    intermediate density is the geometric mean of the conditionals at x
    and x*, and the proposal (x*, y*) is accepted with probability

        min[1, sqrt( pi(x*,y) pi(x*,y*) / pi(x,y) pi(x,y*) )].

    Draw order matches the library kernel at n = 2: one outer normal, the
    inner position normal, the inner uniform, the outer uniform.  Returns
    (x', y', accepted).
    """
    x_star = x + outer_sd * rng.standard_normal(1)[0]
    eps = rng.standard_normal((1, 1))[0, 0]
    u_inner = rng.random(1)[0]
    u_outer = rng.random()

    y_prop = y + inner_sd * eps
    lr_inner = (test1_energy(x, y) + test1_energy(x_star, y)) / 2.0 - (
        test1_energy(x, y_prop) + test1_energy(x_star, y_prop)
    ) / 2.0
    y_mid = y_prop if math.log(u_inner if u_inner > 0.0 else 5e-324) < lr_inner else y

    lr_outer = (test1_energy(x, y) + test1_energy(x, y_mid)) / 2.0 - (
        test1_energy(x_star, y) + test1_energy(x_star, y_mid)
    ) / 2.0
    if math.log(u_outer if u_outer > 0.0 else 5e-324) < lr_outer:
        return x_star, y_mid, True
    return x, y, False


def marginal_cdf_interpolant():
    """CDF of the x marginal (density proportional to exp(-x^2)/(1+x^2))
    tabulated by quadrature on a dense grid; returns a vectorised callable.
    The mass outside [-8, 8] is below 1e-29 and is ignored."""
    grid = np.linspace(-8.0, 8.0, 32001)
    dens = np.exp(-grid * grid) / (1.0 + grid * grid)
    cdf = integrate.cumulative_trapezoid(dens, grid, initial=0.0)
    cdf /= cdf[-1]
    return lambda q: np.interp(q, grid, cdf)


def level_density_moments(x, x_star, i, n):
    """Mean and sd of the i-th ladder level between x and x*.  Both
    endpoint conditionals are Gaussian in y, so the geometric bridge is
    Gaussian too; precision-weighted combination, written from the model
    constants."""
    w_near, w_far = (n - i) / n, i / n
    c = 50.0 * (1.0 + x * x) ** 2
    c_star = 50.0 * (1.0 + x_star * x_star) ** 2
    prec = 2.0 * (w_near * c + w_far * c_star)
    mean = 2.0 * (w_near * c * math.sin(x) + w_far * c_star * math.sin(x_star)) / prec
    return mean, math.sqrt(1.0 / prec)


def direct_acf(chain, max_lag):
    """Autocorrelation by the direct O(N * L) sums, biased convention."""
    v = np.asarray(chain, dtype=np.float64)
    d = v - v.mean()
    denom = np.sum(d * d)
    out = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        out[k] = np.sum(d[: d.size - k] * d[k:]) / denom
    return out


def ar1_series(phi, size, seed, warmup=1000):
    """Stationary AR(1) draws x_t = phi x_{t-1} + eps_t with unit
    innovations."""
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal(size + warmup)
    return lfilter([1.0], [1.0, -phi], eps)[warmup:]
