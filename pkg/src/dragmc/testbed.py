"""Test problems with a deliberately nasty fast/slow coupling.

Both continuous problems have a slow scalar x whose conditional fast
distribution moves and narrows as x moves:

    E1(x, y)    = x^2 + 50 (1+x^2)^2 (y - sin x)^2
    E2(x, y, z) = E1(x, y) + 12.5 (z - y)^2

so y | x is N(sin x, (0.1/(1+x^2))^2) and z | y is N(y, 0.2^2).  The only
transcendental in the slow part is sin(x); we treat it as the expensive
computation and audit it with its own counter.  Integrating the fast block
out of either problem leaves the same marginal energy x^2 + log(1+x^2)
(up to an additive constant), which is what the marginal sampler uses.

The discrete model restricts E1 to a tiny grid so that the dragging
kernel's full transition matrix can be enumerated exactly and checked for
detailed balance, path by path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import _ladder
from .errors import ConfigurationError
from .kernels import drag_log_accept_ratio, log_rho_i
from .models import EnergyModel

__all__ = [
    "Z_COUPLING",
    "test1_energy",
    "test1_marginal_energy",
    "test1_conditional_mean",
    "test1_conditional_sd",
    "test1_conditional_sample",
    "test2_energy",
    "Test1Model",
    "Test2Model",
    "DiscreteModel",
    "make_discrete_model",
    "discrete_target",
    "discrete_drag_transition_matrix",
    "Problem",
    "PROBLEMS",
]

Z_COUPLING = 12.5  # 1 / (2 * 0.2^2): z couples to y with sd 0.2


def test1_energy(x: float, y: float) -> float:
    """E1 evaluated from scratch (scalar arguments)."""
    s = math.sin(x)
    c = 50.0 * (1.0 + x * x) ** 2
    d = y - s
    return x * x + c * d * d


def test2_energy(x: float, y: float, z: float) -> float:
    """E2 evaluated from scratch (scalar arguments)."""
    e = test1_energy(x, y)
    dz = z - y
    return e + Z_COUPLING * dz * dz


def test1_marginal_energy(x) -> float:
    """Energy of the x marginal after integrating the fast block out:
    x^2 + log(1 + x^2).  Shared by both continuous problems."""
    x0 = float(np.asarray(x).reshape(-1)[0])
    return x0 * x0 + math.log1p(x0 * x0)


def test1_conditional_mean(x: float) -> float:
    return math.sin(x)


def test1_conditional_sd(x: float) -> float:
    return 0.1 / (1.0 + x * x)


def test1_conditional_sample(x: float, rng) -> float:
    """Direct draw from y | x (used to fill in the fast coordinate next to
    marginal-chain samples)."""
    return test1_conditional_mean(x) + test1_conditional_sd(x) * rng.standard_normal()


class _SineSlowModel(EnergyModel):
    """Shared slow part of the two continuous problems: cache x^2,
    50(1+x^2)^2 and sin(x).  sin is the designated expensive operation and
    is evaluated here and nowhere else, so ``sine_evaluations`` must track
    ``slow_preparations`` exactly."""

    d_slow = 1

    def __init__(self, slow_delay_us: float = 0.0):
        super().__init__(slow_delay_us)
        self.sine_evaluations = 0

    def _build_payload(self, x: np.ndarray) -> np.ndarray:
        x0 = float(x[0])
        self.sine_evaluations += 1
        return np.array([x0 * x0, 50.0 * (1.0 + x0 * x0) ** 2, math.sin(x0)])


class Test1Model(_SineSlowModel):
    d_fast = 1
    name = "test1"
    ladder_form = _ladder.FORM_SCALAR

    def _energy(self, payload, y: np.ndarray) -> float:
        d = y[0] - payload[2]
        return float(payload[0] + payload[1] * d * d)


class Test2Model(_SineSlowModel):
    """Same slow variable, fast pair (y, z) with z hanging off y."""

    d_fast = 2
    name = "test2"
    ladder_form = _ladder.FORM_PAIR

    def _energy(self, payload, y: np.ndarray) -> float:
        d = y[0] - payload[2]
        e = payload[0] + payload[1] * d * d
        dz = y[1] - y[0]
        return float(e + Z_COUPLING * dz * dz)


@dataclass(frozen=True)
class DiscreteModel:
    """E1 restricted to a fully enumerable grid: a few x values crossed
    with a short row of y values.  Proposals are uniform over the whole x
    grid and nearest-neighbour on the y grid (missing neighbours reject),
    both symmetric."""

    grid_x: np.ndarray
    grid_y: np.ndarray
    energies: np.ndarray  # energies[a, b] = test1_energy(grid_x[a], grid_y[b])


def make_discrete_model(n_x: int = 3, n_y: int = 7) -> DiscreteModel:
    grid_x = np.linspace(-1.0, 1.0, n_x)
    grid_y = np.linspace(-1.5, 1.5, n_y)
    energies = np.array(
        [[test1_energy(xa, yb) for yb in grid_y] for xa in grid_x]
    )
    return DiscreteModel(grid_x=grid_x, grid_y=grid_y, energies=energies)


def discrete_target(dm: DiscreteModel) -> np.ndarray:
    """Normalised stationary law over the product grid, flattened with
    state index a * len(grid_y) + b."""
    w = np.exp(-(dm.energies - dm.energies.min()))
    return (w / w.sum()).reshape(-1)


def _inner_level_matrix(dm: DiscreteModel, i: int, n: int, a: int, a_star: int) -> np.ndarray:
    """Exact Metropolis matrix on the y grid targeting ladder level i
    between grid_x[a] and grid_x[a_star]."""
    ny = len(dm.grid_y)
    lr = [log_rho_i(i, n, dm.energies[a, b], dm.energies[a_star, b]) for b in range(ny)]
    T = np.zeros((ny, ny))
    for b in range(ny):
        for b2 in (b - 1, b + 1):
            if 0 <= b2 < ny:
                T[b, b2] = 0.5 * math.exp(min(0.0, lr[b2] - lr[b]))
        T[b, b] = 1.0 - T[b].sum()
    return T


def discrete_drag_transition_matrix(
    dm: DiscreteModel, n: int, inner_steps: int = 1
) -> np.ndarray:
    """Exact one-step transition matrix of the dragging kernel on the
    discrete model, by enumerating every ladder path.

    Acceptance uses the same ladder-sum formula as the continuous kernel;
    the enumeration replaces the rng.  Kept honest by a hard cap on the
    state space, since the path count grows like n_y**(n-1).
    """
    if n < 1 or int(n) != n:
        raise ConfigurationError(f"ladder size n must be an integer >= 1, got {n}")
    if inner_steps < 1:
        raise ConfigurationError("inner_steps must be >= 1")
    nx, ny = len(dm.grid_x), len(dm.grid_y)
    if nx * ny > 45:
        raise ConfigurationError(
            f"state space has {nx * ny} states; refusing to enumerate more than 45"
        )
    S = nx * ny
    P = np.zeros((S, S))
    p_x = 1.0 / nx  # uniform proposal over the full x grid

    for a, a_star in product(range(nx), repeat=2):
        levels = []
        for i in range(1, n):
            T = _inner_level_matrix(dm, i, n, a, a_star)
            if inner_steps > 1:
                T = np.linalg.matrix_power(T, inner_steps)
            levels.append(T)
        for b in range(ny):
            u = a * ny + b
            # paths: (current y index, probability, energy terms so far)
            paths = [(b, 1.0, [dm.energies[a, b]], [dm.energies[a_star, b]])]
            for T in levels:
                new_paths = []
                for b_cur, prob, ex, es in paths:
                    for b_nxt in range(ny):
                        p = T[b_cur, b_nxt]
                        if p > 0.0:
                            new_paths.append(
                                (
                                    b_nxt,
                                    prob * p,
                                    ex + [dm.energies[a, b_nxt]],
                                    es + [dm.energies[a_star, b_nxt]],
                                )
                            )
                paths = new_paths
            for b_last, prob, ex, es in paths:
                acc = math.exp(min(0.0, drag_log_accept_ratio(ex, es)))
                mass = p_x * prob
                P[u, a_star * ny + b_last] += mass * acc
                P[u, u] += mass * (1.0 - acc)
    return P


@dataclass(frozen=True)
class Problem:
    """Registry entry tying a problem name to its pieces."""

    name: str
    kind: str  # "continuous" or "discrete"
    make_model: object = None  # continuous: (slow_delay_us) -> EnergyModel
    marginal_energy: object = None
    x0: tuple = ()
    y0: tuple = ()


PROBLEMS = {
    "test1": Problem(
        name="test1",
        kind="continuous",
        make_model=Test1Model,
        marginal_energy=test1_marginal_energy,
        x0=(0.0,),
        y0=(0.0,),
    ),
    "test2": Problem(
        name="test2",
        kind="continuous",
        make_model=Test2Model,
        marginal_energy=test1_marginal_energy,
        x0=(0.0,),
        y0=(0.0, 0.0),
    ),
    "discrete": Problem(
        name="discrete",
        kind="discrete",
        make_model=make_discrete_model,
    ),
}
