"""Metropolis kernels over energy models with a slow/fast split.

All four samplers use symmetric Gaussian random-walk proposals, so the
Hastings ratio is always 1 and acceptance depends only on the energy
difference.  Everything works in log space on energies (log density = -E);
probabilities are never exponentiated.

The dragging kernel (``drag_step``) is the interesting one: it proposes a
big move of the slow variables and drags the fast variables along through
a ladder of n-1 intermediate distributions

    rho_i(y; x, x*)  propto  exp(-( ((n-i)/n) E(x, y) + (i/n) E(x*, y) ))

bridging from the conditional at x (i=0) to the conditional at x* (i=n).
One Metropolis pass at each level produces y_1 .. y_{n-1}, and the pair
(x*, y_{n-1}) is accepted with log ratio

    (1/n) sum_{i=0}^{n-1} E(x, y_i)  -  (1/n) sum_{i=0}^{n-1} E(x*, y_i).

The whole step needs exactly one slow preparation (for x*); every inner
proposal costs two fast evaluations, with current-point energies carried
forward rather than recomputed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _ladder
from .errors import ConfigurationError
from .models import ChainState, EnergyModel

__all__ = [
    "GaussianWalkProposal",
    "DragConfig",
    "KernelStats",
    "propose_walk",
    "metropolis_accept",
    "log_rho_i",
    "drag_log_accept_ratio",
    "inner_transition",
    "drag_step",
    "joint_step",
    "single_var_step",
    "marginal_step",
]

_TINY = float(np.finfo(np.float64).tiny)


@dataclass
class GaussianWalkProposal:
    """Spherical-or-diagonal Gaussian random walk: y' = y + sds * noise.

    Symmetric by construction.  All standard deviations must be strictly
    positive; a zero would silently freeze a coordinate forever.
    """

    sds: np.ndarray

    def __post_init__(self):
        sds = np.atleast_1d(np.asarray(self.sds, dtype=np.float64))
        if sds.ndim != 1 or sds.size == 0:
            raise ConfigurationError("proposal sds must be a non-empty vector")
        if not np.all(np.isfinite(sds)) or np.any(sds <= 0.0):
            raise ConfigurationError(f"proposal sds must be finite and > 0, got {sds}")
        self.sds = sds


@dataclass
class DragConfig:
    """Settings for the dragging kernel.

    ``n`` is the number of ladder segments; n-1 intermediate distributions
    are visited (n = 1 degenerates to a fixed-y update of x alone).
    ``inner_steps_per_level`` Metropolis updates are applied at each level;
    one is enough for validity, more just decorrelates harder.
    """

    n: int
    inner_proposal: GaussianWalkProposal
    inner_steps_per_level: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"drag ladder size n must be an integer >= 1, got {self.n}")
        self.n = int(self.n)
        if int(self.inner_steps_per_level) != self.inner_steps_per_level or self.inner_steps_per_level < 1:
            raise ConfigurationError("inner_steps_per_level must be an integer >= 1")
        self.inner_steps_per_level = int(self.inner_steps_per_level)


@dataclass
class KernelStats:
    """Proposal/accept counters, one pair per update type.

    Outer counters track the slow-variable (or joint) update; inner ones
    track fast-variable updates (ladder levels for drag, the y sweep for
    the single-variable kernel).
    """

    outer_proposals: int = 0
    outer_accepts: int = 0
    inner_proposals: int = 0
    inner_accepts: int = 0


def propose_walk(current, proposal: GaussianWalkProposal, rng) -> np.ndarray:
    """Draw one random-walk proposal.  Consumes exactly len(current)
    standard normals from rng."""
    current = np.asarray(current, dtype=np.float64)
    if proposal.sds.shape != current.shape:
        raise ConfigurationError(
            f"proposal has {proposal.sds.shape[0]} sds for a vector of length {current.shape[0]}"
        )
    return current + proposal.sds * rng.standard_normal(current.shape[0])


def _accept_with_u(log_ratio: float, u: float) -> bool:
    if math.isnan(log_ratio):
        raise ValueError("acceptance log ratio is NaN (model bug upstream)")
    if u == 0.0:
        u = _TINY
    return math.log(u) < log_ratio


def metropolis_accept(log_ratio: float, rng) -> bool:
    """Accept with probability min(1, exp(log_ratio)).

    Compares log(u) < log_ratio with u drawn from the open interval (0, 1);
    consumes exactly one uniform even when log_ratio >= 0, so the rng
    stream position does not depend on the outcome.  log_ratio of exactly
    0 always accepts, -inf always rejects, NaN raises.
    """
    return _accept_with_u(log_ratio, rng.random())


def log_rho_i(i: int, n: int, e_x: float, e_star: float) -> float:
    """Unnormalised log density of the i-th ladder level, from the two
    endpoint energies at the same y.

    Written symmetrically so that log_rho_i(i, n, a, b) equals
    log_rho_i(n-i, n, b, a) bit for bit: the ladder read from x* back to
    x is the same ladder.
    """
    if not 0 <= i <= n:
        raise ValueError(f"level index {i} outside 0..{n}")
    return -(((n - i) / n) * e_x + (i / n) * e_star)


def drag_log_accept_ratio(e_x_terms, e_star_terms) -> float:
    """Log acceptance ratio of a dragging proposal from the energies of
    y_0 .. y_{n-1} under both endpoints: mean(E(x, y_i)) - mean(E(x*, y_i)).

    Algebraically identical to the product of level-density ratios, but
    needs no evaluations beyond those already made along the ladder.
    """
    if len(e_x_terms) != len(e_star_terms):
        raise ValueError(
            f"term lists differ in length: {len(e_x_terms)} vs {len(e_star_terms)}"
        )
    n = len(e_x_terms)
    if n == 0:
        raise ValueError("term lists are empty")
    return sum(e_x_terms) / n - sum(e_star_terms) / n


def _ladder_level(i, n, y, e_x, e_star, ctx_x, ctx_star, sds, model, eps, us, stats):
    """Metropolis updates of y at level i, one per row of eps/us.
    Carries the running energies under both contexts: two fast
    evaluations per proposal, none for the current point."""
    for s in range(eps.shape[0]):
        y_prop = y + sds * eps[s]
        e_x_p = model.energy(ctx_x, y_prop)
        e_star_p = model.energy(ctx_star, y_prop)
        log_r = log_rho_i(i, n, e_x_p, e_star_p) - log_rho_i(i, n, e_x, e_star)
        stats.inner_proposals += 1
        if _accept_with_u(log_r, us[s]):
            y, e_x, e_star = y_prop, e_x_p, e_star_p
            stats.inner_accepts += 1
    return y, e_x, e_star


def inner_transition(
    i: int,
    n: int,
    y,
    e_x: float,
    e_star: float,
    ctx_x,
    ctx_star,
    proposal: GaussianWalkProposal,
    model: EnergyModel,
    rng,
    stats: KernelStats,
    steps: int = 1,
):
    """One ladder level: ``steps`` Metropolis updates of y targeting
    rho_i(.; x, x*).

    ``e_x`` and ``e_star`` are the current-point energies under the two
    contexts; returns ``(y', e_x', e_star')`` with the same meaning, so a
    caller can chain levels without re-evaluating anything.  Draw order:
    all position noise for the level, then all acceptance uniforms.
    """
    y = np.asarray(y, dtype=np.float64)
    eps = rng.standard_normal((steps, y.shape[0]))
    us = rng.random(steps)
    return _ladder_level(
        i, n, y, e_x, e_star, ctx_x, ctx_star, proposal.sds, model, eps, us, stats
    )


def drag_step(
    state: ChainState,
    outer: GaussianWalkProposal,
    cfg: DragConfig,
    model: EnergyModel,
    rng,
    stats: KernelStats,
):
    """One dragging update.  Returns (state', accepted).

    Exactly one slow preparation (for the proposed x*) regardless of
    outcome; all ladder work costs fast evaluations only.

    Draw order per call: d_slow outer normals; (n-1)*steps inner position
    normals in ladder order; (n-1)*steps inner uniforms in ladder order;
    one outer acceptance uniform.  Batching the inner draws this way keeps
    the stream layout independent of acceptances and lets the compiled
    ladder consume the identical stream.
    """
    n = cfg.n
    steps = cfg.inner_steps_per_level
    if cfg.inner_proposal.sds.shape != (model.d_fast,):
        raise ConfigurationError(
            f"inner proposal has {cfg.inner_proposal.sds.shape[0]} sds, model d_fast is {model.d_fast}"
        )
    x_star = propose_walk(state.x, outer, rng)
    stats.outer_proposals += 1
    ctx_star = model.prepare_slow(x_star)
    e_star0 = model.energy(ctx_star, state.y)

    m = (n - 1) * steps
    eps = rng.standard_normal((m, model.d_fast))
    us = rng.random(m)

    if model.ladder_form is not None and n > 1:
        y_fin, _, e_star_fin, sum_x, sum_star, accepted_inner = _ladder.run_ladder(
            model.ladder_form,
            state.ctx.payload,
            ctx_star.payload,
            state.y,
            state.energy,
            e_star0,
            n,
            steps,
            cfg.inner_proposal.sds,
            eps,
            us,
        )
        stats.inner_proposals += m
        stats.inner_accepts += accepted_inner
        model.note_fast_evaluations(2 * m)
        log_ratio = sum_x / n - sum_star / n
    else:
        y_cur, e_x, e_star = state.y, state.energy, e_star0
        e_x_terms = [e_x]
        e_star_terms = [e_star]
        for i in range(1, n):
            lo, hi = (i - 1) * steps, i * steps
            y_cur, e_x, e_star = _ladder_level(
                i, n, y_cur, e_x, e_star, state.ctx, ctx_star,
                cfg.inner_proposal.sds, model, eps[lo:hi], us[lo:hi], stats,
            )
            e_x_terms.append(e_x)
            e_star_terms.append(e_star)
        y_fin, e_star_fin = y_cur, e_star
        log_ratio = drag_log_accept_ratio(e_x_terms, e_star_terms)

    if _accept_with_u(log_ratio, rng.random()):
        stats.outer_accepts += 1
        return ChainState(x=x_star, y=np.asarray(y_fin), ctx=ctx_star, energy=e_star_fin), True
    return state, False


def joint_step(
    state: ChainState,
    proposal: GaussianWalkProposal,
    model: EnergyModel,
    rng,
    stats: KernelStats,
):
    """Plain Metropolis on (x, y) jointly.  Returns (state', accepted).
    One slow preparation per call.  Draw order: d_slow + d_fast normals,
    one uniform."""
    d_s, d_f = model.d_slow, model.d_fast
    if proposal.sds.shape != (d_s + d_f,):
        raise ConfigurationError(
            f"joint proposal needs {d_s + d_f} sds, got {proposal.sds.shape[0]}"
        )
    noise = proposal.sds * rng.standard_normal(d_s + d_f)
    x_star = state.x + noise[:d_s]
    y_star = state.y + noise[d_s:]
    stats.outer_proposals += 1
    ctx_star = model.prepare_slow(x_star)
    e_star = model.energy(ctx_star, y_star)
    if metropolis_accept(state.energy - e_star, rng):
        stats.outer_accepts += 1
        return ChainState(x=x_star, y=y_star, ctx=ctx_star, energy=e_star), True
    return state, False


def single_var_step(
    state: ChainState,
    x_proposal: GaussianWalkProposal,
    y_proposal: GaussianWalkProposal,
    model: EnergyModel,
    rng,
    stats: KernelStats,
):
    """One sweep of single-block Metropolis: update x with y fixed, then y
    with x fixed.  Returns (state', x_accepted, y_accepted).

    The x update costs the call's single slow preparation; the y update
    reuses the current context untouched.  Outer counters track x, inner
    counters track y.
    """
    x_star = propose_walk(state.x, x_proposal, rng)
    stats.outer_proposals += 1
    ctx_star = model.prepare_slow(x_star)
    e_star = model.energy(ctx_star, state.y)
    x_accepted = metropolis_accept(state.energy - e_star, rng)
    if x_accepted:
        stats.outer_accepts += 1
        state = ChainState(x=x_star, y=state.y, ctx=ctx_star, energy=e_star)

    y_star = propose_walk(state.y, y_proposal, rng)
    stats.inner_proposals += 1
    e_y = model.energy(state.ctx, y_star)
    y_accepted = metropolis_accept(state.energy - e_y, rng)
    if y_accepted:
        stats.inner_accepts += 1
        state = ChainState(x=state.x, y=y_star, ctx=state.ctx, energy=e_y)
    return state, x_accepted, y_accepted


def marginal_step(
    x,
    e_x: float,
    marginal_energy,
    proposal: GaussianWalkProposal,
    rng,
    stats: KernelStats,
):
    """Metropolis on the slow variables alone, against a closed-form
    marginal energy function.  Returns (x', e', accepted).  Never touches
    a joint model; the outer counter pair tracks acceptance."""
    x_star = propose_walk(x, proposal, rng)
    stats.outer_proposals += 1
    e_star = float(marginal_energy(x_star))
    if metropolis_accept(e_x - e_star, rng):
        stats.outer_accepts += 1
        return x_star, e_star, True
    return x, e_x, False
