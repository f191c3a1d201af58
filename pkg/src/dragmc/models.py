"""Energy models split into slow and fast parts.

A model evaluates an energy E(x, y) where x is the slow block and y the
fast block.  Everything that depends on x alone is computed once by
``prepare_slow`` and cached in a ``SlowContext``; ``energy`` then evaluates
E for any y against that context using fast arithmetic only.  The two
operations are counted separately so samplers can be audited on how many
slow preparations they actually spend.
"""

from __future__ import annotations

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ConfigurationError

__all__ = ["EnergyModel", "SlowContext", "ChainState", "EvalCounts", "initial_state"]


@dataclass(frozen=True)
class SlowContext:
    """Cache of everything about E(x, .) that depends on x alone.

    ``payload`` is opaque to callers; only the owning model reads it.
    ``index`` increases monotonically with each preparation on a model,
    so contexts from the same model can be ordered by creation time.
    """

    x: np.ndarray
    payload: Any
    index: int


@dataclass(frozen=True)
class EvalCounts:
    slow_preparations: int
    fast_evaluations: int


@dataclass
class ChainState:
    """Current point of a sampler: (x, y), the context built from x, and
    the cached energy E(x, y).  Treated as immutable; kernels return new
    states instead of mutating."""

    x: np.ndarray
    y: np.ndarray
    ctx: SlowContext
    energy: float


class EnergyModel(ABC):
    """Base class for energy models with a slow/fast split.

    Subclasses fix ``d_slow`` and ``d_fast`` and implement ``_build_payload``
    (the slow part) and ``_energy`` (the fast part).  The base class owns
    validation, counting and the optional artificial delay.

    ``slow_delay_us`` adds a real sleep to every ``prepare_slow`` call, so a
    cheap analytic model can emulate an expensive one when benchmarking.

    ``ladder_form`` may name a compiled energy form understood by the
    dragging kernel's fast path (see ``_ladder``); None means the generic
    path, which only ever calls ``energy``.
    """

    d_slow: int
    d_fast: int
    name: str = "model"
    ladder_form: int | None = None

    def __init__(self, slow_delay_us: float = 0.0):
        if slow_delay_us < 0:
            raise ConfigurationError("slow_delay_us must be >= 0")
        self.slow_delay_us = float(slow_delay_us)
        self._slow_preparations = 0
        self._fast_evaluations = 0

    def prepare_slow(self, x) -> SlowContext:
        """Run the slow computation for a new x and cache it.

        Counts one slow preparation.  Calling twice with the same x yields
        two distinct contexts with identical payloads.
        """
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d_slow,):
            raise ConfigurationError(
                f"{self.name}: slow vector has shape {x.shape}, expected ({self.d_slow},)"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError(f"{self.name}: slow vector must be finite, got {x}")
        self._slow_preparations += 1
        if self.slow_delay_us > 0.0:
            time.sleep(self.slow_delay_us * 1e-6)
        payload = self._build_payload(x)
        return SlowContext(x=x.copy(), payload=payload, index=self._slow_preparations)

    def energy(self, ctx: SlowContext, y) -> float:
        """Evaluate E(x, y) against a prepared context.

        Fast: touches only the cached payload, never recomputes the slow
        part.  Counts one fast evaluation.
        """
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.d_fast,):
            raise ValueError(
                f"{self.name}: fast vector has shape {y.shape}, expected ({self.d_fast},)"
            )
        self._fast_evaluations += 1
        return self._energy(ctx.payload, y)

    def eval_counts(self) -> EvalCounts:
        """Snapshot of the counters; reading does not mutate them."""
        return EvalCounts(self._slow_preparations, self._fast_evaluations)

    def note_fast_evaluations(self, k: int) -> None:
        """Record ``k`` fast evaluations performed outside ``energy``.

        The compiled ladder path evaluates the energy inline and reports
        its evaluation count here so the budget stays honest.
        """
        if k < 0:
            raise ValueError("evaluation count cannot be negative")
        self._fast_evaluations += k

    @abstractmethod
    def _build_payload(self, x: np.ndarray):
        """Slow part: everything derived from x alone."""

    @abstractmethod
    def _energy(self, payload, y: np.ndarray) -> float:
        """Fast part: E(x, y) from the cached payload."""


def initial_state(model: EnergyModel, x, y) -> ChainState:
    """Build a ChainState from raw vectors (one slow preparation, one
    fast evaluation)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    ctx = model.prepare_slow(x)
    e = model.energy(ctx, y)
    return ChainState(x=ctx.x, y=y.copy(), ctx=ctx, energy=e)
