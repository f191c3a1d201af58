"""Chain diagnostics: autocorrelation, integrated autocorrelation time,
rejection rates.

The quantity of interest throughout is the integrated autocorrelation
time (IAT), 1 + 2 * sum of autocorrelations: the factor by which
correlation inflates the variance of a chain average relative to
independent draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as _fft

from .errors import DegenerateChainError
from .kernels import KernelStats

__all__ = [
    "AcfTable",
    "ChainSummary",
    "autocorrelation",
    "integrated_autocorr_time",
    "rejection_rate",
    "summarize_chain",
]


@dataclass
class AcfTable:
    """Autocorrelation estimates r(0) .. r(max_lag); r(0) is exactly 1."""

    lags: np.ndarray
    values: np.ndarray


def _centered(chain) -> np.ndarray:
    v = np.asarray(chain, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("chain contains non-finite values")
    return v - v.mean()


def _autocovariance(d: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased (1/N-normalised, up to the common factor) autocovariance sums
    via FFT; identical to the direct sums up to roundoff."""
    nfft = _fft.next_fast_len(2 * d.size)
    f = _fft.rfft(d, nfft)
    acov = _fft.irfft(f * np.conj(f), nfft)
    return acov[: max_lag + 1]


def autocorrelation(chain, max_lag: int) -> AcfTable:
    """Normalised autocorrelation of a scalar chain at lags 0 .. max_lag.

    Uses the biased estimator r(k) = sum_t (v_t - m)(v_{t+k} - m) divided
    by the lag-0 sum: the positive-semidefinite convention, which keeps
    |r(k)| <= 1 and makes truncated IAT sums stable.

    Raises on a zero-variance chain (nothing to normalise by) and when
    max_lag is not within 0 .. len(chain)-1.
    """
    d = _centered(chain)
    if max_lag < 0:
        raise ValueError(f"max_lag must be >= 0, got {max_lag}")
    if max_lag >= d.size:
        raise ValueError(f"max_lag {max_lag} must be smaller than chain length {d.size}")
    acov = _autocovariance(d, max_lag)
    if acov[0] == 0.0:
        raise DegenerateChainError("chain has zero variance")
    values = acov / acov[0]
    return AcfTable(lags=np.arange(max_lag + 1), values=values)


def integrated_autocorr_time(chain, window: int | None = None) -> float:
    """Estimate the IAT of a scalar chain: 1 + 2 * sum_{k=1}^{K} r(k).

    By default K is chosen by the initial-positive-sequence rule: stop at
    the first adjacent pair r(2j) + r(2j+1) that turns negative (for a
    reversible chain the pair sums of the true ACF are positive, so a
    negative pair is noise), capped at N // 3.  Passing ``window`` instead
    uses that fixed truncation point; the raw windowed sum is cruder but
    handy for comparing estimators.

    Needs at least 100 samples to say anything meaningful.
    """
    v = np.asarray(chain, dtype=np.float64).reshape(-1)
    if v.size < 100:
        raise ValueError(f"need at least 100 samples for an IAT estimate, got {v.size}")
    cap = v.size // 3
    if window is not None:
        if window < 1:
            raise ValueError("window must be >= 1")
        k = min(int(window), cap)
        r = autocorrelation(v, k).values
        return float(1.0 + 2.0 * r[1:].sum())
    r = autocorrelation(v, cap).values
    k = cap
    j = 1  # the lag-0 pair contains r(0)=1 and cannot go negative first
    while 2 * j + 1 <= cap:
        if r[2 * j] + r[2 * j + 1] < 0.0:
            k = 2 * j - 1
            break
        j += 1
    return float(1.0 + 2.0 * r[1 : k + 1].sum())


def rejection_rate(stats: KernelStats, which: str = "outer") -> float:
    """Fraction of proposals rejected for one counter pair ("outer" or
    "inner").  Zero proposals is degenerate input, not a rate of 0."""
    if which == "outer":
        proposals, accepts = stats.outer_proposals, stats.outer_accepts
    elif which == "inner":
        proposals, accepts = stats.inner_proposals, stats.inner_accepts
    else:
        raise ValueError(f"unknown counter pair {which!r}")
    if proposals == 0:
        raise DegenerateChainError(f"no {which} proposals recorded")
    return 1.0 - accepts / proposals


@dataclass
class ChainSummary:
    """Post-burn-in summary of one scalar chain.  ``iat`` is the default
    (initial-positive-sequence) estimate; no lower bound is enforced on
    it, noisy estimates below 1 are reported as-is."""

    length: int
    mean: float
    variance: float
    acf: AcfTable
    iat: float
    rejection_rates: dict

    def as_dict(self) -> dict:
        return {
            "length": self.length,
            "mean": self.mean,
            "variance": self.variance,
            "acf": {
                "lags": [int(l) for l in self.acf.lags],
                "values": [float(x) for x in self.acf.values],
            },
            "iat": self.iat,
            "rejection_rates": dict(self.rejection_rates),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChainSummary":
        return cls(
            length=int(d["length"]),
            mean=float(d["mean"]),
            variance=float(d["variance"]),
            acf=AcfTable(
                lags=np.asarray(d["acf"]["lags"], dtype=int),
                values=np.asarray(d["acf"]["values"], dtype=np.float64),
            ),
            iat=float(d["iat"]),
            rejection_rates=dict(d["rejection_rates"]),
        )


def summarize_chain(values, rejection_rates: dict, max_lag: int = 30) -> ChainSummary:
    """Bundle the standard diagnostics for one scalar chain."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    return ChainSummary(
        length=int(v.size),
        mean=float(v.mean()),
        variance=float(v.var(ddof=1)),
        acf=autocorrelation(v, max_lag),
        iat=integrated_autocorr_time(v),
        rejection_rates=dict(rejection_rates),
    )
