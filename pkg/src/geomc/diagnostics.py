"""Effective sample size and chain summaries."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from geomc.errors import EssError

__all__ = ["autocovariance", "ess", "EssReport", "summarize"]


def autocovariance(series) -> np.ndarray:
    """Biased sample autocovariance at lags ``0 .. N-1`` (FFT based)."""
    x = np.asarray(series, dtype=float)
    n = x.size
    xc = x - x.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, nfft)
    return np.fft.irfft(f * np.conj(f), nfft)[:n] / n


def ess(series) -> float:
    """Single-chain ESS ``N / tau`` with Geyer's initial monotone sequence.

    ``tau = -1 + 2 * sum(Gamma_k)`` over the leading run of positive pair sums
    ``Gamma_k = rho_2k + rho_2k+1``, made monotone non-increasing, with lags
    capped at ``N/2``. Negative lag-1 autocorrelation can push the ESS above
    ``N``; ``tau`` is floored at ``1/log10(N)`` so the result stays finite.

    Raises:
        EssError: for fewer than 10 values, non-finite values, or a constant series.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 10:
        raise EssError("need at least 10 values")
    if not np.all(np.isfinite(x)):
        raise EssError("series has non-finite values")
    acov = autocovariance(x)
    if not acov[0] > 1e-300 or np.ptp(x) == 0.0:
        raise EssError("constant series has no defined ESS")
    rho = acov / acov[0]
    max_lag = n // 2
    n_pairs = (max_lag + 1) // 2
    pairs = rho[0 : 2 * n_pairs : 2] + rho[1 : 2 * n_pairs : 2]
    total = 0.0
    prev = math.inf
    for g in pairs:
        if g <= 0.0:
            break
        g = min(g, prev)
        total += g
        prev = g
    tau = max(-1.0 + 2.0 * total, 1.0 / math.log10(n))
    return n / tau


@dataclass
class EssReport:
    ess: list
    mean_ess: float
    ess_percent: float
    ess_per_second: Optional[float]
    acceptance_rate: float
    n: int

    def to_dict(self):
        return asdict(self)


def summarize(trace, wall_seconds: float = 0.0, transform: Callable | None = None, burn_in: int = 0) -> EssReport:
    """Coordinate-wise ESS, mean ESS, ESS per 100 samples and per second.

    ``transform`` maps the sample matrix before the ESS is taken (for example
    squaring sphere coordinates back to the simplex). ``burn_in`` leading
    samples are dropped. A coordinate that never moved contributes ESS 0.
    ESS per second is ``None`` when ``wall_seconds`` is not positive.
    """
    if len(trace) == 0:
        raise EssError("cannot summarise an empty trace")
    samples = np.asarray(trace.samples)[burn_in:]
    accepted = np.asarray(trace.accepted)[burn_in:]
    if samples.shape[0] == 0:
        raise EssError("burn-in removes every sample")
    if transform is not None:
        samples = transform(samples)
    per_coord = []
    for j in range(samples.shape[1]):
        col = samples[:, j]
        per_coord.append(0.0 if np.ptp(col) == 0.0 else ess(col))
    n = samples.shape[0]
    mean_ess = float(np.mean(per_coord))
    return EssReport(
        ess=[float(e) for e in per_coord],
        mean_ess=mean_ess,
        ess_percent=100.0 * mean_ess / n,
        ess_per_second=mean_ess / wall_seconds if wall_seconds and wall_seconds > 0 else None,
        acceptance_rate=float(np.mean(accepted)),
        n=n,
    )
