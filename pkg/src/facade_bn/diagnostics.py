"""Convergence diagnostics for MCMC traces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantTrace, DegenerateChains

MIN_TRACE = 100


def _as_trace(trace) -> np.ndarray:
    x = np.asarray(trace, dtype=float).ravel()
    if x.size < MIN_TRACE:
        raise ValueError(f"trace needs at least {MIN_TRACE} draws, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("trace contains non-finite values")
    return x


def _autocovariance(x: np.ndarray) -> np.ndarray:
    # Biased estimator (divides by N) via zero-padded FFT.
    n = x.size
    centered = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centered, size)
    return np.fft.irfft(spectrum * np.conj(spectrum), size)[:n] / n


def acf(trace, max_lag: int = 50) -> np.ndarray:
    """Autocorrelation at lags ``0..max_lag``; ``acf[0] == 1``."""
    x = _as_trace(trace)
    if not 0 <= max_lag < x.size:
        raise ValueError("max_lag must lie in [0, len(trace))")
    acov = _autocovariance(x)
    if acov[0] <= 0:
        raise ConstantTrace("trace is constant")
    rho = acov[: max_lag + 1] / acov[0]
    rho[0] = 1.0
    return np.clip(rho, -1.0, 1.0)


def ess(trace) -> float:
    """Effective sample size with Geyer's initial positive sequence.

    Lag pairs ``rho[2m] + rho[2m+1]`` are summed while positive; the first
    pair is always kept. The integrated time is floored at ``1/log10(N)``, so
    anticorrelated traces may report ESS above N.
    """
    x = _as_trace(trace)
    n = x.size
    acov = _autocovariance(x)
    if acov[0] <= 0:
        raise ConstantTrace("trace is constant")
    rho = acov / acov[0]
    tau = -1.0
    for m in range(0, n // 2):
        pair = rho[2 * m] + rho[2 * m + 1]
        if m > 0 and pair <= 0:
            break
        tau += 2.0 * pair
    tau = max(tau, 1.0 / math.log10(n))
    return n / tau


def mcse(trace) -> float:
    """Monte Carlo standard error of the mean, ``sd / sqrt(ess)``."""
    x = _as_trace(trace)
    return float(x.std(ddof=1) / math.sqrt(ess(x)))


def psrf(chains) -> float:
    """Split-chain potential scale reduction factor.

    Each chain is halved; with ``n`` draws per half, ``W`` the mean
    within-half variance and ``B / n`` the variance of half means,
    the result is ``sqrt((n - 1) / n + B / (n * W))``.
    """
    arr = np.asarray(chains, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise ValueError("psrf needs a (chains, draws) array with at least 2 chains")
    if arr.shape[1] < MIN_TRACE:
        raise ValueError(f"chains need at least {MIN_TRACE} draws")
    if all(np.array_equal(arr[0], c) for c in arr[1:]):
        raise DegenerateChains("all chains are identical")
    half = arr.shape[1] // 2
    split = np.concatenate([arr[:, :half], arr[:, arr.shape[1] - half :]], axis=0)
    n = split.shape[1]
    w = split.var(axis=1, ddof=1).mean()
    if w <= 0:
        raise DegenerateChains("zero within-chain variance")
    b = n * split.mean(axis=1).var(ddof=1)
    return float(math.sqrt((n - 1) / n + b / (n * w)))


@dataclass(frozen=True)
class Diagnostics:
    mean: float
    sd: float
    ess: float
    psrf: float
    mcse: float
    acf: tuple[float, ...]
    passed: bool = True
    failures: tuple[str, ...] = ()
    series: dict = field(default_factory=dict, repr=False, compare=False)

    def to_dict(self, include_series: bool = False) -> dict:
        out = {
            "mean": self.mean,
            "sd": self.sd,
            "ess": self.ess,
            "psrf": self.psrf,
            "mcse": self.mcse,
            "acf": list(self.acf),
            "passed": self.passed,
            "failures": list(self.failures),
        }
        if include_series:
            out["series"] = self.series
        return out


def plot_series(chains, max_lag: int = 50, stride: int = 1) -> dict:
    """Trace, running-mean and ACF series per chain for external plotting."""
    arr = np.asarray(chains, dtype=float)
    out = {"trace": [], "running_mean": [], "acf": []}
    for chain in arr:
        running = np.cumsum(chain) / np.arange(1, chain.size + 1)
        out["trace"].append(chain[::stride].tolist())
        out["running_mean"].append(running[::stride].tolist())
        try:
            out["acf"].append(acf(chain, max_lag).tolist())
        except ConstantTrace:
            out["acf"].append(None)
    return out


def diagnose(chains, psrf_max: float = 1.1, ess_min: float = 400.0, max_lag: int = 50,
             with_series: bool = False) -> Diagnostics:
    """Summarise a ``(chains, draws)`` array; ESS sums the per-chain values."""
    arr = np.asarray(chains, dtype=float)
    pooled = arr.ravel()
    mean = float(pooled.mean())
    sd = float(pooled.std(ddof=1))
    series = plot_series(arr, max_lag) if with_series else {}
    failures = []
    try:
        total_ess = float(sum(ess(c) for c in arr))
        rho = acf(arr[0], min(max_lag, arr.shape[1] - 1))
    except ConstantTrace as exc:
        return Diagnostics(mean, sd, math.nan, math.nan, math.nan, (), False,
                           (f"constant trace: {exc}",), series)
    try:
        r_hat = psrf(arr)
    except DegenerateChains as exc:
        r_hat = math.nan
        failures.append(f"degenerate chains: {exc}")
    if not r_hat < psrf_max and not failures:
        failures.append(f"psrf {r_hat:.4f} >= {psrf_max}")
    if not total_ess > ess_min:
        failures.append(f"ess {total_ess:.1f} <= {ess_min}")
    return Diagnostics(
        mean=mean,
        sd=sd,
        ess=total_ess,
        psrf=r_hat,
        mcse=sd / math.sqrt(total_ess),
        acf=tuple(float(v) for v in rho),
        passed=not failures,
        failures=tuple(failures),
        series=series,
    )


def diagnostics_report(chain_sets, psrf_max: float = 1.1, ess_min: float = 400.0,
                       max_lag: int = 50, with_series: bool = False) -> dict:
    """Per-coefficient :class:`Diagnostics` for a mapping of id -> ChainSet."""
    return {
        cid: diagnose(cs.chains, psrf_max, ess_min, max_lag, with_series)
        for cid, cs in chain_sets.items()
    }
