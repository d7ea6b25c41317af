"""VaR/CVaR estimators, the Monte Carlo scenario engine, and the
repeated-run precision study.

Sign convention: returns are signed (losses negative); VaR and CVaR are
reported as positive loss magnitudes, fractions of portfolio value.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientPathsError, ValidationError
from .market import Moments, Portfolio
from .sources import RandomSourceDescriptor, make_normal_source

DEFAULT_CHUNK_PATHS = 200_000


def _tail_rank(n: int, alpha: float) -> int:
    k = int(math.floor(n * alpha))
    if k < 1:
        raise InsufficientPathsError(n, alpha)
    return k


def sorted_quantile_var(returns, alpha: float) -> float:
    """VaR as the negated k-th smallest return, k = floor(N * alpha), 1-based."""
    r = np.asarray(returns, dtype=np.float64)
    k = _tail_rank(r.size, alpha)
    return float(-np.partition(r, k - 1)[k - 1])


def tail_mean_cvar(returns, alpha: float) -> float:
    """CVaR as the negated mean of the k = floor(N * alpha) smallest returns."""
    r = np.asarray(returns, dtype=np.float64)
    k = _tail_rank(r.size, alpha)
    tail = np.partition(r, k - 1)[:k]
    return float(-tail.mean())


@dataclass
class RiskReport:
    var: float
    cvar: float
    method: str
    alpha: float
    horizon_days: int
    paths: int
    source_id: str
    elapsed_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "var": self.var,
            "cvar": self.cvar,
            "method": self.method,
            "alpha": self.alpha,
            "horizon_days": self.horizon_days,
            "paths": self.paths,
            "source_id": self.source_id,
            "elapsed_s": self.elapsed_s,
        }


@dataclass
class RiskJobConfig:
    portfolio: Portfolio
    method: str  # "historical" | "monte-carlo"
    alpha: float
    horizon_days: int = 1
    paths: int = 0
    source: RandomSourceDescriptor | None = None
    moments: Moments | None = None
    series: np.ndarray | None = None  # historical portfolio return series
    compounding: str = "sum"  # "sum" (h daily draws) | "sqrt_h" (scaled single draw)

    def __post_init__(self):
        if self.method not in ("historical", "monte-carlo"):
            raise ValidationError(f"unknown method {self.method!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.horizon_days < 1:
            raise ValidationError("horizon_days must be >= 1")
        if self.compounding not in ("sum", "sqrt_h"):
            raise ValidationError(f"unknown compounding {self.compounding!r}")
        if self.method == "monte-carlo":
            if self.paths < 1 or self.paths * self.alpha < 1.0:
                raise InsufficientPathsError(self.paths, self.alpha)
            if self.source is None:
                raise ValidationError("monte-carlo method needs a source")
            if self.moments is None:
                raise ValidationError("monte-carlo method needs calibrated moments")
        elif self.series is None:
            raise ValidationError("historical method needs a return series")


def historical_risk(series, alpha: float, horizon_days: int = 1) -> RiskReport:
    """Empirical VaR/CVaR straight off a historical portfolio return series."""
    r = np.asarray(series, dtype=np.float64)
    start = time.perf_counter()
    var = sorted_quantile_var(r, alpha)
    cvar = tail_mean_cvar(r, alpha)
    return RiskReport(
        var=var, cvar=cvar, method="historical", alpha=alpha,
        horizon_days=horizon_days, paths=int(r.size),
        source_id="historical", elapsed_s=time.perf_counter() - start)


def simulate_scenarios(
    moments: Moments,
    portfolio: Portfolio,
    horizon_days: int,
    n_paths: int,
    source,
    compounding: str = "sum",
    chunk_paths: int = DEFAULT_CHUNK_PATHS,
) -> np.ndarray:
    """Simulate N portfolio returns over the horizon.

    Per path: h independent correlated daily draws x = mu + L z, summed per
    asset over the horizon, then aggregated with the portfolio weights.
    Variates are consumed path-major, day-minor, asset-innermost, so results
    depend only on the source's byte stream, not on chunking.
    """
    L = moments.require_chol()
    mu = np.asarray(moments.mean, dtype=np.float64)
    w = portfolio.weights
    m = mu.size
    if w.size != m:
        raise ValidationError(
            f"portfolio has {w.size} weights but moments cover {m} assets")
    h = horizon_days if compounding == "sum" else 1
    scale = 1.0 if compounding == "sum" else math.sqrt(horizon_days)
    drift = mu * (horizon_days if compounding == "sqrt_h" else 1.0)

    out = np.empty(n_paths, dtype=np.float64)
    done = 0
    while done < n_paths:
        chunk = min(chunk_paths, n_paths - done)
        z = source.draw(chunk * h * m).reshape(chunk, h, m)
        daily = drift + scale * (z @ L.T)  # (chunk, h, m)
        asset_returns = daily.sum(axis=1)  # (chunk, m)
        out[done : done + chunk] = asset_returns @ w
        done += chunk
    return out


def run_risk_job(config: RiskJobConfig, keep_returns: bool = False):
    """Execute one risk job; returns (RiskReport, returns or None)."""
    start = time.perf_counter()
    if config.method == "historical":
        report = historical_risk(
            config.series, config.alpha, config.horizon_days)
        report.elapsed_s = time.perf_counter() - start
        returns = np.asarray(config.series, dtype=np.float64)
        return report, (returns if keep_returns else None)

    source = make_normal_source(config.source)
    returns = simulate_scenarios(
        config.moments, config.portfolio, config.horizon_days,
        config.paths, source, compounding=config.compounding)
    report = RiskReport(
        var=sorted_quantile_var(returns, config.alpha),
        cvar=tail_mean_cvar(returns, config.alpha),
        method="monte-carlo",
        alpha=config.alpha,
        horizon_days=config.horizon_days,
        paths=config.paths,
        source_id=source.source_id,
        elapsed_s=time.perf_counter() - start,
    )
    return report, (returns if keep_returns else None)


@dataclass
class PrecisionReport:
    runs: int
    per_run: list[tuple[float, float]]  # (var, cvar)
    mean_var: float
    std_var: float
    mean_cvar: float
    std_cvar: float
    method: str = "monte-carlo"
    alpha: float = 0.0
    paths: int = 0
    source_id: str = ""

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "per_run": [{"var": v, "cvar": c} for v, c in self.per_run],
            "mean_var": self.mean_var,
            "std_var": self.std_var,
            "mean_cvar": self.mean_cvar,
            "std_cvar": self.std_cvar,
            "method": self.method,
            "alpha": self.alpha,
            "paths": self.paths,
            "source_id": self.source_id,
        }


def _run_source(descriptor: RandomSourceDescriptor, run_index: int,
                independent: bool):
    """Per-run normal source with non-overlapping entropy.

    Seeded kinds get a distinct child seed per run; stream kinds (pool,
    remote, records) consume disjoint ranges by construction, so a single
    shared source is advanced across runs.
    """
    if not independent or descriptor.kind not in ("pseudo", "mock"):
        return make_normal_source(descriptor)
    from .sources import BitStreamNormalSource, MockBitSource, PseudoNormalSource

    params = descriptor.params
    base = int(params.get("seed", 0))
    child = np.random.SeedSequence(entropy=base, spawn_key=(run_index,))
    if descriptor.kind == "pseudo":
        source = PseudoNormalSource(child)
    else:
        bit_src = MockBitSource(child, float(params.get("p", 0.5)))
        source = BitStreamNormalSource(
            bit_src, extract=str(params.get("extract")).lower() in ("1", "true"))
    source.source_id = f"{descriptor.id}#run{run_index}"
    return source


def precision_study(config: RiskJobConfig, runs: int,
                    independent_substreams: bool = True) -> PrecisionReport:
    """K independent risk jobs; dispersion of the per-run estimates.

    With `independent_substreams` off, seeded sources reuse the same seed
    every run and the reported standard deviations are exactly zero.
    """
    if runs < 2:
        raise ValidationError("precision study needs at least 2 runs")
    if config.method != "monte-carlo":
        raise ValidationError("precision study applies to monte-carlo jobs")

    shared_stream = config.source.kind not in ("pseudo", "mock")
    shared_source = make_normal_source(config.source) if shared_stream else None
    per_run: list[tuple[float, float]] = []
    from .errors import EntropyExhaustedError, PartialStudyError, PoolExhaustedError

    for i in range(runs):
        if shared_stream:
            source = shared_source
        elif independent_substreams:
            source = _run_source(config.source, i, True)
        else:
            source = make_normal_source(config.source)
        try:
            returns = simulate_scenarios(
                config.moments, config.portfolio, config.horizon_days,
                config.paths, source, compounding=config.compounding)
        except (EntropyExhaustedError, PoolExhaustedError) as exc:
            raise PartialStudyError(i, runs, exc) from exc
        per_run.append((
            sorted_quantile_var(returns, config.alpha),
            tail_mean_cvar(returns, config.alpha),
        ))
    vars_ = np.array([v for v, _ in per_run])
    cvars = np.array([c for _, c in per_run])
    return PrecisionReport(
        runs=runs,
        per_run=per_run,
        mean_var=float(vars_.mean()),
        std_var=float(vars_.std(ddof=1)),
        mean_cvar=float(cvars.mean()),
        std_cvar=float(cvars.std(ddof=1)),
        alpha=config.alpha,
        paths=config.paths,
        source_id=config.source.id,
    )


def analytic_var_se(sigma_h: float, alpha: float, n_paths: int) -> float:
    """Asymptotic std of the empirical-quantile VaR estimator.

    sqrt(alpha (1-alpha) / N) / phi(z_alpha), scaled by the horizon
    standard deviation of the portfolio return.
    """
    from .gaussian import inverse_normal_cdf, normal_pdf

    z = inverse_normal_cdf(alpha)
    return sigma_h * math.sqrt(alpha * (1 - alpha) / n_paths) / float(normal_pdf(z))
