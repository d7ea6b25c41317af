"""Statistical validation battery for randomness sources.

Four measurements — chi-square uniformity, Kolmogorov-Smirnov distance,
lagged autocorrelation, and binned Shannon entropy — each with a pass/fail
verdict at the 1% level, rolled up into a ValidationReport.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSeriesError, InsufficientSampleError

KS_CRITICAL_1PCT = 1.63  # c(alpha) for the asymptotic D_crit = c / sqrt(n)
AUTOCORR_BAND = 3.0      # |r| < AUTOCORR_BAND / sqrt(n)
CHI2_MIN_P = 0.01
ENTROPY_RATIO = 0.99


# --- chi-square survival function via incomplete gamma -----------------------
# Series for P(a, x) when x < a + 1, continued fraction for Q(a, x) otherwise
# (independent of any library chi-square routine).

def _gamma_p_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    n = a
    for _ in range(10_000):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi2_sf(statistic: float, dof: int) -> float:
    """Survival function of the chi-square distribution."""
    if statistic < 0 or dof < 1:
        raise ValueError("statistic must be >= 0 and dof >= 1")
    if statistic == 0.0:
        return 1.0
    a = dof / 2.0
    x = statistic / 2.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


# --- individual tests --------------------------------------------------------


def chi_square_uniformity(samples, bins: int) -> tuple[float, int, float]:
    """Equal-width-bin chi-square test of U(0,1) uniformity.

    Returns (statistic, dof, p_value). Requires >= 5 expected counts per bin.
    """
    x = np.asarray(samples, dtype=np.float64)
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if x.size < 5 * bins:
        raise InsufficientSampleError(
            f"need >= {5 * bins} samples for {bins} bins, got {x.size}")
    counts = np.bincount(
        np.minimum((x * bins).astype(np.int64), bins - 1), minlength=bins)
    expected = x.size / bins
    statistic = float(np.sum((counts - expected) ** 2) / expected)
    dof = bins - 1
    return statistic, dof, chi2_sf(statistic, dof)


def ks_uniform(samples) -> float:
    """Two-sided KS distance between the empirical CDF and U(0,1)."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n == 0:
        raise InsufficientSampleError("KS test needs at least one sample")
    i = np.arange(1, n + 1, dtype=np.float64)
    d_plus = np.max(i / n - x)
    d_minus = np.max(x - (i - 1.0) / n)
    return float(max(d_plus, d_minus))


def autocorrelation(samples, max_lag: int) -> list[tuple[int, float]]:
    """Sample autocorrelation r(k) for k = 1..max_lag."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size <= max_lag + 1:
        raise InsufficientSampleError(
            f"need > {max_lag + 1} samples for max_lag={max_lag}")
    centered = x - x.mean()
    denom = float(np.dot(centered, centered))
    if denom == 0.0:
        raise DegenerateSeriesError("constant series has no autocorrelation")
    return [
        (k, float(np.dot(centered[:-k], centered[k:]) / denom))
        for k in range(1, max_lag + 1)
    ]


def binned_entropy(samples, bins: int) -> float:
    """Shannon entropy (bits) of the equal-width empirical bin distribution."""
    x = np.asarray(samples, dtype=np.float64)
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if x.size == 0:
        raise InsufficientSampleError("entropy needs at least one sample")
    counts = np.bincount(
        np.minimum((x * bins).astype(np.int64), bins - 1), minlength=bins)
    p = counts[counts > 0] / x.size
    return float(-np.sum(p * np.log2(p)))


# --- the battery -------------------------------------------------------------


@dataclass
class BatteryConfig:
    chi_square_bins: int = 256
    max_lag: int = 10
    entropy_bins: int = 1 << 16

    def effective_entropy_bins(self, n_samples: int) -> int:
        # Cap at n/16 so a conforming source's expected collision loss stays
        # well inside the 1% entropy slack at any sample size.
        return max(2, min(self.entropy_bins, n_samples // 16))


@dataclass
class ValidationReport:
    source_id: str
    sample_count: int
    chi_square: dict
    ks: dict
    autocorr: list[tuple[int, float]]
    entropy_bits: float
    entropy_bins: int
    verdict: dict = field(default_factory=dict)

    @property
    def overall_pass(self) -> bool:
        return bool(self.verdict.get("overall"))


def run_battery(samples, source_id: str = "unknown",
                config: BatteryConfig | None = None) -> ValidationReport:
    """Run all four tests and derive 1%-level pass/fail verdicts."""
    cfg = config or BatteryConfig()
    x = np.asarray(samples, dtype=np.float64)
    n = x.size
    try:
        statistic, dof, p_value = chi_square_uniformity(x, cfg.chi_square_bins)
    except (InsufficientSampleError, ValueError) as exc:
        raise InsufficientSampleError(f"chi-square: {exc}") from exc
    try:
        d = ks_uniform(x)
    except InsufficientSampleError as exc:
        raise InsufficientSampleError(f"ks: {exc}") from exc
    try:
        autocorr = autocorrelation(x, cfg.max_lag)
    except (InsufficientSampleError, DegenerateSeriesError) as exc:
        raise type(exc)(f"autocorrelation: {exc}") from exc
    ent_bins = cfg.effective_entropy_bins(n)
    entropy = binned_entropy(x, ent_bins)

    ks_critical = KS_CRITICAL_1PCT / math.sqrt(n)
    corr_band = AUTOCORR_BAND / math.sqrt(n)
    verdict = {
        "chi_square": p_value >= CHI2_MIN_P,
        "ks": d < ks_critical,
        "autocorrelation": all(abs(r) < corr_band for _, r in autocorr),
        "entropy": entropy >= ENTROPY_RATIO * math.log2(ent_bins),
    }
    verdict["overall"] = all(verdict.values())
    return ValidationReport(
        source_id=source_id,
        sample_count=n,
        chi_square={"statistic": statistic, "dof": dof, "p_value": p_value},
        ks={"statistic": d, "critical_1pct": ks_critical},
        autocorr=autocorr,
        entropy_bits=entropy,
        entropy_bins=ent_bins,
        verdict=verdict,
    )
