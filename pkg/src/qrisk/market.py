"""Historical price ingestion and moment estimation for the simulator."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DataError,
    InsufficientDataError,
    NotPositiveSemidefiniteError,
    OrderingError,
)

JITTER_LADDER = (1e-12, 1e-10, 1e-8)


@dataclass
class PriceTable:
    tickers: list[str]
    dates: list[str]
    prices: np.ndarray  # (dates, tickers), all > 0
    dropped_rows: int = 0

    def __post_init__(self):
        self.prices = np.asarray(self.prices, dtype=np.float64)
        if self.prices.shape != (len(self.dates), len(self.tickers)):
            raise DataError("price matrix shape does not match dates/tickers")


@dataclass
class ReturnMatrix:
    returns: np.ndarray  # (periods, tickers)
    kind: str  # "log" or "simple"
    tickers: list[str] = field(default_factory=list)


@dataclass
class Moments:
    mean: np.ndarray
    covariance: np.ndarray
    chol: np.ndarray | None = None
    jitter: float = 0.0

    def require_chol(self) -> np.ndarray:
        if self.chol is None:
            self.chol, self.jitter = cholesky(self.covariance)
        return self.chol


@dataclass
class Portfolio:
    tickers: list[str]
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if len(self.tickers) != w.size:
            raise DataError("tickers and weights differ in length")
        if not np.all(np.isfinite(w)):
            raise DataError("weights must be finite")
        total = w.sum()
        if abs(total) < 1e-12:
            raise DataError("weights sum to zero; cannot normalize")
        self.weights = w / total


def load_prices(path: str | Path) -> PriceTable:
    """Read the price CSV: header ``date,T1,T2,...``; ``#`` lines ignored.

    Rows with any missing price are dropped (and counted); a non-positive
    price or out-of-order dates abort the load.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh)
                if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise DataError(f"{path}: no data rows")
    header = rows[0]
    if not header or header[0].strip().lower() != "date":
        raise DataError(f"{path}: header must start with 'date'")
    tickers = [t.strip() for t in header[1:]]
    if not tickers:
        raise DataError(f"{path}: no ticker columns")
    dates, data, dropped = [], [], 0
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(tickers) + 1:
            raise DataError(f"{path} row {i}: expected {len(tickers) + 1} fields")
        cells = [c.strip() for c in row[1:]]
        if any(c == "" for c in cells):
            dropped += 1
            continue
        try:
            values = [float(c) for c in cells]
        except ValueError as exc:
            raise DataError(f"{path} row {i}: {exc}") from exc
        for ticker, value in zip(tickers, values):
            if not value > 0:
                raise DataError(
                    f"{path} row {i}: non-positive price {value} for {ticker}")
        dates.append(row[0].strip())
        data.append(values)
    if not data:
        raise DataError(f"{path}: all rows dropped")
    for prev, cur in zip(dates, dates[1:]):
        if cur <= prev:
            raise OrderingError(f"{path}: dates not strictly increasing at {cur}")
    return PriceTable(tickers=tickers, dates=dates,
                      prices=np.array(data), dropped_rows=dropped)


def compute_returns(prices: PriceTable, kind: str = "log") -> ReturnMatrix:
    """Per-period returns: log r = ln(p_t/p_{t-1}), simple r = p_t/p_{t-1} - 1."""
    if kind not in ("log", "simple"):
        raise ValueError(f"unknown return kind {kind!r}")
    if len(prices.dates) < 2:
        raise InsufficientDataError("need at least two price dates")
    ratio = prices.prices[1:] / prices.prices[:-1]
    returns = np.log(ratio) if kind == "log" else ratio - 1.0
    return ReturnMatrix(returns=returns, kind=kind, tickers=prices.tickers)


def estimate_moments(returns: ReturnMatrix) -> Moments:
    """Sample mean and unbiased (n-1) covariance of the return matrix."""
    r = returns.returns
    if r.shape[0] < 2:
        raise InsufficientDataError("need at least two return rows")
    mean = r.mean(axis=0)
    centered = r - mean
    covariance = centered.T @ centered / (r.shape[0] - 1)
    covariance = 0.5 * (covariance + covariance.T)
    return Moments(mean=mean, covariance=covariance)


def cholesky(covariance: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor, adding diagonal jitter only if needed.

    Returns (L, jitter) with L @ L.T == covariance + jitter * I. Jitter is
    escalated through 1e-12/1e-10/1e-8 times the max diagonal.
    """
    cov = np.asarray(covariance, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be square")
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    scale = float(np.max(np.abs(np.diag(cov)))) if cov.size else 0.0
    for jitter in (0.0, *JITTER_LADDER):
        try:
            L = np.linalg.cholesky(cov + jitter * scale * np.eye(cov.shape[0]))
            return L, jitter * scale
        except np.linalg.LinAlgError:
            continue
    raise NotPositiveSemidefiniteError(
        "matrix not positive semidefinite even with jitter "
        f"{JITTER_LADDER[-1]} * {scale}")


def load_portfolio(path: str | Path) -> Portfolio:
    """Read ``TICKER,weight`` lines; weights normalized to sum 1."""
    tickers, weights = [], []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        ticker, _, weight = line.partition(",")
        try:
            weights.append(float(weight))
        except ValueError as exc:
            raise DataError(f"{path} line {lineno}: {exc}") from exc
        tickers.append(ticker.strip())
    if not tickers:
        raise DataError(f"{path}: empty portfolio file")
    return Portfolio(tickers=tickers, weights=np.array(weights))


def portfolio_inputs(prices: PriceTable, portfolio: Portfolio,
                     return_kind: str = "log"):
    """Calibration inputs for one portfolio: its return matrix, moments and
    weighted historical series, with columns aligned to the portfolio order."""
    missing = [t for t in portfolio.tickers if t not in prices.tickers]
    if missing:
        raise DataError(f"portfolio tickers absent from prices: {missing}")
    cols = [prices.tickers.index(t) for t in portfolio.tickers]
    full = compute_returns(prices, kind=return_kind)
    sub = ReturnMatrix(returns=full.returns[:, cols], kind=full.kind,
                       tickers=list(portfolio.tickers))
    moments = estimate_moments(sub)
    series = sub.returns @ portfolio.weights
    return sub, moments, series


def random_portfolio(tickers: list[str], seed: int) -> Portfolio:
    """Seeded random weights normalized to sum 1."""
    rng = np.random.default_rng(seed)
    return Portfolio(tickers=list(tickers), weights=rng.random(len(tickers)))
