"""Report rendering: structured text plus matplotlib figures on disk."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .randtest import ValidationReport
from .risk import PrecisionReport, RiskReport


def _pct(x: float) -> str:
    return f"{100.0 * x:.4f}%"


def render_risk_report(report: RiskReport) -> str:
    lines = [
        f"method = {report.method}",
        f"alpha = {report.alpha!r}",
        f"horizon_days = {report.horizon_days}",
        f"paths = {report.paths}",
        f"source_id = {report.source_id}",
        f"var = {report.var!r}",
        f"cvar = {report.cvar!r}",
        f"var_pct = {_pct(report.var)}",
        f"cvar_pct = {_pct(report.cvar)}",
        f"elapsed_s = {report.elapsed_s:.3f}",
    ]
    return "\n".join(lines) + "\n"


def render_precision_report(report: PrecisionReport) -> str:
    lines = [
        f"runs = {report.runs}",
        f"method = {report.method}",
        f"alpha = {report.alpha!r}",
        f"paths = {report.paths}",
        f"source_id = {report.source_id}",
        f"mean_var = {report.mean_var!r}",
        f"std_var = {report.std_var!r}",
        f"mean_cvar = {report.mean_cvar!r}",
        f"std_cvar = {report.std_cvar!r}",
        f"mean_var_pct = {_pct(report.mean_var)}",
        f"mean_cvar_pct = {_pct(report.mean_cvar)}",
        "run,var,cvar",
    ]
    for i, (v, c) in enumerate(report.per_run, start=1):
        lines.append(f"{i},{v!r},{c!r}")
    return "\n".join(lines) + "\n"


def render_validation_report(report: ValidationReport) -> str:
    chi = report.chi_square
    ks = report.ks
    lines = [
        f"source_id = {report.source_id}",
        f"sample_count = {report.sample_count}",
        f"chi_square.statistic = {chi['statistic']!r}",
        f"chi_square.dof = {chi['dof']}",
        f"chi_square.p_value = {chi['p_value']!r}",
        f"ks.statistic = {ks['statistic']!r}",
        f"ks.critical_1pct = {ks['critical_1pct']!r}",
        f"entropy_bits = {report.entropy_bits!r}",
        f"entropy_bins = {report.entropy_bins}",
    ]
    for lag, r in report.autocorr:
        lines.append(f"autocorrelation.lag{lag} = {r!r}")
    for name in ("chi_square", "ks", "autocorrelation", "entropy", "overall"):
        lines.append(
            f"verdict.{name} = {'pass' if report.verdict[name] else 'fail'}")
    return "\n".join(lines) + "\n"


def write_risk_report(report: RiskReport, path: str | Path,
                      returns: np.ndarray | None = None, bins: int = 100):
    """Write the text report; when scenario returns are at hand, render the
    simulated return distribution next to it."""
    path = Path(path)
    path.write_text(render_risk_report(report))
    if returns is not None and returns.size:
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.hist(returns, bins=bins, color="#31708f", edgecolor="none")
        for value, label, color in (
            (-report.var, f"-VaR ({_pct(report.var)})", "#c0392b"),
            (-report.cvar, f"-CVaR ({_pct(report.cvar)})", "#8e44ad"),
        ):
            ax.axvline(value, color=color, linestyle="--", label=label)
        ax.set_xlabel("portfolio return")
        ax.set_ylabel("paths")
        ax.set_title(f"{report.method}: {report.paths} paths, "
                     f"alpha={report.alpha}, h={report.horizon_days}d")
        ax.legend(loc="upper left", fontsize=8)
        fig.tight_layout()
        fig.savefig(path.with_suffix(path.suffix + ".histogram.png"), dpi=120)
        plt.close(fig)


def write_precision_report(report: PrecisionReport, path: str | Path):
    path = Path(path)
    path.write_text(render_precision_report(report))
    vars_ = [v for v, _ in report.per_run]
    cvars = [c for _, c in report.per_run]
    fig, ax = plt.subplots(figsize=(7, 4))
    runs = np.arange(1, report.runs + 1)
    ax.plot(runs, vars_, "o-", label="VaR", color="#31708f")
    ax.plot(runs, cvars, "s-", label="CVaR", color="#8e44ad")
    ax.axhline(report.mean_var, color="#31708f", linestyle=":", linewidth=1)
    ax.axhline(report.mean_cvar, color="#8e44ad", linestyle=":", linewidth=1)
    ax.set_xlabel("run")
    ax.set_ylabel("estimate")
    ax.set_title(f"precision study: {report.runs} runs x {report.paths} paths "
                 f"(std_var={report.std_var:.2e})")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path.with_suffix(path.suffix + ".runs.png"), dpi=120)
    plt.close(fig)


def write_validation_report(report: ValidationReport, path: str | Path,
                            samples: np.ndarray | None = None):
    path = Path(path)
    path.write_text(render_validation_report(report))
    if samples is None or not len(samples):
        return
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.hist(samples, bins=64, color="#31708f", edgecolor="none")
    ax1.axhline(len(samples) / 64, color="#c0392b", linestyle="--", linewidth=1)
    ax1.set_title(f"uniformity ({report.source_id})", fontsize=9)
    ax1.set_xlabel("u")
    lags = [lag for lag, _ in report.autocorr]
    rs = [r for _, r in report.autocorr]
    band = 3.0 / np.sqrt(report.sample_count)
    ax2.bar(lags, rs, color="#31708f")
    ax2.axhline(band, color="#c0392b", linestyle="--", linewidth=1)
    ax2.axhline(-band, color="#c0392b", linestyle="--", linewidth=1)
    ax2.set_title("autocorrelation", fontsize=9)
    ax2.set_xlabel("lag")
    fig.tight_layout()
    fig.savefig(path.with_suffix(path.suffix + ".figures.png"), dpi=120)
    plt.close(fig)
