"""qrisk: Monte Carlo VaR/CVaR with pluggable (quantum) randomness sources."""

__version__ = "0.1.0"

from .bits import BitBuffer, NormalBatch, UniformBatch, bits_to_uniform, von_neumann_extract
from .gaussian import inverse_normal_cdf, normal_cdf, uniforms_to_normals
from .market import Moments, Portfolio, PriceTable, cholesky, compute_returns, estimate_moments, load_prices
from .pool import EntropyPool, pool_create
from .randtest import BatteryConfig, ValidationReport, run_battery
from .risk import (
    PrecisionReport,
    RiskJobConfig,
    RiskReport,
    historical_risk,
    precision_study,
    run_risk_job,
    simulate_scenarios,
    sorted_quantile_var,
    tail_mean_cvar,
)
from .sources import (
    MeasurementRecordSet,
    RandomSourceDescriptor,
    SourceRegistry,
    fetch_remote,
    ingest_measurement_records,
    records_to_bits,
)

__all__ = [
    "BitBuffer",
    "UniformBatch",
    "NormalBatch",
    "bits_to_uniform",
    "von_neumann_extract",
    "inverse_normal_cdf",
    "normal_cdf",
    "uniforms_to_normals",
    "EntropyPool",
    "pool_create",
    "RandomSourceDescriptor",
    "SourceRegistry",
    "MeasurementRecordSet",
    "fetch_remote",
    "ingest_measurement_records",
    "records_to_bits",
    "BatteryConfig",
    "ValidationReport",
    "run_battery",
    "PriceTable",
    "Portfolio",
    "Moments",
    "load_prices",
    "compute_returns",
    "estimate_moments",
    "cholesky",
    "RiskJobConfig",
    "RiskReport",
    "PrecisionReport",
    "sorted_quantile_var",
    "tail_mean_cvar",
    "historical_risk",
    "simulate_scenarios",
    "run_risk_job",
    "precision_study",
]
