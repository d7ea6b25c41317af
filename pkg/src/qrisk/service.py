"""HTTP API over the risk engine: source registry, price/portfolio upload,
async risk jobs with polling, validation battery, and histogram data."""
from __future__ import annotations

import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import market
from .errors import (
    ConflictError,
    DataError,
    DomainError,
    EntropyExhaustedError,
    InsufficientDataError,
    InsufficientEntropyError,
    InsufficientPathsError,
    InsufficientSampleError,
    NotFoundError,
    OrderingError,
    PoolExhaustedError,
    QriskError,
    RecordFormatError,
    ValidationError,
)
from .randtest import BatteryConfig, run_battery
from .risk import RiskJobConfig, run_risk_job
from .sources import RandomSourceDescriptor, SourceRegistry, draw_uniform_samples
from .store import JobStore

_ERROR_STATUS = {
    ConflictError: (409, "conflict"),
    NotFoundError: (404, "not-found"),
    ValidationError: (422, "validation"),
    DomainError: (422, "validation"),
    DataError: (422, "validation"),
    OrderingError: (422, "validation"),
    InsufficientDataError: (422, "validation"),
    InsufficientSampleError: (422, "validation"),
    RecordFormatError: (422, "validation"),
    InsufficientPathsError: (422, "validation"),
    InsufficientEntropyError: (422, "entropy-exhausted"),
    EntropyExhaustedError: (422, "entropy-exhausted"),
    PoolExhaustedError: (422, "entropy-exhausted"),
}


class SourceIn(BaseModel):
    id: str
    kind: str
    params: dict = {}


class PortfolioIn(BaseModel):
    id: str
    tickers: list[str]
    weights: list[float]


class ValidateIn(BaseModel):
    samples: int


class JobIn(BaseModel):
    method: str
    alpha: float
    horizon_days: int = 1
    paths: int = 0
    portfolio_id: str
    prices_id: str
    source_id: str | None = None
    compounding: str = "sum"
    return_kind: str = "log"


class AppState:
    def __init__(self, data_dir: Path, max_workers: int = 2):
        self.data_dir = data_dir
        data_dir.mkdir(parents=True, exist_ok=True)
        (data_dir / "prices").mkdir(exist_ok=True)
        (data_dir / "validations").mkdir(exist_ok=True)
        self.registry = SourceRegistry(data_dir / "sources.json")
        self.jobs = JobStore(data_dir)
        self.executor = ThreadPoolExecutor(max_workers=max_workers)
        self.api_key = os.environ.get("QRISK_API_KEY")
        self._portfolio_path = data_dir / "portfolios.json"
        self.portfolios: dict[str, dict] = (
            json.loads(self._portfolio_path.read_text())
            if self._portfolio_path.exists() else {})
        self._lock = threading.Lock()

    def save_portfolios(self):
        self._portfolio_path.write_text(json.dumps(self.portfolios, indent=2))

    def price_path(self, prices_id: str) -> Path:
        return self.data_dir / "prices" / f"{prices_id}.csv"

    def resolve_descriptor(self, source_id: str) -> RandomSourceDescriptor:
        desc = self.registry.get(source_id)
        if desc.kind == "remote-http" and self.api_key and "api_key" not in desc.params:
            desc = RandomSourceDescriptor(
                id=desc.id, kind=desc.kind,
                params={**desc.params, "api_key": self.api_key})
        return desc


def build_job_config(state: AppState, cfg: dict) -> RiskJobConfig:
    """Resolve the stored wire-format config into an executable one."""
    prices_id = cfg["prices_id"]
    price_path = state.price_path(prices_id)
    if not price_path.exists():
        raise NotFoundError(f"unknown price table {prices_id!r}")
    prices = market.load_prices(price_path)
    pf_entry = state.portfolios.get(cfg["portfolio_id"])
    if pf_entry is None:
        raise NotFoundError(f"unknown portfolio {cfg['portfolio_id']!r}")
    portfolio = market.Portfolio(
        tickers=pf_entry["tickers"], weights=np.array(pf_entry["weights"]))
    _, moments, series = market.portfolio_inputs(
        prices, portfolio, return_kind=cfg.get("return_kind", "log"))

    if cfg["method"] == "historical":
        return RiskJobConfig(
            portfolio=portfolio, method="historical", alpha=cfg["alpha"],
            horizon_days=cfg.get("horizon_days", 1), series=series)

    if not cfg.get("source_id"):
        raise ValidationError("monte-carlo jobs need source_id")
    descriptor = state.resolve_descriptor(cfg["source_id"])
    return RiskJobConfig(
        portfolio=portfolio, method="monte-carlo", alpha=cfg["alpha"],
        horizon_days=cfg.get("horizon_days", 1), paths=cfg["paths"],
        source=descriptor, moments=moments,
        compounding=cfg.get("compounding", "sum"))


def create_app(data_dir: str | Path | None = None,
               max_workers: int = 2) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get("QRISK_DATA_DIR", "./qrisk-data"))
    state = AppState(data_dir, max_workers=max_workers)
    app = FastAPI(title="qrisk", version="0.1.0")
    app.state.qrisk = state

    @app.exception_handler(QriskError)
    async def _handle(request: Request, exc: QriskError):
        status, code = 500, "internal"
        for klass, (st, cd) in _ERROR_STATUS.items():
            if isinstance(exc, klass):
                status, code = st, cd
                break
        return JSONResponse(
            status_code=status,
            content={"code": code, "message": str(exc),
                     "detail": type(exc).__name__})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/sources", status_code=201)
    def register_source(body: SourceIn):
        desc = RandomSourceDescriptor(id=body.id, kind=body.kind,
                                      params=body.params)
        state.registry.register(desc)
        return {"id": desc.id}

    @app.get("/sources")
    def list_sources():
        return [vars(d) for d in state.registry.list()]

    @app.post("/sources/{source_id}/validate")
    def validate_source(source_id: str, body: ValidateIn):
        desc = state.resolve_descriptor(source_id)
        batch = draw_uniform_samples(desc, body.samples)
        report = run_battery(batch.values, source_id=source_id,
                             config=BatteryConfig())
        report_id = f"{source_id}-{uuid.uuid4().hex[:8]}"
        payload = {
            "id": report_id,
            "source_id": report.source_id,
            "sample_count": report.sample_count,
            "chi_square": report.chi_square,
            "ks": report.ks,
            "autocorrelation": [
                {"lag": lag, "r": r} for lag, r in report.autocorr],
            "entropy_bits": report.entropy_bits,
            "entropy_bins": report.entropy_bins,
            "verdict": report.verdict,
        }
        (state.data_dir / "validations" / f"{report_id}.json").write_text(
            json.dumps(payload, indent=2))
        return payload

    @app.post("/prices", status_code=201)
    async def upload_prices(request: Request, id: str = Query(...)):
        raw = await request.body()
        path = state.price_path(id)
        path.write_bytes(raw)
        try:
            table = market.load_prices(path)
        except QriskError:
            path.unlink(missing_ok=True)
            raise
        return {"id": id, "tickers": table.tickers,
                "dates": len(table.dates), "dropped_rows": table.dropped_rows}

    @app.get("/prices")
    def list_prices():
        out = []
        for path in sorted((state.data_dir / "prices").glob("*.csv")):
            table = market.load_prices(path)
            out.append({"id": path.stem, "tickers": table.tickers,
                        "dates": len(table.dates)})
        return out

    @app.post("/portfolios", status_code=201)
    def create_portfolio(body: PortfolioIn):
        portfolio = market.Portfolio(
            tickers=body.tickers, weights=np.array(body.weights))
        with state._lock:
            state.portfolios[body.id] = {
                "tickers": portfolio.tickers,
                "weights": portfolio.weights.tolist(),
            }
            state.save_portfolios()
        return {"id": body.id, "weights": portfolio.weights.tolist()}

    @app.get("/portfolios")
    def list_portfolios():
        return [{"id": pid, **entry} for pid, entry in state.portfolios.items()]

    @app.post("/jobs", status_code=201)
    def submit_job(body: JobIn):
        cfg = body.model_dump()
        build_job_config(state, cfg)  # full validation before queueing
        record = state.jobs.new_job(cfg)
        state.executor.submit(_execute_job, state, record.id)
        return record.to_dict()

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        return state.jobs.get(job_id).to_dict()

    @app.get("/jobs/{job_id}/report")
    def get_report(job_id: str):
        record = state.jobs.get(job_id)
        if record.status != "done":
            raise NotFoundError(
                f"job {job_id!r} has no report (status={record.status})")
        return record.result

    @app.get("/jobs/{job_id}/histogram")
    def get_histogram(job_id: str, bins: int = Query(50, ge=1, le=4096)):
        record = state.jobs.get(job_id)
        if record.status != "done":
            raise NotFoundError(
                f"job {job_id!r} not finished (status={record.status})")
        returns = state.jobs.load_returns(job_id)
        counts, edges = np.histogram(returns, bins=bins)
        return {"bins": bins, "edges": edges.tolist(),
                "counts": counts.tolist()}

    return app


def _execute_job(state: AppState, job_id: str):
    record = state.jobs.get(job_id)
    state.jobs.transition(job_id, "running")
    try:
        config = build_job_config(state, record.config)
        report, returns = run_risk_job(config, keep_returns=True)
        if returns is not None:
            state.jobs.save_returns(job_id, returns)
        state.jobs.transition(job_id, "done", result=report.to_dict())
    except Exception as exc:  # failures land in the record, not the worker log
        state.jobs.transition(
            job_id, "failed",
            error={"code": "job-failed", "message": str(exc),
                   "detail": type(exc).__name__})
