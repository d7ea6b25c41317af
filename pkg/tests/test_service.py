import json
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from qrisk.service import create_app
from qrisk.store import JobStore

PRICES = "date,AA,BB\n" + "\n".join(
    f"2024-01-{d:02d},{100 + d},{50 + (d % 3)}" for d in range(1, 21)) + "\n"


@pytest.fixture
def client(tmp_path):
    app = create_app(tmp_path / "data")
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


def seed_market(client):
    r = client.post("/prices?id=demo", content=PRICES.encode())
    assert r.status_code == 201
    r = client.post("/portfolios", json={
        "id": "pf", "tickers": ["AA", "BB"], "weights": [0.5, 0.5]})
    assert r.status_code == 201
    r = client.post("/sources", json={
        "id": "p1", "kind": "pseudo", "params": {"seed": 7}})
    assert r.status_code == 201


def wait_for(client, job_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        record = client.get(f"/jobs/{job_id}").json()
        if record["status"] in ("done", "failed"):
            return record
        time.sleep(0.02)
    raise TimeoutError(f"job {job_id} still {record['status']}")


def submit_mc(client, **overrides):
    body = {"method": "monte-carlo", "alpha": 0.05, "paths": 5000,
            "portfolio_id": "pf", "prices_id": "demo", "source_id": "p1"}
    body.update(overrides)
    return client.post("/jobs", json=body)


class TestHealthAndSources:
    def test_health(self, client):
        assert client.get("/health").json() == {"status": "ok"}

    def test_register_and_list(self, client):
        seed_market(client)
        ids = [s["id"] for s in client.get("/sources").json()]
        assert ids == ["p1"]

    def test_duplicate_conflict(self, client):
        seed_market(client)
        r = client.post("/sources", json={"id": "p1", "kind": "mock",
                                          "params": {}})
        assert r.status_code == 409
        assert r.json()["code"] == "conflict"

    def test_invalid_params_rejected(self, client):
        r = client.post("/sources", json={
            "id": "bad", "kind": "mock", "params": {"p": 2.0}})
        assert r.status_code == 422

    def test_unknown_kind_rejected(self, client):
        r = client.post("/sources", json={"id": "x", "kind": "oracle",
                                          "params": {}})
        assert r.status_code == 422


class TestValidate:
    def test_conforming_source_passes(self, client, tmp_path):
        seed_market(client)
        r = client.post("/sources/p1/validate", json={"samples": 100_000})
        assert r.status_code == 200
        body = r.json()
        assert body["verdict"]["overall"] is True
        assert body["sample_count"] == 100_000
        # report persisted under the returned id
        path = tmp_path / "data" / "validations" / f"{body['id']}.json"
        assert json.loads(path.read_text())["verdict"]["overall"] is True

    def test_biased_source_fails(self, client):
        client.post("/sources", json={
            "id": "biased", "kind": "mock",
            "params": {"seed": 3, "p": 0.6}})
        body = client.post("/sources/biased/validate",
                           json={"samples": 20_000}).json()
        assert body["verdict"]["chi_square"] is False
        assert body["verdict"]["overall"] is False

    def test_unknown_source_404(self, client):
        assert client.post("/sources/nope/validate",
                           json={"samples": 100}).status_code == 404

    def test_insufficient_samples_422(self, client):
        seed_market(client)
        r = client.post("/sources/p1/validate", json={"samples": 100})
        assert r.status_code == 422


class TestMarketData:
    def test_upload_and_list_prices(self, client):
        seed_market(client)
        listing = client.get("/prices").json()
        assert listing == [{"id": "demo", "tickers": ["AA", "BB"], "dates": 20}]

    def test_bad_csv_rejected_and_not_kept(self, client):
        r = client.post("/prices?id=bad",
                        content=b"date,AA\n2024-01-02,5\n2024-01-01,6\n")
        assert r.status_code == 422
        assert all(p["id"] != "bad" for p in client.get("/prices").json())

    def test_portfolio_weights_normalized(self, client):
        r = client.post("/portfolios", json={
            "id": "pf2", "tickers": ["AA", "BB"], "weights": [2.0, 2.0]})
        assert r.json()["weights"] == [0.5, 0.5]
        listing = client.get("/portfolios").json()
        assert listing[0]["id"] == "pf2"


class TestJobs:
    def test_lifecycle(self, client):
        seed_market(client)
        r = submit_mc(client)
        assert r.status_code == 201
        job = r.json()
        assert job["status"] in ("queued", "running", "done")
        record = wait_for(client, job["id"])
        assert record["status"] == "done"
        result = record["result"]
        assert result["var"] > 0.0
        assert result["cvar"] >= result["var"]
        assert result["paths"] == 5000
        report = client.get(f"/jobs/{job['id']}/report").json()
        assert report == result

    def test_historical_job(self, client):
        seed_market(client)
        r = client.post("/jobs", json={
            "method": "historical", "alpha": 0.1,
            "portfolio_id": "pf", "prices_id": "demo"})
        record = wait_for(client, r.json()["id"])
        assert record["status"] == "done"
        assert record["result"]["method"] == "historical"
        assert record["result"]["paths"] == 19  # 20 dates -> 19 returns

    def test_unknown_source_404(self, client):
        seed_market(client)
        assert submit_mc(client, source_id="ghost").status_code == 404

    def test_unknown_portfolio_404(self, client):
        seed_market(client)
        assert submit_mc(client, portfolio_id="ghost").status_code == 404

    def test_too_few_paths_rejected_before_queueing(self, client):
        seed_market(client)
        r = submit_mc(client, alpha=0.01, paths=50)
        assert r.status_code == 422
        # nothing was queued
        assert client.get("/jobs/doesnotexist").status_code == 404

    def test_report_of_unfinished_job_404(self, client):
        seed_market(client)
        job = submit_mc(client).json()
        r = client.get(f"/jobs/{job['id']}xx/report")
        assert r.status_code == 404

    def test_histogram_matches_numpy(self, client, tmp_path):
        seed_market(client)
        job = submit_mc(client).json()
        wait_for(client, job["id"])
        body = client.get(f"/jobs/{job['id']}/histogram?bins=50").json()
        returns = np.load(
            tmp_path / "data" / "returns" / f"{job['id']}.npy")
        counts, edges = np.histogram(returns, bins=50)
        assert body["counts"] == counts.tolist()
        assert body["edges"] == edges.tolist()
        assert sum(body["counts"]) == 5000

    def test_pool_exhaustion_fails_job_with_code(self, client, tmp_path):
        from qrisk.pool import pool_create
        from qrisk.sources import PseudoByteSource

        pool_path = tmp_path / "small.qpool"
        pool_create(pool_path, PseudoByteSource(1).take_bytes, 53 * 10,
                    source_id="s")
        seed_market(client)
        client.post("/sources", json={
            "id": "pool1", "kind": "pool", "params": {"path": str(pool_path)}})
        record = wait_for(client, submit_mc(client, source_id="pool1",
                                            paths=5000).json()["id"])
        assert record["status"] == "failed"
        assert record["error"]["detail"] == "EntropyExhaustedError"

    def test_concurrent_submissions_distinct(self, client):
        seed_market(client)
        ids = {submit_mc(client).json()["id"] for _ in range(6)}
        assert len(ids) == 6
        for job_id in ids:
            assert wait_for(client, job_id)["status"] == "done"

    def test_determinism_across_runs(self, client):
        seed_market(client)
        a = wait_for(client, submit_mc(client).json()["id"])["result"]
        b = wait_for(client, submit_mc(client).json()["id"])["result"]
        assert a["var"] == b["var"]
        assert a["cvar"] == b["cvar"]


class TestPersistence:
    def test_job_log_reload_round_trip(self, client, tmp_path):
        seed_market(client)
        record = wait_for(client, submit_mc(client).json()["id"])
        store = JobStore(tmp_path / "data")
        reloaded = store.get(record["id"])
        assert reloaded.status == "done"
        assert reloaded.result == record["result"]
        assert np.array_equal(store.load_returns(record["id"]),
                              np.load(tmp_path / "data" / "returns"
                                      / f"{record['id']}.npy"))

    def test_registry_survives_restart(self, client, tmp_path):
        seed_market(client)
        app2 = create_app(tmp_path / "data")
        with TestClient(app2) as c2:
            ids = [s["id"] for s in c2.get("/sources").json()]
            assert "p1" in ids
