import logging

import pytest
from fastapi.testclient import TestClient

import dclose.config as dclose_config
from dclose.logging_config import LOG_BUFFER, setup_logging

import serve_report
from server import STATE


@pytest.fixture
def client(tmp_path, monkeypatch):
    monkeypatch.setattr(dclose_config, "CONFIG_PATH", tmp_path / "config.json")
    monkeypatch.setattr(STATE, "results_dir", tmp_path / "results")
    # 测试客户端的请求日志会混入日志缓冲区
    httpx_logger = logging.getLogger("httpx")
    previous = httpx_logger.level
    httpx_logger.setLevel(logging.WARNING)
    setup_logging("INFO")
    STATE.reload_config()
    STATE.clear_cache()
    with TestClient(serve_report.app) as c:
        yield c
    STATE.reload_config()
    STATE.clear_cache()
    httpx_logger.setLevel(previous)


SMALL_MODEL = {"kind": "pa", "N": 300, "D": 3, "alpha": 0.3, "seed": 5}


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    data = resp.json()
    assert data["status"] == "ok"
    assert data["cached_graphs"] == []
    assert data["cache_size"] == 8
    assert data["running"] == {"experiments": 0, "randtests": 0}


def test_randtest_caches_generated_graph(client):
    body = {"model": SMALL_MODEL, "runs": 5, "seed": 2}
    first = client.post("/randtest", json=body)
    assert first.status_code == 200
    data = first.json()
    assert data["k_mode"] == "final"
    assert data["in_degree"] > 0
    assert all(row["size"] > 10 for row in data["rows"])
    assert len(client.get("/health").json()["cached_graphs"]) == 1

    second = client.post("/randtest", json=body)
    assert second.json() == data
    assert len(client.get("/health").json()["cached_graphs"]) == 1


def test_randtest_rejects_unknown_node(client):
    resp = client.post("/randtest", json={"model": SMALL_MODEL, "node": 10_000, "runs": 2})
    assert resp.status_code == 400
    assert resp.json()["detail"]["error"] == "config_error"


def test_experiment_writes_results(client, tmp_path):
    body = {
        "name": "small",
        "model": SMALL_MODEL,
        "analyses": ["profile", "approx"],
        "analysis": {"corr_top": 20},
    }
    resp = client.post("/experiments", json=body)
    assert resp.status_code == 200
    data = resp.json()
    assert data["out_dir"] == str(tmp_path / "results" / "small")
    assert {"profiles.csv", "heuristic.csv", "summary.json"} <= set(data["files"])
    assert data["summary"]["approx"]["top"] == 20
    assert (tmp_path / "results" / "small" / "summary.json").exists()


def test_experiment_conflict_is_a_bad_request(client, tmp_path):
    body = {"name": "bad", "model": SMALL_MODEL, "analysis": {"community_analysis": True}}
    resp = client.post("/experiments", json=body)
    assert resp.status_code == 400
    assert resp.json()["detail"]["error"] == "config_error"
    assert not (tmp_path / "results" / "bad").exists()


def test_experiment_name_is_validated(client):
    resp = client.post("/experiments", json={"name": "../escape", "model": SMALL_MODEL})
    assert resp.status_code == 422


def test_config_update_and_validation(client, tmp_path):
    resp = client.post("/config", json={"model": {"N": 500}, "service": {"cache_size": 2}})
    assert resp.status_code == 200
    assert resp.json()["config"]["model"]["N"] == 500
    assert (tmp_path / "config.json").exists()
    assert client.get("/config").json()["model"]["N"] == 500
    assert client.get("/health").json()["cache_size"] == 2

    bad = client.post("/config", json={"model": {"alpha": 2.0}})
    assert bad.status_code == 400
    assert client.get("/config").json()["model"]["alpha"] == 0.3

    default = client.get("/config/default").json()
    assert default["model"]["N"] == 10000


def test_logs_and_clear(client):
    client.post("/randtest", json={"model": SMALL_MODEL, "runs": 2})
    logs = client.get("/logs", params={"limit": 5}).json()
    assert logs["last_id"] > 0
    assert 0 < len(logs["logs"]) <= 5
    since = client.get("/logs", params={"since_id": logs["last_id"]}).json()
    assert since["logs"] == []

    assert client.post("/logs/clear").json() == {"status": "ok"}
    assert LOG_BUFFER.get_last_id() == 0


def test_logs_filter_by_module(client):
    client.post("/randtest", json={"model": SMALL_MODEL, "runs": 2})
    logs = client.get("/logs", params={"logger": "dclose.models"}).json()["logs"]
    assert logs
    assert all(e["logger"].startswith("dclose.models") for e in logs)
