import math
import time

import pytest

import server


@pytest.fixture
def client():
    server.rate_limit_storage.clear()
    server.app.config["TESTING"] = True
    with server.app.test_client() as client:
        yield client


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.get_json()["status"] == "healthy"
    assert response.headers["X-Frame-Options"] == "DENY"


def test_janson(client):
    response = client.post("/api/janson", json={"E": 10, "delta": 30, "eps": 0.5})
    assert response.status_code == 200
    assert response.get_json()["bound"] == pytest.approx(math.exp(-25 / 80))


def test_janson_validation(client):
    assert client.post("/api/janson", json={"E": 10, "delta": 30}).status_code == 400
    assert client.post("/api/janson", json={"E": "ten", "delta": 30, "eps": 0.5}).status_code == 400
    assert client.post("/api/janson", json={"E": 10, "delta": -1, "eps": 0.5}).status_code == 400
    assert client.post("/api/janson", data="not json").status_code == 400


def test_k_of_eps(client):
    response = client.post("/api/k-of-eps", json={"eps": 0.1, "c0": 0.6, "cstar": 0.5})
    assert response.get_json()["K"] == pytest.approx(245.93, abs=0.01)


def test_singular_series(client):
    response = client.get("/api/singular-series?n=2&tol=1e-6")
    assert response.status_code == 200
    assert response.get_json()["value"] == pytest.approx(1.3203236, abs=1e-6)
    assert client.get("/api/singular-series?n=1").status_code == 400
    assert client.get("/api/singular-series?n=abc").status_code == 400


def test_arith(client):
    assert client.get("/api/arith?fn=phi&n=10").get_json()["value"] == 4
    assert client.get("/api/arith?fn=squarefree&n=12").get_json()["value"] is False
    assert client.get("/api/arith?fn=sigma&n=10").status_code == 400
    assert client.get("/api/arith?fn=tau&n=0").status_code == 400


def test_rate_limit(client):
    now = time.time()
    server.rate_limit_storage["127.0.0.1"].extend([now] * server.RATE_LIMIT_REQUESTS)
    assert client.get("/api/arith?fn=tau&n=12").status_code == 429


def test_check_rate_limit_window():
    server.rate_limit_storage.clear()
    assert server.check_rate_limit("10.0.0.1", max_requests=2, window_seconds=60)
    assert server.check_rate_limit("10.0.0.1", max_requests=2, window_seconds=60)
    assert not server.check_rate_limit("10.0.0.1", max_requests=2, window_seconds=60)
    assert server.check_rate_limit("10.0.0.2", max_requests=2, window_seconds=60)
