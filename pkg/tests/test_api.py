import pytest
from fastapi.testclient import TestClient

from archipelago.core.config import get_settings
from archipelago.main import create_app


C3C2 = {"prefix": [{"cyclic": 3}, {"cyclic": 2}]}


@pytest.fixture
def client():
    return TestClient(create_app())


class TestCoreRoutes:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "healthy"
        assert body["word_size_budget"] == 1_000_000
        assert "X-Request-ID" in response.headers

    def test_liveness(self, client):
        assert client.get("/liveness").json() == {"status": "alive"}


class TestCalculusRoutes:
    def test_reduce_over_the_default_family(self, client):
        response = client.post("/calculus/reduce", json={"expression": "g1:2 g1:-2 g2:5"})
        assert response.status_code == 200
        body = response.json()
        assert body["word"] == "g2:5"
        assert body["letters"] == [[2, "5"]]

    def test_reduce_over_a_given_family(self, client):
        response = client.post("/calculus/reduce", json={"expression": "g1:2 g1:2", "family": C3C2})
        assert response.json()["word"] == "g1:1"

    def test_project(self, client):
        response = client.post("/calculus/project", json={"expression": "nest()", "depth": 2})
        assert response.json()["word"] == "g1:1·g2:2"

    def test_tau_without_depth_returns_the_schema(self, client):
        response = client.post("/calculus/tau", json={"expression": "nest()", "level": 1})
        assert response.status_code == 200
        assert response.json()["schema"] == "tau[1](nest(k=1.., base=g{k}:1, exp=k+1))"

    def test_tau_with_depth(self, client):
        response = client.post("/calculus/tau", json={"expression": "nest()", "level": 1, "depth": 3})
        assert response.json()["word"] == "g2:1·g3:3·g2:1·g3:3"

    def test_eq(self, client):
        response = client.post("/calculus/eq", json={"left": "g1:1", "right": "1", "max_depth": 5})
        assert response.json()["text"] == "DistinctWitness(n=1)"

    def test_eqa(self, client):
        response = client.post(
            "/calculus/eqa",
            json={"left": "g1:1", "right": "1", "max_level": 3, "max_depth": 5},
        )
        body = response.json()
        assert body["text"] == "EqualCertified(j=1, structural)"
        assert body["verdict"]["status"] == "EqualCertified"

    def test_torsion(self, client):
        response = client.post("/calculus/torsion", json={"expression": "g1:1 g2:1 g1:2", "family": C3C2})
        body = response.json()
        assert body["torsion"] is True
        assert body["witness"] == {"conjugator": "g1:1", "core": "g2:1", "order": 2}

    def test_classify(self, client):
        response = client.post("/calculus/classify", json={"family": {"tail": ["Q"]}})
        assert response.status_code == 200
        body = response.json()
        assert body["prototype"] == "A_Z"
        assert body["lambda"] == 0

    def test_classify_with_witnesses(self, client):
        response = client.post("/calculus/classify", json={"family": {"tail": [{"cyclic": 2}]}, "witnesses": 2})
        body = response.json()
        assert body["prototype"] == "A_Z2"
        assert body["lambda"] == "countable"
        assert [m["rule"] for m in body["witness_maps"]] == ["pairing:Z2", "pairing:Z2"]

    def test_witness(self, client):
        response = client.post("/calculus/witness/lemma20", json={"family": C3C2, "size": 5})
        assert response.status_code == 200
        body = response.json()
        assert body["name"] == "lemma20"
        assert [c["outcome"] for c in body["certificates"]] == ["holds"] * 5


class TestErrors:
    def test_parse_error(self, client):
        response = client.post("/calculus/reduce", json={"expression": "g1:1 ("})
        assert response.status_code == 400
        body = response.json()
        assert body["success"] is False
        assert body["error_type"] == "ParseException"
        assert "column" in body["details"]

    def test_bad_family(self, client):
        response = client.post("/calculus/reduce", json={"expression": "1", "family": {"tail": []}})
        assert response.status_code == 400
        assert response.json()["error_type"] == "ConfigException"

    def test_unknown_witness(self, client):
        response = client.post("/calculus/witness/banach", json={})
        assert response.status_code == 422
        assert response.json()["error_type"] == "UnsupportedException"

    def test_missing_field(self, client):
        response = client.post("/calculus/project", json={"expression": "nest()"})
        assert response.status_code == 422
        assert response.json()["errors"][0]["field"] == "body.depth"

    def test_resource_budget(self, client, monkeypatch):
        monkeypatch.setenv("ARCHIPELAGO_WORD_SIZE_BUDGET", "10")
        get_settings.cache_clear()
        response = client.post("/calculus/project", json={"expression": "nest()", "depth": 6})
        assert response.status_code == 413
        assert response.json()["error_type"] == "ResourceBudgetExceeded"
