import hashlib
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from fastapi.testclient import TestClient

from bbviz.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def wine_payload(wine):
    return {"features": wine.features.tolist(),
            "labels": [int(l) for l in wine.labels],
            "class_names": list(wine.class_names)}


class TestBasics:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"

    def test_scenarios_listed(self, client):
        names = {s["name"] for s in client.get("/scenarios").json()["scenarios"]}
        assert {"conv", "underfit", "overfit", "regsweep",
                "rbf-vs-mlp", "satimage"} <= names

    def test_projection_matches_library(self, client):
        resp = client.post("/projection", json={"k": 3})
        body = resp.json()
        assert np.allclose(body["center"], [0.5, 0.28867513459481287], atol=1e-7)
        assert np.allclose(body["offset_b"], body["center"])

    def test_projection_rejects_k2(self, client):
        resp = client.post("/projection", json={"k": 2})
        assert resp.status_code == 400
        assert resp.json()["detail"]["kind"] == "data"


class TestProject:
    def test_outputs_direct(self, client):
        resp = client.post("/project", json={
            "outputs": [[0.3, 0.3, 0.3], [1.0, 0.0, 0.0]],
            "labels": [0, 0], "kind": "new"})
        body = resp.json()
        assert body["k"] == 3
        p0, p1 = body["points"]
        assert abs(p0["x"] - 0.5) < 1e-12
        assert abs(p0["y"] - 0.28867513459481287) < 1e-7
        assert abs(p1["x"]) < 1e-12 and abs(p1["y"]) < 1e-12
        assert p0["kind"] == "new"

    def test_square_view_for_two_columns(self, client):
        resp = client.post("/project", json={
            "outputs": [[0.25, 0.75]], "labels": [1]})
        point = resp.json()["points"][0]
        assert (point["x"], point["y"]) == (0.25, 0.75)

    def test_needs_outputs_or_model(self, client):
        resp = client.post("/project", json={"labels": [0]})
        assert resp.status_code == 400

    def test_shape_mismatch_rejected(self, client):
        resp = client.post("/project", json={
            "outputs": [[0.1, 0.2, 0.3]], "labels": [0, 1]})
        assert resp.status_code == 400
        assert "labels" in resp.json()["detail"]["message"]


class TestTrainFlow:
    def test_train_project_report(self, client, wine):
        resp = client.post("/train", json={
            "dataset": wine_payload(wine), "model": "mlp", "hidden": 2,
            "iterations": 60, "restarts": 3, "seed": 1})
        assert resp.status_code == 200
        body = resp.json()
        doc = body["model"]
        assert doc["type"] == "mlp"
        assert "standardization" in doc["config"]
        assert body["report"]["training_errors"] <= 5

        proj = client.post("/project", json={
            "model": doc, "features": wine.features.tolist(),
            "labels": [int(l) for l in wine.labels], "kind": "train"})
        assert len(proj.json()["points"]) == wine.n

        rep = client.post("/report", json={
            "model": doc, "dataset": wine_payload(wine), "threshold": 0.9})
        metrics = rep.json()
        assert metrics["errors"] == body["report"]["training_errors"]
        kept = [row["kept"] for row in metrics["threshold_table"]]
        assert kept == sorted(kept, reverse=True)
        assert any(row["theta"] == 0.9 for row in metrics["threshold_table"])

    def test_train_rbf(self, client, wine):
        resp = client.post("/train", json={
            "dataset": wine_payload(wine), "model": "rbf", "centers": 6,
            "restarts": 10, "seed": 1})
        assert resp.json()["report"]["training_errors"] <= 3

    def test_validation_error_is_422(self, client, wine):
        resp = client.post("/train", json={
            "dataset": wine_payload(wine), "model": "forest"})
        assert resp.status_code == 422


class TestPerturbEndpoint:
    def test_replicas_and_sources(self, client, wine):
        resp = client.post("/perturb", json={
            "dataset": wine_payload(wine), "fraction": 0.05,
            "per_point": 2, "seed": 3, "selection": [0, 1, 2]})
        body = resp.json()
        assert len(body["dataset"]["features"]) == 6
        assert body["sources"] == [0, 0, 1, 1, 2, 2]

    def test_zero_fraction_returns_original_units(self, client, wine):
        resp = client.post("/perturb", json={
            "dataset": wine_payload(wine), "fraction": 0.0, "per_point": 1})
        features = np.array(resp.json()["dataset"]["features"])
        assert np.allclose(features, wine.features, atol=1e-9)


class TestRenderEndpoint:
    def test_svg_wellformed_and_deterministic(self, client):
        points = [{"x": 0.0, "y": 0.0, "class": 0, "kind": "train", "source": 0},
                  {"x": 1.0, "y": 0.0, "class": 1, "kind": "train", "source": 1}]
        payload = {"k": 3, "points": points, "hull": True}
        a = client.post("/render", json=payload).json()["svg"]
        b = client.post("/render", json=payload).json()["svg"]
        assert a == b
        ET.fromstring(a)

    def test_segments(self, client):
        payload = {"k": 3, "points": [],
                   "segments": [{"start": [0, 0, 0], "end": [1, 0, 0]}]}
        svg = client.post("/render", json=payload).json()["svg"]
        assert svg.count("<line ") == 4

    def test_square_view_render(self, client):
        points = [{"x": 0.9, "y": 0.1, "class": 0, "kind": "test", "source": 0}]
        svg = client.post("/render", json={"k": 2, "points": points}).json()["svg"]
        assert svg.count("<line ") == 4  # unit-square frame
        ET.fromstring(svg)


class TestReliabilityEndpoint:
    def test_vertex_case(self, client):
        training = {"k": 3, "points": [
            {"x": 0.0, "y": 0.0, "class": 0, "kind": "train", "source": 0},
            {"x": 1.0, "y": 0.0, "class": 1, "kind": "train", "source": 1},
            {"x": 0.5, "y": 0.8660254037844386, "class": 2, "kind": "train", "source": 2}]}
        resp = client.post("/reliability", json={
            "k": 3, "training": training, "new_output": [1.0, 0.0, 0.0],
            "neighbors": 1})
        body = resp.json()
        assert body["vertex_distances"][0] < 1e-12
        assert body["knn_agreement"] == 1.0


class TestReproduceEndpoint:
    def test_underfit_files_and_manifest(self, client, wine):
        resp = client.post("/reproduce", json={
            "scenario": "underfit", "seed": 1, "dataset": wine_payload(wine)})
        body = resp.json()
        files = body["files"]
        assert {"underfit_best.svg", "underfit_worst.svg", "metrics.json"} <= set(files)
        manifest = body["manifest"]
        assert manifest["scenario"] == "underfit"
        for name, digest in manifest["artifacts"].items():
            assert hashlib.sha256(files[name].encode()).hexdigest() == digest

    def test_unknown_scenario(self, client, wine):
        resp = client.post("/reproduce", json={
            "scenario": "nope", "seed": 1, "dataset": wine_payload(wine)})
        assert resp.status_code == 400
        assert "valid" in resp.json()["detail"]["message"]
