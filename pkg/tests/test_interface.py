import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from sashimi.cli import main
from sashimi.core import parse_csv
from sashimi.service import JobStore, Settings, create_app

CONFIG = {
    "selected_types": ["tumor", "immune", "stromal"],
    "q": 8,
    "bins": 48,
    "seed": 7,
}


def toy_csv(seed=3, n=120, labels=("tumor", "immune", "stromal")) -> bytes:
    rng = np.random.default_rng(seed)
    rows = ["x,y,type"]
    pts = rng.uniform(0.05, 0.95, size=(n, 2))
    marks = rng.choice(list(labels), size=n)
    for (x, y), t in zip(pts, marks):
        rows.append(f"{float(x)!r},{float(y)!r},{t}")
    return ("\n".join(rows) + "\n").encode()


@pytest.fixture()
def client(tmp_path):
    settings = Settings(data_dir=tmp_path / "jobs", workers=2,
                        retention_seconds=3600.0)
    app = create_app(settings)
    with TestClient(app) as c:
        yield c


def submit(client, data=None, config=CONFIG):
    return client.post(
        "/api/v1/jobs",
        files={"file": ("input.csv", data if data is not None else toy_csv())},
        data={"config": json.dumps(config)},
    )


def wait_done(client, job_id, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        body = client.get(f"/api/v1/jobs/{job_id}").json()
        if body["state"] in ("done", "failed"):
            return body
        time.sleep(0.05)
    raise TimeoutError(f"job {job_id} did not finish")


class TestCliExtract:
    def run_extract(self, tmp_path, input_bytes, *extra):
        src = tmp_path / "input.csv"
        src.write_bytes(input_bytes)
        out = tmp_path / "features.csv"
        curves = tmp_path / "curves"
        argv = [
            "extract", "--input", str(src), "--types", "tumor,immune,stromal",
            "--grid", "8", "--bins", "48", "--out", str(out),
            "--curves-out", str(curves), *extra,
        ]
        return main(argv), out, curves

    def test_happy_path(self, tmp_path, capsys):
        code, out, curves = self.run_extract(tmp_path, toy_csv())
        assert code == 0
        lines = out.read_bytes().decode().splitlines()
        assert len(lines) == 2
        assert lines[0].split(",")[0] == "MoranI.T"
        manifest_path = Path(capsys.readouterr().out.strip())
        assert manifest_path == curves / "manifest.json"
        assert json.loads(manifest_path.read_text())["config"]["q"] == 8
        assert (curves / "curves.json").exists()
        assert (curves / "diagram.csv").exists()

    def test_four_types_exit_2(self, tmp_path, capsys):
        src = tmp_path / "in.csv"
        src.write_bytes(toy_csv())
        code = main(["extract", "--input", str(src), "--types", "a,b,c,d"])
        assert code == 2
        assert "three types" in capsys.readouterr().err

    def test_missing_input_exit_3(self, tmp_path):
        code = main(
            ["extract", "--input", str(tmp_path / "nope.csv"), "--types", "a"]
        )
        assert code == 3

    def test_malformed_input_exit_3(self, tmp_path):
        src = tmp_path / "bad.csv"
        src.write_bytes(b"x,y,type\n0.1,oops,tumor\n")
        code = main(["extract", "--input", str(src), "--types", "tumor"])
        assert code == 3

    def test_no_selected_type_exit_4(self, tmp_path):
        code, _, _ = self.run_extract(tmp_path, toy_csv(labels=("other",)))
        assert code == 4

    @pytest.mark.parametrize(
        "flags",
        [("--rmax", "fast"), ("--features", "summaries,magic")],
    )
    def test_bad_flag_values_exit_2(self, tmp_path, flags):
        src = tmp_path / "in.csv"
        src.write_bytes(toy_csv())
        code = main(["extract", "--input", str(src), "--types", "a", *flags])
        assert code == 2

    def test_unknown_flag_exit_2(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["extract", "--bogus"])
        assert err.value.code == 2

    def test_family_subset(self, tmp_path):
        code, out, _ = self.run_extract(
            tmp_path, toy_csv(), "--features", "areal"
        )
        assert code == 0
        header = out.read_bytes().decode().splitlines()[0]
        assert "witness_" not in header
        assert "MoranI.T" in header

    def test_json_format(self, tmp_path):
        src = tmp_path / "in.csv"
        src.write_bytes(toy_csv(labels=("tumor", "immune")))
        out = tmp_path / "features.json"
        code = main([
            "extract", "--input", str(src), "--types", "tumor,immune,stromal",
            "--grid", "8", "--bins", "48", "--format", "json",
            "--out", str(out),
        ])
        assert code == 0
        payload = json.loads(out.read_text())
        # stromal is absent from the data, so its features serialize as null
        assert payload["features"]["MoranI.S"] is None
        assert payload["features"]["MoranI.T"] is not None
        assert payload["metadata"]["n_points"]["S"] == 0


class TestCliGenerate:
    def test_csr_round_trip(self, tmp_path):
        out = tmp_path / "pattern.csv"
        code = main([
            "generate", "--model", "csr", "--intensity", "80",
            "--types", "a,b", "--seed", "5", "--out", str(out),
        ])
        assert code == 0
        pattern = parse_csv(out.read_bytes())
        assert set(pattern.type_set()) == {"a", "b"}
        assert pattern.n > 50

    def test_deterministic(self, tmp_path):
        blobs = []
        for name in ("one.csv", "two.csv"):
            out = tmp_path / name
            main(["generate", "--seed", "9", "--out", str(out)])
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]

    def test_stdout_default(self, capsys):
        assert main(["generate", "--intensity", "30", "--types", "x"]) == 0
        text = capsys.readouterr().out
        assert text.startswith("x,y,type\n")

    def test_hardcore_separation(self, tmp_path):
        out = tmp_path / "hc.csv"
        main([
            "generate", "--model", "hardcore", "--intensity", "300",
            "--radius", "0.05", "--types", "a", "--seed", "2",
            "--out", str(out),
        ])
        pattern = parse_csv(out.read_bytes())
        from scipy.spatial.distance import pdist

        assert pdist(pattern.points).min() >= 0.05

    def test_bad_window_exit_2(self):
        assert main(["generate", "--window", "0,1,0"]) == 2

    def test_bad_intensity_exit_2(self):
        assert main(["generate", "--intensity", "-5"]) == 2


class TestServiceSubmit:
    def test_health(self, client):
        body = client.get("/api/v1/health")
        assert body.status_code == 200
        assert body.json()["status"] == "ok"

    def test_valid_submission_and_artifacts(self, client):
        response = submit(client)
        assert response.status_code == 201
        job_id = response.json()["job_id"]
        body = wait_done(client, job_id)
        assert body["state"] == "done"
        assert body["progress"] == 1.0
        assert len(body["artifacts"]) == 4
        features = client.get(f"/api/v1/jobs/{job_id}/artifacts/features.csv")
        assert features.status_code == 200
        assert features.headers["content-type"].startswith("text/csv")
        assert features.content.count(b"\n") == 2
        curves = client.get(f"/api/v1/jobs/{job_id}/artifacts/curves.json")
        assert curves.status_code == 200
        assert "PCF.REP" in curves.json()["curves"]
        manifest = client.get(f"/api/v1/jobs/{job_id}/artifacts/manifest.json")
        assert manifest.json()["config"]["seed"] == 7
        diagram = client.get(f"/api/v1/jobs/{job_id}/artifacts/diagram.csv")
        assert diagram.content.startswith(b"pair,dim,birth,death,capped")

    def test_oversize_upload_413(self, client):
        big = b"x" * (4 * 1024 * 1024 + 1)
        response = submit(client, data=big)
        assert response.status_code == 413

    def test_four_types_422(self, client):
        config = dict(CONFIG, selected_types=["a", "b", "c", "d"])
        assert submit(client, config=config).status_code == 422

    def test_unknown_config_key_422(self, client):
        config = dict(CONFIG, beam="full")
        assert submit(client, config=config).status_code == 422

    def test_config_not_json_422(self, client):
        response = client.post(
            "/api/v1/jobs",
            files={"file": ("input.csv", toy_csv())},
            data={"config": "{not json"},
        )
        assert response.status_code == 422

    def test_malformed_csv_422(self, client):
        assert submit(client, data=b"x,y,type\n1,2\n").status_code == 422

    def test_empty_csv_422(self, client):
        assert submit(client, data=b"x,y,type\n").status_code == 422

    def test_missing_parts_400(self, client):
        no_config = client.post(
            "/api/v1/jobs", files={"file": ("input.csv", toy_csv())}
        )
        assert no_config.status_code == 400
        no_file = client.post("/api/v1/jobs", data={"config": json.dumps(CONFIG)})
        assert no_file.status_code == 400

    def test_not_multipart_400(self, client):
        response = client.post("/api/v1/jobs", json={"config": CONFIG})
        assert response.status_code == 400

    def test_point_cap_422(self, tmp_path):
        settings = Settings(data_dir=tmp_path / "jobs", workers=1, max_points=50)
        with TestClient(create_app(settings)) as capped:
            assert submit(capped, data=toy_csv(n=120)).status_code == 422


class TestServiceStatusAndArtifacts:
    def test_unknown_job_404(self, client):
        assert client.get("/api/v1/jobs/deadbeef").status_code == 404
        assert (
            client.get("/api/v1/jobs/deadbeef/artifacts/features.csv").status_code
            == 404
        )

    def test_unknown_artifact_404(self, client):
        job_id = submit(client).json()["job_id"]
        wait_done(client, job_id)
        response = client.get(f"/api/v1/jobs/{job_id}/artifacts/secrets.txt")
        assert response.status_code == 404

    def test_artifact_before_done_409(self, client):
        # a job registered but never scheduled stays queued forever
        store = client.app.state.store
        job = store.create(client.app.state.settings.data_dir)
        response = client.get(f"/api/v1/jobs/{job.id}/artifacts/features.csv")
        assert response.status_code == 409

    def test_failed_job_reports_error(self, client):
        config = dict(CONFIG, selected_types=["ghost"])
        job_id = submit(client, config=config).json()["job_id"]
        body = wait_done(client, job_id)
        assert body["state"] == "failed"
        assert "ghost" in body["error"]
        assert body["artifacts"] == []

    def test_forward_only_transitions(self, tmp_path):
        store = JobStore()
        job = store.create(tmp_path)
        store.transition(job.id, "running")
        store.transition(job.id, "done")
        with pytest.raises(RuntimeError):
            store.transition(job.id, "running")
        with pytest.raises(RuntimeError):
            store.transition(job.id, "failed")

    def test_retention_sweep(self, tmp_path):
        settings = Settings(data_dir=tmp_path / "jobs", workers=1,
                            retention_seconds=0.0)
        with TestClient(create_app(settings)) as client:
            first = submit(client).json()["job_id"]
            wait_done(client, first)
            job_dir = client.app.state.store.get(first).directory
            assert job_dir.exists()
            time.sleep(0.02)
            submit(client)  # triggers the sweep
            assert client.get(f"/api/v1/jobs/{first}").status_code == 404
            assert not job_dir.exists()


class TestCliServiceEquivalence:
    def test_features_csv_byte_identical(self, client, tmp_path):
        data = toy_csv(seed=17)
        job_id = submit(client, data=data).json()["job_id"]
        wait_done(client, job_id)
        via_http = client.get(
            f"/api/v1/jobs/{job_id}/artifacts/features.csv"
        ).content

        src = tmp_path / "input.csv"
        src.write_bytes(data)
        out = tmp_path / "features.csv"
        code = main([
            "extract", "--input", str(src), "--types", "tumor,immune,stromal",
            "--grid", "8", "--bins", "48", "--seed", "7", "--out", str(out),
        ])
        assert code == 0
        assert out.read_bytes() == via_http

    def test_sixteen_simultaneous_jobs_isolated(self, tmp_path):
        settings = Settings(data_dir=tmp_path / "jobs", workers=4)
        inputs = {f"job{k}": toy_csv(seed=500 + k, n=60 + k) for k in range(16)}
        config = dict(CONFIG, feature_families=["summaries", "areal"], bins=32)
        with TestClient(create_app(settings)) as client:
            with ThreadPoolExecutor(max_workers=8) as pool:
                futures = {
                    name: pool.submit(submit, client, data, config)
                    for name, data in inputs.items()
                }
                ids = {}
                for name, fut in futures.items():
                    response = fut.result()
                    assert response.status_code == 201
                    ids[name] = response.json()["job_id"]
            assert len(set(ids.values())) == 16
            for name, job_id in ids.items():
                body = wait_done(client, job_id)
                assert body["state"] == "done", body
                got = client.get(
                    f"/api/v1/jobs/{job_id}/artifacts/features.csv"
                ).content
                # byte-compare against a direct single-job run of the same input
                from sashimi.pipeline import (
                    config_from_dict,
                    extract_features,
                    features_csv,
                )

                table, _ = extract_features(
                    parse_csv(inputs[name]), config_from_dict(config)
                )
                assert got == features_csv([table]), name
