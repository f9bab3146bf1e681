import json
import threading
import urllib.error
import urllib.request

import pytest

from impulsekit.sessionlog import parse_session, serialize_session
from impulsekit.server import make_server
from impulsekit.simulate import CohortSpec, SubjectParams, simulate_sst_session

from test_sessionlog import minimal_session


@pytest.fixture
def running_server(tmp_path):
    server = make_server(0, tmp_path)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    yield server, base, tmp_path / "sessions.jsonl"
    server.shutdown()
    server.server_close()


def post(base, body: bytes, path="/api/sessions"):
    req = urllib.request.Request(base + path, data=body,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as e:
        return e.code, json.loads(e.read())


def get(base, path):
    try:
        with urllib.request.urlopen(base + path) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as e:
        return e.code, e.read()


class TestUpload:
    def test_valid_upload_appends_one_line(self, running_server):
        server, base, out = running_server
        status, payload = post(base, json.dumps(minimal_session()).encode())
        assert status == 201
        assert payload == {"subject_id": "p01", "trial_count": 1, "warnings": []}
        lines = out.read_text().splitlines()
        assert len(lines) == 1
        assert parse_session(lines[0]).subject_id == "p01"

    def test_nonmonotone_timestamps_rejected_422(self, running_server):
        server, base, out = running_server
        bad = minimal_session()
        bad["trials"][0]["samples"] = [[0, 0.0, -0.8], [32, 0.1, -0.7],
                                       [16, 0.2, -0.6]]
        status, payload = post(base, json.dumps(bad).encode())
        assert status == 422
        assert "increasing" in payload["error"]
        assert not out.exists() or out.read_text() == ""

    def test_malformed_json_400(self, running_server):
        server, base, out = running_server
        status, payload = post(base, b"{not json")
        assert status == 400
        assert "JSON" in payload["error"]

    def test_unknown_endpoint_404(self, running_server):
        server, base, _ = running_server
        status, _ = post(base, b"{}", path="/api/other")
        assert status == 404

    def test_disk_failure_507_not_acknowledged(self, running_server):
        server, base, out = running_server

        def broken_append(line):
            raise OSError("disk full")

        server.session_store.append = broken_append
        status, payload = post(base, json.dumps(minimal_session()).encode())
        assert status == 507
        assert not out.exists() or out.read_text() == ""

    def test_concurrent_uploads_do_not_interleave(self, running_server):
        server, base, out = running_server
        n = 50
        sessions = []
        for i in range(n):
            s = minimal_session()
            s["subject_id"] = f"p{i:03d}"
            sessions.append(json.dumps(s).encode())
        results = [None] * n

        def worker(i):
            results[i] = post(base, sessions[i])[0]

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(n)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert results == [201] * n
        lines = out.read_text().splitlines()
        assert len(lines) == n
        parsed = sorted(parse_session(line).subject_id for line in lines)
        assert parsed == sorted(f"p{i:03d}" for i in range(n))

    def test_simulated_session_upload_round_trip(self, running_server):
        server, base, out = running_server
        log = simulate_sst_session(SubjectParams(), CohortSpec(trials_per_task=20), 3,
                                   subject_id="sim-upload")
        status, payload = post(base, serialize_session(log).encode())
        assert status == 201
        assert payload["trial_count"] == 20
        stored = parse_session(out.read_text().splitlines()[0])
        assert serialize_session(stored) == serialize_session(log)


class TestStatic:
    def test_health(self, running_server):
        server, base, _ = running_server
        status, body = get(base, "/health")
        assert status == 200
        assert json.loads(body)["status"] == "ok"

    def test_fallback_index(self, running_server):
        server, base, _ = running_server
        status, body = get(base, "/")
        assert status == 200
        assert b"impulsekit" in body

    def test_assets_served_and_traversal_blocked(self, tmp_path):
        assets = tmp_path / "assets"
        assets.mkdir()
        (assets / "index.html").write_text("<html>runner</html>")
        (assets / "app.js").write_text("console.log(1)")
        server = make_server(0, tmp_path / "out", assets_dir=assets)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{server.server_address[1]}"
        try:
            assert get(base, "/")[1] == b"<html>runner</html>"
            status, body = get(base, "/app.js")
            assert status == 200 and b"console" in body
            status, _ = get(base, "/../secret.txt")
            assert status == 404
        finally:
            server.shutdown()
            server.server_close()
