import pytest
from fastapi.testclient import TestClient

from gitstrata import handlers
from gitstrata.service import app

client = TestClient(app)

INTERVAL = {"dim": 1, "weights": [["-1"], ["1"]]}
SHIFTED = {"dim": 1, "weights": [["1"], ["2"]]}


class TestEndpoints:
    def test_health(self):
        resp = client.get("/healthz")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok"}

    def test_hm_matches_handler(self):
        resp = client.post("/hm", json={"problem": INTERVAL, "support": [0, 1]})
        assert resp.status_code == 200
        loaded = handlers.load_problem_doc(INTERVAL)
        direct = handlers.run_hm(loaded.torus, [0, 1])
        assert resp.json()["report"] == direct

    def test_strata_with_dot(self):
        resp = client.post("/strata", json={"problem": SHIFTED, "dot": True})
        assert resp.status_code == 200
        body = resp.json()
        assert body["dot"].startswith("digraph hkkn {")
        assert body["report"]["result"]["closure_order"]["ok"]

    def test_strata_without_dot(self):
        resp = client.post("/strata", json={"problem": SHIFTED})
        assert resp.json()["dot"] is None

    def test_refine_p1n_spec_string(self):
        resp = client.post("/refine", json={"problem": "p1n:5"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["complete"] is True
        assert body["report"]["result"]["leaf_count"] == 5

    def test_refine_p1n_doc(self):
        resp = client.post("/refine", json={"problem": {"p1n": 6}})
        assert resp.json()["report"]["result"]["leaf_count"] == 7

    def test_p1n_endpoints(self):
        resp = client.post("/p1n/classify", json={"n": 6, "partition": "3+2+1"})
        assert resp.json()["report"]["result"]["label"] == "S_0^{3,<3}"
        resp = client.post("/p1n/enumerate", json={"n": 4})
        assert resp.json()["report"]["result"]["count"] == 5
        resp = client.post("/p1n/components", json={"n": 5, "label": "S_1"})
        assert resp.json()["report"]["result"]["count"] == 10

    def test_parse_error_400(self):
        resp = client.post("/hm", json={"problem": {"dim": 1, "weights": [["1/0"]]},
                                        "support": [0]})
        assert resp.status_code == 400
        assert resp.json()["detail"]["code"] == "PARSE"

    def test_semantic_error_422(self):
        resp = client.post("/hm", json={"problem": INTERVAL, "support": [7]})
        assert resp.status_code == 422
        assert resp.json()["detail"]["code"] == "SEMANTIC"

    def test_p1n_problem_rejected_for_hm(self):
        resp = client.post("/hm", json={"problem": {"p1n": 4}, "support": [0]})
        assert resp.status_code == 422

    def test_validation_error(self):
        resp = client.post("/hm", json={"support": [0]})
        assert resp.status_code == 422


class TestServiceCliAgreement:
    def test_reports_identical(self):
        from gitstrata.reports import dumps_machine
        resp = client.post("/refine", json={"problem": "p1n:6"})
        loaded = handlers.load_problem_text("p1n:6")
        report, _, _ = handlers.run_refine(loaded)
        assert dumps_machine(resp.json()["report"]) == dumps_machine(report)


class TestThinClientOverHttp:
    def test_cli_bytes_match_in_process(self, tmp_path):
        import io
        import socket
        import threading
        import time
        from contextlib import redirect_stderr, redirect_stdout

        import uvicorn

        from gitstrata.cli import main

        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            port = probe.getsockname()[1]
        config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
        server = uvicorn.Server(config)
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        deadline = time.monotonic() + 10
        import urllib.request
        while time.monotonic() < deadline:
            try:
                with urllib.request.urlopen(f"http://127.0.0.1:{port}/healthz"):
                    break
            except OSError:
                time.sleep(0.05)
        else:
            pytest.skip("service did not come up")

        def capture(argv):
            out = io.StringIO()
            with redirect_stdout(out), redirect_stderr(io.StringIO()):
                code = main(argv)
            return code, out.getvalue()

        try:
            local = capture(["--format", "machine", "refine", "p1n:6"])
            remote = capture(["--format", "machine", "--server",
                              f"http://127.0.0.1:{port}", "refine", "p1n:6"])
            assert local == remote
            problem = str(tmp_path / "p.json")
            with open(problem, "w") as fh:
                fh.write('{"dim": 1, "weights": [["-1"], ["1"]]}')
            local = capture(["--format", "machine", "hm", problem, "--support", "0,1"])
            remote = capture(["--format", "machine", "--server",
                              f"http://127.0.0.1:{port}", "hm", problem,
                              "--support", "0,1"])
            assert local == remote
        finally:
            server.should_exit = True
            thread.join(timeout=5)
