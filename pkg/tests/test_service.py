import json
import threading
import urllib.error
import urllib.request

import pytest

from vispell.service import CorrectionServer, _ModelHolder, create_server
from vispell.textdata import detokenize, tokenize


@pytest.fixture()
def server(tiny_checkpoint):
    srv = create_server(tiny_checkpoint, host="127.0.0.1", port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def url(srv, path):
    host, port = srv.server_address
    return f"http://{host}:{port}{path}"


def get(srv, path):
    try:
        with urllib.request.urlopen(url(srv, path)) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


def post(srv, path, body: bytes, headers=None):
    req = urllib.request.Request(url(srv, path), data=body, method="POST",
                                 headers=headers or {"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


def post_json(srv, obj):
    return post(srv, "/api/correct", json.dumps(obj, ensure_ascii=False).encode("utf-8"))


class TestHealth:
    def test_healthy_after_load(self, server, tiny_checkpoint):
        status, body = get(server, "/api/health")
        assert status == 200
        assert body == {"status": "ok", "model_version": tiny_checkpoint.model_version}

    def test_503_before_load(self):
        holder = _ModelHolder()  # never loaded
        srv = CorrectionServer(("127.0.0.1", 0), holder)
        threading.Thread(target=srv.serve_forever, daemon=True).start()
        try:
            status, body = get(srv, "/api/health")
            assert status == 503
            assert body["status"] == "loading"
            status, _ = post_json(srv, {"text": "hà nội"})
            assert status == 503
        finally:
            srv.shutdown()
            srv.server_close()

    def test_unknown_path_404(self, server):
        assert get(server, "/api/nothing")[0] == 404


class TestStatic:
    def test_serves_ui_files_and_refuses_escapes(self, tiny_checkpoint, tmp_path):
        (tmp_path / "index.html").write_text("<html>editor</html>")
        (tmp_path / "secret").mkdir()
        srv = create_server(tiny_checkpoint, host="127.0.0.1", port=0,
                            static_dir=tmp_path)
        threading.Thread(target=srv.serve_forever, daemon=True).start()
        try:
            with urllib.request.urlopen(url(srv, "/")) as resp:
                assert resp.status == 200
                assert b"editor" in resp.read()
            try:
                with urllib.request.urlopen(url(srv, "/../outside.txt")) as resp:
                    status = resp.status
            except urllib.error.HTTPError as exc:
                status = exc.code
            assert status == 404
        finally:
            srv.shutdown()
            srv.server_close()


class TestCorrect:
    def test_empty_text(self, server):
        status, body = post_json(server, {"text": ""})
        assert status == 200
        assert body["tokens"] == []
        assert body["truncated"] is False
        assert "latency_ms" in body and "model_version" in body

    def test_detokenization_roundtrip(self, server):
        text = "hôm nay, tôi đi học ở hà nội!"
        status, body = post_json(server, {"text": text})
        assert status == 200
        tokens = [t["token"] for t in body["tokens"]]
        assert tokens == tokenize(text)
        assert detokenize(tokens) == text

    def test_spans_address_request_text(self, server):
        text = "trời mưa to quá"
        _, body = post_json(server, {"text": text})
        for tok in body["tokens"]:
            assert text[tok["start"]:tok["end"]] == tok["token"]

    def test_suggestions_only_when_flagged(self, server):
        _, body = post_json(server, {"text": "tôi đi học xxyyzz123"})
        for tok in body["tokens"]:
            if not tok["is_error"]:
                assert tok["suggestions"] == []
            assert 0.0 <= tok["p_error"] <= 1.0

    def test_truncation_flag(self, server, tiny_checkpoint):
        n_max = tiny_checkpoint.config.n_max
        text = " ".join(["nhà"] * (n_max + 5))
        _, body = post_json(server, {"text": text})
        assert body["truncated"] is True
        assert len(body["tokens"]) == n_max

    def test_malformed_json_400(self, server):
        status, body = post(server, "/api/correct", b"{not json")
        assert status == 400
        assert "error" in body

    def test_missing_text_400(self, server):
        assert post_json(server, {"top_k": 2})[0] == 400
        assert post_json(server, {"text": 42})[0] == 400
        assert post_json(server, {"text": "ok", "top_k": 0})[0] == 400
        assert post_json(server, {"text": "ok", "top_k": True})[0] == 400

    def test_oversize_413(self, tiny_checkpoint):
        srv = create_server(tiny_checkpoint, host="127.0.0.1", port=0, max_body=64)
        threading.Thread(target=srv.serve_forever, daemon=True).start()
        try:
            status, _ = post_json(srv, {"text": "a" * 500})
            assert status == 413
        finally:
            srv.shutdown()
            srv.server_close()

    def test_concurrent_identical_requests_agree(self, server):
        results = []
        lock = threading.Lock()

        def hit():
            _, body = post_json(server, {"text": "toi di hoc o ha noi"})
            with lock:
                results.append(body["tokens"])

        threads = [threading.Thread(target=hit) for _ in range(6)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(r == results[0] for r in results)

    def test_top_k_bounds_suggestions(self, server):
        _, body = post_json(server, {"text": "xxyyzz aabbcc", "top_k": 2})
        for tok in body["tokens"]:
            assert len(tok["suggestions"]) <= 2
