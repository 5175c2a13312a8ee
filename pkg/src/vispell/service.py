"""HTTP correction service backing the interactive editor.

Endpoints:
  POST /api/correct   {"text": str, "top_k": int=3} ->
                      {"tokens": [{token, start, end, is_error, p_error,
                                   suggestions: [{word, prob}]}],
                       "model_version": str, "latency_ms": float,
                       "truncated": bool}
  GET  /api/health    200 {"status": "ok", "model_version"} once loaded,
                      503 {"status": "loading"} before that.

Malformed JSON gets 400, bodies over the configured limit 413.  The model is
loaded in a background thread so the server binds immediately; requests see
503 until loading finishes.  Model parameters are never mutated after load,
so any number of handler threads may read them concurrently.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional, Union

from .model import predict_tokens
from .model.checkpoint import Checkpoint, load_checkpoint
from .textdata import tokenize_with_spans

DEFAULT_MAX_BODY = 16 * 1024


class _ModelHolder:
    def __init__(self) -> None:
        self.checkpoint: Optional[Checkpoint] = None
        self.error: Optional[str] = None
        self.ready = threading.Event()

    def load(self, path: Union[str, Path]) -> None:
        try:
            self.checkpoint = load_checkpoint(path)
        except Exception as exc:  # surfaces as 503 with detail
            self.error = f"{type(exc).__name__}: {exc}"
        finally:
            self.ready.set()

    def set_loaded(self, ckpt: Checkpoint) -> None:
        self.checkpoint = ckpt
        self.ready.set()


def correct_payload(ckpt: Checkpoint, text: str, top_k: int) -> dict:
    """Run the model over ``text`` and shape the response body."""
    t0 = time.perf_counter()
    spans = tokenize_with_spans(text)
    truncated = len(spans) > ckpt.config.n_max
    spans = spans[: ckpt.config.n_max]
    tokens = [s[0] for s in spans]
    out = []
    if tokens:
        preds = predict_tokens(tokens, ckpt.params, ckpt.config,
                               ckpt.word_vocab, ckpt.char_vocab, top_k=top_k)
        for pred, (tok, start, end) in zip(preds, spans):
            out.append({
                "token": tok,
                "start": start,
                "end": end,
                "is_error": pred.is_error,
                "p_error": round(pred.p_error, 6),
                "suggestions": [
                    {"word": s.word, "prob": round(s.prob, 6)}
                    for s in pred.suggestions
                ],
            })
    return {
        "tokens": out,
        "model_version": ckpt.model_version,
        "latency_ms": round((time.perf_counter() - t0) * 1000.0, 3),
        "truncated": truncated,
    }


class CorrectionHandler(BaseHTTPRequestHandler):
    server_version = "vispell"
    protocol_version = "HTTP/1.1"

    # quiet by default; the CLI flips this on with --verbose
    def log_message(self, fmt, *args):
        if getattr(self.server, "verbose", False):
            super().log_message(fmt, *args)

    def _send_json(self, status: int, obj: dict) -> None:
        body = json.dumps(obj, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):  # CORS preflight for the browser editor
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        holder: _ModelHolder = self.server.holder
        if self.path == "/api/health":
            if holder.error:
                self._send_json(503, {"status": "error", "detail": holder.error})
            elif holder.checkpoint is None:
                self._send_json(503, {"status": "loading"})
            else:
                self._send_json(200, {"status": "ok",
                                      "model_version": holder.checkpoint.model_version})
            return
        if self._serve_static():
            return
        self._send_json(404, {"error": "not found"})

    def do_POST(self):
        if self.path != "/api/correct":
            self._send_json(404, {"error": "not found"})
            return
        holder: _ModelHolder = self.server.holder
        length = int(self.headers.get("Content-Length") or 0)
        if length > self.server.max_body:
            self._send_json(413, {"error": f"body exceeds {self.server.max_body} bytes"})
            return
        raw = self.rfile.read(length)
        try:
            obj = json.loads(raw.decode("utf-8"))
            if not isinstance(obj, dict):
                raise ValueError("request body must be a JSON object")
            text = obj.get("text")
            top_k = obj.get("top_k", 3)
            if not isinstance(text, str):
                raise ValueError("missing string field 'text'")
            if not isinstance(top_k, int) or isinstance(top_k, bool) or top_k < 1:
                raise ValueError("'top_k' must be a positive integer")
        except (ValueError, UnicodeDecodeError) as exc:
            self._send_json(400, {"error": str(exc)})
            return
        if holder.error:
            self._send_json(503, {"status": "error", "detail": holder.error})
            return
        if holder.checkpoint is None:
            self._send_json(503, {"status": "loading"})
            return
        self._send_json(200, correct_payload(holder.checkpoint, text, top_k))

    def _serve_static(self) -> bool:
        root: Optional[Path] = self.server.static_dir
        if root is None:
            return False
        rel = self.path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not target.is_relative_to(root.resolve()) or not target.is_file():
            return False
        ctype = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript; charset=utf-8",
            ".css": "text/css; charset=utf-8",
            ".json": "application/json",
        }.get(target.suffix, "application/octet-stream")
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)
        return True


class CorrectionServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, holder: _ModelHolder,
                 max_body: int = DEFAULT_MAX_BODY,
                 static_dir: Optional[Path] = None,
                 verbose: bool = False):
        super().__init__(address, CorrectionHandler)
        self.holder = holder
        self.max_body = max_body
        self.static_dir = static_dir
        self.verbose = verbose


def create_server(
    checkpoint: Union[str, Path, Checkpoint],
    host: str = "127.0.0.1",
    port: int = 8754,
    max_body: int = DEFAULT_MAX_BODY,
    static_dir: Optional[Union[str, Path]] = None,
    load_async: bool = True,
    verbose: bool = False,
) -> CorrectionServer:
    """Bind the server; the checkpoint loads in the background by default."""
    holder = _ModelHolder()
    server = CorrectionServer(
        (host, port), holder, max_body=max_body,
        static_dir=Path(static_dir) if static_dir else None, verbose=verbose)
    if isinstance(checkpoint, Checkpoint):
        holder.set_loaded(checkpoint)
    elif load_async:
        threading.Thread(target=holder.load, args=(checkpoint,), daemon=True).start()
    else:
        holder.load(checkpoint)
        if holder.error:
            server.server_close()
            raise RuntimeError(f"failed to load checkpoint: {holder.error}")
    return server
