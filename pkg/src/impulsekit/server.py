"""Local collection server: hosts the task-runner bundle and ingests
session uploads.

POST /api/sessions validates the body with the canonical parser and appends
exactly one JSONL line per accepted session; appends are serialized behind a
lock so concurrent uploads never interleave, and the line is flushed+fsynced
before the 201 goes out (an acknowledged upload survives a crash). This is a
localhost lab tool: no authentication, bind it accordingly.
"""

from __future__ import annotations

import json
import threading
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from impulsekit.errors import SchemaError
from impulsekit.sessionlog import parse_session, serialize_session

_INDEX_FALLBACK = """<!doctype html>
<html><head><title>impulsekit collect</title></head>
<body><h1>impulsekit collection endpoint</h1>
<p>POST session logs to <code>/api/sessions</code>. No task-runner bundle is
configured (start with --assets to serve one).</p></body></html>
"""

_MIME = {".html": "text/html", ".js": "text/javascript", ".mjs": "text/javascript",
         ".css": "text/css", ".json": "application/json", ".png": "image/png",
         ".jpg": "image/jpeg", ".svg": "image/svg+xml", ".wav": "audio/wav"}


class SessionStore:
    """Append-only JSONL sink with single-writer discipline."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.path = self.out_dir / "sessions.jsonl"
        self._lock = threading.Lock()

    def append(self, line: str):
        import os
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())


def make_handler(store: SessionStore, assets_dir: Optional[Path],
                 strict: bool = False, quiet: bool = True):
    assets = Path(assets_dir).resolve() if assets_dir else None

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            if not quiet:
                super().log_message(fmt, *args)

        def _send(self, status: int, payload: dict):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            path = self.path.split("?", 1)[0]
            if path == "/health":
                self._send(200, {"status": "ok", "sessions_file": str(store.path)})
                return
            if assets is None:
                if path == "/":
                    body = _INDEX_FALLBACK.encode("utf-8")
                    self.send_response(200)
                    self.send_header("Content-Type", "text/html")
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                else:
                    self._send(404, {"error": f"no asset bundle for {path}"})
                return
            rel = "index.html" if path == "/" else path.lstrip("/")
            target = (assets / rel).resolve()
            if not str(target).startswith(str(assets)) or not target.is_file():
                self._send(404, {"error": f"not found: {path}"})
                return
            body = target.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type",
                             _MIME.get(target.suffix, "application/octet-stream"))
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self):
            if self.path.split("?", 1)[0] != "/api/sessions":
                self._send(404, {"error": f"unknown endpoint {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                raw = self.rfile.read(length)
            except (TypeError, ValueError):
                self._send(400, {"error": "missing or invalid Content-Length"})
                return
            if not raw:
                self._send(400, {"error": "empty body"})
                return
            try:
                json.loads(raw)
            except json.JSONDecodeError as e:
                self._send(400, {"error": f"malformed JSON: {e}"})
                return
            try:
                log = parse_session(raw, strict=strict)
            except SchemaError as e:
                self._send(422, {"error": str(e)})
                return
            try:
                store.append(serialize_session(log))
            except OSError as e:
                # not acknowledged: the client must retry or persist locally
                self._send(507, {"error": f"write failed: {e}"})
                return
            self._send(201, {"subject_id": log.subject_id,
                             "trial_count": len(log.trials),
                             "warnings": log.warnings})

    return Handler


def make_server(port: int, out_dir, assets_dir=None, strict: bool = False,
                host: str = "127.0.0.1", quiet: bool = True) -> ThreadingHTTPServer:
    store = SessionStore(out_dir)
    handler = make_handler(store, assets_dir, strict=strict, quiet=quiet)
    server = ThreadingHTTPServer((host, port), handler)
    server.session_store = store
    return server


def serve_forever(port: int, out_dir, assets_dir=None, strict: bool = False,
                  host: str = "127.0.0.1"):
    server = make_server(port, out_dir, assets_dir, strict=strict, host=host,
                         quiet=False)
    print(f"collect: listening on http://{host}:{server.server_address[1]} "
          f"-> {server.session_store.path}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
