"""Threaded HTTP adapter for the query service (stdlib http.server).

Routes:
    GET  /datasets
    GET  /heatmap?dataset&method&quantity&channel
    GET  /view?dataset&i&j
    POST /select            body {"dataset": ..., "cells": [[i, j], ...]}
    GET  /pcp?dataset
    GET  /sensitivity?dataset&method&stat=mean|std
    GET  /demo1d
    GET  /files/{dataset}/...   sweep artifacts (read-only)
    GET  /static/... and /      the explorer bundle, when configured

Port precedence: explicit argument, then UQSYNTH_PORT, then 8787.
"""

import json
import mimetypes
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .api import ApiError, QueryService

DEFAULT_PORT = 8787


def _q1(params: dict, name: str) -> str:
    vals = params.get(name)
    if not vals:
        raise ApiError(400, f"missing query parameter {name!r}")
    return vals[0]


def _resolve_under(root: Path, relative: str) -> Path:
    target = (root / relative).resolve()
    if not str(target).startswith(str(root.resolve())):
        raise ApiError(404, "path escapes artifact root")
    return target


class _Handler(BaseHTTPRequestHandler):
    service: QueryService = None  # assigned by make_server

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        raw = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(raw)

    def _send_file(self, path: Path) -> None:
        if not path.is_file():
            raise ApiError(404, f"no such file: {path.name}")
        ctype = mimetypes.guess_type(str(path))[0] or "application/octet-stream"
        raw = path.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(raw)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(raw)

    def _static_root(self) -> Path:
        static = self.service.config.static_dir
        if static is None:
            raise ApiError(404, "no static bundle configured")
        return Path(static)

    def do_GET(self):
        try:
            url = urlparse(self.path)
            params = parse_qs(url.query)
            route = url.path.rstrip("/") or "/"
            svc = self.service
            if route == "/datasets":
                return self._send_json(200, svc.datasets())
            if route == "/heatmap":
                return self._send_json(200, svc.heatmap(
                    _q1(params, "dataset"), _q1(params, "method"),
                    _q1(params, "quantity"), _q1(params, "channel")))
            if route == "/view":
                return self._send_json(200, svc.view(
                    _q1(params, "dataset"), int(_q1(params, "i")), int(_q1(params, "j"))))
            if route == "/pcp":
                return self._send_json(200, svc.pcp(_q1(params, "dataset")))
            if route == "/sensitivity":
                return self._send_json(200, svc.sensitivity(
                    _q1(params, "dataset"), _q1(params, "method"), _q1(params, "stat")))
            if route == "/demo1d":
                return self._send_json(200, svc.demo1d())
            if url.path.startswith("/files/"):
                rest = url.path[len("/files/"):]
                dataset, _, rel = rest.partition("/")
                if dataset not in svc.config.sweep_dirs:
                    raise ApiError(404, f"unknown dataset {dataset!r}")
                return self._send_file(
                    _resolve_under(svc.config.sweep_dirs[dataset], rel))
            if url.path.startswith("/static/"):
                return self._send_file(
                    _resolve_under(self._static_root(), url.path[len("/static/"):]))
            if route == "/":
                return self._send_file(self._static_root() / "index.html")
            raise ApiError(404, f"unknown route {url.path!r}")
        except ApiError as e:
            self._send_json(e.status, e.payload())
        except Exception as e:  # internal error
            self._send_json(500, {"error": {"status": 500, "message": str(e)}})

    def do_POST(self):
        try:
            url = urlparse(self.path)
            if url.path.rstrip("/") != "/select":
                raise ApiError(404, f"unknown route {url.path!r}")
            length = int(self.headers.get("Content-Length", "0"))
            try:
                body = json.loads(self.rfile.read(length) or b"{}")
            except json.JSONDecodeError as e:
                raise ApiError(400, f"invalid JSON body: {e}") from e
            if "dataset" not in body or "cells" not in body:
                raise ApiError(400, "body must carry dataset and cells")
            return self._send_json(
                200, self.service.select(body["dataset"], body["cells"]))
        except ApiError as e:
            self._send_json(e.status, e.payload())
        except Exception as e:
            self._send_json(500, {"error": {"status": 500, "message": str(e)}})


def make_server(service: QueryService, port: int | None = None) -> ThreadingHTTPServer:
    if port is None:
        port = int(os.environ.get("UQSYNTH_PORT", DEFAULT_PORT))
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve_forever(service: QueryService, port: int | None = None) -> None:
    server = make_server(service, port)
    host, bound_port = server.server_address
    print(f"serving on http://{host}:{bound_port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


def serve_background(service: QueryService, port: int = 0):
    """Start on an ephemeral port in a daemon thread; returns (server, port)."""
    server = make_server(service, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, server.server_address[1]
