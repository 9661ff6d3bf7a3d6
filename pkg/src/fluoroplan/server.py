"""Network transports for the planning service.

Two transports speak the same message catalog as
:meth:`fluoroplan.service.PlanningService.handle_message`:

* NDJSON over TCP: a persistent bidirectional stream, one JSON object per
  line in each direction. The connection's first opened case becomes its
  default session, so interactive clients never repeat the session id.
* HTTP: POST /api/message with a JSON body (the "session" field names the
  session). The HTTP server also exposes the protocol schema, per-session
  images, and optionally a static frontend bundle.

Replies are serialized with :func:`fluoroplan.service.canonical_json`, so
identical reply dicts are identical bytes on either transport.
"""

from __future__ import annotations

import json
import logging
import mimetypes
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path
from socketserver import StreamRequestHandler, ThreadingTCPServer

from .geometry import ViewKind
from .service import PlanningService, canonical_json

log = logging.getLogger(__name__)


def _parse_error_reply(req, detail: str) -> dict:
    return {
        "req": req,
        "ok": False,
        "error": {"code": "parse_error", "message": detail},
    }


class NdjsonServer(ThreadingTCPServer):
    """Newline-delimited JSON over TCP; one default session per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], service: PlanningService):
        self.service = service
        super().__init__(address, _NdjsonHandler)


class _NdjsonHandler(StreamRequestHandler):
    server: NdjsonServer

    def handle(self):
        session_id: str | None = None
        for raw in self.rfile:
            line = raw.strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
            except json.JSONDecodeError as e:
                reply = _parse_error_reply(None, f"invalid JSON frame: {e}")
            else:
                reply = self.server.service.handle_message(msg, session_id)
                session_id = reply.get("session", session_id)
            self.wfile.write(canonical_json(reply).encode("utf-8") + b"\n")
            self.wfile.flush()


class HttpApiServer(ThreadingHTTPServer):
    """HTTP front: the message endpoint plus schema/image/static assets."""

    daemon_threads = True

    def __init__(
        self,
        address: tuple[str, int],
        service: PlanningService,
        static_dir: str | Path | None = None,
    ):
        self.service = service
        self.static_dir = Path(static_dir).resolve() if static_dir else None
        super().__init__(address, _HttpHandler)


def protocol_schema_text() -> str:
    """The machine-readable message-catalog schema shipped with the package."""
    return (
        resources.files("fluoroplan")
        .joinpath("schema/protocol.schema.json")
        .read_text(encoding="utf-8")
    )


class _HttpHandler(BaseHTTPRequestHandler):
    server: HttpApiServer

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _send(self, status: int, content_type: str, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, payload: dict, status: int = 200) -> None:
        self._send(
            status,
            "application/json",
            canonical_json(payload).encode("utf-8") + b"\n",
        )

    def do_POST(self):
        if self.path != "/api/message":
            self._send(404, "text/plain", b"not found\n")
            return
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        try:
            msg = json.loads(body)
        except json.JSONDecodeError as e:
            self._send_json(_parse_error_reply(None, f"invalid JSON body: {e}"))
            return
        self._send_json(self.server.service.handle_message(msg))

    def do_GET(self):
        path = self.path.split("?", 1)[0]
        if path == "/api/schema":
            self._send(
                200, "application/json", protocol_schema_text().encode("utf-8")
            )
            return
        if path.startswith("/api/image/"):
            self._serve_image(path)
            return
        self._serve_static(path)

    def _serve_image(self, path: str) -> None:
        parts = path.split("/")  # ["", "api", "image", sid, view]
        if len(parts) != 5 or parts[4] not in ("ap", "lp"):
            self._send(404, "text/plain", b"not found\n")
            return
        session = self.server.service.sessions.get(parts[3])
        if session is None:
            self._send(404, "text/plain", b"unknown session\n")
            return
        view = ViewKind.AP if parts[4] == "ap" else ViewKind.LP
        image_path = (
            session.case.ap_image_path
            if view is ViewKind.AP
            else session.case.lp_image_path
        )
        try:
            self._send(200, "image/png", image_path.read_bytes())
        except OSError:
            self._send(404, "text/plain", b"image unavailable\n")

    def _serve_static(self, path: str) -> None:
        root = self.server.static_dir
        if root is None:
            self._send(404, "text/plain", b"no static bundle configured\n")
            return
        relative = path.lstrip("/") or "index.html"
        target = (root / relative).resolve()
        try:
            target.relative_to(root)
        except ValueError:
            self._send(403, "text/plain", b"forbidden\n")
            return
        if not target.is_file():
            self._send(404, "text/plain", b"not found\n")
            return
        content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self._send(200, content_type, target.read_bytes())
