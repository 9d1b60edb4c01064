"""HTTP/JSON API over the store, consumed by the CLI and the sidebar.

Identity is a trusted ``X-User`` header; requests without one act as an
anonymous public-only reader. Errors are ``{"code", "message"}`` bodies
with the code's registered status. ``GET /events?url=`` is a server-push
text/event-stream: one ``data: <ChangeEvent JSON>`` frame per event, in
seq order, until the client disconnects. Event fan-out never blocks
writers; a subscriber that falls too far behind is dropped with a
terminal frame.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

from .anchoring import Selector
from .annotations import Annotation, Visibility
from .errors import ERROR_STATUS, AdamantError
from .htmldoc import parse_document
from .queries import DOCUMENT_ORDER, SORT_MODES, TIME_DESC, FilterCriteria, \
    filter_annotations, sort_annotations
from .store import Store
from .timefmt import parse_ts
from .urls import normalize_url

EVENT_HEARTBEAT_SECONDS = 15.0

_ID = r"(?P<id>[A-Za-z0-9_-]+)"
_ROUTES: list[tuple[str, re.Pattern, str]] = [
    ("POST", re.compile(r"^/annotations$"), "create_annotation"),
    ("GET", re.compile(r"^/annotations$"), "list_annotations"),
    ("PATCH", re.compile(rf"^/annotations/{_ID}$"), "patch_annotation"),
    ("DELETE", re.compile(rf"^/annotations/{_ID}$"), "delete_annotation"),
    ("POST", re.compile(rf"^/annotations/{_ID}/replies$"), "add_reply"),
    ("POST", re.compile(rf"^/annotations/{_ID}/state$"), "transition_state"),
    ("POST", re.compile(rf"^/annotations/{_ID}/pin$"), "pin"),
    ("DELETE", re.compile(rf"^/annotations/{_ID}/pin$"), "unpin"),
    ("GET", re.compile(r"^/pins$"), "list_pins"),
    ("GET", re.compile(r"^/events$"), "stream_events"),
    ("POST", re.compile(r"^/documents$"), "put_document"),
    ("GET", re.compile(r"^/documents$"), "get_document"),
    ("POST", re.compile(r"^/documents/reanchor$"), "reanchor"),
    ("GET", re.compile(r"^/groups$"), "list_groups"),
    ("POST", re.compile(r"^/groups$"), "create_group"),
    ("POST", re.compile(rf"^/issues/{_ID}/report$"), "issue_report"),
]


def _parse_selector(obj: dict) -> Selector:
    selector = Selector.from_json(obj)
    return replace(selector, page_url=normalize_url(selector.page_url))


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n").encode("utf-8")


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "adamant"
    store: Store  # set by make_handler
    ui_dir: Path | None = None

    # -- plumbing ---------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default
        pass

    @property
    def user(self) -> str | None:
        value = (self.headers.get("X-User") or "").strip()
        return value or None

    def _require_user(self) -> str:
        if self.user is None:
            raise AdamantError("authentication-required",
                               "write operations need an X-User header")
        return self.user

    def _query(self) -> dict[str, str]:
        raw = parse_qs(urlsplit(self.path).query, keep_blank_values=True)
        return {k: v[0] for k, v in raw.items()}

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _read_json(self) -> dict:
        raw = self._read_body()
        if not raw:
            raise AdamantError("bad-request", "missing request body")
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise AdamantError("bad-request", f"body is not JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise AdamantError("bad-request", "body must be a JSON object")
        return obj

    def _send(self, status: int, payload: bytes,
              content_type: str = "application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def _send_json(self, status: int, obj) -> None:
        self._send(status, _json_bytes(obj))

    def _send_error_body(self, exc: AdamantError) -> None:
        status = ERROR_STATUS.get(exc.code, 400)
        self._send_json(status, {"code": exc.code, "message": exc.message})

    # -- dispatch -----------------------------------------------------------

    def _dispatch(self, method: str) -> None:
        path = urlsplit(self.path).path.rstrip("/") or "/"
        for verb, pattern, name in _ROUTES:
            if verb != method:
                continue
            match = pattern.match(path)
            if match:
                try:
                    getattr(self, "handle_" + name)(**match.groupdict())
                except AdamantError as exc:
                    self._send_error_body(exc)
                except (BrokenPipeError, ConnectionResetError):
                    self.close_connection = True
                return
        if method == "GET" and self.ui_dir is not None and path.startswith("/ui"):
            self._serve_static(path)
            return
        self._send_json(404, {"code": "not-found", "message": f"no route {path}"})

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PATCH(self):
        self._dispatch("PATCH")

    def do_DELETE(self):
        self._dispatch("DELETE")

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods",
                         "GET, POST, PATCH, DELETE, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type, X-User")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _serve_static(self, path: str) -> None:
        rel = path[len("/ui"):].lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            self._send_json(404, {"code": "not-found", "message": path})
            return
        types = {".html": "text/html", ".js": "text/javascript",
                 ".css": "text/css", ".map": "application/json"}
        self._send(200, target.read_bytes(),
                   types.get(target.suffix, "application/octet-stream"))

    # -- annotation endpoints -------------------------------------------------

    def handle_create_annotation(self):
        user = self._require_user()
        body = self._read_json()
        try:
            anchors = [_parse_selector(a) for a in body["anchors"]]
            record = self.store.create(
                author=user,
                type_=body["type"],
                body=body.get("body", ""),
                anchors=anchors,
                tags=set(body.get("tags", [])),
                visibility=Visibility.from_json(body.get("visibility", "public")),
            )
        except KeyError as exc:
            raise AdamantError("bad-request", f"missing field {exc}") from exc
        self._send_json(201, record.to_json())

    def handle_patch_annotation(self, id):
        user = self._require_user()
        body = self._read_json()
        if "expected_revision" not in body:
            raise AdamantError("bad-request", "expected_revision is required")
        changes = {}
        if "body" in body:
            changes["body"] = body["body"]
        if "tags" in body:
            changes["tags"] = set(body["tags"])
        if "anchors" in body:
            changes["anchors"] = [_parse_selector(a) for a in body["anchors"]]
        record = self.store.edit(id, user, int(body["expected_revision"]), **changes)
        self._send_json(200, record.to_json())

    def handle_delete_annotation(self, id):
        user = self._require_user()
        record = self.store.delete(id, user)
        self._send_json(200, record.to_json())

    def handle_add_reply(self, id):
        user = self._require_user()
        body = self._read_json()
        record = self.store.reply(id, user, body.get("body", ""))
        self._send_json(200, record.to_json())

    def handle_transition_state(self, id):
        user = self._require_user()
        body = self._read_json()
        action = body.get("action")
        if action not in ("answer", "dismiss", "complete"):
            raise AdamantError("bad-request", f"unknown action: {action!r}")
        record = self.store.transition(id, user, action, body.get("text"))
        self._send_json(200, record.to_json())

    def handle_pin(self, id):
        user = self._require_user()
        record = self.store.set_pinned(user, id, True)
        self._send_json(200, record.to_json())

    def handle_unpin(self, id):
        user = self._require_user()
        record = self.store.set_pinned(user, id, False)
        self._send_json(200, record.to_json())

    def handle_list_pins(self):
        user = self.user
        records = self.store.pin_list(user) if user else []
        self._send_json(200, [a.to_json() for a in records])

    def handle_issue_report(self, id):
        report = self.store.report_issue(id, self.user)
        self._send_json(200, report.to_json())

    # -- query endpoint ---------------------------------------------------------

    def handle_list_annotations(self):
        params = self._query()
        url = params.get("url")
        scope = params.get("scope") or ("page" if url else "all")
        if scope not in ("page", "site", "all"):
            raise AdamantError("bad-request", f"unknown scope: {scope!r}")
        if scope in ("page", "site") and not url:
            raise AdamantError("bad-request", f"scope={scope} requires url=")

        query_text = params.get("q")
        if query_text:
            records = self.store.search(query_text, scope, url, self.user)
        elif scope == "page":
            records = self.store.query_page(url, self.user)
        elif scope == "site":
            records = self.store.query_site(url, self.user)
        else:
            records = self.store.query_all(self.user)

        criteria = _criteria_from_params(params)
        records = filter_annotations(records, criteria)

        sort = params.get("sort")
        if sort is not None:
            if sort not in SORT_MODES:
                raise AdamantError("bad-request", f"unknown sort: {sort!r}")
            doc = None
            if sort == DOCUMENT_ORDER:
                if not url:
                    raise AdamantError("bad-request",
                                       "sort=document_order requires url=")
                doc = self.store.get_document(url)
                if doc is None:
                    raise AdamantError("no-snapshot", f"no snapshot for {url}")
            records = sort_annotations(records, sort, doc)
        elif not query_text:
            records = sort_annotations(records, TIME_DESC)
        self._send_json(200, [a.to_json() for a in records])

    # -- documents ---------------------------------------------------------------

    def handle_put_document(self):
        params = self._query()
        url = params.get("url")
        if not url:
            raise AdamantError("bad-request", "url= is required")
        html = self._read_body().decode("utf-8", errors="replace")
        snapshot = parse_document(html, url)
        summary = self.store.put_document(snapshot)
        self._send_json(201, summary)

    def handle_get_document(self):
        params = self._query()
        url = params.get("url")
        if not url:
            raise AdamantError("bad-request", "url= is required")
        doc = self.store.get_document(url)
        if doc is None:
            raise AdamantError("no-snapshot", f"no snapshot for {url}")
        if params.get("format") == "tree":
            # parsed form of the snapshot; the sidebar viewer builds its DOM
            # from this so node paths resolve identically on both sides
            self._send_json(200, {
                "url": doc.url,
                "fetched_at": doc.fetched_at.strftime("%Y-%m-%dT%H:%M:%S.%fZ"),
                "root": _tree_json(doc.root),
            })
            return
        self._send(200, doc.source_html.encode("utf-8"), "text/html; charset=utf-8")

    def handle_reanchor(self):
        params = self._query()
        url = params.get("url")
        if not url:
            raise AdamantError("bad-request", "url= is required")
        self._send_json(200, self.store.reanchor_page(url))

    # -- groups -------------------------------------------------------------------

    def handle_list_groups(self):
        user = self.user
        groups = self.store.list_groups(user) if user else []
        self._send_json(200, [g.to_json() for g in groups])

    def handle_create_group(self):
        user = self._require_user()
        body = self._read_json()
        name = body.get("name")
        members = body.get("members")
        if not name or not isinstance(members, list):
            raise AdamantError("bad-request", "need name and members[]")
        self.store.ensure_user(user)
        for member in members:
            self.store.ensure_user(member)
        group = self.store.create_group(name, members)
        self._send_json(201, group.to_json())

    # -- events ----------------------------------------------------------------------

    def handle_stream_events(self):
        params = self._query()
        url = params.get("url")
        if not url:
            raise AdamantError("bad-request", "url= is required")
        sub = self.store.subscribe(url, self.user)
        try:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Connection", "close")
            self.end_headers()
            self.wfile.write(b": connected\n\n")
            self.wfile.flush()
            while True:
                event = sub.get(timeout=EVENT_HEARTBEAT_SECONDS)
                if sub.dropped:
                    frame = _json_bytes({"code": "subscriber-dropped",
                                         "message": "event buffer overflow"})
                    self.wfile.write(b"event: error\ndata: " + frame + b"\n")
                    self.wfile.flush()
                    return
                if event is None:
                    if sub.closed:
                        return
                    self.wfile.write(b": keepalive\n\n")
                    self.wfile.flush()
                    continue
                self.wfile.write(b"data: " + _json_bytes(event.to_json()) + b"\n")
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            sub.cancel()
            self.close_connection = True


def _tree_json(node) -> dict:
    from .htmldoc import TextNode
    children = []
    for child in node.children:
        if isinstance(child, TextNode):
            children.append({"text": child.data})
        else:
            children.append(_tree_json(child))
    return {"tag": node.tag, "children": children}


def _criteria_from_params(params: dict[str, str]) -> FilterCriteria:
    types = frozenset(t for t in params.get("types", "").split(",") if t)
    tags = frozenset(t for t in params.get("tags", "").split(",") if t)
    created_from = parse_ts(params["from"]) if params.get("from") else None
    created_to = parse_ts(params["to"]) if params.get("to") else None
    return FilterCriteria(types=types, tags=tags, created_from=created_from,
                          created_to=created_to)


class ApiServer:
    """Threaded HTTP server bound to one store."""

    def __init__(self, store: Store, host: str = "127.0.0.1", port: int = 0,
                 ui_dir: str | Path | None = None):
        handler = type("BoundHandler", (_Handler,), {
            "store": store,
            "ui_dir": Path(ui_dir) if ui_dir else None,
        })
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.httpd.daemon_threads = True
        self.store = store
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"{host}:{port}"

    def serve_forever(self) -> None:
        self.httpd.serve_forever(poll_interval=0.05)

    def start_background(self) -> None:
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()

    def shutdown(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
