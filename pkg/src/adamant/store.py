"""Persistent annotation store with a per-page change feed.

On disk the store is a directory:

    log.jsonl        append-only, one JSON record per line
    snapshot.jsonl   state written by the last compaction
    documents/<url-hash>/<version>.html   raw page snapshots
    .lock            cross-process exclusive lock

Every line in both .jsonl files is ``{"kind": ..., "seq": n, "data": {...}}``
with kind one of annotation / pin / group / user / document. Loading
replays snapshot then log; compaction rewrites the snapshot from current
state and truncates the log. Writes are serialized by a single lock and
flushed before change events fan out, so subscribers only ever see
durable state. Reads copy under the lock and then work lock-free.
"""

from __future__ import annotations

import hashlib
import json
import queue
import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path

from filelock import FileLock, Timeout

from . import annotations as core
from .anchoring import Selector, resolve_selector, selector_from_resolution
from .annotations import Annotation, Visibility
from .errors import AdamantError
from .htmldoc import DocumentSnapshot, parse_document
from .textindex import SearchIndex
from .timefmt import format_ts, now_utc, parse_ts
from .urls import normalize_url, same_site

LOG_NAME = "log.jsonl"
SNAPSHOT_NAME = "snapshot.jsonl"
DOCUMENTS_DIR = "documents"

# log appends since the last compaction before one is triggered automatically
AUTO_COMPACT_THRESHOLD = 10_000


@dataclass(frozen=True)
class User:
    id: str
    display_name: str

    def to_json(self):
        return {"id": self.id, "display_name": self.display_name}


@dataclass(frozen=True)
class Group:
    id: str
    name: str
    members: frozenset[str]

    def to_json(self):
        return {"id": self.id, "name": self.name, "members": sorted(self.members)}


@dataclass(frozen=True)
class ChangeEvent:
    """One visible change to a page's annotations."""

    kind: str  # created | updated | deleted
    annotation: Annotation
    seq: int

    def to_json(self):
        return {"kind": self.kind, "seq": self.seq,
                "annotation": self.annotation.to_json()}


@dataclass
class _DocVersion:
    version: int
    path: Path
    fetched_at: datetime
    parsed: DocumentSnapshot | None = None


class Subscription:
    """Handle for one page feed; yields ChangeEvents in seq order."""

    _CLOSE = object()

    def __init__(self, store: "Store", url: str, requester: str | None,
                 buffer_size: int):
        self._store = store
        self.url = url
        self.requester = requester
        self._queue: queue.Queue = queue.Queue(maxsize=buffer_size)
        self._last_seq = -1
        self.dropped = False
        self.closed = False

    def _offer(self, event: ChangeEvent) -> None:
        if self.closed or self.dropped:
            return
        if event.seq <= self._last_seq:
            return  # already delivered (at-least-once internally)
        self._last_seq = event.seq
        try:
            self._queue.put_nowait(event)
        except queue.Full:
            # never block the writer; the consumer gets a terminal signal
            self.dropped = True

    def get(self, timeout: float | None = None) -> ChangeEvent | None:
        """Next event, or None on timeout / cancellation / overflow."""
        if self.dropped:
            return None
        try:
            item = self._queue.get(timeout=timeout)
        except queue.Empty:
            return None
        if item is self._CLOSE:
            return None
        return item

    def events(self, timeout: float | None = None):
        while True:
            event = self.get(timeout=timeout)
            if event is None:
                return
            yield event

    def cancel(self) -> None:
        if not self.closed:
            self.closed = True
            self._store._unsubscribe(self)
            try:
                self._queue.put_nowait(self._CLOSE)
            except queue.Full:
                pass


def _url_key(url: str) -> str:
    return hashlib.sha256(url.encode("utf-8")).hexdigest()[:24]


class Store:
    """Single-writer annotation store over one directory."""

    def __init__(self, directory: str | Path, create: bool = True):
        self.dir = Path(directory)
        if create:
            self.dir.mkdir(parents=True, exist_ok=True)
        if not self.dir.is_dir():
            raise AdamantError("bad-config", f"store directory missing: {self.dir}")
        self._lockfile = FileLock(str(self.dir / ".lock"))
        try:
            self._lockfile.acquire(timeout=0)
        except Timeout:
            raise AdamantError("store-locked",
                               f"another process holds {self.dir}") from None
        self._write_lock = threading.RLock()
        self._log_handle = None
        self._appends_since_compact = 0

        self.annotations: dict[str, Annotation] = {}
        self.users: dict[str, User] = {}
        self.groups: dict[str, Group] = {}
        self._reader_pins: dict[str, set[str]] = {}
        self._documents: dict[str, list[_DocVersion]] = {}
        self._page_seq: dict[str, int] = {}
        self._global_seq = 0
        self._subs: list[Subscription] = []
        self.index = SearchIndex()

        self._load()

    # -- lifecycle --------------------------------------------------------

    def close(self) -> None:
        with self._write_lock:
            for sub in list(self._subs):
                sub.cancel()
            if self._log_handle is not None:
                self._log_handle.close()
                self._log_handle = None
        self._lockfile.release()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- persistence ------------------------------------------------------

    def _load(self) -> None:
        for name in (SNAPSHOT_NAME, LOG_NAME):
            path = self.dir / name
            if not path.exists():
                continue
            with path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._apply(json.loads(line))
        for annotation in self.annotations.values():
            self.index.index_annotation(annotation)

    def _apply(self, record: dict) -> None:
        kind, seq, data = record["kind"], record["seq"], record["data"]
        self._global_seq = max(self._global_seq, seq)
        if kind == "annotation":
            annotation = Annotation.from_json(data)
            self.annotations[annotation.id] = annotation
            self._sync_author_pin(annotation)
            for url in annotation.page_urls():
                self._page_seq[url] = self._page_seq.get(url, 0) + 1
        elif kind == "pin":
            pins = self._reader_pins.setdefault(data["user"], set())
            if data["pinned"]:
                pins.add(data["annotation"])
            else:
                pins.discard(data["annotation"])
        elif kind == "group":
            self.groups[data["id"]] = Group(data["id"], data["name"],
                                            frozenset(data["members"]))
        elif kind == "user":
            self.users[data["id"]] = User(data["id"], data["display_name"])
        elif kind == "document":
            self._register_document(data["url"], int(data["version"]),
                                    self.dir / data["path"],
                                    parse_ts(data["fetched_at"]))
        else:
            raise AdamantError("bad-request", f"unknown log record kind: {kind!r}")

    def _register_document(self, url: str, version: int, path: Path,
                           fetched_at: datetime) -> None:
        versions = self._documents.setdefault(url, [])
        versions[:] = [v for v in versions if v.version != version]
        versions.append(_DocVersion(version, path, fetched_at))
        versions.sort(key=lambda v: v.version)
        # bounded history: current and previous snapshot only
        while len(versions) > 2:
            old = versions.pop(0)
            try:
                old.path.unlink()
            except OSError:
                pass

    def _append(self, kind: str, data: dict) -> None:
        self._global_seq += 1
        line = json.dumps({"kind": kind, "seq": self._global_seq, "data": data},
                          ensure_ascii=False, sort_keys=True, separators=(",", ":"))
        if self._log_handle is None:
            self._log_handle = (self.dir / LOG_NAME).open("a", encoding="utf-8")
        self._log_handle.write(line + "\n")
        self._log_handle.flush()
        self._appends_since_compact += 1
        if self._appends_since_compact >= AUTO_COMPACT_THRESHOLD:
            self.compact()

    def compact(self) -> None:
        """Write current state to the snapshot file and truncate the log."""
        with self._write_lock:
            tmp = self.dir / (SNAPSHOT_NAME + ".tmp")
            seq = 0
            with tmp.open("w", encoding="utf-8") as fh:
                def emit(kind: str, data: dict):
                    nonlocal seq
                    seq += 1
                    fh.write(json.dumps({"kind": kind, "seq": seq, "data": data},
                                        ensure_ascii=False, sort_keys=True,
                                        separators=(",", ":")) + "\n")

                for user in sorted(self.users.values(), key=lambda u: u.id):
                    emit("user", user.to_json())
                for group in sorted(self.groups.values(), key=lambda g: g.id):
                    emit("group", group.to_json())
                for url in sorted(self._documents):
                    for version in self._documents[url]:
                        emit("document", {
                            "url": url, "version": version.version,
                            "path": str(version.path.relative_to(self.dir)),
                            "fetched_at": format_ts(version.fetched_at),
                        })
                for annotation in sorted(self.annotations.values(),
                                         key=lambda a: (a.created_at, a.id)):
                    emit("annotation", annotation.to_json())
                for user_id in sorted(self._reader_pins):
                    for annotation_id in sorted(self._reader_pins[user_id]):
                        emit("pin", {"user": user_id, "annotation": annotation_id,
                                     "pinned": True})
            tmp.replace(self.dir / SNAPSHOT_NAME)
            if self._log_handle is not None:
                self._log_handle.close()
            self._log_handle = (self.dir / LOG_NAME).open("w", encoding="utf-8")
            self._global_seq = max(self._global_seq, seq)
            self._appends_since_compact = 0

    # -- users and groups -------------------------------------------------

    def ensure_user(self, user_id: str, display_name: str | None = None) -> User:
        if not user_id:
            raise AdamantError("unknown-user", "empty user id")
        with self._write_lock:
            existing = self.users.get(user_id)
            if existing is not None:
                return existing
            user = User(user_id, display_name or user_id)
            self.users[user_id] = user
            self._append("user", user.to_json())
            return user

    def create_group(self, name: str, members: list[str],
                     group_id: str | None = None) -> Group:
        if not members:
            raise AdamantError("bad-request", "a group needs at least one member")
        with self._write_lock:
            for member in members:
                if member not in self.users:
                    raise AdamantError("unknown-user", f"unknown user: {member}")
            group = Group(group_id or uuid.uuid4().hex, name, frozenset(members))
            self.groups[group.id] = group
            self._append("group", group.to_json())
            return group

    def add_member(self, group_id: str, user_id: str) -> Group:
        with self._write_lock:
            group = self.groups.get(group_id)
            if group is None:
                raise AdamantError("unknown-group", f"unknown group: {group_id}")
            if user_id not in self.users:
                raise AdamantError("unknown-user", f"unknown user: {user_id}")
            group = replace(group, members=group.members | {user_id})
            self.groups[group_id] = group
            self._append("group", group.to_json())
            return group

    def remove_member(self, group_id: str, user_id: str) -> Group:
        with self._write_lock:
            group = self.groups.get(group_id)
            if group is None:
                raise AdamantError("unknown-group", f"unknown group: {group_id}")
            group = replace(group, members=group.members - {user_id})
            self.groups[group_id] = group
            self._append("group", group.to_json())
            return group

    def list_groups(self, user_id: str) -> list[Group]:
        with self._write_lock:
            return sorted((g for g in self.groups.values() if user_id in g.members),
                          key=lambda g: g.id)

    # -- visibility -------------------------------------------------------

    def can_read(self, annotation: Annotation, requester: str | None) -> bool:
        if annotation.visibility.kind == "public":
            return True
        if requester is None:
            return False
        if annotation.author == requester:
            return True
        if annotation.visibility.kind == "group":
            group = self.groups.get(annotation.visibility.group_id)
            return group is not None and requester in group.members
        return False

    def _check_visibility_target(self, visibility: Visibility) -> None:
        if visibility.kind == "group" and visibility.group_id not in self.groups:
            raise AdamantError("unknown-group",
                               f"unknown group: {visibility.group_id}")

    # -- annotation writes --------------------------------------------------

    def put_annotation(self, record: Annotation, expected_revision: int) -> Annotation:
        """Optimistically-checked write; emits change events once durable."""
        with self._write_lock:
            if record.author not in self.users:
                raise AdamantError("unknown-author",
                                   f"unknown author: {record.author}")
            previous = self.annotations.get(record.id)
            current_revision = previous.revision if previous is not None else 0
            if expected_revision != current_revision:
                raise AdamantError(
                    "revision-conflict",
                    f"expected revision {expected_revision}, stored is {current_revision}",
                )
            if record.revision != expected_revision + 1:
                raise AdamantError(
                    "revision-conflict",
                    f"record revision {record.revision} must be {expected_revision + 1}",
                )
            self.annotations[record.id] = record
            self._sync_author_pin(record)
            self._append("annotation", record.to_json())
            self.index.index_annotation(record)

            if previous is None:
                kind = "created"
            elif record.deleted and not previous.deleted:
                kind = "deleted"
            else:
                kind = "updated"
            pages = record.page_urls()
            if previous is not None:
                pages = pages | previous.page_urls()
            for url in sorted(pages):
                seq = self._page_seq.get(url, 0) + 1
                self._page_seq[url] = seq
                event = ChangeEvent(kind, record, seq)
                for sub in self._subs:
                    if sub.url == url and self.can_read(record, sub.requester):
                        sub._offer(event)
            return record

    def _sync_author_pin(self, record: Annotation) -> None:
        pins = self._reader_pins.setdefault(record.author, set())
        if record.pinned and not record.deleted:
            pins.add(record.id)
        else:
            pins.discard(record.id)

    def _live(self, annotation_id: str) -> Annotation:
        annotation = self.annotations.get(annotation_id)
        if annotation is None:
            raise AdamantError("not-found", f"no annotation {annotation_id}")
        return annotation

    def get_annotation(self, annotation_id: str,
                       requester: str | None = None) -> Annotation | None:
        with self._write_lock:
            annotation = self.annotations.get(annotation_id)
        if annotation is None or not self.can_read(annotation, requester):
            return None
        return annotation

    # high-level verbs shared by the HTTP API and the CLI ------------------

    def create(self, author: str, type_: str, body: str, anchors: list[Selector],
               tags: set[str], visibility: Visibility,
               now: datetime | None = None) -> Annotation:
        with self._write_lock:
            self.ensure_user(author)
            self._check_visibility_target(visibility)
            record = core.create_annotation(author, type_, body, anchors, tags,
                                            visibility, now=now)
            return self.put_annotation(record, expected_revision=0)

    def edit(self, annotation_id: str, editor: str, expected_revision: int,
             **changes) -> Annotation:
        with self._write_lock:
            annotation = self._live(annotation_id)
            record = core.edit_annotation(annotation, editor, **changes)
            return self.put_annotation(record, expected_revision)

    def delete(self, annotation_id: str, editor: str) -> Annotation:
        with self._write_lock:
            annotation = self._live(annotation_id)
            record = core.delete_annotation(annotation, editor)
            if record is annotation:
                return annotation  # already a tombstone; idempotent
            return self.put_annotation(record, annotation.revision)

    def reply(self, annotation_id: str, author: str, body: str) -> Annotation:
        with self._write_lock:
            annotation = self._live(annotation_id)
            if not self.can_read(annotation, author):
                raise AdamantError("no-read-access",
                                   "annotation is not visible to this user")
            self.ensure_user(author)
            record = core.add_reply(annotation, author, body)
            return self.put_annotation(record, annotation.revision)

    def transition(self, annotation_id: str, editor: str, action: str,
                   text: str | None = None) -> Annotation:
        with self._write_lock:
            annotation = self._live(annotation_id)
            if action == "complete":
                record = core.complete_todo(annotation, editor)
            else:
                record = core.transition_question(annotation, editor, action, text)
            return self.put_annotation(record, annotation.revision)

    def set_pinned(self, user_id: str, annotation_id: str, flag: bool) -> Annotation:
        """Per-user pin. The author's pin lives on the record itself;
        anyone else's lives in the pin set."""
        with self._write_lock:
            annotation = self._live(annotation_id)
            if not self.can_read(annotation, user_id):
                raise AdamantError("no-read-access",
                                   "annotation is not visible to this user")
            self.ensure_user(user_id)
            if user_id == annotation.author:
                record = core.set_author_pin(annotation, flag)
                if record is annotation:
                    return annotation
                return self.put_annotation(record, annotation.revision)
            pins = self._reader_pins.setdefault(user_id, set())
            if flag and annotation_id not in pins:
                pins.add(annotation_id)
                self._append("pin", {"user": user_id, "annotation": annotation_id,
                                     "pinned": True})
            elif not flag and annotation_id in pins:
                pins.discard(annotation_id)
                self._append("pin", {"user": user_id, "annotation": annotation_id,
                                     "pinned": False})
            return annotation

    def report_issue(self, annotation_id: str,
                     requester: str | None) -> core.IssueReport:
        with self._write_lock:
            annotation = self._live(annotation_id)
        if not self.can_read(annotation, requester):
            raise AdamantError("no-read-access",
                               "annotation is not visible to this user")
        return core.export_issue_report(annotation)

    # -- queries ------------------------------------------------------------

    def _visible(self, requester: str | None) -> list[Annotation]:
        with self._write_lock:
            records = list(self.annotations.values())
        return sorted(
            (a for a in records if not a.deleted and self.can_read(a, requester)),
            key=lambda a: (a.created_at, a.id),
        )

    def query_page(self, url: str, requester: str | None = None) -> list[Annotation]:
        url = normalize_url(url)
        return [a for a in self._visible(requester)
                if any(anchor.page_url == url for anchor in a.anchors)]

    def query_site(self, site_prefix: str,
                   requester: str | None = None) -> list[Annotation]:
        return [a for a in self._visible(requester)
                if any(same_site(anchor.page_url, site_prefix)
                       for anchor in a.anchors)]

    def query_all(self, requester: str | None = None) -> list[Annotation]:
        return self._visible(requester)

    def search(self, text: str, scope: str, scope_url: str | None,
               requester: str | None = None) -> list[Annotation]:
        """Token search over the visibility-filtered scope set, ranked by
        term frequency (ties: newer modified_at, then id)."""
        if not text or not text.strip():
            raise AdamantError("bad-request", "empty search query")
        if scope == "page":
            candidates = self.query_page(scope_url, requester)
        elif scope == "site":
            candidates = self.query_site(scope_url, requester)
        elif scope == "all":
            candidates = self.query_all(requester)
        else:
            raise AdamantError("bad-request", f"unknown scope: {scope!r}")
        by_id = {a.id: a for a in candidates}
        with self._write_lock:
            ranked = self.index.match_and_rank(text, set(by_id))
        return [by_id[i] for i in ranked]

    def pin_list(self, user_id: str) -> list[Annotation]:
        """Everything the user pinned, any page, newest first."""
        with self._write_lock:
            pinned_ids = set(self._reader_pins.get(user_id, ()))
            records = [self.annotations[i] for i in pinned_ids
                       if i in self.annotations]
        live = [a for a in records if not a.deleted and self.can_read(a, user_id)]
        return sorted(live, key=lambda a: (-a.created_at.timestamp(), a.id))

    def pin_counts(self) -> dict[str, int]:
        with self._write_lock:
            return {user: len({i for i in ids
                               if i in self.annotations
                               and not self.annotations[i].deleted})
                    for user, ids in sorted(self._reader_pins.items())}

    # -- change feed --------------------------------------------------------

    def subscribe(self, url: str, requester: str | None = None,
                  buffer_size: int = 4096) -> Subscription:
        sub = Subscription(self, normalize_url(url), requester, buffer_size)
        with self._write_lock:
            self._subs.append(sub)
        return sub

    def _unsubscribe(self, sub: Subscription) -> None:
        with self._write_lock:
            if sub in self._subs:
                self._subs.remove(sub)

    # -- documents ----------------------------------------------------------

    def put_document(self, snapshot: DocumentSnapshot) -> dict:
        """Persist a page snapshot; keeps the current and previous versions."""
        with self._write_lock:
            url = snapshot.url
            versions = self._documents.get(url, [])
            version = (versions[-1].version + 1) if versions else 1
            rel = Path(DOCUMENTS_DIR) / _url_key(url) / f"{version}.html"
            path = self.dir / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(snapshot.source_html, encoding="utf-8")
            self._register_document(url, version, path, snapshot.fetched_at)
            entry = next(v for v in self._documents[url] if v.version == version)
            entry.parsed = snapshot
            self._append("document", {
                "url": url, "version": version, "path": str(rel),
                "fetched_at": format_ts(snapshot.fetched_at),
            })
            return {"url": url, "version": version,
                    "elements": len(snapshot.elements()),
                    "text_chars": len(snapshot.full_text)}

    def get_document(self, url: str) -> DocumentSnapshot | None:
        url = normalize_url(url)
        with self._write_lock:
            versions = self._documents.get(url)
            if not versions:
                return None
            latest = versions[-1]
            if latest.parsed is None:
                latest.parsed = parse_document(
                    latest.path.read_text(encoding="utf-8"), url,
                    fetched_at=latest.fetched_at)
            return latest.parsed

    def document_urls(self) -> list[str]:
        with self._write_lock:
            return sorted(self._documents)

    # -- re-anchoring ---------------------------------------------------------

    def reanchor_page(self, url: str) -> dict:
        """Resolve every anchor on the page against its latest snapshot.

        Relocated anchors get their stored paths/offsets updated (one
        revision bump per annotation); broken anchors are flagged and
        kept so users can repair them.
        """
        url = normalize_url(url)
        doc = self.get_document(url)
        if doc is None:
            raise AdamantError("no-snapshot", f"no stored snapshot for {url}")
        counts = {"attached": 0, "relocated": 0, "broken": 0}
        resolutions: dict[str, list[dict]] = {}
        updated = 0
        with self._write_lock:
            page_records = [a for a in self.annotations.values()
                            if not a.deleted
                            and any(s.page_url == url for s in a.anchors)]
            for annotation in sorted(page_records,
                                     key=lambda a: (a.created_at, a.id)):
                new_anchors: list[Selector] = []
                changed = False
                for anchor in annotation.anchors:
                    if anchor.page_url != url:
                        new_anchors.append(anchor)
                        continue
                    res = resolve_selector(doc, anchor)
                    counts[res.status] += 1
                    resolutions.setdefault(annotation.id, []).append(res.to_json())
                    updated_anchor = selector_from_resolution(anchor, res, doc)
                    if updated_anchor != anchor:
                        changed = True
                    new_anchors.append(updated_anchor)
                if changed:
                    record = replace(annotation, anchors=tuple(new_anchors),
                                     revision=annotation.revision + 1,
                                     modified_at=now_utc())
                    self.put_annotation(record, annotation.revision)
                    updated += 1
        counts["resolutions"] = resolutions
        counts["updated"] = updated
        return counts
