"""The annotation model: five types, state machines, and mutation rules.

Annotations are immutable values; every mutation returns a new record
with the revision incremented by exactly one. Serializing concurrent
mutations (optimistic revision checks) is the store's job, as are the
checks that need shared state: group existence, read access, per-user
pins.

Type rules worth calling out:
  * highlights have no body; giving one a body converts it to normal
  * questions and to-dos are pinned by default and unpin on any
    terminal transition (answered / not relevant / done)
  * terminal states are final; there is no reopen
  * answering appends the answer to the question body with a fixed
    separator so round-trips are bit-exact
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime

from .anchoring import Selector
from .errors import AdamantError
from .timefmt import format_ts, now_utc, parse_ts

NORMAL = "normal"
HIGHLIGHT = "highlight"
QUESTION = "question"
ISSUE = "issue"
TODO = "todo"
ANNOTATION_TYPES = (NORMAL, HIGHLIGHT, QUESTION, ISSUE, TODO)

ANSWER_SEPARATOR = "\n\n[Answer] "


def new_id() -> str:
    return uuid.uuid4().hex


@dataclass(frozen=True)
class Visibility:
    kind: str  # public | private | group
    group_id: str | None = None

    def __post_init__(self):
        if self.kind not in ("public", "private", "group"):
            raise AdamantError("bad-request", f"bad visibility kind: {self.kind!r}")
        if (self.kind == "group") != (self.group_id is not None):
            raise AdamantError("bad-request", "group visibility requires a group id")

    def to_json(self):
        return {"group": self.group_id} if self.kind == "group" else self.kind

    @classmethod
    def from_json(cls, obj) -> "Visibility":
        if obj == "public":
            return PUBLIC
        if obj == "private":
            return PRIVATE
        if isinstance(obj, dict) and set(obj) == {"group"} and isinstance(obj["group"], str):
            return cls("group", obj["group"])
        raise AdamantError("bad-request", f"bad visibility value: {obj!r}")


PUBLIC = Visibility("public")
PRIVATE = Visibility("private")


def group_visibility(group_id: str) -> Visibility:
    return Visibility("group", group_id)


@dataclass(frozen=True)
class Reply:
    id: str
    author: str
    body: str
    created_at: datetime

    def to_json(self) -> dict:
        return {"id": self.id, "author": self.author, "body": self.body,
                "created_at": format_ts(self.created_at)}

    @classmethod
    def from_json(cls, obj: dict) -> "Reply":
        return cls(id=obj["id"], author=obj["author"], body=obj["body"],
                   created_at=parse_ts(obj["created_at"]))


@dataclass(frozen=True)
class QuestionState:
    kind: str  # unanswered | answered | not_relevant
    answer_text: str | None = None
    at: datetime | None = None

    @property
    def terminal(self) -> bool:
        return self.kind != "unanswered"

    def to_json(self) -> dict:
        if self.kind == "answered":
            return {"kind": "answered", "answer_text": self.answer_text,
                    "answered_at": format_ts(self.at)}
        if self.kind == "not_relevant":
            return {"kind": "not_relevant", "at": format_ts(self.at)}
        return {"kind": "unanswered"}


@dataclass(frozen=True)
class TodoState:
    kind: str  # open | done
    at: datetime | None = None

    @property
    def terminal(self) -> bool:
        return self.kind == "done"

    def to_json(self) -> dict:
        if self.kind == "done":
            return {"kind": "done", "at": format_ts(self.at)}
        return {"kind": "open"}


State = QuestionState | TodoState | None


def _state_from_json(type_: str, obj) -> State:
    if type_ == QUESTION:
        kind = obj["kind"]
        if kind == "answered":
            return QuestionState("answered", obj["answer_text"],
                                 parse_ts(obj["answered_at"]))
        if kind == "not_relevant":
            return QuestionState("not_relevant", None, parse_ts(obj["at"]))
        if kind == "unanswered":
            return QuestionState("unanswered")
        raise AdamantError("bad-request", f"bad question state: {obj!r}")
    if type_ == TODO:
        kind = obj["kind"]
        if kind == "done":
            return TodoState("done", parse_ts(obj["at"]))
        if kind == "open":
            return TodoState("open")
        raise AdamantError("bad-request", f"bad todo state: {obj!r}")
    if obj is not None:
        raise AdamantError("bad-request", f"type {type_} carries no state")
    return None


def default_state(type_: str) -> State:
    if type_ == QUESTION:
        return QuestionState("unanswered")
    if type_ == TODO:
        return TodoState("open")
    return None


@dataclass(frozen=True)
class Annotation:
    """One typed, stateful, multi-anchor note."""

    id: str
    author: str
    type: str
    body: str
    anchors: tuple[Selector, ...]
    tags: frozenset[str]
    visibility: Visibility
    pinned: bool
    state: State
    replies: tuple[Reply, ...] = ()
    created_at: datetime = field(default_factory=now_utc)
    modified_at: datetime = field(default_factory=now_utc)
    revision: int = 1
    deleted: bool = False

    def page_urls(self) -> set[str]:
        return {a.page_url for a in self.anchors}

    def to_json(self) -> dict:
        state = self.state.to_json() if self.state is not None else None
        return {
            "id": self.id,
            "author": self.author,
            "type": self.type,
            "body": self.body,
            "anchors": [a.to_json() for a in self.anchors],
            "tags": sorted(self.tags),
            "visibility": self.visibility.to_json(),
            "pinned": self.pinned,
            "state": state,
            "replies": [r.to_json() for r in self.replies],
            "created_at": format_ts(self.created_at),
            "modified_at": format_ts(self.modified_at),
            "revision": self.revision,
            "deleted": self.deleted,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Annotation":
        try:
            type_ = obj["type"]
            if type_ not in ANNOTATION_TYPES:
                raise AdamantError("bad-request", f"unknown annotation type: {type_!r}")
            return cls(
                id=obj["id"],
                author=obj["author"],
                type=type_,
                body=obj["body"],
                anchors=tuple(Selector.from_json(a) for a in obj["anchors"]),
                tags=frozenset(obj["tags"]),
                visibility=Visibility.from_json(obj["visibility"]),
                pinned=bool(obj["pinned"]),
                state=_state_from_json(type_, obj["state"]),
                replies=tuple(Reply.from_json(r) for r in obj["replies"]),
                created_at=parse_ts(obj["created_at"]),
                modified_at=parse_ts(obj["modified_at"]),
                revision=int(obj["revision"]),
                deleted=bool(obj["deleted"]),
            )
        except KeyError as exc:
            raise AdamantError("bad-request", f"annotation record missing {exc}") from exc


def _require_author(annotation: Annotation, editor: str) -> None:
    if editor != annotation.author:
        raise AdamantError("not-author",
                           f"only {annotation.author} may modify this annotation")


def _require_live(annotation: Annotation) -> None:
    if annotation.deleted:
        raise AdamantError("deleted-annotation", "annotation was deleted")


def _bump(annotation: Annotation, now: datetime, **changes) -> Annotation:
    return replace(annotation, revision=annotation.revision + 1,
                   modified_at=now, **changes)


def create_annotation(author: str, type_: str, body: str,
                      anchors: list[Selector], tags: set[str] | frozenset[str],
                      visibility: Visibility, *, now: datetime | None = None,
                      id_: str | None = None) -> Annotation:
    """Build a fresh revision-1 annotation.

    Questions and to-dos start pinned; highlights must have an empty body.
    """
    if type_ not in ANNOTATION_TYPES:
        raise AdamantError("bad-request", f"unknown annotation type: {type_!r}")
    if not anchors:
        raise AdamantError("no-anchors", "an annotation needs at least one anchor")
    if type_ == HIGHLIGHT and body:
        raise AdamantError("highlight-with-body", "highlights carry no body text")
    if len(set(anchors)) != len(anchors):
        raise AdamantError("duplicate-anchor", "identical selector supplied twice")
    when = now or now_utc()
    return Annotation(
        id=id_ or new_id(),
        author=author,
        type=type_,
        body=body,
        anchors=tuple(anchors),
        tags=frozenset(tags),
        visibility=visibility,
        pinned=type_ in (QUESTION, TODO),
        state=default_state(type_),
        created_at=when,
        modified_at=when,
    )


_UNSET = object()


def edit_annotation(annotation: Annotation, editor: str, *, body=_UNSET,
                    tags=_UNSET, anchors=_UNSET,
                    now: datetime | None = None) -> Annotation:
    """Author-only edit of body, tags, and/or anchors in one revision."""
    _require_author(annotation, editor)
    _require_live(annotation)
    changes: dict = {}
    if body is not _UNSET and body != annotation.body:
        changes["body"] = body
        if annotation.type == HIGHLIGHT and body:
            changes["type"] = NORMAL
    if tags is not _UNSET:
        changes["tags"] = frozenset(tags)
    if anchors is not _UNSET:
        anchors = tuple(anchors)
        if not anchors:
            raise AdamantError("no-anchors", "cannot remove every anchor")
        if len(set(anchors)) != len(anchors):
            raise AdamantError("duplicate-anchor", "identical selector supplied twice")
        changes["anchors"] = anchors
    if not changes:
        return _bump(annotation, now or now_utc())
    return _bump(annotation, now or now_utc(), **changes)


def edit_body(annotation: Annotation, editor: str, new_body: str,
              now: datetime | None = None) -> Annotation:
    return edit_annotation(annotation, editor, body=new_body, now=now)


def add_anchor(annotation: Annotation, editor: str, selector: Selector,
               now: datetime | None = None) -> Annotation:
    """Append one more anchor; anchors may live on different pages."""
    _require_author(annotation, editor)
    _require_live(annotation)
    if selector in annotation.anchors:
        raise AdamantError("duplicate-anchor", "this selector is already anchored")
    return _bump(annotation, now or now_utc(),
                 anchors=annotation.anchors + (selector,))


def transition_question(annotation: Annotation, editor: str, action: str,
                        text: str | None = None,
                        now: datetime | None = None) -> Annotation:
    """Answer or dismiss an open question. Both outcomes are final."""
    if annotation.type != QUESTION:
        raise AdamantError("not-a-question", f"annotation is a {annotation.type}")
    _require_author(annotation, editor)
    _require_live(annotation)
    if annotation.state.terminal:
        raise AdamantError("already-resolved", "question is already resolved")
    when = now or now_utc()
    if action == "answer":
        if not text:
            raise AdamantError("empty-body", "an answer needs text")
        return _bump(
            annotation, when,
            state=QuestionState("answered", text, when),
            body=annotation.body + ANSWER_SEPARATOR + text,
            pinned=False,
        )
    if action == "dismiss":
        return _bump(annotation, when,
                     state=QuestionState("not_relevant", None, when), pinned=False)
    raise AdamantError("bad-request", f"unknown question action: {action!r}")


def complete_todo(annotation: Annotation, editor: str,
                  now: datetime | None = None) -> Annotation:
    """Mark a to-do done; done is final."""
    if annotation.type != TODO:
        raise AdamantError("not-a-todo", f"annotation is a {annotation.type}")
    _require_author(annotation, editor)
    _require_live(annotation)
    if annotation.state.terminal:
        raise AdamantError("already-done", "to-do is already done")
    when = now or now_utc()
    return _bump(annotation, when, state=TodoState("done", when), pinned=False)


def set_author_pin(annotation: Annotation, flag: bool,
                   now: datetime | None = None) -> Annotation:
    """Flip the author's own pin on the record.

    Reader pins never touch the record; the store keeps them per user.
    """
    _require_live(annotation)
    if annotation.pinned == flag:
        return annotation
    return _bump(annotation, now or now_utc(), pinned=flag)


def add_reply(annotation: Annotation, author: str, body: str,
              now: datetime | None = None, id_: str | None = None) -> Annotation:
    """Append an immutable reply. Any reader may reply; the store checks
    read access before calling this."""
    _require_live(annotation)
    if not body:
        raise AdamantError("empty-body", "replies need text")
    when = now or now_utc()
    reply = Reply(id=id_ or new_id(), author=author, body=body, created_at=when)
    return _bump(annotation, when, replies=annotation.replies + (reply,))


def delete_annotation(annotation: Annotation, editor: str,
                      now: datetime | None = None) -> Annotation:
    """Tombstone the record; deleting twice is an idempotent no-op."""
    _require_author(annotation, editor)
    if annotation.deleted:
        return annotation
    return _bump(annotation, now or now_utc(), deleted=True)


@dataclass(frozen=True)
class IssueReport:
    """Self-contained export of one issue annotation for maintainers."""

    annotation_id: str
    anchors: tuple[Selector, ...]
    body: str
    author: str
    exported_at: datetime

    def to_json(self) -> dict:
        return {
            "annotation_id": self.annotation_id,
            "anchors": [a.to_json() for a in self.anchors],
            "body": self.body,
            "author": self.author,
            "exported_at": format_ts(self.exported_at),
        }


def export_issue_report(annotation: Annotation,
                        now: datetime | None = None) -> IssueReport:
    if annotation.type != ISSUE:
        raise AdamantError("not-an-issue", f"annotation is a {annotation.type}")
    _require_live(annotation)
    return IssueReport(
        annotation_id=annotation.id,
        anchors=tuple(annotation.anchors),
        body=annotation.body,
        author=annotation.author,
        exported_at=now or now_utc(),
    )
