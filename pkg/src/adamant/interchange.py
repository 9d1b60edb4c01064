"""Interchange files: a portable JSON shape for annotation corpora.

Each record describes one annotation with web-annotation-style selectors
(TextQuoteSelector / TextPositionSelector / NodePathSelector) per target.
The position selector keeps this system's from-the-end offset as
``end_from_end``. Server-assigned ids are omitted, so
import(export(x)) reproduces x up to ids, and exports are deterministic:
records sorted by (created, id), keys sorted, two-space indent.
"""

from __future__ import annotations

import json
from typing import Iterable

from .anchoring import Selector
from .annotations import (
    HIGHLIGHT,
    ISSUE,
    NORMAL,
    QUESTION,
    TODO,
    Annotation,
    QuestionState,
    Reply,
    TodoState,
    Visibility,
    new_id,
)
from .errors import AdamantError
from .htmldoc import NodePath
from .timefmt import format_ts, parse_ts

# annotation type <-> interchange motivation
_MOTIVATION = {
    NORMAL: "commenting",
    HIGHLIGHT: "highlighting",
    QUESTION: "questioning",
    ISSUE: "assessing",
    TODO: "bookmarking",
}
_TYPE_FOR = {v: k for k, v in _MOTIVATION.items()}


def _target_json(selector: Selector) -> dict:
    selectors = [
        {"type": "TextQuoteSelector", "exact": selector.quote},
        {"type": "TextPositionSelector", "start": selector.start_offset,
         "end_from_end": selector.end_offset},
        {"type": "NodePathSelector", "value": selector.path.serialize()},
    ]
    return {"source": selector.page_url, "selector": selectors}


def _target_selector(obj: dict) -> Selector:
    try:
        by_type = {s["type"]: s for s in obj["selector"]}
        quote = by_type["TextQuoteSelector"]["exact"]
        position = by_type["TextPositionSelector"]
        path = by_type["NodePathSelector"]["value"]
        return Selector(
            page_url=obj["source"],
            path=NodePath.parse(path),
            quote=quote,
            start_offset=int(position["start"]),
            end_offset=int(position["end_from_end"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise AdamantError("malformed-interchange",
                           f"bad target: {exc}") from exc


def _state_json(annotation: Annotation):
    return annotation.state.to_json() if annotation.state is not None else None


def record_from_annotation(annotation: Annotation) -> dict:
    return {
        "target": [_target_json(s) for s in annotation.anchors],
        "body": annotation.body,
        "motivation": _MOTIVATION[annotation.type],
        "creator": annotation.author,
        "created": format_ts(annotation.created_at),
        "modified": format_ts(annotation.modified_at),
        "tags": sorted(annotation.tags),
        "visibility": annotation.visibility.to_json(),
        "pinned": annotation.pinned,
        "state": _state_json(annotation),
        "replies": [{"creator": r.author, "body": r.body,
                     "created": format_ts(r.created_at)}
                    for r in annotation.replies],
    }


def annotation_from_record(record: dict) -> Annotation:
    try:
        motivation = record["motivation"]
        if motivation not in _TYPE_FOR:
            raise AdamantError("malformed-interchange",
                               f"unknown motivation: {motivation!r}")
        type_ = _TYPE_FOR[motivation]
        targets = record["target"]
        if not targets:
            raise AdamantError("malformed-interchange", "record has no target")
        anchors = tuple(_target_selector(t) for t in targets)
        state = None
        raw_state = record.get("state")
        if type_ == QUESTION:
            kind = (raw_state or {}).get("kind", "unanswered")
            if kind == "answered":
                state = QuestionState("answered", raw_state["answer_text"],
                                      parse_ts(raw_state["answered_at"]))
            elif kind == "not_relevant":
                state = QuestionState("not_relevant", None,
                                      parse_ts(raw_state["at"]))
            else:
                state = QuestionState("unanswered")
        elif type_ == TODO:
            kind = (raw_state or {}).get("kind", "open")
            if kind == "done":
                state = TodoState("done", parse_ts(raw_state["at"]))
            else:
                state = TodoState("open")
        created = parse_ts(record["created"])
        modified = parse_ts(record.get("modified", record["created"]))
        replies = tuple(
            Reply(id=new_id(), author=r["creator"], body=r["body"],
                  created_at=parse_ts(r["created"]))
            for r in record.get("replies", [])
        )
        return Annotation(
            id=new_id(),
            author=record["creator"],
            type=type_,
            body=record["body"],
            anchors=anchors,
            tags=frozenset(record.get("tags", [])),
            visibility=Visibility.from_json(record.get("visibility", "public")),
            pinned=bool(record.get("pinned", False)),
            state=state,
            replies=replies,
            created_at=created,
            modified_at=modified,
        )
    except AdamantError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise AdamantError("malformed-interchange",
                           f"bad record: {exc}") from exc


def dump_records(annotations: Iterable[Annotation]) -> str:
    """Deterministic interchange document for a set of annotations."""
    ordered = sorted(annotations, key=lambda a: (a.created_at, a.id))
    records = [record_from_annotation(a) for a in ordered]
    return json.dumps({"annotations": records}, indent=2, sort_keys=True,
                      ensure_ascii=False) + "\n"


def load_records(text: str) -> list[Annotation]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AdamantError("malformed-interchange", f"not JSON: {exc}") from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("annotations"), list):
        raise AdamantError("malformed-interchange",
                           'expected {"annotations": [...]}')
    return [annotation_from_record(r) for r in payload["annotations"]]
