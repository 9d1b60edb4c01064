"""Filtering and sorting of annotation lists (the sidebar's filter pane).

Filtering is the conjunction of every provided criterion; an empty
criteria object matches everything. Sorting offers document order
(position on the page, resolved against a snapshot) and both time
directions, since "sort by time" has no single obvious direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from .anchoring import BROKEN, document_position, resolve_selector
from .annotations import ANNOTATION_TYPES, Annotation
from .errors import AdamantError
from .htmldoc import DocumentSnapshot
from .timefmt import parse_ts

DOCUMENT_ORDER = "document_order"
TIME_DESC = "time_desc"
TIME_ASC = "time_asc"
SORT_MODES = (DOCUMENT_ORDER, TIME_DESC, TIME_ASC)


@dataclass(frozen=True)
class FilterCriteria:
    """Conjunctive filter; empty criteria match everything."""

    types: frozenset[str] = frozenset()
    created_from: datetime | None = None
    created_to: datetime | None = None
    tags: frozenset[str] = frozenset()
    states: frozenset[str] = frozenset()  # state kinds, e.g. {"unanswered"}

    def __post_init__(self):
        unknown = self.types - set(ANNOTATION_TYPES)
        if unknown:
            raise AdamantError("bad-request", f"unknown types: {sorted(unknown)}")

    @classmethod
    def parse(cls, spec: str) -> "FilterCriteria":
        """Parse the CLI mini-language: comma/space-separated
        ``type=issue tag=x before=TS after=TS state=answered`` terms."""
        types: set[str] = set()
        tags: set[str] = set()
        states: set[str] = set()
        created_from = created_to = None
        for term in spec.replace(",", " ").split():
            key, _, value = term.partition("=")
            if not value:
                raise AdamantError("bad-request", f"bad filter term: {term!r}")
            if key == "type":
                types.add(value)
            elif key == "tag":
                tags.add(value)
            elif key == "before":
                created_to = parse_ts(value)
            elif key == "after":
                created_from = parse_ts(value)
            elif key == "state":
                states.add(value)
            else:
                raise AdamantError("bad-request", f"unknown filter key: {key!r}")
        return cls(types=frozenset(types), tags=frozenset(tags),
                   states=frozenset(states), created_from=created_from,
                   created_to=created_to)

    def matches(self, annotation: Annotation) -> bool:
        if self.types and annotation.type not in self.types:
            return False
        if self.created_from is not None and annotation.created_at < self.created_from:
            return False
        if self.created_to is not None and annotation.created_at > self.created_to:
            return False
        if self.tags and not self.tags <= annotation.tags:
            return False
        if self.states:
            kind = annotation.state.kind if annotation.state is not None else None
            if kind not in self.states:
                return False
        return True


def filter_annotations(annotations: list[Annotation],
                       criteria: FilterCriteria) -> list[Annotation]:
    return [a for a in annotations if criteria.matches(a)]


def _time_key(annotation: Annotation) -> tuple:
    return (annotation.created_at, annotation.id)


def sort_annotations(annotations: list[Annotation], mode: str,
                     doc: DocumentSnapshot | None = None) -> list[Annotation]:
    """Order annotations by page position or authoring time.

    Document order needs a snapshot of the page; an annotation's position
    is the minimum position over its resolvable anchors on that page.
    Annotations with no resolvable on-page anchor sort after the on-page
    ones, newest first.
    """
    if mode == TIME_DESC:
        return sorted(annotations, key=lambda a: (-a.created_at.timestamp(), a.id))
    if mode == TIME_ASC:
        return sorted(annotations, key=_time_key)
    if mode != DOCUMENT_ORDER:
        raise AdamantError("bad-request", f"unknown sort mode: {mode!r}")
    if doc is None:
        raise AdamantError("no-snapshot", "document order needs a page snapshot")

    on_page: list[tuple[tuple[int, int], Annotation]] = []
    off_page: list[Annotation] = []
    for annotation in annotations:
        best = None
        for anchor in annotation.anchors:
            if anchor.page_url != doc.url:
                continue
            res = resolve_selector(doc, anchor)
            if res.status == BROKEN:
                continue
            key = document_position(doc, res)
            if best is None or key < best:
                best = key
        if best is None:
            off_page.append(annotation)
        else:
            on_page.append((best, annotation))
    on_page.sort(key=lambda pair: (pair[0], -pair[1].created_at.timestamp(),
                                   pair[1].id))
    off_page.sort(key=lambda a: (-a.created_at.timestamp(), a.id))
    return [a for _, a in on_page] + off_page
