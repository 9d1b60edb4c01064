"""Built-in inverted index over annotation text.

Indexes the body, every anchor quote, every tag, and reply bodies.
Tokenization is deliberately dumb: lowercase, split on non-alphanumeric,
drop empties. A query matches when every query token occurs in the
annotation's token multiset; ranking is total term frequency with ties
broken by newer modification time, then id.
"""

from __future__ import annotations

from collections import Counter
from datetime import datetime

from .annotations import Annotation


def tokenize(text: str) -> list[str]:
    out: list[str] = []
    word: list[str] = []
    for ch in text.lower():
        if ch.isalnum():
            word.append(ch)
        else:
            if word:
                out.append("".join(word))
                word = []
    if word:
        out.append("".join(word))
    return out


def annotation_tokens(annotation: Annotation) -> Counter:
    counts: Counter = Counter(tokenize(annotation.body))
    for anchor in annotation.anchors:
        counts.update(tokenize(anchor.quote))
    for tag in annotation.tags:
        counts.update(tokenize(tag))
    for reply in annotation.replies:
        counts.update(tokenize(reply.body))
    return counts


class SearchIndex:
    """token -> {annotation id -> term frequency}, kept in step with the store."""

    def __init__(self) -> None:
        self._postings: dict[str, dict[str, int]] = {}
        self._by_id: dict[str, Counter] = {}
        self._meta: dict[str, tuple[datetime, str]] = {}

    def index_annotation(self, annotation: Annotation) -> None:
        if annotation.deleted:
            self.remove_from_index(annotation.id)
            return
        self.remove_from_index(annotation.id)
        counts = annotation_tokens(annotation)
        self._by_id[annotation.id] = counts
        self._meta[annotation.id] = (annotation.modified_at, annotation.id)
        for token, n in counts.items():
            self._postings.setdefault(token, {})[annotation.id] = n

    def remove_from_index(self, annotation_id: str) -> None:
        counts = self._by_id.pop(annotation_id, None)
        self._meta.pop(annotation_id, None)
        if counts is None:
            return
        for token in counts:
            bucket = self._postings.get(token)
            if bucket is not None:
                bucket.pop(annotation_id, None)
                if not bucket:
                    del self._postings[token]

    def match_and_rank(self, query_text: str,
                       candidate_ids: set[str]) -> list[str]:
        """Ids from the candidate set containing every query token, best first."""
        tokens = tokenize(query_text)
        if not tokens:
            return []
        ids: set[str] | None = None
        for token in set(tokens):
            bucket = self._postings.get(token, {})
            hits = {i for i in bucket if i in candidate_ids}
            ids = hits if ids is None else ids & hits
            if not ids:
                return []
        assert ids is not None

        def rank_key(annotation_id: str):
            counts = self._by_id[annotation_id]
            tf = sum(counts[t] for t in tokens)
            modified, tie_id = self._meta[annotation_id]
            return (-tf, _inverse_ts(modified), tie_id)

        return sorted(ids, key=rank_key)


def _inverse_ts(dt: datetime) -> float:
    return -dt.timestamp()
