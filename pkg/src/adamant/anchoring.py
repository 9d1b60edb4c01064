"""Selectors and their resolution against changed documents.

A Selector pins one text range: the element's node path, an exact copy
of the quoted text, and dual character offsets (distance from the start
of the element's text to the quote, and from the quote to the end of the
element's text). Resolution tries, in order: the exact stored position,
a scan of the stored element, a scan widening through the ancestors, and
finally a fuzzy windowed edit-distance search over the whole document.
Failing all four, the anchor is broken; broken is a value, not an error.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import AdamantError
from .htmldoc import (
    DocumentSnapshot,
    ElementNode,
    NodePath,
    build_node_path,
    deepest_resolvable_prefix,
    element_text,
    resolve_node_path,
)

# Fuzzy matching accepts windows within 30% normalized edit distance and
# considers window lengths within +/- 30% of the quote length.
FUZZY_MAX_NORM_DIST = 0.3
FUZZY_WINDOW_BAND = 0.3

ATTACHED = "attached"
RELOCATED = "relocated"
BROKEN = "broken"

METHOD_EXACT = "exact"
METHOD_ELEMENT = "element-search"
METHOD_ANCESTOR = "ancestor-search"
METHOD_FUZZY = "fuzzy"


@dataclass(frozen=True)
class Selector:
    """Persistent description of one anchored text range."""

    page_url: str
    path: NodePath
    quote: str
    start_offset: int
    end_offset: int
    broken: bool = False

    def to_json(self) -> dict:
        out = {
            "page_url": self.page_url,
            "path": self.path.serialize(),
            "quote": self.quote,
            "start_offset": self.start_offset,
            "end_offset": self.end_offset,
        }
        if self.broken:
            out["broken"] = True
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Selector":
        try:
            return cls(
                page_url=obj["page_url"],
                path=NodePath.parse(obj["path"]),
                quote=obj["quote"],
                start_offset=int(obj["start_offset"]),
                end_offset=int(obj["end_offset"]),
                broken=bool(obj.get("broken", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise AdamantError("bad-request", f"malformed selector: {exc}") from exc


@dataclass(frozen=True)
class Resolution:
    """Outcome of re-anchoring one selector.

    For attached and relocated outcomes the offsets always satisfy
    start + len(recovered text) + end == len(element text); the recovered
    text equals the quote except for fuzzy relocations, where it is the
    best-matching window.
    """

    status: str
    path: NodePath | None = None
    start_offset: int | None = None
    end_offset: int | None = None
    confidence: float = 0.0
    method: str | None = None

    def __post_init__(self):
        if (self.status == BROKEN) != (self.path is None):
            raise ValueError("broken status must coincide with an absent path")
        if self.method == METHOD_EXACT and self.confidence != 1.0:
            raise ValueError("exact resolutions must have confidence 1.0")

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "path": self.path.serialize() if self.path else None,
            "start_offset": self.start_offset,
            "end_offset": self.end_offset,
            "confidence": self.confidence,
            "method": self.method,
        }

    def recovered_text(self, doc: DocumentSnapshot) -> str | None:
        """Text the resolution points at in the given document."""
        if self.status == BROKEN:
            return None
        node = resolve_node_path(doc, self.path)
        if node is None:
            return None
        text = element_text(doc, node)
        return text[self.start_offset: len(text) - self.end_offset]


def create_selector(doc: DocumentSnapshot, node: ElementNode,
                    quote_start: int, quote_len: int) -> Selector:
    """Build the selector for a range of the element's text."""
    if quote_len < 1:
        raise AdamantError("empty-quote", "quote must be at least one character")
    text = element_text(doc, node)
    if quote_start < 0 or quote_start + quote_len > len(text):
        raise AdamantError(
            "range-out-of-bounds",
            f"range {quote_start}+{quote_len} exceeds element text of length {len(text)}",
        )
    return Selector(
        page_url=doc.url,
        path=build_node_path(doc, node),
        quote=text[quote_start: quote_start + quote_len],
        start_offset=quote_start,
        end_offset=len(text) - quote_start - quote_len,
    )


# -- fuzzy matching ------------------------------------------------------


def _minimal_windows(haystack: str, quote: str,
                     max_dist: int) -> tuple[int | None, list[tuple[int, int]]]:
    """Minimal edit distance over all windows, with every tying window.

    Windows have lengths within the +/-30% band of the quote length. One
    edit-distance DP per start position yields the distance for every
    window length at that position in a single pass. Returns
    (best_distance, [(position, window_len), ...]) or (None, []) when no
    window comes within max_dist.
    """
    m = len(quote)
    band = int(FUZZY_WINDOW_BAND * m)
    wmin, wmax = max(1, m - band), m + band
    best: int | None = None
    wins: list[tuple[int, int]] = []

    # Histogram lower bound: any banded window at pos has edit distance
    # >= (hist_l1 - band) / 2, where hist_l1 compares the length-m window
    # at pos against the quote. Positions provably over the bound skip
    # the DP entirely.
    hist_l1: list[int] | None = None
    n = len(haystack)
    if n >= m > 0:
        balance: dict[str, int] = {}  # window count minus quote count
        for ch in quote:
            balance[ch] = balance.get(ch, 0) - 1
        l1 = m
        for ch in haystack[:m]:
            d = balance.get(ch, 0)
            l1 += -1 if d < 0 else 1
            balance[ch] = d + 1
        hist_l1 = [l1]
        for pos in range(1, n - m + 1):
            out_ch, in_ch = haystack[pos - 1], haystack[pos + m - 1]
            if out_ch != in_ch:
                d = balance[out_ch]
                l1 += 1 if d <= 0 else -1
                balance[out_ch] = d - 1
                d = balance.get(in_ch, 0)
                l1 += -1 if d < 0 else 1
                balance[in_ch] = d + 1
            hist_l1.append(l1)

    for pos in range(n - wmin + 1):
        bound = max_dist if best is None else best
        if hist_l1 is not None and pos < len(hist_l1) and \
                hist_l1[pos] - band > 2 * bound:
            continue
        prev = list(range(m + 1))
        limit = min(wmax, n - pos)
        for i in range(1, limit + 1):
            ch = haystack[pos + i - 1]
            row = [i]
            append = row.append
            for j in range(1, m + 1):
                cost = 0 if ch == quote[j - 1] else 1
                append(min(row[j - 1] + 1, prev[j] + 1, prev[j - 1] + cost))
            prev = row
            if i >= wmin:
                d = prev[m]
                if d <= bound:
                    if best is None or d < best:
                        best = d
                        wins = []
                        bound = d
                    wins.append((pos, i))
            if min(prev) > bound:
                break  # row minima only grow with window length
    return best, wins


def fuzzy_find(haystack: str, quote: str,
               max_norm_dist: float) -> tuple[int, int, float] | None:
    """Best fuzzy occurrence of the quote within the haystack.

    Minimizes Levenshtein(window, quote) / len(quote) over all windows in
    the +/-30% length band; ties go to smaller position, then smaller
    window length. Returns (position, window_len, norm_dist), or None if
    nothing comes within max_norm_dist.
    """
    if not quote:
        raise AdamantError("empty-quote", "quote must be non-empty")
    if not 0 <= max_norm_dist < 1:
        raise AdamantError("bad-request", "max_norm_dist must be in [0, 1)")
    max_dist = int(max_norm_dist * len(quote))
    best, wins = _minimal_windows(haystack, quote, max_dist)
    if best is None:
        return None
    pos, wlen = min(wins)
    return pos, wlen, best / len(quote)


# -- resolution ----------------------------------------------------------


def _occurrences(text: str, quote: str) -> list[int]:
    out = []
    at = text.find(quote)
    while at != -1:
        out.append(at)
        at = text.find(quote, at + 1)
    return out


def _original_abs_position(doc: DocumentSnapshot, sel: Selector) -> int:
    """Best estimate of where the selector used to sit, in document text
    coordinates. Falls back to the deepest resolvable prefix element."""
    node = resolve_node_path(doc, sel.path) or deepest_resolvable_prefix(doc, sel.path)
    if node is None:
        node = doc.root
    start, end = doc.span(node)
    return min(start + sel.start_offset, end)

def _relocate(doc: DocumentSnapshot, abs_start: int, length: int,
              method: str, confidence: float) -> Resolution:
    node = doc.deepest_element_containing(abs_start, abs_start + length)
    node_start, node_end = doc.span(node)
    start = abs_start - node_start
    return Resolution(
        status=RELOCATED,
        path=build_node_path(doc, node),
        start_offset=start,
        end_offset=(node_end - node_start) - start - length,
        confidence=confidence,
        method=method,
    )


def _pick_closest(positions: list[int], origin: int) -> int:
    """Occurrence closest to the original position; ties go earliest."""
    return min(positions, key=lambda p: (abs(p - origin), p))


def resolve_selector(doc: DocumentSnapshot, sel: Selector) -> Resolution:
    """Re-anchor a selector, falling back from exact to fuzzy matching."""
    origin = _original_abs_position(doc, sel)
    quote_len = len(sel.quote)
    target = resolve_node_path(doc, sel.path)

    # (1) exact: both stored offsets still describe the quote.
    if target is not None:
        text = element_text(doc, target)
        if (sel.start_offset + quote_len + sel.end_offset == len(text)
                and text[sel.start_offset: sel.start_offset + quote_len] == sel.quote):
            return Resolution(
                status=ATTACHED,
                path=build_node_path(doc, target),
                start_offset=sel.start_offset,
                end_offset=sel.end_offset,
                confidence=1.0,
                method=METHOD_EXACT,
            )

    # (2) element-search: the quote moved within the stored element.
    if target is not None:
        t_start, _ = doc.span(target)
        hits = [t_start + p for p in _occurrences(element_text(doc, target), sel.quote)]
        if hits:
            return _relocate(doc, _pick_closest(hits, origin), quote_len,
                             METHOD_ELEMENT, 1.0)

    # (3) ancestor-search: widen the scan through enclosing elements.
    anchor = deepest_resolvable_prefix(doc, sel.path) or doc.root
    chain: list[ElementNode] = []
    node: ElementNode | None = anchor if target is None else doc.parent_of(anchor)
    while node is not None:
        chain.append(node)
        node = doc.parent_of(node)
    for ancestor in chain:
        a_start, a_end = doc.span(ancestor)
        hits = [a_start + p
                for p in _occurrences(doc.full_text[a_start:a_end], sel.quote)]
        if hits:
            return _relocate(doc, _pick_closest(hits, origin), quote_len,
                             METHOD_ANCESTOR, 1.0)

    # (4) fuzzy: windowed edit distance over the whole document's text.
    max_dist = int(FUZZY_MAX_NORM_DIST * quote_len)
    best, wins = _minimal_windows(doc.full_text, sel.quote, max_dist)
    if best is not None:
        minimal = sorted(wins)
        owners = {
            id(doc.deepest_element_containing(pos, pos + wlen))
            for pos, wlen in minimal
        }
        if len(owners) == 1:
            # equal-distance windows inside different elements would be a
            # guess; a single owning element is unambiguous.
            pos, wlen = minimal[0]
            return _relocate(doc, pos, wlen, METHOD_FUZZY, 1.0 - best / quote_len)

    return Resolution(status=BROKEN)


def find_quote(doc: DocumentSnapshot,
               quote: str) -> list[tuple[ElementNode, int]]:
    """Every verbatim occurrence of the quote, in document order.

    Each occurrence is attributed to the deepest element whose text fully
    contains it, as (element, start offset within that element's text).
    """
    if not quote:
        raise AdamantError("empty-quote", "quote must be non-empty")
    hits: list[tuple[ElementNode, int]] = []
    for at in _occurrences(doc.full_text, quote):
        node = doc.deepest_element_containing(at, at + len(quote))
        hits.append((node, at - doc.span(node)[0]))
    return hits


def document_position(doc: DocumentSnapshot, res: Resolution) -> tuple[int, int]:
    """Sort key (pre-order element index, start offset) for a resolution."""
    if res.status == BROKEN or res.path is None:
        raise AdamantError("broken-resolution", "broken anchors have no position")
    node = resolve_node_path(doc, res.path)
    if node is None:
        raise AdamantError("broken-resolution", "resolution path does not resolve")
    return doc.pre_order_index(node), res.start_offset


def selector_from_resolution(sel: Selector, res: Resolution,
                             doc: DocumentSnapshot) -> Selector:
    """Updated stored selector after a successful resolution.

    Fuzzy relocations adopt the recovered window as the new quote so the
    offsets-plus-quote length invariant keeps holding for the stored record.
    """
    if res.status == BROKEN:
        return replace(sel, broken=True)
    quote = sel.quote if res.method != METHOD_FUZZY else res.recovered_text(doc)
    return Selector(
        page_url=sel.page_url,
        path=res.path,
        quote=quote,
        start_offset=res.start_offset,
        end_offset=res.end_offset,
        broken=False,
    )
