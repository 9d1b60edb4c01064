"""HTML document snapshots: parsing, node paths, and element text.

A DocumentSnapshot is the substrate selectors resolve against: an
immutable tree of elements and text nodes parsed from one documentation
page. Text is kept exactly as parsed (entities decoded, no whitespace
collapsing) because offsets into it must be stable and `pre` blocks
matter on documentation pages. `script`/`style` content and comments
never reach the tree, so element text is a plain concatenation of
descendant text nodes in document order.

Offsets throughout count Unicode code points, not bytes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from html.parser import HTMLParser

from .errors import AdamantError
from .urls import normalize_url

VOID_TAGS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)
_SKIP_CONTENT_TAGS = frozenset({"script", "style"})


@dataclass(eq=False)
class TextNode:
    """Leaf holding decoded character data, exactly as parsed."""

    data: str

    def __repr__(self) -> str:
        return f"TextNode({self.data!r})"


@dataclass(eq=False)
class ElementNode:
    """Element with a lowercase tag and ordered children."""

    tag: str
    children: list["ElementNode | TextNode"] = field(default_factory=list)

    def __repr__(self) -> str:
        return f"<{self.tag} children={len(self.children)}>"


Node = ElementNode | TextNode


@dataclass(frozen=True)
class NodePath:
    """Address of one element: (tag, 1-based same-tag sibling index) pairs.

    Serialized as ``/tag[i]/tag[i]/...``; parse/serialize round-trips
    losslessly.
    """

    segments: tuple[tuple[str, int], ...]

    _SEGMENT_RE = re.compile(r"/([a-z][a-z0-9-]*)\[([1-9][0-9]*)\]")

    def serialize(self) -> str:
        return "".join(f"/{tag}[{idx}]" for tag, idx in self.segments)

    def __str__(self) -> str:
        return self.serialize()

    @classmethod
    def parse(cls, text: str) -> "NodePath":
        if not text or not text.startswith("/"):
            raise AdamantError("malformed-path", f"bad node path: {text!r}")
        pos = 0
        segments: list[tuple[str, int]] = []
        while pos < len(text):
            m = cls._SEGMENT_RE.match(text, pos)
            if m is None:
                raise AdamantError("malformed-path", f"bad node path: {text!r}")
            segments.append((m.group(1), int(m.group(2))))
            pos = m.end()
        return cls(tuple(segments))

    def parent(self) -> "NodePath | None":
        if len(self.segments) <= 1:
            return None
        return NodePath(self.segments[:-1])


class _TreeBuilder(HTMLParser):
    """Builds the node tree; tolerant of stray end tags and unclosed tags."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.top: list[Node] = []
        self.stack: list[ElementNode] = []

    def _append(self, node: Node) -> None:
        siblings = self.stack[-1].children if self.stack else self.top
        if isinstance(node, TextNode) and siblings and isinstance(siblings[-1], TextNode):
            siblings[-1].data += node.data
        else:
            siblings.append(node)

    def handle_starttag(self, tag, attrs):
        tag = tag.lower()
        el = ElementNode(tag)
        self._append(el)
        if tag not in VOID_TAGS:
            self.stack.append(el)

    def handle_startendtag(self, tag, attrs):
        self._append(ElementNode(tag.lower()))

    def handle_endtag(self, tag):
        tag = tag.lower()
        for i in range(len(self.stack) - 1, -1, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # stray end tag: ignore

    def handle_data(self, data):
        if not data:
            return
        if self.stack and self.stack[-1].tag in _SKIP_CONTENT_TAGS:
            return
        if not self.stack and not data.strip():
            return  # inter-element whitespace outside any root
        self._append(TextNode(data))


class DocumentSnapshot:
    """Parsed tree of one page plus indexes for fast anchoring.

    The full document text (concatenated text nodes in pre-order) and the
    half-open span each element covers in it are precomputed: an
    element's text is always a contiguous slice of the document text.
    """

    def __init__(self, url: str, root: ElementNode, fetched_at: datetime,
                 source_html: str = ""):
        self.url = normalize_url(url)
        self.root = root
        self.fetched_at = fetched_at
        self.source_html = source_html
        self._parents: dict[int, ElementNode | None] = {}
        self._pre_index: dict[int, int] = {}
        self._spans: dict[int, tuple[int, int]] = {}
        self._elements: list[ElementNode] = []
        chunks: list[str] = []
        self._index_element(root, None, chunks)
        self.full_text = "".join(chunks)

    def _index_element(self, el: ElementNode, parent: ElementNode | None,
                       chunks: list[str]) -> None:
        self._parents[id(el)] = parent
        self._pre_index[id(el)] = len(self._elements)
        self._elements.append(el)
        start = sum(len(c) for c in chunks)
        for child in el.children:
            if isinstance(child, TextNode):
                chunks.append(child.data)
            else:
                self._index_element(child, el, chunks)
        self._spans[id(el)] = (start, sum(len(c) for c in chunks))

    # -- membership-checked accessors ------------------------------------

    def _require(self, node: ElementNode) -> int:
        key = id(node)
        if key not in self._spans:
            raise AdamantError("node-not-in-document", "element is not part of this document")
        return key

    def span(self, node: ElementNode) -> tuple[int, int]:
        """Half-open range of the element's text within full_text."""
        return self._spans[self._require(node)]

    def parent_of(self, node: ElementNode) -> ElementNode | None:
        return self._parents[self._require(node)]

    def pre_order_index(self, node: ElementNode) -> int:
        """Position of the element in a pre-order walk (document order)."""
        return self._pre_index[self._require(node)]

    def elements(self) -> list[ElementNode]:
        """All elements in document order."""
        return list(self._elements)

    def deepest_element_containing(self, start: int, end: int) -> ElementNode:
        """Deepest element whose text span contains [start, end)."""
        node = self.root
        while True:
            for child in node.children:
                if isinstance(child, ElementNode):
                    s, e = self._spans[id(child)]
                    if s <= start and end <= e:
                        node = child
                        break
            else:
                return node

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DocumentSnapshot):
            return NotImplemented
        return (self.url == other.url and self.fetched_at == other.fetched_at
                and _tree_equal(self.root, other.root))

    def __repr__(self) -> str:
        return f"DocumentSnapshot(url={self.url!r}, elements={len(self._elements)})"


def _tree_equal(a: Node, b: Node) -> bool:
    if isinstance(a, TextNode) or isinstance(b, TextNode):
        return isinstance(a, TextNode) and isinstance(b, TextNode) and a.data == b.data
    return (a.tag == b.tag and len(a.children) == len(b.children)
            and all(_tree_equal(x, y) for x, y in zip(a.children, b.children)))


def parse_document(html_text: str, url: str,
                   fetched_at: datetime | None = None) -> DocumentSnapshot:
    """Parse an HTML page into a DocumentSnapshot.

    The tree mirrors the markup's element nesting. Void and unknown tags
    are handled; comments and script/style content are dropped. A page
    with several top-level nodes gets a synthetic ``html`` root so the
    snapshot always has exactly one root element.
    """
    if not html_text or not html_text.strip():
        raise AdamantError("unparseable-input", "empty document")
    builder = _TreeBuilder()
    builder.feed(html_text)
    builder.close()
    top_elements = [n for n in builder.top if isinstance(n, ElementNode)]
    if not top_elements:
        raise AdamantError("unparseable-input", "document has no root element")
    if len(builder.top) == 1 and isinstance(builder.top[0], ElementNode):
        root = builder.top[0]
    else:
        root = ElementNode("html", list(builder.top))
    when = fetched_at or datetime.now(timezone.utc)
    return DocumentSnapshot(url, root, when, source_html=html_text)


def element_text(doc: DocumentSnapshot, node: ElementNode) -> str:
    """Concatenated descendant text of the element, in document order."""
    start, end = doc.span(node)
    return doc.full_text[start:end]


def build_node_path(doc: DocumentSnapshot, node: ElementNode) -> NodePath:
    """Path addressing the element: 1-based index among same-tag siblings."""
    doc._require(node)
    segments: list[tuple[str, int]] = []
    current: ElementNode | None = node
    while current is not None:
        parent = doc.parent_of(current)
        if parent is None:
            segments.append((current.tag, 1))
        else:
            nth = 0
            for sibling in parent.children:
                if isinstance(sibling, ElementNode) and sibling.tag == current.tag:
                    nth += 1
                    if sibling is current:
                        break
            segments.append((current.tag, nth))
        current = parent
    segments.reverse()
    return NodePath(tuple(segments))


def resolve_node_path(doc: DocumentSnapshot, path: NodePath) -> ElementNode | None:
    """Element the path addresses, or None if any segment misses."""
    if not path.segments:
        return None
    tag, idx = path.segments[0]
    if doc.root.tag != tag or idx != 1:
        return None
    node = doc.root
    for tag, idx in path.segments[1:]:
        nth = 0
        found = None
        for child in node.children:
            if isinstance(child, ElementNode) and child.tag == tag:
                nth += 1
                if nth == idx:
                    found = child
                    break
        if found is None:
            return None
        node = found
    return node


def deepest_resolvable_prefix(doc: DocumentSnapshot, path: NodePath) -> ElementNode | None:
    """Element addressed by the longest resolvable prefix of the path."""
    for cut in range(len(path.segments), 0, -1):
        node = resolve_node_path(doc, NodePath(path.segments[:cut]))
        if node is not None:
            return node
    return None
