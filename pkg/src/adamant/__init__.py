"""Adamant: a self-hostable annotation platform for HTML documentation.

Robust text anchoring, typed and stateful annotations, a persistent
queryable store with a per-page change feed, full-text search and
filtering, an HTTP/JSON API, and a corpus CLI.
"""

from .anchoring import (
    Resolution,
    Selector,
    create_selector,
    document_position,
    fuzzy_find,
    resolve_selector,
)
from .errors import AdamantError
from .htmldoc import (
    DocumentSnapshot,
    ElementNode,
    NodePath,
    TextNode,
    build_node_path,
    element_text,
    parse_document,
    resolve_node_path,
)
from .urls import normalize_url

__version__ = "0.1.0"

__all__ = [
    "AdamantError",
    "DocumentSnapshot",
    "ElementNode",
    "NodePath",
    "Resolution",
    "Selector",
    "TextNode",
    "build_node_path",
    "create_selector",
    "document_position",
    "element_text",
    "fuzzy_find",
    "normalize_url",
    "parse_document",
    "resolve_node_path",
    "resolve_selector",
    "__version__",
]
