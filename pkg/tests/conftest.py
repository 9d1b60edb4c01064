from __future__ import annotations

import pytest

from adamant.htmldoc import ElementNode, parse_document

F1_HTML = (
    "<html><head><title>Docs</title></head><body>"
    "<h1>Piling Guide</h1>"
    "<p>Hello world example.</p>"
    "<pre>const p = createPilingJs(el);</pre>"
    "<p>Set columns to change rows.</p>"
    "</body></html>"
)
F1_URL = "https://docs.example.org/guide"


@pytest.fixture
def f1():
    return parse_document(F1_HTML, F1_URL)


def body_of(doc):
    return next(c for c in doc.root.children
                if isinstance(c, ElementNode) and c.tag == "body")


def child_el(parent, tag, nth=1):
    seen = 0
    for c in parent.children:
        if isinstance(c, ElementNode) and c.tag == tag:
            seen += 1
            if seen == nth:
                return c
    raise AssertionError(f"no <{tag}>[{nth}] under {parent!r}")
