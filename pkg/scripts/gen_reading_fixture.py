#!/usr/bin/env python3
"""Regenerate fixtures/reading/annotations.json.

The bundled reading corpus: 32 public annotations on the piling.js demo
page (18 normal, 10 issue, 4 question of which 3 answered). Selectors
are computed against page.html, so rerun this after editing the page.
"""

from __future__ import annotations

import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

from adamant.anchoring import create_selector, find_quote
from adamant.annotations import (
    ISSUE,
    NORMAL,
    PUBLIC,
    QUESTION,
    create_annotation,
    transition_question,
)
from adamant.htmldoc import parse_document
from adamant.interchange import dump_records

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "reading"
PAGE_URL = "https://docs.example.org/piling/"
T0 = datetime(2022, 3, 14, 9, 0, 0, tzinfo=timezone.utc)

# (type, quote, occurrence (1-based), author, body, tags, answer or None)
ENTRIES = [
    (NORMAL, "columns", 1, "maya", "Use this to create rows", ["layout"], None),
    (NORMAL, "createPilingJs(demoEl)", 1, "jordan",
     "constructor wants the container element, swap demoEl for your own node",
     ["setup"], None),
    (NORMAL, "returns the piling object", 1, "sam",
     "keep this reference around, every later call hangs off it", [], None),
    (NORMAL, "Every item needs a renderer", 1, "priya",
     "register the image renderer before calling set('items', ...)",
     ["renderers"], None),
    (NORMAL, "src: 'photo-1.png'", 1, "alexis",
     "paths resolve against the page, not the script", [], None),
    (NORMAL, "label field on your data", 1, "noah",
     "this is what step 4 wants for the stripes", ["task"], None),
    (NORMAL, "piling.set(name, value)", 1, "rin",
     "all properties go through set, there are no direct setters", [], None),
    (NORMAL, "rowHeight", 1, "tomas", "leave it on auto unless piles clip",
     [], None),
    (NORMAL, "pileItemOffset", 1, "kat",
     "controls the fan-out spacing when images stack", [], None),
    (NORMAL, "arrangeBy", 1, "maya",
     "needed for step 3, pass a callback that returns the sort value",
     ["task"], None),
    (NORMAL, "callback it receives the pile state", 1, "jordan",
     "the callback runs once per pile, not per item", [], None),
    (NORMAL, "groupBy", 1, "sam", "might be the one for sorting... "
     "actually arrangeBy is what we want", [], None),
    (NORMAL, "Grouping by grid is the fastest", 1, "alexis",
     "good default for hundreds of images", ["performance"], None),
    (NORMAL, "cover renderer draws the pile cover", 1, "priya",
     "explains why piles show a blended preview image", [], None),
    (NORMAL, "piling.subscribe", 1, "noah",
     "events exist but none are required for the basic task", [], None),
    (NORMAL, "splits them into two rows", 1, "rin",
     "matches the target screenshot for the exercise", ["task"], None),
    (NORMAL, "piling.set('columns', 2)", 1, "kat",
     "two columns makes two rows with four images", ["layout"], None),
    (NORMAL, "matching stripes appear along the bottom", 1, "tomas",
     "stripe color comes from the label value", [], None),
    (ISSUE, "const piling = createPilingJs(demoEl);", 1, "maya",
     "demoEl is never defined in this snippet, copy-paste fails", ["code"], None),
    (ISSUE, "{ src: 'photo-2.png' },", 1, "jordan",
     "trailing comma breaks older bundler configs", ["code"], None),
    (ISSUE, "piling.arrangeBy('data', 'weight');", 1, "sam",
     "example never defines a weight field on the data", ["code"], None),
    (ISSUE, "piling.groupBy('grid');", 1, "priya",
     "no output shown, unclear what grid grouping looks like", [], None),
    (ISSUE, "aggregateColorMap", 1, "alexis",
     "referenced here but only defined two sections later", ["fragmented"], None),
    (ISSUE, "const k = items.length;", 1, "noah",
     "k is declared but the example never uses it", ["code"], None),
    (ISSUE, "document.getElementById('demo')", 1, "rin",
     "throws unless your page actually has an element with id demo", ["code"], None),
    (ISSUE, "cellPadding", 1, "kat",
     "table says 12 but the default in the build is 8", [], None),
    (ISSUE, "piling.unsubscribe", 1, "tomas",
     "signature undocumented, does it take the handler or a token?", [], None),
    (ISSUE, "pileLabel", 1, "maya",
     "docs never say which data types are allowed here", [], None),
    (QUESTION, "The objective may be a string key", 1, "jordan",
     "How do I use this?", ["task"],
     "pass a key of your data object, or a callback returning a number"),
    (QUESTION, "const k = items.length;", 1, "sam",
     "what is k supposed to be here?", [],
     "just the item count, the example forgot to use it"),
    (QUESTION, "how many grid cells fit side by side", 1, "priya",
     "do columns and rowHeight interact?", ["layout"],
     "no, rowHeight stays fixed and only the cell width changes"),
    (QUESTION, "Merges piles by row", 1, "alexis",
     "is there a way to undo a grouping afterwards?", [], None),
]


def main() -> int:
    page = (FIXTURE_DIR / "page.html").read_text(encoding="utf-8")
    doc = parse_document(page, PAGE_URL)
    annotations = []
    for minute, entry in enumerate(ENTRIES):
        type_, quote, occurrence, author, body, tags, answer = entry
        hits = find_quote(doc, quote)
        if len(hits) < occurrence:
            print(f"FATAL: quote {quote!r} has {len(hits)} occurrence(s), "
                  f"need {occurrence}", file=sys.stderr)
            return 1
        node, start = hits[occurrence - 1]
        selector = create_selector(doc, node, start, len(quote))
        created = T0 + timedelta(minutes=minute)
        record = create_annotation(author, type_, body, [selector], set(tags),
                                   PUBLIC, now=created)
        if answer is not None:
            record = transition_question(record, author, "answer", answer,
                                         now=created + timedelta(minutes=45))
        annotations.append(record)

    counts = {}
    for a in annotations:
        counts[a.type] = counts.get(a.type, 0) + 1
    answered = sum(1 for a in annotations
                   if a.type == QUESTION and a.state.kind == "answered")
    assert len(annotations) == 32, len(annotations)
    assert counts == {NORMAL: 18, ISSUE: 10, QUESTION: 4}, counts
    assert answered == 3, answered

    out = FIXTURE_DIR / "annotations.json"
    out.write_text(dump_records(annotations), encoding="utf-8")
    print(f"wrote {out} ({len(annotations)} annotations: {counts}, "
          f"{answered} answered)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
