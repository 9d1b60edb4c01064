"""Synthetic HTML corpus and scripted mutations for the acceptance suite.

Pages are generated from a seeded RNG: nested sections, paragraphs,
preformatted blocks, lists and tables filled with random words, plus
distinctive marker phrases that mutation tests anchor to. Trees
round-trip through a small serializer so mutations can be applied
structurally and re-parsed.
"""

from __future__ import annotations

import copy
import random
from html import escape

from adamant.htmldoc import DocumentSnapshot, ElementNode, TextNode, parse_document

WORDS = (
    "pile image render layout grid label data callback arrange group cover "
    "texture column row item offset aggregate color demo example property "
    "method event subscribe handler source stripe category gallery install "
    "instance element container object array number string value default "
    "étude café naïve 例えば"
).split()

_MARKER_ALPHABET = "bcdfghjklmnpqrstvwxz"


def marker_phrase(rng: random.Random, words: int = 3) -> str:
    """Distinctive gibberish unlikely to sit near any real text."""
    return " ".join(
        "".join(rng.choice(_MARKER_ALPHABET) for _ in range(rng.randint(5, 9)))
        for _ in range(words)
    )


def _sentence(rng: random.Random, n: int | None = None) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(n or rng.randint(4, 14))) + "."


def synth_page(rng: random.Random, index: int, markers: list[str]) -> str:
    """One documentation-like page; the markers are embedded verbatim,
    each in its own paragraph."""
    parts = [f"<html><head><title>Page {index}</title></head><body>",
             f"<h1>{_sentence(rng, 3)}</h1>"]
    marker_slots = list(markers)
    rng.shuffle(marker_slots)
    sections = rng.randint(2, 4)
    for _ in range(sections):
        parts.append(f"<h2>{_sentence(rng, 2)}</h2>")
        parts.append("<div>")
        for _ in range(rng.randint(2, 5)):
            kind = rng.random()
            if kind < 0.55:
                text = _sentence(rng)
                if marker_slots and rng.random() < 0.6:
                    text += f" {marker_slots.pop()} {_sentence(rng, 3)}"
                parts.append(f"<p>{escape(text)}</p>")
            elif kind < 0.7:
                lines = "\n".join(f"const {rng.choice(WORDS)} = "
                                  f"{rng.randint(0, 99)};"
                                  for _ in range(rng.randint(1, 4)))
                parts.append(f"<pre>{escape(lines)}</pre>")
            elif kind < 0.85:
                items = "".join(f"<li>{escape(_sentence(rng, 3))}</li>"
                                for _ in range(rng.randint(2, 4)))
                parts.append(f"<ul>{items}</ul>")
            else:
                rows = "".join(
                    f"<tr><td>{escape(rng.choice(WORDS))}</td>"
                    f"<td>{escape(_sentence(rng, 2))}</td></tr>"
                    for _ in range(rng.randint(2, 3)))
                parts.append(f"<table>{rows}</table>")
        parts.append("</div>")
    for leftover in marker_slots:  # every marker must land somewhere
        parts.append(f"<p>{escape(_sentence(rng, 2))} {leftover}.</p>")
    parts.append("</body></html>")
    return "".join(parts)


def serialize(node) -> str:
    """Tree back to HTML; parse(serialize(t)) reproduces t's text exactly."""
    if isinstance(node, TextNode):
        return escape(node.data, quote=False)
    inner = "".join(serialize(c) for c in node.children)
    return f"<{node.tag}>{inner}</{node.tag}>"


def _find_parent(root: ElementNode, target) -> ElementNode | None:
    for child in root.children:
        if child is target:
            return root
        if isinstance(child, ElementNode):
            found = _find_parent(child, target)
            if found is not None:
                return found
    return None


def _clone_with_target(doc: DocumentSnapshot, path) -> tuple[ElementNode, ElementNode]:
    """Deep-copy the tree and locate the copy of the path's element."""
    from adamant.htmldoc import resolve_node_path
    root = copy.deepcopy(doc.root)
    clone_doc = DocumentSnapshot(doc.url, root, doc.fetched_at)
    target = resolve_node_path(clone_doc, path)
    assert target is not None
    return root, target


def mutate(doc: DocumentSnapshot, path, quote: str, kind: str,
           rng: random.Random) -> str:
    """Apply one scripted mutation and return the new page HTML."""
    root, target = _clone_with_target(doc, path)
    if kind == "insert_sibling":
        parent = _find_parent(root, target)
        at = parent.children.index(target)
        parent.children.insert(
            at, ElementNode(target.tag, [TextNode(_sentence(rng, 4))]))
    elif kind == "prepend_text":
        first_text = next(c for c in target.children if isinstance(c, TextNode))
        first_text.data = "UPDATE " + _sentence(rng, 2) + " " + first_text.data
    elif kind == "wrap_in_container":
        parent = _find_parent(root, target)
        at = parent.children.index(target)
        parent.children[at] = ElementNode("div", [target])
    elif kind == "rename_ancestor":
        parent = _find_parent(root, target)
        if parent is root:  # keep a stable root; rename the target instead
            target.tag = "section" if target.tag != "section" else "article"
        else:
            parent.tag = "section" if parent.tag != "section" else "article"
    elif kind == "edit_quote":
        _edit_inside_quote(target, quote, rng)
    elif kind == "delete_quote":
        _replace_text(target, quote, "")
    else:
        raise ValueError(kind)
    return serialize(root)


def _replace_text(el: ElementNode, old: str, new: str) -> bool:
    for child in el.children:
        if isinstance(child, TextNode) and old in child.data:
            child.data = child.data.replace(old, new, 1)
            return True
        if isinstance(child, ElementNode) and _replace_text(child, old, new):
            return True
    return False


def _edit_inside_quote(el: ElementNode, quote: str, rng: random.Random) -> None:
    edits = rng.randint(1, 2)
    mutated = list(quote)
    positions = rng.sample(range(len(quote)), edits)
    for at in positions:
        choices = [c for c in _MARKER_ALPHABET if c != mutated[at]]
        mutated[at] = rng.choice(choices)
    ok = _replace_text(el, quote, "".join(mutated))
    assert ok, "quote text not found inside its own element"
