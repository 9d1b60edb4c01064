from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from adamant.anchoring import (
    ATTACHED,
    BROKEN,
    METHOD_ANCESTOR,
    METHOD_ELEMENT,
    METHOD_EXACT,
    METHOD_FUZZY,
    RELOCATED,
    Resolution,
    Selector,
    create_selector,
    document_position,
    fuzzy_find,
    resolve_selector,
    selector_from_resolution,
)
from adamant.errors import AdamantError
from adamant.htmldoc import NodePath, element_text, parse_document, resolve_node_path

from conftest import F1_HTML, F1_URL, body_of, child_el
from oracles import (
    fuzzy_scan_ref,
    levenshtein_ref,
    preorder_elements_ref,
    quote_occurrences_ref,
)


def world_selector(doc):
    return create_selector(doc, child_el(body_of(doc), "p", 1), 6, 5)


class TestCreateSelector:
    def test_world_selector(self, f1):
        sel = world_selector(f1)
        assert sel.path.serialize() == "/html[1]/body[1]/p[1]"
        assert (sel.quote, sel.start_offset, sel.end_offset) == ("world", 6, 9)
        assert sel.start_offset + len(sel.quote) + sel.end_offset == 20

    def test_whole_text_has_zero_end_offset(self, f1):
        sel = create_selector(f1, child_el(body_of(f1), "p", 1), 0, 20)
        assert sel.quote == "Hello world example."
        assert sel.end_offset == 0

    def test_out_of_bounds_rejected(self, f1):
        with pytest.raises(AdamantError) as err:
            create_selector(f1, child_el(body_of(f1), "p", 1), 19, 5)
        assert err.value.code == "range-out-of-bounds"

    def test_empty_quote_rejected(self, f1):
        with pytest.raises(AdamantError) as err:
            create_selector(f1, child_el(body_of(f1), "p", 1), 0, 0)
        assert err.value.code == "empty-quote"

    def test_selector_json_round_trip(self, f1):
        sel = world_selector(f1)
        assert Selector.from_json(sel.to_json()) == sel


class TestResolveSelector:
    def test_unchanged_document_attaches_exactly(self, f1):
        res = resolve_selector(f1, world_selector(f1))
        assert res.status == ATTACHED
        assert res.method == METHOD_EXACT
        assert res.confidence == 1.0
        assert (res.start_offset, res.end_offset) == (6, 9)

    def test_element_edit_relocates_within_element(self, f1):
        sel = world_selector(f1)
        doc2 = parse_document(
            F1_HTML.replace("Hello world example.", "Hello brave world example."),
            F1_URL,
        )
        # oracle: exhaustive scan of the mutated document
        hits = quote_occurrences_ref(doc2, "world")
        assert len(hits) == 1
        el, at = hits[0]
        assert at == 12 and len(element_text(doc2, el)) - at - 5 == 9

        res = resolve_selector(doc2, sel)
        assert res.status == RELOCATED
        assert res.method == METHOD_ELEMENT
        assert (res.start_offset, res.end_offset) == (12, 9)
        assert res.recovered_text(doc2) == "world"

    def test_wrapping_div_relocates_via_ancestor_search(self, f1):
        sel = world_selector(f1)
        doc2 = parse_document(
            F1_HTML.replace("<p>Hello world example.</p>",
                            "<div><p>Hello world example.</p></div>"),
            F1_URL,
        )
        # the stored path now addresses the other bare <p>
        hijacked = resolve_node_path(doc2, sel.path)
        assert element_text(doc2, hijacked) == "Set columns to change rows."

        hits = quote_occurrences_ref(doc2, "world")
        assert len(hits) == 1

        res = resolve_selector(doc2, sel)
        assert res.status == RELOCATED
        assert res.method == METHOD_ANCESTOR
        assert res.path.serialize() == "/html[1]/body[1]/div[1]/p[1]"
        assert res.recovered_text(doc2) == "world"

    def test_small_edit_relocates_fuzzily(self, f1):
        sel = world_selector(f1)
        doc2 = parse_document(F1_HTML.replace("world", "word"), F1_URL)
        assert quote_occurrences_ref(doc2, "world") == []

        # oracle: brute-force windowed scan of the page text
        ref = fuzzy_scan_ref(doc2.full_text, "world", 0.3)
        assert ref is not None and ref[2] == pytest.approx(1 / 5)

        res = resolve_selector(doc2, sel)
        assert res.status == RELOCATED
        assert res.method == METHOD_FUZZY
        assert res.confidence == pytest.approx(0.8)
        assert res.recovered_text(doc2) == "word"

    def test_quote_removed_breaks(self, f1):
        sel = world_selector(f1)
        doc2 = parse_document(
            F1_HTML.replace("<p>Hello world example.</p>", ""), F1_URL
        )
        res = resolve_selector(doc2, sel)
        assert res.status == BROKEN
        assert res.path is None and res.method is None

    def test_ambiguous_fuzzy_match_breaks(self):
        # two equally-distant near-misses in different paragraphs
        doc = parse_document(
            "<html><body><p>the armature spins</p><p>the armatures spin</p></body></html>",
            F1_URL,
        )
        sel = Selector(page_url=doc.url, path=NodePath.parse("/html[1]/body[1]/p[3]"),
                       quote="armaturez", start_offset=4, end_offset=6)
        assert resolve_selector(doc, sel).status == BROKEN

    def test_multiple_exact_matches_prefer_original_position(self):
        filler = "x" * 50
        html = (f"<html><body><p>beta {filler}</p><p>qq beta qq</p>"
                "<p>beta tail</p></body></html>")
        doc = parse_document(html, F1_URL)
        p2 = child_el(body_of(doc), "p", 2)
        sel = create_selector(doc, p2, 3, 4)  # the middle "beta"
        # edit the middle paragraph away; nearest surviving copy is in p[3]
        doc2 = parse_document(html.replace("qq beta qq", "qq banana qq"), F1_URL)
        res = resolve_selector(doc2, sel)
        assert res.status == RELOCATED
        assert res.method == METHOD_ANCESTOR
        assert res.recovered_text(doc2) == "beta"
        assert res.path.serialize() == "/html[1]/body[1]/p[3]"

    def test_unresolvable_path_falls_back_to_earliest_match(self):
        # with the original element gone, the position estimate anchors at
        # the resolvable prefix, so the earliest occurrence wins
        html = ("<html><body><p>alpha beta gamma</p><p>beta</p>"
                "<p>alpha beta gamma</p></body></html>")
        doc = parse_document(html, F1_URL)
        p3 = child_el(body_of(doc), "p", 3)
        sel = create_selector(doc, p3, 6, 4)
        doc2 = parse_document(html.replace("<p>alpha beta gamma</p></body>",
                                           "</body>"), F1_URL)
        res = resolve_selector(doc2, sel)
        assert res.status == RELOCATED
        assert res.recovered_text(doc2) == "beta"
        assert res.path.serialize() == "/html[1]/body[1]/p[1]"


class TestResolveProperties:
    def test_round_trip_every_valid_range(self, f1):
        for el in preorder_elements_ref(f1.root):
            text = element_text(f1, el)
            for start in range(len(text)):
                for length in (1, 2, 5, len(text) - start):
                    if length < 1 or start + length > len(text):
                        continue
                    sel = create_selector(f1, el, start, length)
                    res = resolve_selector(f1, sel)
                    assert res.status == ATTACHED
                    assert res.path == sel.path
                    assert (res.start_offset, res.end_offset) == \
                        (sel.start_offset, sel.end_offset)

    def test_offset_conservation_after_relocation(self, f1):
        sel = world_selector(f1)
        for mutated in [
            F1_HTML.replace("Hello world", "Hello brave world"),
            F1_HTML.replace("<p>Hello world example.</p>",
                            "<div><p>Hello world example.</p></div>"),
            F1_HTML.replace("world", "word"),
        ]:
            doc2 = parse_document(mutated, F1_URL)
            res = resolve_selector(doc2, sel)
            assert res.status in (ATTACHED, RELOCATED)
            node = resolve_node_path(doc2, res.path)
            recovered = res.recovered_text(doc2)
            assert res.start_offset + len(recovered) + res.end_offset == \
                len(element_text(doc2, node))

    def test_unique_verbatim_quote_is_never_broken(self, f1):
        rng = random.Random(1234)
        words = ["piling", "arrange", "columns", "renderer", "aggregate", "dataset"]
        for _ in range(50):
            paragraphs = ["".join(rng.choices(words, k=4)) for _ in range(6)]
            target = rng.randrange(6)
            paragraphs[target] += " uniquemarkerquote "
            html = "<html><body>" + "".join(f"<p>{p}</p>" for p in paragraphs) + \
                "</body></html>"
            doc = parse_document(html, F1_URL)
            p = child_el(body_of(doc), "p", target + 1)
            text = element_text(doc, p)
            sel = create_selector(doc, p, text.index("uniquemarkerquote"), 17)
            # shuffle paragraphs: path likely points elsewhere afterwards
            rng.shuffle(paragraphs)
            doc2 = parse_document(
                "<html><body>" + "".join(f"<p>{p}</p>" for p in paragraphs) +
                "</body></html>", F1_URL)
            hits = quote_occurrences_ref(doc2, "uniquemarkerquote")
            assert len(hits) == 1
            res = resolve_selector(doc2, sel)
            assert res.status in (ATTACHED, RELOCATED)
            assert res.recovered_text(doc2) == "uniquemarkerquote"
            el, at = hits[0]
            assert resolve_node_path(doc2, res.path) is el
            assert res.start_offset == at


class TestFuzzyFind:
    def test_near_miss_window(self):
        got = fuzzy_find("Set column to change rows.", "columns", 0.3)
        assert got is not None
        pos, wlen, dist = got
        assert pos == 4
        assert dist == pytest.approx(1 / 7)
        ref = fuzzy_scan_ref("Set column to change rows.", "columns", 0.3)
        assert (pos, wlen, dist) == ref

    def test_verbatim_containment_is_distance_zero(self):
        got = fuzzy_find("pick the arrangeBy method", "arrangeBy", 0.3)
        assert got == (9, 9, 0.0)

    def test_disjoint_alphabets_find_nothing(self):
        assert fuzzy_find("aaaa", "zebra", 0.3) is None

    def test_empty_quote_rejected(self):
        with pytest.raises(AdamantError):
            fuzzy_find("haystack", "", 0.3)

    @settings(max_examples=200, deadline=None)
    @given(
        haystack=st.text(alphabet="abcd ", min_size=0, max_size=60),
        quote=st.text(alphabet="abcd ", min_size=1, max_size=12),
        max_norm=st.sampled_from([0.0, 0.15, 0.3, 0.45]),
    )
    def test_agrees_with_brute_force_oracle(self, haystack, quote, max_norm):
        assert fuzzy_find(haystack, quote, max_norm) == \
            fuzzy_scan_ref(haystack, quote, max_norm)

    def test_agrees_with_oracle_on_long_haystack(self):
        rng = random.Random(7)
        haystack = "".join(rng.choices("abcdefg .,", k=500))
        for quote in ["abcdefg", "gfe dcba", "zzzzzz", "abc"]:
            assert fuzzy_find(haystack, quote, 0.3) == \
                fuzzy_scan_ref(haystack, quote, 0.3)


class TestDocumentPosition:
    def test_h1_before_second_paragraph(self, f1):
        h1 = create_selector(f1, child_el(body_of(f1), "h1"), 0, 6)
        p2 = create_selector(f1, child_el(body_of(f1), "p", 2), 0, 3)
        key_h1 = document_position(f1, resolve_selector(f1, h1))
        key_p2 = document_position(f1, resolve_selector(f1, p2))
        assert key_h1 < key_p2

    def test_offsets_order_within_element(self, f1):
        p1 = child_el(body_of(f1), "p", 1)
        first = create_selector(f1, p1, 0, 5)
        second = create_selector(f1, p1, 6, 5)
        assert document_position(f1, resolve_selector(f1, first)) < \
            document_position(f1, resolve_selector(f1, second))

    def test_total_order_matches_preorder_walk_oracle(self, f1):
        selectors = []
        for el in preorder_elements_ref(f1.root):
            text = element_text(f1, el)
            for start in range(0, len(text), 3):
                selectors.append(create_selector(f1, el, start, 1))
        resolutions = [resolve_selector(f1, s) for s in selectors]
        keys = [document_position(f1, r) for r in resolutions]

        order_ref = {id(el): i for i, el in enumerate(preorder_elements_ref(f1.root))}
        expected = sorted(
            range(len(selectors)),
            key=lambda i: (order_ref[id(resolve_node_path(f1, selectors[i].path))],
                           selectors[i].start_offset),
        )
        assert sorted(range(len(selectors)), key=lambda i: keys[i]) == expected

    def test_broken_resolution_has_no_position(self, f1):
        with pytest.raises(AdamantError) as err:
            document_position(f1, Resolution(status=BROKEN))
        assert err.value.code == "broken-resolution"


class TestSelectorFromResolution:
    def test_fuzzy_update_keeps_selector_invariant(self, f1):
        sel = world_selector(f1)
        doc2 = parse_document(F1_HTML.replace("world", "word"), F1_URL)
        res = resolve_selector(doc2, sel)
        updated = selector_from_resolution(sel, res, doc2)
        assert updated.quote == "word"
        node = resolve_node_path(doc2, updated.path)
        assert updated.start_offset + len(updated.quote) + updated.end_offset == \
            len(element_text(doc2, node))

    def test_broken_resolution_sets_flag(self, f1):
        sel = world_selector(f1)
        doc2 = parse_document(F1_HTML.replace("<p>Hello world example.</p>", ""),
                              F1_URL)
        res = resolve_selector(doc2, sel)
        updated = selector_from_resolution(sel, res, doc2)
        assert updated.broken and updated.quote == "world"


def test_oracle_variants_agree():
    rng = random.Random(12)
    from oracles import fuzzy_scan_all_ref
    for _ in range(150):
        hay = "".join(rng.choices("abcde ", k=rng.randrange(0, 50)))
        quote = "".join(rng.choices("abcde ", k=rng.randrange(1, 10)))
        norm = rng.choice([0.0, 0.2, 0.3, 0.5])
        assert fuzzy_scan_ref(hay, quote, norm) == \
            fuzzy_scan_all_ref(hay, quote, norm)


def test_levenshtein_oracle_sanity():
    assert levenshtein_ref("kitten", "sitting") == 3
    assert levenshtein_ref("", "abc") == 3
    assert levenshtein_ref("same", "same") == 0
