from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone

import pytest

from adamant.anchoring import Selector
from adamant.annotations import (
    HIGHLIGHT,
    ISSUE,
    NORMAL,
    PUBLIC,
    QUESTION,
    TODO,
    add_reply,
    complete_todo,
    create_annotation,
    transition_question,
)
from adamant.errors import AdamantError
from adamant.htmldoc import NodePath
from adamant.interchange import (
    annotation_from_record,
    dump_records,
    load_records,
    record_from_annotation,
)

T0 = datetime(2022, 3, 14, 9, 0, 0, tzinfo=timezone.utc)
PAGE = "https://docs.example.org/guide"


def sel(quote="world", start=6, end=9, path="/html[1]/body[1]/p[1]"):
    return Selector(page_url=PAGE, path=NodePath.parse(path), quote=quote,
                    start_offset=start, end_offset=end)


def make(type_=NORMAL, body="note", minute=0, tags=()):
    return create_annotation("u1", type_, body, [sel()], set(tags), PUBLIC,
                             now=T0 + timedelta(minutes=minute))


class TestRecordShape:
    def test_selector_triple_per_target(self):
        record = record_from_annotation(make())
        target = record["target"][0]
        assert target["source"] == PAGE
        kinds = [s["type"] for s in target["selector"]]
        assert kinds == ["TextQuoteSelector", "TextPositionSelector",
                         "NodePathSelector"]
        quote, position, path = target["selector"]
        assert quote["exact"] == "world"
        assert position == {"type": "TextPositionSelector", "start": 6,
                            "end_from_end": 9}
        assert path["value"] == "/html[1]/body[1]/p[1]"

    def test_motivations_distinct_per_type(self):
        motivations = set()
        for type_ in (NORMAL, HIGHLIGHT, QUESTION, ISSUE, TODO):
            body = "" if type_ == HIGHLIGHT else "x"
            motivations.add(record_from_annotation(make(type_, body))["motivation"])
        assert len(motivations) == 5

    def test_no_ids_in_records(self):
        a = add_reply(make(), "u2", "a reply")
        record = record_from_annotation(a)
        assert "id" not in record
        assert all("id" not in r for r in record["replies"])


class TestRoundTrip:
    def test_import_reproduces_everything_but_ids(self):
        a = make(QUESTION, "why is k undefined?", tags=("piling", "code"))
        a = add_reply(a, "u2", "same question here")
        a = transition_question(a, "u1", "answer", "k is the image count")
        b = annotation_from_record(record_from_annotation(a))
        assert b.id != a.id
        keep = lambda x: {k: v for k, v in x.to_json().items()
                          if k not in ("id", "revision", "replies")}
        assert keep(a) == keep(b)
        assert [(r.author, r.body, r.created_at) for r in b.replies] == \
            [(r.author, r.body, r.created_at) for r in a.replies]

    def test_todo_state_round_trips(self):
        a = complete_todo(make(TODO, "do it"), "u1")
        b = annotation_from_record(record_from_annotation(a))
        assert b.state.kind == "done"
        assert b.state.at == a.state.at

    def test_dump_is_deterministic_and_sorted(self):
        annotations = [make(minute=3), make(minute=1), make(minute=2)]
        text1 = dump_records(annotations)
        text2 = dump_records(list(reversed(annotations)))
        assert text1 == text2
        order = [r["created"] for r in json.loads(text1)["annotations"]]
        assert order == sorted(order)

    def test_dump_load_dump_fixpoint(self):
        annotations = [make(minute=i, body=f"note {i}") for i in range(5)]
        annotations.append(transition_question(
            make(QUESTION, "why?", minute=9), "u1", "answer", "because"))
        first = dump_records(annotations)
        second = dump_records(load_records(first))
        assert first == second


class TestMalformed:
    def test_not_json(self):
        with pytest.raises(AdamantError) as err:
            load_records("{nope")
        assert err.value.code == "malformed-interchange"

    def test_missing_selectors(self):
        record = record_from_annotation(make())
        del record["target"][0]["selector"][0]  # drop the quote selector
        payload = json.dumps({"annotations": [record]})
        with pytest.raises(AdamantError) as err:
            load_records(payload)
        assert err.value.code == "malformed-interchange"

    def test_wrong_top_level_shape(self):
        with pytest.raises(AdamantError) as err:
            load_records(json.dumps([1, 2, 3]))
        assert err.value.code == "malformed-interchange"
