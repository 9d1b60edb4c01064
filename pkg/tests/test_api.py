from __future__ import annotations

import urllib.parse

import pytest

from adamant.api import ApiServer
from adamant.store import Store

from apiclient import Client, SSEReader
from conftest import F1_HTML, F1_URL

PAGE_A = F1_URL
ENC_A = urllib.parse.quote(PAGE_A, safe="")


def anchor_json(page=PAGE_A, path="/html[1]/body[1]/p[1]", quote="world",
                start=6, end=9):
    return {"page_url": page, "path": path, "quote": quote,
            "start_offset": start, "end_offset": end}


@pytest.fixture
def server(tmp_path):
    store = Store(tmp_path / "store")
    srv = ApiServer(store, "127.0.0.1", 0)
    srv.start_background()
    yield srv
    srv.shutdown()
    store.close()


@pytest.fixture
def client(server):
    return Client(server.address)


def create_annotation(client, user="u1", type_="normal", body="note", **kw):
    payload = {"type": type_, "body": body, "anchors": [anchor_json()],
               "tags": [], "visibility": "public"}
    payload.update(kw)
    status, record = client.post("/annotations", payload, user=user)
    assert status == 201, record
    return record


class TestAnnotationCrud:
    def test_create_question_is_pinned(self, client):
        record = create_annotation(client, type_="question",
                                   body="How do I use this?")
        assert record["pinned"] is True
        assert record["state"] == {"kind": "unanswered"}
        assert record["revision"] == 1

    def test_anonymous_write_rejected(self, client):
        status, body = client.post("/annotations", {"type": "normal"})
        assert status == 401
        assert body["code"] == "authentication-required"

    def test_patch_with_stale_revision_conflicts(self, client):
        record = create_annotation(client)
        status, _ = client.patch(f"/annotations/{record['id']}",
                                 {"expected_revision": 1, "body": "v2"}, user="u1")
        assert status == 200
        status, body = client.patch(f"/annotations/{record['id']}",
                                    {"expected_revision": 1, "body": "v3"},
                                    user="u1")
        assert status == 409
        assert body["code"] == "revision-conflict"

    def test_delete_by_non_author_forbidden(self, client):
        record = create_annotation(client)
        status, body = client.delete(f"/annotations/{record['id']}", user="u2")
        assert status == 403
        assert body["code"] == "not-author"

    def test_delete_returns_tombstone(self, client):
        record = create_annotation(client)
        status, body = client.delete(f"/annotations/{record['id']}", user="u1")
        assert status == 200
        assert body["deleted"] is True

    def test_invariant_violation_is_400(self, client):
        status, body = client.post("/annotations",
                                   {"type": "highlight", "body": "nope",
                                    "anchors": [anchor_json()]}, user="u1")
        assert status == 400
        assert body["code"] == "highlight-with-body"

    def test_unknown_id_is_404(self, client):
        status, body = client.patch("/annotations/missing",
                                    {"expected_revision": 1, "body": "x"},
                                    user="u1")
        assert status == 404
        assert body["code"] == "not-found"


class TestStateAndReplies:
    def test_answer_appends_to_body(self, client):
        record = create_annotation(client, type_="question", body="why rows?")
        status, updated = client.post(f"/annotations/{record['id']}/state",
                                      {"action": "answer", "text": "columns: 2"},
                                      user="u1")
        assert status == 200
        assert updated["body"].endswith("[Answer] columns: 2")
        assert updated["pinned"] is False

    def test_complete_done_todo_conflicts(self, client):
        record = create_annotation(client, type_="todo", body="check docs")
        status, _ = client.post(f"/annotations/{record['id']}/state",
                                {"action": "complete"}, user="u1")
        assert status == 200
        status, body = client.post(f"/annotations/{record['id']}/state",
                                   {"action": "complete"}, user="u1")
        assert status == 409
        assert body["code"] == "already-done"

    def test_reader_pin_and_pin_list(self, client):
        record = create_annotation(client, user="author")
        status, _ = client.post(f"/annotations/{record['id']}/pin", {}, user="reader")
        assert status == 200
        status, pins = client.get("/pins", user="reader")
        assert status == 200
        assert [p["id"] for p in pins] == [record["id"]]
        status, _ = client.delete(f"/annotations/{record['id']}/pin", user="reader")
        assert status == 200
        _, pins = client.get("/pins", user="reader")
        assert pins == []

    def test_reply_round_trip(self, client):
        record = create_annotation(client, user="author")
        status, updated = client.post(f"/annotations/{record['id']}/replies",
                                      {"body": "thanks"}, user="reader")
        assert status == 200
        assert updated["replies"][0]["body"] == "thanks"
        assert updated["replies"][0]["author"] == "reader"


class TestQueryEndpoint:
    def test_scope_validation(self, client):
        status, body = client.get("/annotations?scope=page")
        assert status == 400
        status, body = client.get("/annotations?scope=galaxy&url=" + ENC_A)
        assert status == 400

    def test_filters_and_search_compose(self, client, server):
        create_annotation(client, type_="issue", body="code example broken")
        create_annotation(client, type_="normal",
                          body="Use this to create rows",
                          anchors=[anchor_json(quote="columns", start=4, end=11,
                                               path="/html[1]/body[1]/p[2]")])
        create_annotation(client, type_="normal", body="unrelated words")

        status, records = client.get(f"/annotations?url={ENC_A}&scope=page")
        assert status == 200 and len(records) == 3

        status, records = client.get(
            f"/annotations?url={ENC_A}&scope=page&types=issue")
        assert status == 200
        assert [r["type"] for r in records] == ["issue"]

        status, records = client.get(
            f"/annotations?url={ENC_A}&scope=page&q=columns")
        assert status == 200
        assert [r["body"] for r in records] == ["Use this to create rows"]

    def test_composition_equals_core_calls(self, client, server):
        create_annotation(client, type_="issue", body="columns sort weird")
        create_annotation(client, type_="issue", body="other thing")
        create_annotation(client, type_="normal", body="columns note")
        server.store.put_document(
            __import__("adamant.htmldoc", fromlist=["parse_document"])
            .parse_document(F1_HTML, F1_URL))

        status, got = client.get(
            f"/annotations?url={ENC_A}&scope=page&q=columns&sort=document_order")
        assert status == 200

        # oracle: compose the core operations directly
        from adamant.queries import DOCUMENT_ORDER, sort_annotations
        records = server.store.search("columns", "page", PAGE_A, None)
        doc = server.store.get_document(PAGE_A)
        expected = sort_annotations(records, DOCUMENT_ORDER, doc)
        assert [r["id"] for r in got] == [a.id for a in expected]

    def test_visibility_respected(self, client):
        create_annotation(client, user="owner", visibility="private")
        create_annotation(client, user="owner", visibility="public")
        _, anonymous = client.get(f"/annotations?url={ENC_A}&scope=page")
        assert len(anonymous) == 1
        _, own = client.get(f"/annotations?url={ENC_A}&scope=page", user="owner")
        assert len(own) == 2


class TestDocumentsAndReanchor:
    def test_put_document_returns_summary(self, client):
        status, summary = client.post(f"/documents?url={ENC_A}",
                                      raw_body=F1_HTML.encode(), user="u1")
        assert status == 201
        assert summary["elements"] == 8
        assert summary["version"] == 1

    def test_get_document_round_trip(self, client):
        client.post(f"/documents?url={ENC_A}", raw_body=F1_HTML.encode(), user="u1")
        status, body = client.get(f"/documents?url={ENC_A}")
        assert status == 200
        assert body.decode() == F1_HTML

    def test_reanchor_unchanged_page(self, client):
        client.post(f"/documents?url={ENC_A}", raw_body=F1_HTML.encode(), user="u1")
        create_annotation(client)
        status, summary = client.post(f"/documents/reanchor?url={ENC_A}", user="u1")
        assert status == 200
        assert (summary["attached"], summary["relocated"], summary["broken"]) == (1, 0, 0)

    def test_reanchor_after_edit_relocates(self, client):
        client.post(f"/documents?url={ENC_A}", raw_body=F1_HTML.encode(), user="u1")
        record = create_annotation(client)
        mutated = F1_HTML.replace("Hello world", "Hello brave world")
        client.post(f"/documents?url={ENC_A}", raw_body=mutated.encode(), user="u1")
        status, summary = client.post(f"/documents/reanchor?url={ENC_A}", user="u1")
        assert status == 200
        assert summary["relocated"] == 1
        assert summary["resolutions"][record["id"]][0]["method"] == "element-search"

    def test_reanchor_unknown_url_404(self, client):
        status, body = client.post(
            "/documents/reanchor?url=https%3A%2F%2Fdocs.example.org%2Fnope",
            user="u1")
        assert status == 404
        assert body["code"] == "no-snapshot"


class TestIssueReport:
    def test_report_for_issue(self, client):
        record = create_annotation(client, type_="issue", body="broken example")
        status, report = client.post(f"/issues/{record['id']}/report", user="u2")
        assert status == 200
        assert report["annotation_id"] == record["id"]
        assert report["anchors"] == record["anchors"]

    def test_report_for_normal_is_400(self, client):
        record = create_annotation(client, type_="normal")
        status, body = client.post(f"/issues/{record['id']}/report", user="u2")
        assert status == 400
        assert body["code"] == "not-an-issue"

    def test_reports_identical_except_timestamp(self, client):
        record = create_annotation(client, type_="issue", body="x")
        _, r1 = client.post(f"/issues/{record['id']}/report", user="u2")
        _, r2 = client.post(f"/issues/{record['id']}/report", user="u2")
        r1.pop("exported_at"), r2.pop("exported_at")
        assert r1 == r2


class TestGroups:
    def test_group_lifecycle(self, client):
        status, group = client.post("/groups",
                                    {"name": "team", "members": ["u1", "u2"]},
                                    user="u1")
        assert status == 201
        status, groups = client.get("/groups", user="u2")
        assert status == 200
        assert [g["id"] for g in groups] == [group["id"]]
        create_annotation(client, user="u1",
                          visibility={"group": group["id"]})
        _, visible = client.get(f"/annotations?url={ENC_A}&scope=page", user="u2")
        assert len(visible) == 1
        _, hidden = client.get(f"/annotations?url={ENC_A}&scope=page", user="u3")
        assert hidden == []


class TestEvents:
    def test_other_clients_see_created_events(self, client):
        reader = SSEReader(client, f"/events?url={ENC_A}", user="watcher")
        try:
            record = create_annotation(client, user="someone-else")
            events = reader.wait_for(1)
            assert len(events) == 1
            assert events[0]["kind"] == "created"
            assert events[0]["annotation"]["id"] == record["id"]
            assert events[0]["seq"] == 1
        finally:
            reader.close()

    def test_private_changes_not_streamed_to_strangers(self, client):
        reader = SSEReader(client, f"/events?url={ENC_A}", user="stranger")
        try:
            create_annotation(client, user="owner", visibility="private")
            create_annotation(client, user="owner", visibility="public")
            events = reader.wait_for(1)
            assert len(events) == 1
            assert events[0]["annotation"]["visibility"] == "public"
        finally:
            reader.close()

    def test_seq_strictly_increasing(self, client):
        reader = SSEReader(client, f"/events?url={ENC_A}")
        try:
            for i in range(5):
                create_annotation(client, body=f"note {i}")
            events = reader.wait_for(5)
            seqs = [e["seq"] for e in events]
            assert seqs == sorted(seqs)
            assert len(set(seqs)) == len(seqs)
        finally:
            reader.close()


class TestReadIdempotence:
    def test_get_sequence_leaves_store_bytes_unchanged(self, client, server):
        create_annotation(client, type_="issue")
        create_annotation(client, type_="question", body="why?")
        client.post(f"/documents?url={ENC_A}", raw_body=F1_HTML.encode(), user="u1")

        def store_bytes():
            return {p.relative_to(server.store.dir): p.read_bytes()
                    for p in sorted(server.store.dir.rglob("*")) if p.is_file()}

        before = store_bytes()
        client.get(f"/annotations?url={ENC_A}&scope=page")
        client.get(f"/annotations?url={ENC_A}&scope=page&types=question")
        client.get("/pins", user="u1")
        client.get("/groups", user="u1")
        client.get(f"/documents?url={ENC_A}")
        assert store_bytes() == before


class TestFixtureOverHttp:
    def test_fixture_page_returns_32_records(self, server, client):
        from pathlib import Path
        from adamant.htmldoc import parse_document
        from adamant.interchange import load_records

        fixture = Path(__file__).resolve().parent.parent / "fixtures" / "reading"
        page_url = "https://docs.example.org/piling/"
        server.store.put_document(parse_document(
            (fixture / "page.html").read_text(), page_url))
        for record in load_records((fixture / "annotations.json").read_text()):
            server.store.ensure_user(record.author)
            server.store.put_annotation(record, 0)

        enc = urllib.parse.quote(page_url, safe="")
        status, records = client.get(f"/annotations?url={enc}&scope=page")
        assert status == 200
        assert len(records) == 32

        status, issues = client.get(f"/annotations?url={enc}&scope=page&types=issue")
        assert status == 200
        assert len(issues) == 10

        status, hits = client.get(f"/annotations?url={enc}&scope=page&q=columns")
        assert status == 200
        assert any(r["body"] == "Use this to create rows" for r in hits)

    def test_document_tree_format(self, server, client):
        from adamant.htmldoc import parse_document
        server.store.put_document(parse_document(F1_HTML, F1_URL))
        status, tree = client.get(f"/documents?url={ENC_A}&format=tree")
        assert status == 200
        assert tree["root"]["tag"] == "html"
        body = tree["root"]["children"][1]
        assert body["tag"] == "body"
        first_p = body["children"][1]
        assert first_p == {"tag": "p", "children": [{"text": "Hello world example."}]}
