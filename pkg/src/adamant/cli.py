"""The ``adamant`` command line: operate the system without a browser.

Commands: serve the HTTP API, import documentation corpora, create and
list annotations, re-anchor after docs updates, batch-tag or
batch-delete, export/import interchange files, and print corpus stats.

Exit codes are a stable scripting contract:
    0  success
    1  usage or configuration error (including malformed input files)
    2  domain condition (broken anchors found, quote not found/ambiguous)
    3  I/O failure (store locked, unreadable files)
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .anchoring import create_selector, find_quote
from .annotations import (
    ANNOTATION_TYPES,
    HIGHLIGHT,
    ISSUE,
    NORMAL,
    PUBLIC,
    QUESTION,
    TODO,
    Visibility,
)
from .api import ApiServer
from .config import Config, load_config
from .errors import AdamantError
from .htmldoc import parse_document
from .interchange import dump_records, load_records
from .queries import FilterCriteria, filter_annotations
from .store import Store
from .urls import normalize_url

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_IO = 3

_USAGE_CODES = {"bad-config", "bad-request", "malformed-interchange",
                "malformed-path", "unparseable-input"}
_DOMAIN_CODES = {"quote-not-found", "ambiguous-quote", "no-snapshot"}
_IO_CODES = {"store-locked"}


def _exit_code_for(code: str) -> int:
    if code in _IO_CODES:
        return EXIT_IO
    if code in _DOMAIN_CODES:
        return EXIT_DOMAIN
    if code in _USAGE_CODES:
        return EXIT_USAGE
    return EXIT_USAGE


def _default_user(args) -> str:
    return args.user or os.environ.get("ADAMANT_USER") or "local"


def _config_from_args(args) -> Config:
    config = load_config(getattr(args, "config", None))
    if getattr(args, "store", None):
        config.store_dir = args.store
    return config


def _open_store(args) -> Store:
    return Store(_config_from_args(args).store_dir)


# -- commands ------------------------------------------------------------


def cmd_serve(args) -> int:
    config = _config_from_args(args)
    if args.listen:
        config.listen_addr = args.listen
    host, port = config.host_port()
    with Store(config.store_dir) as store:
        server = ApiServer(store, host, port, ui_dir=args.ui)
        print(f"listening on http://{server.address} (store: {config.store_dir})")
        sys.stdout.flush()
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            server.shutdown()
    return EXIT_OK


def cmd_import_docs(args) -> int:
    source = Path(args.source)
    entries: list[tuple[Path, str]] = []
    if source.is_dir():
        manifest_path = source / "docs-manifest.json"
        if manifest_path.exists():
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            for rel, url in sorted(manifest.items()):
                entries.append((source / rel, url))
        elif any(source.glob("*.html")):
            raise AdamantError("bad-config",
                               f"{source} has HTML files but no docs-manifest.json")
    elif source.is_file():
        if not args.url:
            raise AdamantError("bad-config", "--url is required for a single file")
        entries.append((source, args.url))
    else:
        raise AdamantError("bad-config", f"no such file or directory: {source}")

    imported = failed = 0
    with _open_store(args) as store:
        for path, url in entries:
            try:
                html = path.read_text(encoding="utf-8")
                summary = store.put_document(parse_document(html, url))
            except (OSError, AdamantError) as exc:
                failed += 1
                print(f"warning: skipped {path}: {exc}", file=sys.stderr)
                continue
            imported += 1
            print(f"{path.name} -> {summary['url']} "
                  f"version={summary['version']} elements={summary['elements']} "
                  f"text_chars={summary['text_chars']}")
    print(f"imported {imported} document(s), {failed} failed")
    if entries and imported == 0:
        return EXIT_USAGE
    return EXIT_OK


def cmd_annotate(args) -> int:
    user = _default_user(args)
    if args.type not in ANNOTATION_TYPES:
        raise AdamantError("bad-request", f"unknown type: {args.type!r}")
    with _open_store(args) as store:
        url = normalize_url(args.url)
        doc = store.get_document(url)
        if doc is None:
            raise AdamantError("no-snapshot", f"no imported snapshot for {url}")
        hits = find_quote(doc, args.quote)
        if not hits:
            raise AdamantError("quote-not-found",
                               f"quote does not occur on {url}")
        if len(hits) > 1 and args.occurrence is None:
            raise AdamantError(
                "ambiguous-quote",
                f"quote occurs {len(hits)} times; pass --occurrence n (1-based)")
        which = (args.occurrence or 1) - 1
        if not 0 <= which < len(hits):
            raise AdamantError("ambiguous-quote",
                               f"--occurrence must be in 1..{len(hits)}")
        node, start = hits[which]
        selector = create_selector(doc, node, start, len(args.quote))
        record = store.create(user, args.type, args.body or "", [selector],
                              set(args.tag or []),
                              Visibility.from_json(args.visibility))
        print(f"created {record.id} ({record.type}) anchored at "
              f"{selector.path.serialize()} [{selector.start_offset}"
              f"..+{len(selector.quote)}]")
    return EXIT_OK


def cmd_reanchor(args) -> int:
    if not args.url and not getattr(args, "all", False):
        raise AdamantError("bad-request", "pass --url or --all")
    with _open_store(args) as store:
        urls = store.document_urls() if args.all else [normalize_url(args.url)]
        any_broken = False
        print(f"{'page':50} {'attached':>8} {'relocated':>9} {'broken':>6}")
        for url in urls:
            summary = store.reanchor_page(url)
            print(f"{url:50} {summary['attached']:>8} "
                  f"{summary['relocated']:>9} {summary['broken']:>6}")
            if summary["broken"]:
                any_broken = True
    return EXIT_DOMAIN if any_broken else EXIT_OK


def cmd_batch(args) -> int:
    user = _default_user(args)
    criteria = FilterCriteria.parse(args.filter)
    with _open_store(args) as store:
        matches = filter_annotations(store.query_all(user), criteria)
        if args.dry_run:
            for a in matches:
                print(f"{a.id} {a.type:9} {a.author:12} {a.body[:50]!r}")
            print(f"matched {len(matches)} annotation(s) (dry run, no changes)")
            return EXIT_OK
        changed = skipped = 0
        for a in matches:
            if a.author != user:
                skipped += 1
                print(f"warning: skipping {a.id}: owned by {a.author}",
                      file=sys.stderr)
                continue
            if args.delete:
                store.delete(a.id, user)
            else:
                store.edit(a.id, user, a.revision, tags=set(a.tags) | {args.add_tag})
            changed += 1
        verb = "deleted" if args.delete else "tagged"
        print(f"{verb} {changed} annotation(s), skipped {skipped}")
    return EXIT_OK


def cmd_export(args) -> int:
    with _open_store(args) as store:
        records = store.query_all(None) if args.public_only else [
            a for a in store.annotations.values() if not a.deleted]
        text = dump_records(records)
        count = len(records)
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"exported {count} annotation(s) to {args.out}")
    return EXIT_OK


def cmd_import(args) -> int:
    path = Path(args.file)
    if not path.exists():
        raise AdamantError("bad-config", f"no such file: {path}")
    records = load_records(path.read_text(encoding="utf-8"))
    with _open_store(args) as store:
        for record in records:
            store.ensure_user(record.author)
            for reply in record.replies:
                store.ensure_user(reply.author)
            if record.visibility.kind == "group" and \
                    record.visibility.group_id not in store.groups:
                store.create_group(record.visibility.group_id, [record.author],
                                   group_id=record.visibility.group_id)
            store.put_annotation(record, expected_revision=0)
    print(f"imported {len(records)} annotation(s)")
    return EXIT_OK


def cmd_stats(args) -> int:
    with _open_store(args) as store:
        records = (store.query_page(args.url, None) if args.url
                   else store.query_all(None))
        by_type = {t: 0 for t in ANNOTATION_TYPES}
        questions_total = questions_answered = 0
        todos_total = todos_done = 0
        word_counts = []
        for a in records:
            by_type[a.type] += 1
            word_counts.append(len(a.body.split()))
            if a.type == QUESTION:
                questions_total += 1
                if a.state.kind == "answered":
                    questions_answered += 1
            elif a.type == TODO:
                todos_total += 1
                if a.state.kind == "done":
                    todos_done += 1
        mean_words = (sum(word_counts) / len(word_counts)) if word_counts else 0.0
        pins = sum(store.pin_counts().values())
        payload = {
            "annotations": len(records),
            "types": by_type,
            "questions_answered": questions_answered,
            "questions_total": questions_total,
            "todos_done": todos_done,
            "todos_total": todos_total,
            "mean_body_words": round(mean_words, 2),
            "pins": pins,
        }
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
        return EXIT_OK
    print(f"annotations: {payload['annotations']}")
    for type_ in (NORMAL, HIGHLIGHT, QUESTION, ISSUE, TODO):
        line = f"  {type_}: {by_type[type_]}"
        if type_ == QUESTION and questions_total:
            line += f" (answered {questions_answered}/{questions_total})"
        if type_ == TODO and todos_total:
            line += f" (done {todos_done}/{todos_total})"
        print(line)
    print(f"mean body words: {payload['mean_body_words']}")
    print(f"pins: {pins}")
    return EXIT_OK


# -- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adamant",
        description="Annotation platform for HTML documentation corpora.")
    parser.add_argument("--config", help="path to adamant.toml")
    parser.add_argument("--store", help="store directory (overrides config)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--listen", help="host:port (overrides config)")
    p.add_argument("--ui", help="directory of sidebar assets to mount at /ui")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("import-docs", help="register HTML files as page snapshots")
    p.add_argument("source", help="directory with docs-manifest.json, or one file")
    p.add_argument("--url", help="page url when importing a single file")
    p.set_defaults(fn=cmd_import_docs)

    p = sub.add_parser("annotate", help="create an annotation from a quote")
    p.add_argument("--url", required=True)
    p.add_argument("--quote", required=True)
    p.add_argument("--type", required=True, choices=ANNOTATION_TYPES)
    p.add_argument("--body", default="")
    p.add_argument("--tag", action="append")
    p.add_argument("--occurrence", type=int,
                   help="1-based pick when the quote repeats")
    p.add_argument("--visibility", default="public")
    p.add_argument("--user")
    p.set_defaults(fn=cmd_annotate)

    p = sub.add_parser("reanchor", help="re-resolve anchors after docs updates")
    p.add_argument("--url")
    p.add_argument("--all", action="store_true")
    p.set_defaults(fn=cmd_reanchor)

    p = sub.add_parser("batch", help="mass tag or delete by filter")
    p.add_argument("--filter", required=True,
                   help="e.g. 'type=issue,tag=x,before=...,after=...'")
    group = p.add_mutually_exclusive_group(required=False)
    group.add_argument("--add-tag")
    group.add_argument("--delete", action="store_true")
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--user")
    p.set_defaults(fn=cmd_batch)

    p = sub.add_parser("export", help="write an interchange file")
    p.add_argument("--out", required=True)
    p.add_argument("--public-only", action="store_true")
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("import", help="load an interchange file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_import)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--url")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "command", None) == "batch" and not args.dry_run \
            and not args.delete and not args.add_tag:
        print("error: batch needs --add-tag, --delete, or --dry-run",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except AdamantError as exc:
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        return _exit_code_for(exc.code)
    except OSError as exc:
        print(f"error: i/o: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
