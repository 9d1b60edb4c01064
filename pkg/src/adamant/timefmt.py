"""RFC 3339 UTC timestamps with one canonical byte form.

All persisted and wire timestamps use exactly
``YYYY-MM-DDTHH:MM:SS.ffffffZ`` so serialized records compare and
round-trip byte-for-byte.
"""

from __future__ import annotations

from datetime import datetime, timezone

from .errors import AdamantError


def now_utc() -> datetime:
    return datetime.now(timezone.utc)


def format_ts(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def parse_ts(text: str) -> datetime:
    try:
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        dt = datetime.fromisoformat(text)
    except (ValueError, TypeError, AttributeError) as exc:
        raise AdamantError("bad-request", f"bad timestamp: {text!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)
