"""Domain errors with stable machine-readable codes.

Every error the system can surface carries a code from the closed set
below. The HTTP layer maps codes to status codes; the CLI maps them to
exit codes. Raising an AdamantError with an unregistered code is a bug.
"""

from __future__ import annotations

# code -> HTTP status used by the service layer.
ERROR_STATUS: dict[str, int] = {
    # document parsing / anchoring
    "unparseable-input": 400,
    "malformed-path": 400,
    "node-not-in-document": 400,
    "range-out-of-bounds": 400,
    "empty-quote": 400,
    "broken-resolution": 400,
    # annotation model
    "highlight-with-body": 400,
    "no-anchors": 400,
    "unknown-group": 400,
    "unknown-user": 400,
    "not-author": 403,
    "deleted-annotation": 400,
    "duplicate-anchor": 400,
    "not-a-question": 400,
    "already-resolved": 409,
    "not-a-todo": 400,
    "already-done": 409,
    "no-read-access": 403,
    "empty-body": 400,
    "not-an-issue": 400,
    # store
    "revision-conflict": 409,
    "unknown-author": 400,
    "no-snapshot": 404,
    "store-locked": 503,
    # service plumbing
    "not-found": 404,
    "bad-request": 400,
    "authentication-required": 401,
    "subscriber-dropped": 503,
    # CLI-only conditions (never sent over HTTP, still stable codes)
    "quote-not-found": 400,
    "ambiguous-quote": 400,
    "bad-config": 400,
    "malformed-interchange": 400,
}


class AdamantError(Exception):
    """Error with a stable code drawn from ERROR_STATUS."""

    def __init__(self, code: str, message: str = ""):
        if code not in ERROR_STATUS:
            raise ValueError(f"unregistered error code: {code}")
        super().__init__(message or code)
        self.code = code
        self.message = message or code

    def __repr__(self) -> str:  # pragma: no cover
        return f"AdamantError({self.code!r}, {self.message!r})"
