"""URL normalization shared by the anchoring engine and the store.

Page identity is the normalized URL: lowercase scheme and host, fragment
stripped, default ports removed, query and path preserved. An empty path
becomes "/" so prefix checks behave.
"""

from __future__ import annotations

from urllib.parse import urlsplit, urlunsplit

from .errors import AdamantError

_DEFAULT_PORTS = {"http": 80, "https": 443, "ws": 80, "wss": 443}


def normalize_url(raw: str) -> str:
    """Normalize a URL to its canonical page-identity form."""
    if not isinstance(raw, str) or not raw.strip():
        raise AdamantError("bad-request", "empty url")
    try:
        parts = urlsplit(raw.strip())
    except ValueError as exc:
        raise AdamantError("bad-request", f"unparseable url: {raw!r}") from exc
    if not parts.scheme or not parts.netloc:
        raise AdamantError("bad-request", f"url must be absolute: {raw!r}")
    scheme = parts.scheme.lower()
    host = (parts.hostname or "").lower()
    if not host:
        raise AdamantError("bad-request", f"url has no host: {raw!r}")
    netloc = host
    if parts.port is not None and parts.port != _DEFAULT_PORTS.get(scheme):
        netloc = f"{host}:{parts.port}"
    if parts.username:
        cred = parts.username
        if parts.password:
            cred += f":{parts.password}"
        netloc = f"{cred}@{netloc}"
    path = parts.path or "/"
    return urlunsplit((scheme, netloc, path, parts.query, ""))


def site_of(url: str) -> str:
    """Return the normalized scheme+host prefix identifying a site."""
    parts = urlsplit(normalize_url(url))
    return f"{parts.scheme}://{parts.netloc}"


def same_site(page_url: str, site_prefix: str) -> bool:
    """True if an already-normalized page URL belongs to the site."""
    return site_of(page_url) == site_of(site_prefix)
