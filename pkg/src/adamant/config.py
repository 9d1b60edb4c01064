"""Configuration: adamant.toml plus environment overrides.

Precedence, lowest to highest: built-in defaults, config file keys
(``listen_addr``, ``store_dir``), environment variables
(``ADAMANT_LISTEN``, ``ADAMANT_STORE``), then explicit CLI flags.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import AdamantError

DEFAULT_LISTEN = "127.0.0.1:8470"
DEFAULT_STORE = "./adamant-store"
CONFIG_FILENAME = "adamant.toml"

ENV_LISTEN = "ADAMANT_LISTEN"
ENV_STORE = "ADAMANT_STORE"


@dataclass
class Config:
    listen_addr: str = DEFAULT_LISTEN
    store_dir: str = DEFAULT_STORE

    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen_addr.rpartition(":")
        if not host or not port.isdigit():
            raise AdamantError("bad-config",
                               f"listen_addr must be host:port, got {self.listen_addr!r}")
        return host, int(port)


def load_config(path: str | Path | None = None) -> Config:
    """Load configuration; a missing implicit config file is fine, a
    missing explicit one is an error."""
    config = Config()
    chosen = Path(path) if path is not None else Path(CONFIG_FILENAME)
    if chosen.exists():
        try:
            data = tomllib.loads(chosen.read_text(encoding="utf-8"))
        except (tomllib.TOMLDecodeError, OSError) as exc:
            raise AdamantError("bad-config", f"cannot read {chosen}: {exc}") from exc
        if not isinstance(data, dict):
            raise AdamantError("bad-config", f"{chosen} is not a table")
        if "listen_addr" in data:
            config.listen_addr = str(data["listen_addr"])
        if "store_dir" in data:
            config.store_dir = str(data["store_dir"])
    elif path is not None:
        raise AdamantError("bad-config", f"config file not found: {chosen}")
    if os.environ.get(ENV_LISTEN):
        config.listen_addr = os.environ[ENV_LISTEN]
    if os.environ.get(ENV_STORE):
        config.store_dir = os.environ[ENV_STORE]
    return config
