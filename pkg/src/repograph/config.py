"""INI configuration with ingest/router/engines/server sections.

Lists are comma-separated; empty values mean unset. Every key has a code
default so a missing file or section is valid.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    memory_path: str = "memory.jsonl"
    ui_dist: str | None = None


@dataclass
class EnginePaths:
    graph: str | None = None
    features: str | None = None
    sage: str | None = None
    kblam: str | None = None
    index: str | None = None
    encoder_endpoint: str | None = None


@dataclass
class AppConfig:
    ingest_extensions: list[str] = field(default_factory=lambda: [".py"])
    ingest_pr_source: str | None = None
    ingest_api_token_env: str | None = None
    router_endpoint: str | None = None
    router_model: str = "router-7b"
    router_timeout_s: float = 30.0
    engines: EnginePaths = field(default_factory=EnginePaths)
    server: ServerConfig = field(default_factory=ServerConfig)


def _get(cp: configparser.ConfigParser, section: str, key: str,
         default: str | None = None) -> str | None:
    if cp.has_option(section, key):
        value = cp.get(section, key).strip()
        return value if value else default
    return default


def load_config(path=None) -> AppConfig:
    cfg = AppConfig()
    if path is None:
        return cfg
    cp = configparser.ConfigParser()
    cp.read_string(Path(path).read_text("utf-8"))

    exts = _get(cp, "ingest", "extensions")
    if exts:
        cfg.ingest_extensions = [e.strip() for e in exts.split(",") if e.strip()]
    cfg.ingest_pr_source = _get(cp, "ingest", "pr_source")
    cfg.ingest_api_token_env = _get(cp, "ingest", "api_token_env")

    cfg.router_endpoint = _get(cp, "router", "endpoint")
    cfg.router_model = _get(cp, "router", "model", cfg.router_model)
    timeout = _get(cp, "router", "timeout_s")
    if timeout:
        cfg.router_timeout_s = float(timeout)

    cfg.engines = EnginePaths(
        graph=_get(cp, "engines", "graph"),
        features=_get(cp, "engines", "features"),
        sage=_get(cp, "engines", "sage"),
        kblam=_get(cp, "engines", "kblam"),
        index=_get(cp, "engines", "index"),
        encoder_endpoint=_get(cp, "engines", "encoder_endpoint"),
    )
    cfg.server = ServerConfig(
        host=_get(cp, "server", "host", "127.0.0.1"),
        port=int(_get(cp, "server", "port", "8000")),
        memory_path=_get(cp, "server", "memory_path", "memory.jsonl"),
        ui_dist=_get(cp, "server", "ui_dist"),
    )
    return cfg
