"""Pull-request acquisition: offline JSON fixtures or a paginated REST source.

The offline directory layout (one ``pr_<number>.json`` per record, fields
matching PullRequest) is the primary, hermetic path; remote mode speaks a
GitHub-style list endpoint with retry/backoff and rate-limit reporting.
"""

from __future__ import annotations

import json
import logging
import os
import time
from pathlib import Path

from ..errors import AuthFailed, MalformedRecord, RateLimited
from .types import PullRequest

log = logging.getLogger(__name__)

_REQUIRED = ("number", "title", "state")


def _record_to_pr(raw: dict) -> PullRequest:
    for key in _REQUIRED:
        if key not in raw:
            raise MalformedRecord(f"missing field '{key}'")
    merged = bool(raw.get("merged", raw.get("merged_at") is not None))
    author = raw.get("author_login") or (raw.get("user") or {}).get("login", "")
    shas = list(raw.get("commit_shas", []))
    if not shas and raw.get("merge_commit_sha"):
        shas = [raw["merge_commit_sha"]]
    pr = PullRequest(
        number=int(raw["number"]),
        title=raw["title"] or "",
        body=raw.get("body") or "",
        author_login=author,
        state="closed" if merged else raw["state"],
        merged=merged,
        created_at=_epoch(raw.get("created_at")),
        merged_at=_epoch(raw.get("merged_at")),
        commit_shas=shas,
    )
    if pr.merged and pr.merged_at is None:
        raise MalformedRecord(f"PR #{pr.number}: merged without merged_at")
    return pr


def _epoch(value) -> int | None:
    if value is None:
        return None
    if isinstance(value, (int, float)):
        return int(value)
    # ISO-8601 Zulu form, the only string format we accept
    from datetime import datetime, timezone
    dt = datetime.fromisoformat(str(value).replace("Z", "+00:00"))
    return int(dt.astimezone(timezone.utc).timestamp())


def load_pr_fixtures(directory) -> list[PullRequest]:
    """Read ``pr_*.json`` records from a directory, skipping malformed ones."""
    out = []
    for path in sorted(Path(directory).glob("pr_*.json")):
        try:
            out.append(_record_to_pr(json.loads(path.read_text("utf-8"))))
        except (json.JSONDecodeError, MalformedRecord, KeyError, TypeError,
                ValueError) as exc:
            log.warning("skipping malformed PR record %s: %s", path.name, exc)
    out.sort(key=lambda p: p.number)
    return out


def fetch_remote_prs(endpoint: str, token: str | None = None, session=None,
                     per_page: int = 100, max_retries: int = 3,
                     backoff_s: float = 0.5) -> list[PullRequest]:
    """Paginated fetch with exponential backoff on transient failures."""
    if session is None:
        import requests
        session = requests.Session()
    headers = {"Accept": "application/json"}
    if token:
        headers["Authorization"] = f"Bearer {token}"

    out: list[PullRequest] = []
    page = 1
    while True:
        resp = _get_with_retry(session, endpoint,
                               {"state": "all", "per_page": per_page, "page": page},
                               headers, max_retries, backoff_s)
        if resp.status_code in (401,):
            raise AuthFailed(f"{endpoint}: HTTP {resp.status_code}")
        if resp.status_code == 403:
            remaining = resp.headers.get("X-RateLimit-Remaining")
            reset = resp.headers.get("X-RateLimit-Reset")
            if remaining == "0" or reset is not None:
                raise RateLimited(int(reset) if reset else None)
            raise AuthFailed(f"{endpoint}: HTTP 403")
        resp.raise_for_status()
        batch = resp.json()
        for raw in batch:
            try:
                out.append(_record_to_pr(raw))
            except (MalformedRecord, KeyError, TypeError, ValueError) as exc:
                log.warning("skipping malformed PR record: %s", exc)
        if len(batch) < per_page:
            break
        page += 1
    out.sort(key=lambda p: p.number)
    return out


def _get_with_retry(session, url, params, headers, max_retries, backoff_s):
    delay = backoff_s
    for attempt in range(max_retries + 1):
        try:
            resp = session.get(url, params=params, headers=headers, timeout=30)
        except Exception as exc:  # noqa: BLE001 - transport errors are retryable
            if attempt == max_retries:
                raise
            log.warning("PR fetch failed (%s), retrying in %.1fs", exc, delay)
            time.sleep(delay)
            delay *= 2
            continue
        if resp.status_code >= 500 and attempt < max_retries:
            time.sleep(delay)
            delay *= 2
            continue
        return resp
    return resp


def fetch_pull_requests(source, token_env: str | None = None,
                        session=None) -> list[PullRequest]:
    """Dispatch on source kind: fixture directory or remote endpoint URL."""
    if isinstance(source, (str, Path)) and not str(source).startswith(("http://", "https://")):
        return load_pr_fixtures(source)
    token = os.environ.get(token_env) if token_env else None
    return fetch_remote_prs(str(source), token=token, session=session)
