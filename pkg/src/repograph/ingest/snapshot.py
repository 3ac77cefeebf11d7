"""Snapshot assembly: files + history + PRs -> one canonical RepoSnapshot."""

from __future__ import annotations

import logging
import os
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import RepoGraphError
from .githistory import extract_git_history
from .prs import fetch_pull_requests
from .pyparse import parse_file
from .types import ParsedFile, RepoSnapshot

log = logging.getLogger(__name__)


@dataclass
class IngestConfig:
    extensions: list[str] = field(default_factory=lambda: [".py"])
    pr_source: str | None = None
    api_token_env: str | None = None
    repo_id: str | None = None
    output_path: str | None = None
    max_workers: int = 4


def _tracked_files(repo_path: str, extensions: list[str]) -> list[str]:
    proc = subprocess.run(["git", "-C", repo_path, "ls-files"],
                          capture_output=True, text=True)
    if proc.returncode == 0 and proc.stdout.strip():
        candidates = proc.stdout.splitlines()
    else:
        candidates = []
        for root, dirs, names in os.walk(repo_path):
            dirs[:] = [d for d in dirs if d != ".git"]
            for name in names:
                full = os.path.join(root, name)
                candidates.append(os.path.relpath(full, repo_path))
    wanted = tuple(extensions)
    return sorted(c.replace(os.sep, "/") for c in candidates if c.endswith(wanted))


def _parse_one(repo_path: str, rel: str) -> ParsedFile:
    raw = (Path(repo_path) / rel).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        parsed = ParsedFile(path=rel, parse_failed=True)
        parsed.line_count = raw.count(b"\n")
        return parsed
    return parse_file(rel, text)


def snapshot(repo_path: str, pr_source=None,
             config: IngestConfig | None = None) -> RepoSnapshot:
    """Parse a working tree + history + PRs into a canonical snapshot.

    Per-file parsing runs in a thread pool; results are assembled in sorted
    path order so the output is independent of scheduling. PR acquisition
    failures degrade to an empty PR list with a recorded warning.
    """
    cfg = config or IngestConfig()
    commits = extract_git_history(repo_path)

    rels = _tracked_files(repo_path, cfg.extensions)
    with ThreadPoolExecutor(max_workers=cfg.max_workers) as pool:
        files = list(pool.map(lambda r: _parse_one(repo_path, r), rels))
    files.sort(key=lambda f: f.path)

    warnings: list[str] = []
    prs = []
    source = pr_source if pr_source is not None else cfg.pr_source
    if source is not None:
        try:
            prs = fetch_pull_requests(source, token_env=cfg.api_token_env)
        except RepoGraphError as exc:
            warnings.append(f"pull requests unavailable: {exc}")
            log.warning("PR acquisition failed, continuing without PRs: %s", exc)

    head = "0" * 40
    if commits:
        proc = subprocess.run(["git", "-C", repo_path, "rev-parse", "HEAD"],
                              capture_output=True, text=True)
        head = proc.stdout.strip() or commits[-1].sha

    known_shas = {c.sha for c in commits}
    unresolved = sorted({sha for pr in prs for sha in pr.commit_shas
                         if sha not in known_shas})

    users: dict[str, str] = {}
    for c in sorted(commits, key=lambda c: (c.timestamp, c.sha)):
        identity = c.author_email or c.author_name
        users.setdefault(identity, c.author_name)
    for pr in sorted(prs, key=lambda p: p.number):
        if pr.author_login:
            users.setdefault(pr.author_login, pr.author_login)

    snap = RepoSnapshot(
        repo_id=cfg.repo_id or os.path.basename(os.path.abspath(repo_path)),
        head_sha=head,
        files=files,
        commits=commits,
        pull_requests=prs,
        users=sorted(users.items()),
        unresolved_pr_shas=unresolved,
        warnings=warnings,
    )
    if cfg.output_path:
        Path(cfg.output_path).write_text(snap.to_json(), encoding="utf-8")
    return snap
