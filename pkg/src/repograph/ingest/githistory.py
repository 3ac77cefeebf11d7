"""Commit history extraction via the git plumbing commands."""

from __future__ import annotations

import subprocess

from ..errors import CorruptObject, NotARepository
from .types import Commit

_FIELD_SEP = "\x1f"
_RECORD_SEP = "\x1e"

_STATUS_KIND = {"A": "added", "M": "modified", "D": "deleted",
                "R": "renamed", "C": "added", "T": "modified"}


def _git(repo_path: str, *args: str) -> str:
    proc = subprocess.run(["git", "-C", repo_path, *args],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr.strip())
    return proc.stdout


def extract_git_history(repo_path: str) -> list[Commit]:
    """All commits reachable from HEAD, with first-parent file diffs.

    Output is sorted by (timestamp, sha). A repository with no commits
    yields an empty list.
    """
    try:
        _git(repo_path, "rev-parse", "--git-dir")
    except RuntimeError as exc:
        raise NotARepository(f"{repo_path}: {exc}") from exc

    try:
        _git(repo_path, "rev-parse", "--verify", "HEAD")
    except RuntimeError:
        return []

    parents: dict[str, list[str]] = {}
    for line in _git(repo_path, "rev-list", "--parents", "HEAD").splitlines():
        shas = line.split()
        parents[shas[0]] = shas[1:]

    raw = _git(repo_path, "log",
               f"--format=%H{_FIELD_SEP}%an{_FIELD_SEP}%ae{_FIELD_SEP}%at{_FIELD_SEP}%B{_RECORD_SEP}",
               "HEAD")
    commits = []
    for record in raw.split(_RECORD_SEP):
        record = record.strip("\n")
        if not record:
            continue
        sha, author_name, author_email, at, message = record.split(_FIELD_SEP, 4)
        commits.append(Commit(
            sha=sha, author_name=author_name, author_email=author_email,
            timestamp=int(at), message=message.rstrip("\n"),
            changed_files=_changed_files(repo_path, sha, parents.get(sha, [])),
        ))
    commits.sort(key=lambda c: (c.timestamp, c.sha))
    return commits


def _changed_files(repo_path: str, sha: str,
                   parent_shas: list[str]) -> list[tuple[str, str]]:
    """Name-status diff against the first parent (or the empty tree)."""
    if parent_shas:
        args = ["diff-tree", "-r", "-M", "--name-status", parent_shas[0], sha]
    else:
        args = ["diff-tree", "-r", "-M", "--root", "--name-status", sha]
    try:
        raw = _git(repo_path, *args)
    except RuntimeError as exc:
        raise CorruptObject(sha, str(exc)) from exc
    out: list[tuple[str, str]] = []
    for line in raw.splitlines():
        if "\t" not in line:
            continue  # diff-tree echoes the commit sha on its own line
        parts = line.split("\t")
        status = parts[0]
        kind = _STATUS_KIND.get(status[0])
        if kind is None:
            continue
        path = parts[-1]  # rename/copy lines carry old\tnew; keep the new path
        out.append((path, kind))
    return out
