"""Repository ingestion: source parsing, git history, pull requests."""

from .githistory import extract_git_history
from .prs import fetch_pull_requests, load_pr_fixtures
from .pyparse import parse_file
from .snapshot import IngestConfig, snapshot
from .types import (SCHEMA_VERSION, ClassInfo, Commit, FunctionInfo,
                    ParsedFile, PullRequest, RepoSnapshot)

__all__ = [
    "SCHEMA_VERSION", "ClassInfo", "Commit", "FunctionInfo", "ParsedFile",
    "PullRequest", "RepoSnapshot", "IngestConfig",
    "parse_file", "extract_git_history", "fetch_pull_requests",
    "load_pr_fixtures", "snapshot",
]
