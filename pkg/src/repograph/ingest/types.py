"""Domain types for one parsed repository state, with canonical JSON forms."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

SCHEMA_VERSION = 1

CHANGE_KINDS = ("added", "modified", "deleted", "renamed")


@dataclass
class FunctionInfo:
    name: str
    qualified_name: str
    is_async: bool = False
    params: list[tuple[str, str | None]] = field(default_factory=list)
    return_annotation: str | None = None
    docstring: str | None = None
    decorators: list[str] = field(default_factory=list)
    calls: list[str] = field(default_factory=list)
    assignments: int = 0
    control_flow: list[str] = field(default_factory=list)
    try_except_blocks: int = 0
    lambdas: int = 0
    comprehensions: int = 0
    string_constants: list[str] = field(default_factory=list)
    complexity: int = 1
    code_length: int = 0
    start_line: int = 1
    end_line: int = 1


@dataclass
class ClassInfo:
    name: str
    qualified_name: str
    bases: list[str] = field(default_factory=list)
    docstring: str | None = None
    decorators: list[str] = field(default_factory=list)
    methods: list[FunctionInfo] = field(default_factory=list)


@dataclass
class ParsedFile:
    path: str
    module_docstring: str | None = None
    functions: list[FunctionInfo] = field(default_factory=list)
    classes: list[ClassInfo] = field(default_factory=list)
    imports: list[str] = field(default_factory=list)
    string_constants: list[str] = field(default_factory=list)
    line_count: int = 0
    parse_failed: bool = False

    def all_functions(self):
        """Every function in the file: free functions, then methods."""
        yield from self.functions
        for cls in self.classes:
            yield from cls.methods


@dataclass
class Commit:
    sha: str
    author_name: str
    author_email: str
    timestamp: int
    message: str
    changed_files: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class PullRequest:
    number: int
    title: str
    body: str
    author_login: str
    state: str
    merged: bool
    created_at: int | None = None
    merged_at: int | None = None
    commit_shas: list[str] = field(default_factory=list)


@dataclass
class RepoSnapshot:
    repo_id: str
    head_sha: str
    files: list[ParsedFile] = field(default_factory=list)
    commits: list[Commit] = field(default_factory=list)
    pull_requests: list[PullRequest] = field(default_factory=list)
    users: list[tuple[str, str]] = field(default_factory=list)
    unresolved_pr_shas: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        """Canonical serialization: sorted keys, sorted collections."""
        payload = asdict(self)
        payload["files"] = sorted(payload["files"], key=lambda f: f["path"])
        payload["commits"] = sorted(payload["commits"],
                                    key=lambda c: (c["timestamp"], c["sha"]))
        payload["pull_requests"] = sorted(payload["pull_requests"],
                                          key=lambda p: p["number"])
        payload["users"] = sorted(payload["users"])
        payload["unresolved_pr_shas"] = sorted(payload["unresolved_pr_shas"])
        return json.dumps(payload, sort_keys=True, ensure_ascii=False,
                          separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RepoSnapshot":
        raw = json.loads(text)
        files = [
            ParsedFile(
                path=f["path"],
                module_docstring=f["module_docstring"],
                functions=[_function_from(d) for d in f["functions"]],
                classes=[
                    ClassInfo(
                        name=c["name"], qualified_name=c["qualified_name"],
                        bases=c["bases"], docstring=c["docstring"],
                        decorators=c["decorators"],
                        methods=[_function_from(d) for d in c["methods"]],
                    )
                    for c in f["classes"]
                ],
                imports=f["imports"],
                string_constants=f["string_constants"],
                line_count=f["line_count"],
                parse_failed=f["parse_failed"],
            )
            for f in raw["files"]
        ]
        commits = [
            Commit(sha=c["sha"], author_name=c["author_name"],
                   author_email=c["author_email"], timestamp=c["timestamp"],
                   message=c["message"],
                   changed_files=[tuple(x) for x in c["changed_files"]])
            for c in raw["commits"]
        ]
        prs = [PullRequest(**{**p, "commit_shas": list(p["commit_shas"])})
               for p in raw["pull_requests"]]
        return cls(
            repo_id=raw["repo_id"], head_sha=raw["head_sha"], files=files,
            commits=commits, pull_requests=prs,
            users=[tuple(u) for u in raw["users"]],
            unresolved_pr_shas=raw.get("unresolved_pr_shas", []),
            warnings=raw.get("warnings", []),
            schema_version=raw["schema_version"],
        )


def _function_from(d: dict) -> FunctionInfo:
    d = dict(d)
    d["params"] = [tuple(p) for p in d["params"]]
    return FunctionInfo(**d)
