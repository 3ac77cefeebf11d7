"""Ingestion contracts: parsing, history extraction, PRs, snapshot assembly."""

import io
import json
import subprocess
import textwrap
import token as token_mod
import tokenize
from pathlib import Path

import pytest

from repograph.errors import AuthFailed, NotARepository, RateLimited
from repograph.ingest import (IngestConfig, extract_git_history,
                              fetch_pull_requests, parse_file, snapshot)
from repograph.ingest.prs import fetch_remote_prs
from repograph.ingest.types import RepoSnapshot


def test_parse_empty_file():
    parsed = parse_file("a.py", "")
    assert parsed.functions == [] and parsed.classes == []
    assert parsed.line_count == 0 and not parsed.parse_failed


def test_parse_single_branch_function():
    src = "def f(x):\n    if x:\n        return 1\n    return 0\n"
    parsed = parse_file("a.py", src)
    assert len(parsed.functions) == 1
    fn = parsed.functions[0]
    assert fn.name == "f"
    assert fn.complexity == 2  # 1 base + 1 if
    assert fn.params == [("x", None)]
    assert fn.control_flow == ["if"]
    assert fn.qualified_name == "a.py::f"
    assert fn.start_line == 1 and fn.end_line == 4


def test_parse_decorated_async_function():
    src = '@route("/")\nasync def index():\n    return 1\n'
    parsed = parse_file("a.py", src)
    fn = parsed.functions[0]
    assert fn.is_async
    assert fn.decorators == ["route('/')"]
    assert fn.start_line == 2  # decorator line excluded from the span


def test_parse_syntax_error_degrades():
    parsed = parse_file("bad.py", "def broken(:\n    pass\n")
    assert parsed.parse_failed
    assert parsed.functions == [] and parsed.classes == []
    assert parsed.line_count == 2


def test_parse_methods_and_nested_scopes():
    src = textwrap.dedent('''
        class Box:
            """Container."""

            def get(self):
                return self.value

        def outer():
            def inner():
                return 2
            return inner
    ''')
    parsed = parse_file("m.py", src)
    assert [c.qualified_name for c in parsed.classes] == ["m.py::Box"]
    assert [m.qualified_name for m in parsed.classes[0].methods] == ["m.py::Box::get"]
    names = [f.qualified_name for f in parsed.functions]
    assert names == ["m.py::outer", "m.py::outer::inner"]
    # outer's span metrics include the nested def
    assert parsed.functions[0].code_length > parsed.functions[1].code_length


_BRANCH_TOKENS = {"if", "elif", "for", "while", "and", "or", "except", "case"}


def _token_branch_count(segment: str) -> int:
    count = 0
    for tok in tokenize.generate_tokens(io.StringIO(segment).readline):
        if tok.type == token_mod.NAME and tok.string in _BRANCH_TOKENS:
            count += 1
    return count


def test_complexity_matches_token_oracle_on_fixture_files(fixture_repo):
    repo = fixture_repo["repo"]
    checked = 0
    for path in sorted(Path(repo).rglob("*.py")):
        source = path.read_text("utf-8")
        parsed = parse_file(path.name, source)
        lines = source.splitlines(keepends=True)
        for fn in parsed.all_functions():
            segment = textwrap.dedent("".join(lines[fn.start_line - 1:fn.end_line]))
            assert fn.complexity == 1 + _token_branch_count(segment), fn.qualified_name
            checked += 1
    assert checked >= 10


def test_parse_is_deterministic_and_order_independent(fixture_repo):
    src = (Path(fixture_repo["repo"]) / "src/utils.py").read_text("utf-8")
    a = parse_file("src/utils.py", src)
    b = parse_file("src/utils.py", src)
    assert a == b


def test_git_history_empty_repo(tmp_path):
    subprocess.run(["git", "-C", str(tmp_path), "init", "-q"], check=True)
    assert extract_git_history(str(tmp_path)) == []


def test_git_history_not_a_repository(tmp_path):
    with pytest.raises(NotARepository):
        extract_git_history(str(tmp_path / "nope"))


def test_git_history_matches_fixture_manifest(fixture_repo):
    commits = extract_git_history(str(fixture_repo["repo"]))
    assert [c.sha for c in commits] == fixture_repo["manifest"]["shas"]
    assert [len(c.changed_files) for c in commits] == \
        fixture_repo["manifest"]["snapshot"]["changed_files_per_commit"]
    kinds = dict(commits[1].changed_files)
    assert kinds["src/models.py"] == "added"
    assert kinds["src/utils.py"] == "modified"
    assert commits[0].author_email == "alice@example.com"
    assert commits[1].author_email == "bob@example.com"


def test_merge_commit_diffs_against_first_parent(tmp_path):
    repo = tmp_path / "merge-repo"
    repo.mkdir()

    def git(*args):
        env = {"GIT_AUTHOR_NAME": "t", "GIT_AUTHOR_EMAIL": "t@x",
               "GIT_COMMITTER_NAME": "t", "GIT_COMMITTER_EMAIL": "t@x",
               "GIT_AUTHOR_DATE": "@1700000000 +0000",
               "GIT_COMMITTER_DATE": "@1700000000 +0000"}
        import os
        return subprocess.run(["git", "-C", str(repo), *args],
                              capture_output=True, text=True, check=True,
                              env={**os.environ, **env}).stdout.strip()

    git("init", "-q", "-b", "main")
    (repo / "base.py").write_text("x = 1\n")
    git("add", "-A"); git("commit", "-qm", "base")
    git("checkout", "-qb", "feature")
    (repo / "feat.py").write_text("y = 2\n")
    git("add", "-A"); git("commit", "-qm", "feature work")
    git("checkout", "-q", "main")
    (repo / "main.py").write_text("z = 3\n")
    git("add", "-A"); git("commit", "-qm", "main work")
    git("merge", "-q", "--no-ff", "-m", "merge feature", "feature")
    merge_sha = git("rev-parse", "HEAD")
    first_parent = git("rev-parse", "HEAD^1")

    oracle = subprocess.run(
        ["git", "-C", str(repo), "diff", "--name-status", first_parent, merge_sha],
        capture_output=True, text=True, check=True).stdout
    want = sorted(line.split("\t")[1] for line in oracle.splitlines() if "\t" in line)

    commits = extract_git_history(str(repo))
    merge = next(c for c in commits if c.sha == merge_sha)
    assert sorted(p for p, _ in merge.changed_files) == want == ["feat.py"]


def test_pr_fixture_loading(fixture_repo):
    prs = fetch_pull_requests(str(fixture_repo["prs"]))
    assert [p.number for p in prs] == [1, 2]
    assert prs[0].merged and prs[0].merged_at == 1700000150
    assert not prs[1].merged and prs[1].merged_at is None


def test_pr_empty_fixture_dir(tmp_path):
    assert fetch_pull_requests(str(tmp_path)) == []


def test_pr_malformed_record_skipped(tmp_path):
    (tmp_path / "pr_1.json").write_text('{"number": 1, "title": "ok", "state": "open"}')
    (tmp_path / "pr_2.json").write_text('{"title": "missing number"}')
    (tmp_path / "pr_3.json").write_text("not json at all")
    prs = fetch_pull_requests(str(tmp_path))
    assert [p.number for p in prs] == [1]


class _FakeResponse:
    def __init__(self, status_code, payload=None, headers=None):
        self.status_code = status_code
        self._payload = payload if payload is not None else []
        self.headers = headers or {}

    def json(self):
        return self._payload

    def raise_for_status(self):
        if self.status_code >= 400:
            raise RuntimeError(f"HTTP {self.status_code}")


class _FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def get(self, url, params=None, headers=None, timeout=None):
        self.calls.append(dict(params or {}))
        return self.responses.pop(0)


def test_remote_rate_limit_carries_reset():
    session = _FakeSession([_FakeResponse(403, headers={
        "X-RateLimit-Remaining": "0", "X-RateLimit-Reset": "1700009999"})])
    with pytest.raises(RateLimited) as err:
        fetch_remote_prs("https://example.test/prs", session=session)
    assert err.value.reset_time == 1700009999


def test_remote_auth_failure():
    session = _FakeSession([_FakeResponse(401)])
    with pytest.raises(AuthFailed):
        fetch_remote_prs("https://example.test/prs", session=session)


def test_remote_pagination_and_retry():
    page1 = [{"number": i, "title": f"pr {i}", "state": "open"} for i in range(1, 4)]
    page2 = [{"number": 4, "title": "pr 4", "state": "open"}]
    session = _FakeSession([
        _FakeResponse(503),          # transient, retried
        _FakeResponse(200, page1),
        _FakeResponse(200, page2),
    ])
    prs = fetch_remote_prs("https://example.test/prs", session=session,
                           per_page=3, backoff_s=0.0)
    assert [p.number for p in prs] == [1, 2, 3, 4]
    assert session.calls[-1]["page"] == 2


def test_snapshot_counts_match_manifest(fixture_snapshot, fixture_repo):
    m = fixture_repo["manifest"]["snapshot"]
    assert len(fixture_snapshot.files) == m["files"]
    assert len(fixture_snapshot.commits) == m["commits"]
    assert len(fixture_snapshot.pull_requests) == m["pull_requests"]
    assert len(fixture_snapshot.users) == m["users"]
    assert len(fixture_snapshot.unresolved_pr_shas) == m["unresolved_pr_shas"]
    assert sum(len(f.functions) for f in fixture_snapshot.files) == m["free_functions"]
    assert sum(len(f.classes) for f in fixture_snapshot.files) == m["classes"]
    assert sum(len(c.methods) for f in fixture_snapshot.files
               for c in f.classes) == m["methods"]


def test_snapshot_json_is_byte_stable(fixture_repo, tmp_path):
    cfg = IngestConfig(repo_id="demo-repo")
    a = snapshot(str(fixture_repo["repo"]), str(fixture_repo["prs"]), cfg)
    b = snapshot(str(fixture_repo["repo"]), str(fixture_repo["prs"]), cfg)
    assert a.to_json() == b.to_json()
    restored = RepoSnapshot.from_json(a.to_json())
    assert restored.to_json() == a.to_json()


def test_snapshot_scope_filter_excludes_non_python(tmp_path):
    repo = tmp_path / "textonly"
    repo.mkdir()
    subprocess.run(["git", "-C", str(repo), "init", "-q"], check=True)
    (repo / "notes.txt").write_text("hello\n")
    import os
    env = {**os.environ, "GIT_AUTHOR_NAME": "t", "GIT_AUTHOR_EMAIL": "t@x",
           "GIT_COMMITTER_NAME": "t", "GIT_COMMITTER_EMAIL": "t@x"}
    subprocess.run(["git", "-C", str(repo), "add", "-A"], check=True, env=env)
    subprocess.run(["git", "-C", str(repo), "commit", "-qm", "txt"], check=True, env=env)
    snap = snapshot(str(repo))
    assert snap.files == []
    assert len(snap.commits) == 1


def test_snapshot_degrades_when_pr_source_fails(fixture_repo):
    class _Boom:
        def __str__(self):
            return "https://example.invalid/prs"

    snap = snapshot(str(fixture_repo["repo"]), pr_source=None,
                    config=IngestConfig(repo_id="demo-repo",
                                        pr_source=str(fixture_repo["prs"])))
    assert len(snap.pull_requests) == 2  # config source works

    missing = str(fixture_repo["prs"]) + "-missing"
    snap2 = snapshot(str(fixture_repo["repo"]), pr_source=missing)
    assert snap2.pull_requests == []


def test_unparseable_file_does_not_abort(tmp_path):
    repo = tmp_path / "broken"
    repo.mkdir()
    import os
    env = {**os.environ, "GIT_AUTHOR_NAME": "t", "GIT_AUTHOR_EMAIL": "t@x",
           "GIT_COMMITTER_NAME": "t", "GIT_COMMITTER_EMAIL": "t@x"}
    subprocess.run(["git", "-C", str(repo), "init", "-q"], check=True)
    (repo / "ok.py").write_text("def fine():\n    return 1\n")
    (repo / "bad.py").write_text("def broken(:\n")
    subprocess.run(["git", "-C", str(repo), "add", "-A"], check=True, env=env)
    subprocess.run(["git", "-C", str(repo), "commit", "-qm", "x"], check=True, env=env)
    snap = snapshot(str(repo))
    by_path = {f.path: f for f in snap.files}
    assert by_path["bad.py"].parse_failed
    assert not by_path["ok.py"].parse_failed
    assert len(by_path["ok.py"].functions) == 1
