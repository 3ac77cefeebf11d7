import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent / "fixtures"))

from repo_fixture import build_fixture_repo, load_manifest  # noqa: E402


@pytest.fixture(scope="session")
def fixture_repo(tmp_path_factory):
    """Deterministic demo repository + PR fixtures + hand-counted manifest."""
    base = tmp_path_factory.mktemp("fixture")
    built = build_fixture_repo(base)
    built["manifest"] = load_manifest()
    return built


@pytest.fixture(scope="session")
def fixture_snapshot(fixture_repo):
    from repograph.ingest import IngestConfig, snapshot

    return snapshot(str(fixture_repo["repo"]), pr_source=str(fixture_repo["prs"]),
                    config=IngestConfig(repo_id="demo-repo"))


@pytest.fixture(scope="session")
def fixture_graph(fixture_snapshot):
    from repograph.kgraph import build_graph

    return build_graph(fixture_snapshot)
