"""Graph assembly from a parsed snapshot.

Node ids are content-derived ("type:qualifier"), never counter-based, so
repeated builds and incremental updates agree. Attribute-bearing concepts
(docstrings, decorators, control flow, strings, complexity, imports) become
nodes of their own, with the text also denormalized into the owner's attrs.
Call edges resolve by callee name within the owning file; unresolved names
get a shared external Function stub.
"""

from __future__ import annotations

from ..errors import SchemaMismatch
from ..ingest.types import (SCHEMA_VERSION, ClassInfo, FunctionInfo,
                            ParsedFile, RepoSnapshot)
from .model import Edge, EdgeType, KnowledgeGraph, Node, NodeType

_LABEL_LIMIT = 60


def _clip(text: str) -> str:
    text = " ".join(text.split())
    return text if len(text) <= _LABEL_LIMIT else text[:_LABEL_LIMIT - 1] + "…"


def file_node_id(path: str) -> str:
    return f"file:{path}"


def function_node_id(qualified_name: str) -> str:
    return f"function:{qualified_name}"


def external_function_id(name: str) -> str:
    return f"function:external::{name}"


def class_node_id(qualified_name: str) -> str:
    return f"class:{qualified_name}"


def commit_node_id(sha: str) -> str:
    return f"commit:{sha}"


def pr_node_id(number: int) -> str:
    return f"pr:#{number}"


def build_graph(snapshot: RepoSnapshot, include_components: bool = True) -> KnowledgeGraph:
    """Pure function of the snapshot; see module docstring for the scheme."""
    if snapshot.schema_version != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"snapshot schema {snapshot.schema_version} != {SCHEMA_VERSION}")

    g = KnowledgeGraph(repo_id=snapshot.repo_id, head_sha=snapshot.head_sha)

    for parsed in sorted(snapshot.files, key=lambda f: f.path):
        _add_file(g, parsed)

    file_paths = {f.path for f in snapshot.files}
    known_commits = set()
    for commit in snapshot.commits:
        cid = commit_node_id(commit.sha)
        known_commits.add(commit.sha)
        g.add_node(Node(cid, NodeType.COMMIT, _clip(commit.message.splitlines()[0]
                                                    if commit.message else commit.sha[:8]),
                        attrs={
                            "sha": commit.sha,
                            "author_name": commit.author_name,
                            "author_email": commit.author_email,
                            "timestamp": commit.timestamp,
                            "message": commit.message,
                            "changed_file_count": len(commit.changed_files),
                        }))
        identity = commit.author_email or commit.author_name
        aid = f"author:{identity}"
        if aid not in g.nodes:
            g.add_node(Node(aid, NodeType.AUTHOR, commit.author_name,
                            attrs={"identity": identity, "name": commit.author_name}))
        g.add_edge(Edge(cid, aid, EdgeType.AUTHORED_BY))
        for path, kind in commit.changed_files:
            if path in file_paths:
                g.add_edge(Edge(cid, file_node_id(path), EdgeType.MODIFIES,
                                attrs={"change": kind}))

    for pr in snapshot.pull_requests:
        pid = pr_node_id(pr.number)
        g.add_node(Node(pid, NodeType.PULL_REQUEST, _clip(f"#{pr.number} {pr.title}"),
                        attrs={
                            "number": pr.number, "title": pr.title, "body": pr.body,
                            "author_login": pr.author_login, "state": pr.state,
                            "merged": pr.merged, "created_at": pr.created_at,
                            "merged_at": pr.merged_at,
                        }))
        if pr.author_login:
            uid = f"user:{pr.author_login}"
            if uid not in g.nodes:
                g.add_node(Node(uid, NodeType.USER, pr.author_login,
                                attrs={"login": pr.author_login}))
            g.add_edge(Edge(pid, uid, EdgeType.OPENED_BY))
        for sha in pr.commit_shas:
            if sha in known_commits:
                g.add_edge(Edge(pid, commit_node_id(sha), EdgeType.INCLUDES))

    if include_components:
        _add_components(g)

    g.finalize()
    g.validate()
    return g


def _add_file(g: KnowledgeGraph, parsed: ParsedFile) -> None:
    fid = file_node_id(parsed.path)
    g.add_node(Node(fid, NodeType.FILE, parsed.path, attrs={
        "path": parsed.path,
        "line_count": parsed.line_count,
        "module_docstring": parsed.module_docstring,
        "parse_failed": parsed.parse_failed,
        "function_count": len(parsed.functions),
        "class_count": len(parsed.classes),
        "import_count": len(parsed.imports),
    }))

    if parsed.module_docstring:
        did = f"docstring:{parsed.path}"
        g.add_node(Node(did, NodeType.DOCSTRING, _clip(parsed.module_docstring),
                        attrs={"text": parsed.module_docstring, "owner": fid}))
        g.add_edge(Edge(fid, did, EdgeType.HAS_DOCSTRING))

    for target in parsed.imports:
        iid = f"import:{target}"
        if iid not in g.nodes:
            g.add_node(Node(iid, NodeType.IMPORT, target, attrs={"target": target}))
        g.add_edge(Edge(fid, iid, EdgeType.IMPORTS))

    for i, value in enumerate(parsed.string_constants):
        sid = f"string:{parsed.path}::{i}"
        g.add_node(Node(sid, NodeType.STRING_CONSTANT, _clip(repr(value)),
                        attrs={"value": value, "owner": fid, "index": i}))
        g.add_edge(Edge(fid, sid, EdgeType.HAS_STRING))

    # local name -> node id map for call resolution (first match in
    # qualified-name order when a simple name is ambiguous)
    local_functions: dict[str, str] = {}
    all_fns = list(parsed.functions) + [m for c in parsed.classes for m in c.methods]
    for fn in sorted(all_fns, key=lambda f: f.qualified_name):
        local_functions.setdefault(fn.name, function_node_id(fn.qualified_name))

    for fn in parsed.functions:
        _add_function(g, parsed, fn, owner_id=fid)
    for cls in parsed.classes:
        cid = class_node_id(cls.qualified_name)
        g.add_node(Node(cid, NodeType.CLASS, cls.name, attrs={
            "name": cls.name,
            "qualified_name": cls.qualified_name,
            "path": parsed.path,
            "docstring": cls.docstring,
            "bases": ", ".join(cls.bases),
            "decorators": "; ".join(cls.decorators),
            "method_count": len(cls.methods),
        }))
        g.add_edge(Edge(fid, cid, EdgeType.CONTAINS))
        if cls.docstring:
            did = f"docstring:{cls.qualified_name}"
            g.add_node(Node(did, NodeType.DOCSTRING, _clip(cls.docstring),
                            attrs={"text": cls.docstring, "owner": cid}))
            g.add_edge(Edge(cid, did, EdgeType.HAS_DOCSTRING))
        for method in cls.methods:
            _add_function(g, parsed, method, owner_id=cid)

    for fn in all_fns:
        src = function_node_id(fn.qualified_name)
        seen = set()
        for callee in fn.calls:
            if callee in seen:
                continue
            seen.add(callee)
            target = local_functions.get(callee)
            if target is None:
                target = external_function_id(callee)
                if target not in g.nodes:
                    g.add_node(Node(target, NodeType.FUNCTION, callee, attrs={
                        "name": callee, "external": True}))
            g.add_edge(Edge(src, target, EdgeType.CALLS))


def _add_function(g: KnowledgeGraph, parsed: ParsedFile, fn: FunctionInfo,
                  owner_id: str) -> None:
    nid = function_node_id(fn.qualified_name)
    g.add_node(Node(nid, NodeType.FUNCTION, fn.name, attrs={
        "name": fn.name,
        "qualified_name": fn.qualified_name,
        "path": parsed.path,
        "is_async": fn.is_async,
        "param_count": len(fn.params),
        "params": ", ".join(p[0] for p in fn.params),
        "return_annotation": fn.return_annotation,
        "docstring": fn.docstring,
        "decorators": "; ".join(fn.decorators),
        "assignments": fn.assignments,
        "try_except_blocks": fn.try_except_blocks,
        "lambdas": fn.lambdas,
        "comprehensions": fn.comprehensions,
        "complexity": fn.complexity,
        "code_length": fn.code_length,
        "start_line": fn.start_line,
        "end_line": fn.end_line,
        "external": False,
    }))
    g.add_edge(Edge(owner_id, nid, EdgeType.CONTAINS))

    if fn.docstring:
        did = f"docstring:{fn.qualified_name}"
        g.add_node(Node(did, NodeType.DOCSTRING, _clip(fn.docstring),
                        attrs={"text": fn.docstring, "owner": nid}))
        g.add_edge(Edge(nid, did, EdgeType.HAS_DOCSTRING))
    if fn.return_annotation:
        rid = f"returntype:{fn.qualified_name}"
        g.add_node(Node(rid, NodeType.RETURN_TYPE, fn.return_annotation,
                        attrs={"text": fn.return_annotation, "owner": nid}))
        g.add_edge(Edge(nid, rid, EdgeType.RETURNS))
    for i, deco in enumerate(fn.decorators):
        did = f"decorator:{fn.qualified_name}::{i}"
        g.add_node(Node(did, NodeType.DECORATOR, _clip(deco),
                        attrs={"text": deco, "owner": nid, "index": i}))
        g.add_edge(Edge(nid, did, EdgeType.DECORATED_BY))
    for i, kind in enumerate(fn.control_flow):
        cid = f"controlflow:{fn.qualified_name}::{i}"
        g.add_node(Node(cid, NodeType.CONTROL_FLOW, kind,
                        attrs={"kind": kind, "owner": nid, "index": i}))
        g.add_edge(Edge(nid, cid, EdgeType.HAS_CONTROL_FLOW))
    for i in range(fn.try_except_blocks):
        tid = f"tryexcept:{fn.qualified_name}::{i}"
        g.add_node(Node(tid, NodeType.TRY_EXCEPT, "try/except",
                        attrs={"owner": nid, "index": i}))
        g.add_edge(Edge(nid, tid, EdgeType.HAS_TRY_EXCEPT))
    for i, value in enumerate(fn.string_constants):
        sid = f"string:{fn.qualified_name}::{i}"
        g.add_node(Node(sid, NodeType.STRING_CONSTANT, _clip(repr(value)),
                        attrs={"value": value, "owner": nid, "index": i}))
        g.add_edge(Edge(nid, sid, EdgeType.HAS_STRING))
    cxid = f"complexity:{fn.qualified_name}"
    g.add_node(Node(cxid, NodeType.COMPLEXITY_METRIC, str(fn.complexity),
                    attrs={"value": fn.complexity, "owner": nid}))
    g.add_edge(Edge(nid, cxid, EdgeType.HAS_COMPLEXITY))


def _add_components(g: KnowledgeGraph) -> None:
    """Component nodes = weakly-connected clusters of the code skeleton.

    The skeleton is the File/Class/Function node set joined by CONTAINS and
    CALLS edges. Component ids derive from the lexicographically smallest
    member id, keeping them stable under unrelated changes.
    """
    skeleton_types = {NodeType.FILE, NodeType.CLASS, NodeType.FUNCTION}
    members = [nid for nid, n in g.nodes.items() if n.node_type in skeleton_types]
    parent = {nid: nid for nid in members}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for e in g.edges:
        if e.edge_type in (EdgeType.CONTAINS, EdgeType.CALLS):
            union(e.src, e.dst)

    clusters: dict[str, list[str]] = {}
    for nid in members:
        clusters.setdefault(find(nid), []).append(nid)

    for root, nodes in sorted(clusters.items()):
        comp_id = f"component:{min(nodes)}"
        g.add_node(Node(comp_id, NodeType.COMPONENT,
                        f"component({len(nodes)})",
                        attrs={"size": len(nodes), "anchor": min(nodes)}))
        for nid in sorted(nodes):
            g.add_edge(Edge(nid, comp_id, EdgeType.MEMBER_OF))
