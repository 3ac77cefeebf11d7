"""QA datasets over graph windows: YAML loading, validation, generation.

Generated questions are instantiated from templates whose answers come from
the deterministic traversal engine, so every sample is verifiable against
the graph it was generated from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..deepgraph.traverse import PathPattern, PathStep, traverse_path
from ..errors import DanglingNodeRef, InsufficientStructure, SchemaError
from ..kgraph.model import EdgeType, KnowledgeGraph, NodeType


@dataclass
class QaSample:
    question: str
    window_center: str
    window_hops: int
    answer_node_ids: list[str]
    negative_node_ids: list[str] = field(default_factory=list)
    paraphrases: list[str] = field(default_factory=list)

    def key(self) -> tuple[str, str, int]:
        return (self.question, self.window_center, self.window_hops)


@dataclass
class QaDataset:
    train: list[QaSample]
    val: list[QaSample]
    provenance: dict = field(default_factory=dict)


def expand_window(graph: KnowledgeGraph, center: str, hops: int) -> list[str]:
    """Undirected BFS ball around the center, sorted expansion order."""
    seen = {center}
    frontier = [center]
    order = [center]
    for _ in range(hops):
        nxt = []
        for nid in frontier:
            for nb in sorted(graph.undirected_neighbors(nid)):
                if nb not in seen:
                    seen.add(nb)
                    nxt.append(nb)
                    order.append(nb)
        frontier = nxt
    return order


def _validate_sample(graph: KnowledgeGraph, raw: dict, path: str,
                     idx: int) -> QaSample:
    where = f"samples[{idx}]"
    for key in ("question", "window", "answers"):
        if key not in raw:
            raise SchemaError(path, f"{where}.{key}", "missing")
    window = raw["window"]
    if not isinstance(window, dict) or "center" not in window or "hops" not in window:
        raise SchemaError(path, f"{where}.window", "needs center and hops")
    sample = QaSample(
        question=str(raw["question"]),
        window_center=str(window["center"]),
        window_hops=int(window["hops"]),
        answer_node_ids=[str(a) for a in raw["answers"]],
        negative_node_ids=[str(n) for n in raw.get("negatives", [])],
        paraphrases=[str(p) for p in raw.get("paraphrases", [])],
    )
    if not sample.answer_node_ids:
        raise SchemaError(path, f"{where}.answers", "must be non-empty")

    missing = [n for n in ([sample.window_center] + sample.answer_node_ids +
                           sample.negative_node_ids) if n not in graph.nodes]
    if missing:
        raise DanglingNodeRef(missing)

    window_nodes = set(expand_window(graph, sample.window_center,
                                     sample.window_hops))
    outside = [n for n in sample.answer_node_ids + sample.negative_node_ids
               if n not in window_nodes]
    if outside:
        raise DanglingNodeRef(outside)
    overlap = set(sample.answer_node_ids) & set(sample.negative_node_ids)
    if overlap:
        raise SchemaError(path, f"{where}.negatives",
                          f"answers overlap negatives: {sorted(overlap)}")
    return sample


def load_dataset(path, graph: KnowledgeGraph) -> QaDataset:
    """Parse and validate the YAML schema against the graph."""
    text = Path(path).read_text("utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(str(path), "<root>", f"not valid YAML: {exc}") from exc
    if not isinstance(raw, dict) or "samples" not in raw:
        raise SchemaError(str(path), "samples", "missing")

    samples = [_validate_sample(graph, s, str(path), i)
               for i, s in enumerate(raw["samples"])]

    split = raw.get("split")
    if split is None:
        raise SchemaError(str(path), "split", "missing train/val index")
    train_idx = list(split.get("train", []))
    val_idx = list(split.get("val", []))
    if set(train_idx) & set(val_idx):
        raise SchemaError(str(path), "split", "train/val overlap")
    bad = [i for i in train_idx + val_idx if not 0 <= i < len(samples)]
    if bad:
        raise SchemaError(str(path), "split", f"indices out of range: {bad}")

    return QaDataset(
        train=[samples[i] for i in train_idx],
        val=[samples[i] for i in val_idx],
        provenance={"path": str(path), "graph": list(graph.provenance)},
    )


def save_dataset(dataset: QaDataset, path) -> None:
    samples = dataset.train + dataset.val
    payload = {
        "samples": [
            {
                "question": s.question,
                "paraphrases": s.paraphrases,
                "window": {"center": s.window_center, "hops": s.window_hops},
                "answers": s.answer_node_ids,
                "negatives": s.negative_node_ids,
            }
            for s in samples
        ],
        "split": {
            "train": list(range(len(dataset.train))),
            "val": list(range(len(dataset.train), len(samples))),
        },
        "provenance": dataset.provenance,
    }
    Path(path).write_text(yaml.safe_dump(payload, sort_keys=False,
                                         allow_unicode=True), encoding="utf-8")


# --- generation ------------------------------------------------------------

_AUTHOR_P = [
    "Who authored commit {sha}?",
    "Which author wrote commit {sha}?",
    "Identify the author of commit {sha}.",
    "Commit {sha} was written by whom?",
    "Find the author responsible for commit {sha}.",
]
_COMMIT_FILES_P = [
    "Which files were modified by commit {sha}?",
    "What files did commit {sha} change?",
    "List the files touched by commit {sha}.",
    "Show files changed in commit {sha}.",
    "Which paths were updated by commit {sha}?",
]
_PR_COMMITS_P = [
    "Which commits are included in pull request #{n}?",
    "What commits does PR #{n} include?",
    "List the commits belonging to pull request #{n}.",
    "Show the commits that PR #{n} contains.",
    "Which commits were merged as part of pull request #{n}?",
]
_PR_FUNCTIONS_P = [
    "Which functions were changed by commits in pull request #{n}?",
    "What functions did PR #{n} modify?",
    "List the functions affected by pull request #{n}.",
    "Show the functions touched through PR #{n}.",
    "Which functions changed as a result of pull request #{n}?",
]
_CALLS_P = [
    "Which functions does {name} call?",
    "What does the function {name} invoke?",
    "List the callees of {name}.",
    "Show the functions invoked by {name}.",
    "Which helpers does {name} depend on?",
]
_AGG_P = [
    "Who authored the most commits touching {path}?",
    "Which author changed {path} most often?",
    "Find the author with the most commits to {path}.",
    "Who most frequently modified {path}?",
    "Which author has the largest number of commits on {path}?",
]


@dataclass
class TemplateConfig:
    negatives_per_sample: int = 4
    min_hops: dict = field(default_factory=dict)


def _traversal_answers(graph, start, steps, end_type) -> list[str]:
    pattern = PathPattern(steps=[PathStep(e) for e in steps], start=start,
                          end_type=end_type)
    return [nid for nid, _ in traverse_path(graph, pattern)]


def _instances(graph: KnowledgeGraph):
    """Every (question, center, hops, answers) instantiation with answers."""
    out = []
    commits = sorted(n for n in graph.nodes if n.startswith("commit:"))
    prs = sorted(n for n in graph.nodes if n.startswith("pr:"))
    for cid in commits:
        sha = graph.nodes[cid].attrs["sha"]
        authors = _traversal_answers(graph, cid, [EdgeType.AUTHORED_BY],
                                     NodeType.AUTHOR)
        files = _traversal_answers(graph, cid, [EdgeType.MODIFIES],
                                   NodeType.FILE)
        for sha_text in (sha, sha[:8]):
            if authors:
                for p in _AUTHOR_P:
                    for hops in (1, 2):
                        out.append((p.format(sha=sha_text), cid, hops, authors))
            if files:
                for p in _COMMIT_FILES_P:
                    for hops in (1, 2):
                        out.append((p.format(sha=sha_text), cid, hops, files))
    for pid in prs:
        n = graph.nodes[pid].attrs["number"]
        included = _traversal_answers(graph, pid, [EdgeType.INCLUDES],
                                      NodeType.COMMIT)
        functions = _traversal_answers(
            graph, pid, [EdgeType.INCLUDES, EdgeType.MODIFIES, EdgeType.CONTAINS],
            NodeType.FUNCTION)
        if included:
            for p in _PR_COMMITS_P:
                for hops in (1, 2):
                    out.append((p.format(n=n), pid, hops, included))
        if functions:
            for p in _PR_FUNCTIONS_P:
                out.append((p.format(n=n), pid, 3, functions))
    for fid in sorted(n for n in graph.nodes if n.startswith("function:")):
        node = graph.nodes[fid]
        if node.attrs.get("external"):
            continue
        callees = _traversal_answers(graph, fid, [EdgeType.CALLS],
                                     NodeType.FUNCTION)
        if callees:
            for p in _CALLS_P:
                for hops in (1, 2):
                    out.append((p.format(name=node.label), fid, hops, callees))
    for file_id in sorted(n for n in graph.nodes if n.startswith("file:")):
        path = graph.nodes[file_id].attrs["path"]
        counts: dict[str, int] = {}
        for _, commit in graph.in_neighbors(file_id, EdgeType.MODIFIES):
            for _, author in graph.out_neighbors(commit, EdgeType.AUTHORED_BY):
                counts[author] = counts.get(author, 0) + 1
        if counts:
            best = max(counts.values())
            answers = sorted(a for a, c in counts.items() if c == best)
            for p in _AGG_P:
                for hops in (2, 3):
                    out.append((p.format(path=path), file_id, hops, answers))
    return out


def generate_dataset(graph: KnowledgeGraph,
                     template_config: TemplateConfig | None = None,
                     sizes: tuple[int, int] = (200, 50), seed: int = 0,
                     out_path=None) -> QaDataset:
    """Instantiate question templates with traversal-verified answers.

    Validation samples use question/center keys never seen in training;
    the training pool is oversampled to the requested size when the
    distinct-instance space is smaller. Deterministic under seed.
    """
    cfg = template_config or TemplateConfig()
    instances = _instances(graph)
    if not instances:
        raise InsufficientStructure(
            "graph lacks commits/PRs/functions for every template")
    n_train, n_val = sizes
    if len(instances) < n_val + 1:
        raise InsufficientStructure(
            f"only {len(instances)} distinct instances; cannot hold out {n_val}")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(instances))
    val_raw = [instances[i] for i in order[:n_val]]
    train_pool = [instances[i] for i in order[n_val:]]

    def build(raw, count):
        samples = []
        for i in range(count):
            question, center, hops, answers = raw[i % len(raw)]
            window = expand_window(graph, center, hops)
            candidates = [n for n in window if n not in answers]
            take = min(cfg.negatives_per_sample, len(candidates))
            picks = sorted(rng.choice(len(candidates), size=take,
                                      replace=False).tolist()) if take else []
            samples.append(QaSample(
                question=question,
                window_center=center,
                window_hops=hops,
                answer_node_ids=list(answers),
                negative_node_ids=[candidates[j] for j in picks],
            ))
        return samples

    dataset = QaDataset(
        train=build(train_pool, n_train),
        val=build(val_raw, n_val),
        provenance={"graph": list(graph.provenance), "seed": seed,
                    "distinct_instances": len(instances)},
    )
    if out_path is not None:
        save_dataset(dataset, out_path)
    return dataset
