"""repograph command-line interface."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import AppConfig, EnginePaths, load_config


@click.group()
def main():
    """Repository knowledge graphs with hybrid question answering."""


@main.command()
@click.option("--repo", "repo_path", required=True, type=click.Path(exists=True))
@click.option("--prs", "pr_source", default=None,
              help="PR fixture directory or API endpoint URL.")
@click.option("--out", "out_path", default=None, type=click.Path())
@click.option("--repo-id", default=None)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def ingest(repo_path, pr_source, out_path, repo_id, config_path):
    """Parse a repository into a canonical snapshot JSON."""
    from .ingest import IngestConfig, snapshot

    app_cfg = load_config(config_path)
    cfg = IngestConfig(extensions=app_cfg.ingest_extensions,
                       pr_source=pr_source or app_cfg.ingest_pr_source,
                       api_token_env=app_cfg.ingest_api_token_env,
                       repo_id=repo_id, output_path=out_path)
    snap = snapshot(repo_path, config=cfg)
    click.echo(json.dumps({
        "repo_id": snap.repo_id, "files": len(snap.files),
        "commits": len(snap.commits), "pull_requests": len(snap.pull_requests),
        "users": len(snap.users), "warnings": snap.warnings,
        "out": out_path}))


@main.command()
@click.option("--snapshot", "snapshot_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--graphml", "graphml_path", default=None, type=click.Path())
@click.option("--no-components", is_flag=True, default=False)
def build(snapshot_path, out_path, graphml_path, no_components):
    """Build the knowledge graph from a snapshot."""
    from .ingest.types import RepoSnapshot
    from .kgraph import build_graph, export_graphml, export_json, stats

    snap = RepoSnapshot.from_json(Path(snapshot_path).read_text("utf-8"))
    graph = build_graph(snap, include_components=not no_components)
    export_json(graph, out_path)
    if graphml_path:
        export_graphml(graph, graphml_path)
    s = stats(graph)
    click.echo(json.dumps({"nodes": s["total_nodes"], "edges": s["total_edges"],
                           "out": out_path, "graphml": graphml_path}))


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--snapshot", "snapshot_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
def update(graph_path, snapshot_path, out_path):
    """Apply a delta update from a newer snapshot."""
    from .ingest.types import RepoSnapshot
    from .kgraph import apply_delta, export_json, import_json

    graph = import_json(graph_path)
    snap = RepoSnapshot.from_json(Path(snapshot_path).read_text("utf-8"))
    new_graph, report = apply_delta(graph, snap)
    export_json(new_graph, out_path or graph_path)
    click.echo(json.dumps({"version": new_graph.version, **report.counts,
                           "changed_files": report.changed_files}))


@main.command("stats")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
def stats_cmd(graph_path):
    """Node/edge counts by type."""
    from .kgraph import import_json, stats

    click.echo(json.dumps(stats(import_json(graph_path)), indent=2))


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--graphml", "graphml_path", default=None, type=click.Path())
@click.option("--json", "json_path", default=None, type=click.Path())
def export(graph_path, graphml_path, json_path):
    """Re-export a graph as GraphML and/or canonical JSON."""
    from .kgraph import export_graphml, export_json, import_json

    graph = import_json(graph_path)
    if graphml_path:
        export_graphml(graph, graphml_path)
    if json_path:
        export_json(graph, json_path)
    click.echo(json.dumps({"graphml": graphml_path, "json": json_path}))


@main.group()
def train():
    """Train a learning backend."""


def _load_graph_features(graph_path):
    from .featurize import HashedSubwordEncoder, featurize_nodes
    from .kgraph import import_json

    graph = import_json(graph_path)
    features = featurize_nodes(graph, HashedSubwordEncoder())
    return graph, features


@train.command("deepgraph")
@click.option("--mode", type=click.Choice(["sage", "gae", "han"]), required=True)
@click.option("--loss", type=click.Choice(["contrastive", "infonce"]),
              default="contrastive", show_default=True)
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--epochs", default=None, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
def train_deepgraph(mode, loss, graph_path, seed, epochs, out_path):
    """Train sage/gae/han; emits one JSON metrics line per epoch."""
    from .deepgraph import (GaeConfig, HanConfig, SageConfig, split_edges,
                            train_gae, train_han, train_sage_supervised)

    graph, features = _load_graph_features(graph_path)
    if mode == "sage":
        cfg = SageConfig(seed=seed)
        if epochs:
            cfg.epochs = epochs
        split = split_edges(graph, seed=seed)
        model, history = train_sage_supervised(graph, features, split, cfg)
        for i, m in enumerate(history):
            click.echo(json.dumps({"epoch": i, **m.as_dict()}))
    elif mode == "gae":
        cfg = GaeConfig(seed=seed)
        if epochs:
            cfg.epochs = epochs
        model, final = train_gae(graph, features, cfg)
        for i, m in enumerate(model.history):
            click.echo(json.dumps({"epoch": i, **m.as_dict()}))
        click.echo(json.dumps({"final": final.as_dict()}))
    else:
        cfg = HanConfig(seed=seed)
        if epochs:
            cfg.epochs = epochs
        model, _, silhouette = train_han(graph, features, loss, cfg)
        for i, value in enumerate(model.history):
            click.echo(json.dumps({"epoch": i, "loss": value}))
        click.echo(json.dumps({"silhouette": silhouette,
                               "semantic_weights": model.semantic_weights}))
    model.save(out_path)
    click.echo(json.dumps({"checkpoint": out_path}), err=False)


@train.command("kblam")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--epochs", default=None, type=int)
@click.option("--out", "out_path", default="kblam.ckpt", type=click.Path())
def train_kblam_cmd(graph_path, dataset_path, seed, epochs, out_path):
    """Train the attention QA model on a YAML dataset."""
    from .kblam import KblamConfig, load_dataset, train_kblam

    graph, features = _load_graph_features(graph_path)
    dataset = load_dataset(dataset_path, graph)
    cfg = KblamConfig(seed=seed)
    if epochs:
        cfg.epochs = epochs
    model, history = train_kblam(graph, features, dataset, cfg)
    for m in history:
        click.echo(json.dumps(m.as_dict()))
    model.save(out_path)
    click.echo(json.dumps({"checkpoint": out_path}))


@main.group()
def dataset():
    """QA dataset utilities."""


@dataset.command("generate")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--train", "n_train", default=200, show_default=True)
@click.option("--val", "n_val", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
def dataset_generate(graph_path, out_path, n_train, n_val, seed):
    """Generate a QA dataset whose answers come from the traversal engine."""
    from .kblam import generate_dataset
    from .kgraph import import_json

    graph = import_json(graph_path)
    ds = generate_dataset(graph, sizes=(n_train, n_val), seed=seed,
                          out_path=out_path)
    click.echo(json.dumps({"train": len(ds.train), "val": len(ds.val),
                           "out": out_path, **ds.provenance}))


@main.group()
def embed():
    """Structural embedding index."""


@embed.command("build")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--dim", default=128, show_default=True)
@click.option("--walks", default=10, show_default=True)
@click.option("--length", default=40, show_default=True)
@click.option("--epochs", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
def embed_build(graph_path, out_dir, dim, walks, length, epochs, seed):
    """Random walks + skip-gram, persisted next to the textual block."""
    from .embed import WalkConfig, build_index, random_walks, train_skipgram

    graph, features = _load_graph_features(graph_path)
    cfg = WalkConfig(walks_per_node=walks, walk_length=length,
                     embedding_dim=dim, epochs=epochs, seed=seed)
    corpus = random_walks(graph, cfg)
    structural, losses = train_skipgram(corpus, cfg)
    index = build_index(graph, features, structural,
                        metadata={"walk_config": vars(cfg),
                                  "losses": losses})
    index.save(out_dir)
    click.echo(json.dumps({"nodes": index.n, "out": out_dir,
                           "loss": losses[-1] if losses else None}))


@embed.command("query")
@click.option("--index", "index_dir", required=True, type=click.Path(exists=True))
@click.option("--text", required=True)
@click.option("-k", default=10, show_default=True)
def embed_query(index_dir, text, k):
    """Exact top-k cosine retrieval against the textual block."""
    from .embed import EmbeddingIndex, query_topk
    from .featurize import HashedSubwordEncoder

    index = EmbeddingIndex.load(index_dir)
    for nid, score in query_topk(index, HashedSubwordEncoder(), text, k=k):
        click.echo(json.dumps({"node": nid, "cosine": round(score, 6)}))


@main.command()
@click.argument("question")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--kblam", "kblam_path", default=None, type=click.Path(exists=True))
@click.option("--sage", "sage_path", default=None, type=click.Path(exists=True))
@click.option("--index", "index_dir", default=None, type=click.Path(exists=True))
@click.option("--backend", "backend_override", default=None,
              type=click.Choice(["kblam", "deepgraph", "embedding"]))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def query(question, graph_path, kblam_path, sage_path, index_dir,
          backend_override, config_path):
    """Route a question and answer it with the loaded artifacts."""
    from .router import (Backend, LlmClientConfig, QueryType, RoutingDecision,
                         dispatch, route)
    from .service.engines import Engines, load_engines

    app_cfg = load_config(config_path)
    paths = EnginePaths(graph=graph_path, sage=sage_path, kblam=kblam_path,
                        index=index_dir,
                        encoder_endpoint=app_cfg.engines.encoder_endpoint)
    engines = load_engines(paths)
    if backend_override:
        backend = {"kblam": Backend.KBLAM, "deepgraph": Backend.DEEPGRAPH,
                   "embedding": Backend.EMBEDDING}[backend_override]
        qtype = {Backend.KBLAM: QueryType.COMPLEX,
                 Backend.DEEPGRAPH: QueryType.SINGLE_HOP,
                 Backend.EMBEDDING: QueryType.SEMANTIC}[backend]
        decision = RoutingDecision(query_type=qtype, backend=backend,
                                   reason="caller override", source="override")
    else:
        decision = route(question, LlmClientConfig(
            endpoint=app_cfg.router_endpoint, model=app_cfg.router_model,
            timeout_s=app_cfg.router_timeout_s))
    answer = dispatch(decision, question, engines)
    click.echo(json.dumps(answer.as_dict(), indent=2))


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--graph", "graph_path", default=None, type=click.Path(exists=True))
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
def serve(config_path, graph_path, host, port):
    """Run the HTTP API."""
    from .service import serve as run_service

    cfg = load_config(config_path)
    if graph_path:
        cfg.engines.graph = graph_path
    if host:
        cfg.server.host = host
    if port:
        cfg.server.port = port
    run_service(cfg)


@main.group()
def memory():
    """Episodic memory inspection."""


@memory.command("list")
@click.option("--file", "memory_path", required=True, type=click.Path(exists=True))
@click.option("--backend", default=None)
@click.option("--since", default=None, type=float)
def memory_list(memory_path, backend, since):
    from .service.memory import EpisodicStore

    store = EpisodicStore(memory_path)
    for rec in store.list(since=since, backend=backend):
        click.echo(json.dumps(rec.as_dict()))


if __name__ == "__main__":
    sys.exit(main())
