"""
Command-line interface (``akg``).

Artifact-writing commands append a run manifest (``--manifest``, default
``akg-manifest.jsonl`` beside the primary output). Failures print
``error[<stage>] <code>: <message>`` to stderr and exit 1.
"""

import asyncio
import json
import sys
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, NoReturn

import typer

from app.core.config import Settings, load_settings
from app.core.exceptions import CorpusIOError, CorpusParseError, KnowledgeGraphError, StageError
from app.core.manifest import RunManifest, append_manifest, default_manifest_path
from app.corpus import load_corpus, validate_corpus, write_corpus
from app.curation import Curator, DisambiguationParams, Disambiguator, load_maps
from app.embedding import build_embedder
from app.evaluation import build_scorer, kg_system, llm_only_system, load_qa_dataset, run_eval
from app.extraction import ExtractionPipeline, ExtractionResult
from app.graph import GraphStore, entity_view, load_snapshot, render_stats, save_snapshot
from app.ontology import EntityKind, canonical_path, export_schema
from app.pipeline import GraphBuilder
from app.reasoning.backends import build_gateway
from app.reasoning.chains import QAEngine
from app.reasoning.llm import LLMGateway
from app.utils import configure_logging, get_logger, iter_lines, write_jsonl

logger = get_logger(__name__)


app = typer.Typer(
    name="akg",
    help="Academic knowledge graph toolkit: build, curate, query and evaluate.",
    no_args_is_help=True,
    add_completion=False,
)


class Backend(str, Enum):
    MOCK = "mock"
    OPENAI = "openai"


class SystemChoice(str, Enum):
    KG = "kg"
    LLM = "llm"


class DatasetFormatChoice(str, Enum):
    JSONL = "jsonl"
    CSV = "csv"


@dataclass
class CLIState:
    config: Path | None = None


_state = CLIState()

# =============================================================================
# SHARED OPTIONS
# =============================================================================

BackendOpt = Annotated[
    Backend | None, typer.Option("--backend", help="Completion backend.")
]
FixturesOpt = Annotated[
    Path | None, typer.Option("--fixtures", help="Mock fixture directory.")
]
StrictOpt = Annotated[
    bool | None,
    typer.Option("--strict/--lenient", help="Mock raises on a missing fixture when strict."),
]
ManifestOpt = Annotated[
    Path | None, typer.Option("--manifest", help="Run manifest (JSON lines, appended).")
]
GraphOpt = Annotated[Path, typer.Option("--graph", help="Graph snapshot.", exists=True)]


def _settings(
    backend: Backend | None = None,
    fixtures: Path | None = None,
    strict: bool | None = None,
    **overrides: Any,
) -> Settings:
    return load_settings(
        _state.config,
        LLM_BACKEND=backend.value if backend else None,
        LLM_FIXTURES_DIR=str(fixtures) if fixtures else None,
        LLM_STRICT=strict,
        **overrides,
    )


def _fail(error: KnowledgeGraphError, stage: str | None = None) -> NoReturn:
    stage = error.stage if isinstance(error, StageError) else stage
    typer.echo(f"error[{stage or 'cli'}] {error.code}: {error.message}", err=True)
    raise typer.Exit(1)


@contextmanager
def _stage(stage: str) -> Iterator[None]:
    """Report library errors raised inside ``stage`` and exit 1."""
    try:
        yield
    except KnowledgeGraphError as e:
        _fail(e, stage)


def _finish(
    manifest: RunManifest,
    primary: Path,
    manifest_path: Path | None,
    gateway: LLMGateway | None = None,
) -> None:
    if gateway is not None:
        manifest.ledger = gateway.ledger.summary()
    append_manifest(manifest_path or default_manifest_path(primary), manifest)


def _read_records(path: Path) -> list[dict[str, Any]]:
    try:
        return [json.loads(line) for _, line in iter_lines(path)]
    except OSError as e:
        raise CorpusIOError(f"Cannot read {path}: {e}", details={"path": str(path)}) from e
    except json.JSONDecodeError as e:
        raise CorpusParseError(f"Malformed record in {path}: {e.msg}") from e


def _echo_json(data: Any) -> None:
    typer.echo(json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True))


def _run(coroutine: Any) -> Any:
    return asyncio.run(coroutine)


# =============================================================================
# GLOBAL OPTIONS
# =============================================================================


@app.callback()
def main_callback(
    config: Annotated[
        Path | None, typer.Option("--config", help="TOML config file.", exists=True)
    ] = None,
    log_level: Annotated[str | None, typer.Option("--log-level", help="Log level.")] = None,
) -> None:
    _state.config = config
    try:
        level = log_level or load_settings(config).LOG_LEVEL
    except KnowledgeGraphError as e:
        _fail(e, "config")
    configure_logging(level=level, stream=sys.stderr)


# =============================================================================
# SCHEMA / CORPUS
# =============================================================================


@app.command()
def schema() -> None:
    """Print the schema document: entity kinds, relations, signatures."""
    _echo_json(export_schema())


@app.command()
def ingest(
    corpus: Annotated[Path, typer.Option("--corpus", help="Corpus JSON lines.")],
    out: Annotated[Path, typer.Option("--out", help="Validated, resolved corpus.")],
    manifest_path: ManifestOpt = None,
) -> None:
    """Validate a corpus, resolve citations and write the store input."""
    settings = _settings()
    manifest = RunManifest.start("ingest", settings, {"corpus": corpus, "out": out})
    with _stage("ingest"):
        with manifest.stage("ingest"):
            manifest.add_input(corpus)
            report = validate_corpus(load_corpus(corpus))
            write_corpus(out, report.records)
    manifest.add_output(out)
    _finish(manifest, out, manifest_path)
    _echo_json(report.to_dict())
    if report.duplicate_ids:
        typer.echo(
            f"error[ingest] duplicate-corpus-id: {', '.join(report.duplicate_ids)}", err=True
        )
        raise typer.Exit(1)


# =============================================================================
# EXTRACTION / CURATION
# =============================================================================


def _load_resolved(corpus: Path, manifest: RunManifest) -> list[Any]:
    with manifest.stage("ingest"):
        manifest.add_input(corpus)
        return validate_corpus(load_corpus(corpus)).records


@app.command()
def extract(
    corpus: Annotated[Path, typer.Option("--corpus", help="Corpus JSON lines.")],
    out: Annotated[Path, typer.Option("--out", help="Candidate dump (JSON lines).")],
    backend: BackendOpt = None,
    fixtures: FixturesOpt = None,
    strict: StrictOpt = None,
    manifest_path: ManifestOpt = None,
) -> None:
    """Extract entity and triple candidates from every paper."""
    settings = _settings(backend, fixtures, strict)
    manifest = RunManifest.start("extract", settings, {"corpus": corpus, "out": out})
    gateway = build_gateway(settings)
    with _stage("ingest"):
        records = _load_resolved(corpus, manifest)
    with _stage("extract"), manifest.stage("extract"):
        result = _run(ExtractionPipeline.from_settings(settings, gateway).extract_corpus(records))
    write_jsonl(out, result.to_records())
    manifest.add_output(out)
    _finish(manifest, out, manifest_path, gateway)
    _echo_json(
        {
            "entities": len(result.entities),
            "triples": len(result.triples),
            "inter_paper": len(result.inter_paper),
            "failures": [f.to_dict() for f in result.failures],
        }
    )


@app.command("link-citations")
def link_citations(
    corpus: Annotated[Path, typer.Option("--corpus", help="Corpus JSON lines.")],
    out: Annotated[Path, typer.Option("--out", help="Candidate dump (JSON lines).")],
    backend: BackendOpt = None,
    fixtures: FixturesOpt = None,
    strict: StrictOpt = None,
    manifest_path: ManifestOpt = None,
) -> None:
    """Classify citations into inter-paper relations."""
    settings = _settings(backend, fixtures, strict)
    manifest = RunManifest.start("link-citations", settings, {"corpus": corpus, "out": out})
    gateway = build_gateway(settings)
    with _stage("ingest"):
        records = _load_resolved(corpus, manifest)
    with _stage("citations"), manifest.stage("citations"):
        result = _run(ExtractionPipeline.from_settings(settings, gateway).link_corpus(records))
    write_jsonl(out, result.to_records())
    manifest.add_output(out)
    _finish(manifest, out, manifest_path, gateway)
    _echo_json({"inter_paper": [t.to_dict() for t in result.inter_paper]})


@app.command()
def clean(
    candidates: Annotated[Path, typer.Option("--candidates", help="Candidate dump.")],
    out: Annotated[Path, typer.Option("--out", help="Curated candidate dump.")],
    graph_out: Annotated[
        Path | None, typer.Option("--graph-out", help="Also write a snapshot of the result.")
    ] = None,
    backend: BackendOpt = None,
    fixtures: FixturesOpt = None,
    strict: StrictOpt = None,
    manifest_path: ManifestOpt = None,
) -> None:
    """Detect and repair erroneous entities."""
    settings = _settings(backend, fixtures, strict)
    manifest = RunManifest.start("clean", settings, {"candidates": candidates, "out": out})
    gateway = build_gateway(settings)
    with _stage("clean"), manifest.stage("clean"):
        manifest.add_input(candidates)
        result = ExtractionResult.from_records(_read_records(candidates))
        curator = Curator(gateway, max_reasks=settings.EXTRACTION_MAX_REASKS)
        curated, report = _run(curator.curate(result))
    write_jsonl(out, curated.to_records())
    manifest.add_output(out)
    if graph_out is not None:
        with _stage("load"), manifest.stage("load"):
            store = GraphStore(pipeline_version=settings.PIPELINE_VERSION)
            store.ingest(curated)
            save_snapshot(store, graph_out)
        manifest.add_output(graph_out)
    _finish(manifest, out, manifest_path, gateway)
    _echo_json(report.to_dict())


@app.command()
def disambiguate(
    graph: GraphOpt,
    out: Annotated[Path, typer.Option("--out", help="Rewritten snapshot.")],
    maps_dir: Annotated[
        Path | None, typer.Option("--maps-dir", help="Write <Kind>.tsv canonical maps here.")
    ] = None,
    overrides: Annotated[
        Path | None, typer.Option("--overrides", help="Directory of manual <Kind>.tsv maps.")
    ] = None,
    k: Annotated[int | None, typer.Option("--k", help="Fixed cluster count.")] = None,
    seed: Annotated[int | None, typer.Option("--seed", help="Clustering seed.")] = None,
    backend: BackendOpt = None,
    fixtures: FixturesOpt = None,
    strict: StrictOpt = None,
    manifest_path: ManifestOpt = None,
) -> None:
    """Cluster Task, Dataset and Metric surfaces and merge them graph-wide."""
    settings = _settings(backend, fixtures, strict, CLUSTER_K=k, CLUSTER_SEED=seed)
    manifest = RunManifest.start("disambiguate", settings, {"graph": graph, "out": out})
    gateway = build_gateway(settings)
    with _stage("disambiguate"), manifest.stage("disambiguate"):
        manifest.add_input(graph)
        store = load_snapshot(graph, frozen=False).store
        disambiguator = Disambiguator(
            build_embedder(settings), DisambiguationParams.from_settings(settings), gateway
        )
        results = _run(
            disambiguator.disambiguate(store, load_maps(overrides) if overrides else None)
        )
        save_snapshot(store, out)
    manifest.add_output(out)
    if maps_dir is not None:
        for cmap, _ in results.values():
            manifest.add_output(cmap.save(maps_dir))
    _finish(manifest, out, manifest_path, gateway)
    _echo_json([outcome.to_dict() for _, outcome in results.values()])


@app.command()
def build(
    corpus: Annotated[Path, typer.Option("--corpus", help="Corpus JSON lines.")],
    out: Annotated[Path, typer.Option("--out", help="Snapshot to write.")],
    candidates_out: Annotated[
        Path | None, typer.Option("--candidates-out", help="Also dump curated candidates.")
    ] = None,
    maps_dir: Annotated[
        Path | None, typer.Option("--maps-dir", help="Write <Kind>.tsv canonical maps here.")
    ] = None,
    overrides: Annotated[
        Path | None, typer.Option("--overrides", help="Directory of manual <Kind>.tsv maps.")
    ] = None,
    backend: BackendOpt = None,
    fixtures: FixturesOpt = None,
    strict: StrictOpt = None,
    manifest_path: ManifestOpt = None,
) -> None:
    """Full pipeline: corpus to graph snapshot."""
    settings = _settings(backend, fixtures, strict)
    manifest = RunManifest.start("build", settings, {"corpus": corpus, "out": out})
    gateway = build_gateway(settings)
    builder = GraphBuilder(settings, gateway, build_embedder(settings), manifest)
    with _stage("ingest"):
        manifest.add_input(corpus)
        records = load_corpus(corpus)
    with _stage("build"):
        result = _run(builder.build(records, overrides))
        save_snapshot(result.store, out)
    manifest.add_output(out)
    if candidates_out is not None and result.curated is not None:
        write_jsonl(candidates_out, result.curated.to_records())
        manifest.add_output(candidates_out)
    if maps_dir is not None:
        for cmap, _ in result.disambiguation.values():
            manifest.add_output(cmap.save(maps_dir))
    _finish(manifest, out, manifest_path, gateway)
    typer.echo(render_stats(result.store.stats()))


# =============================================================================
# QUERIES
# =============================================================================


@app.command()
def stats(
    graph: GraphOpt,
    as_json: Annotated[bool, typer.Option("--json", help="Structured output.")] = False,
) -> None:
    """Entity and relation counts of a snapshot."""
    with _stage("stats"):
        snapshot = load_snapshot(graph)
    if as_json:
        _echo_json(snapshot.stats.to_dict())
    else:
        typer.echo(render_stats(snapshot.stats))


def _kind(name: str) -> EntityKind:
    try:
        return EntityKind.parse(name)
    except ValueError as e:
        raise typer.BadParameter(str(e)) from e


@app.command()
def query(
    graph: GraphOpt,
    kind: Annotated[str, typer.Option("--kind", help="Entity kind.")],
    surface: Annotated[str, typer.Option("--surface", help="Entity surface.")],
    target: Annotated[
        str | None, typer.Option("--target", help="Walk the canonical path to this kind.")
    ] = None,
) -> None:
    """Look up an entity and its neighbours, or walk a canonical path from it."""
    entity_kind = _kind(kind)
    target_kind = _kind(target) if target else None
    with _stage("query"):
        store = load_snapshot(graph).store
        ids = store.lookup_normalized(entity_kind, surface)
        results: list[dict[str, Any]] = []
        for entity_id in ids:
            if target_kind is None:
                entry = entity_view(store, entity_id)
            else:
                entry = store.entity(entity_id).to_dict()
                path = canonical_path(entity_kind, target_kind)
                entry["path"] = path.to_dict()
                entry["reached"] = [
                    store.entity(i).to_dict() for i in store.walk_path(entity_id, path)
                ]
            results.append(entry)
    _echo_json(results)
    if not results:
        typer.echo(f"error[query] no-matches: no {entity_kind.value} named {surface!r}", err=True)
        raise typer.Exit(1)


def _engine(settings: Settings, graph: Path) -> tuple[QAEngine, LLMGateway]:
    store = load_snapshot(graph).store
    gateway = build_gateway(settings)
    return QAEngine.from_settings(settings, store, gateway, build_embedder(settings)), gateway


@app.command()
def ask(
    question: Annotated[str, typer.Argument(help="Question to answer.")],
    graph: GraphOpt,
    trace: Annotated[Path | None, typer.Option("--trace", help="Write the answer trace.")] = None,
    backend: BackendOpt = None,
    fixtures: FixturesOpt = None,
    strict: StrictOpt = None,
    manifest_path: ManifestOpt = None,
) -> None:
    """Answer a question with the sub-graph community summary method."""
    settings = _settings(backend, fixtures, strict)
    with _stage("ask"):
        engine, gateway = _engine(settings, graph)
        answer = _run(engine.ask(question))
    typer.echo(answer.answer)
    if trace is not None:
        manifest = RunManifest.start("ask", settings, {"graph": graph, "question": question})
        manifest.add_input(graph)
        write_jsonl(trace, [answer.to_report()])
        manifest.add_output(trace)
        _finish(manifest, trace, manifest_path, gateway)


@app.command("eval")
def evaluate(
    dataset: Annotated[Path, typer.Option("--dataset", help="QA dataset.")],
    graph: Annotated[
        Path | None, typer.Option("--graph", help="Snapshot (kg system).", exists=True)
    ] = None,
    dataset_format: Annotated[
        DatasetFormatChoice, typer.Option("--format", help="Dataset format.")
    ] = DatasetFormatChoice.JSONL,
    system: Annotated[SystemChoice, typer.Option("--system", help="System.")] = SystemChoice.KG,
    records: Annotated[
        Path | None, typer.Option("--records", help="Write per-item records (JSON lines).")
    ] = None,
    backend: BackendOpt = None,
    fixtures: FixturesOpt = None,
    strict: StrictOpt = None,
    manifest_path: ManifestOpt = None,
) -> None:
    """Score a system's answers against reference answers."""
    settings = _settings(backend, fixtures, strict)
    with _stage("eval"):
        items = load_qa_dataset(dataset, dataset_format.value)
        embedder = build_embedder(settings)
        if system is SystemChoice.KG:
            if graph is None:
                raise typer.BadParameter("--graph is required for the kg system")
            engine, gateway = _engine(settings, graph)
            answer: Callable[[str], Any] = kg_system(engine)
        else:
            gateway = build_gateway(settings)
            answer = llm_only_system(gateway)
        report = run_eval(answer, items, build_scorer(settings, embedder), system.value)
    typer.echo(report.render_table())
    if records is not None:
        manifest = RunManifest.start("eval", settings, {"dataset": dataset, "system": system})
        manifest.add_input(dataset)
        if graph is not None:
            manifest.add_input(graph)
        write_jsonl(records, report.to_records())
        manifest.add_output(records)
        _finish(manifest, records, manifest_path, gateway)


# =============================================================================
# SERVICE
# =============================================================================


@app.command()
def serve(
    graph: GraphOpt,
    host: Annotated[str | None, typer.Option("--host", help="Bind address.")] = None,
    port: Annotated[int | None, typer.Option("--port", help="Bind port.")] = None,
    backend: BackendOpt = None,
    fixtures: FixturesOpt = None,
    strict: StrictOpt = None,
) -> None:
    """Run the read-only query service over a snapshot."""
    import uvicorn

    from app.main import create_app

    settings = _settings(
        backend,
        fixtures,
        strict,
        SNAPSHOT_PATH=str(graph),
        SERVICE_HOST=host,
        SERVICE_PORT=port,
    )
    uvicorn.run(create_app(settings), host=settings.SERVICE_HOST, port=settings.SERVICE_PORT)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
