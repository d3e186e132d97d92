"""Integration tests for the akg command line."""

import json

import pytest
from typer.testing import CliRunner

from app.cli import app
from app.utils import configure_logging

runner = CliRunner()

Q_DIRECT = "What methods are used for semantic role labeling?"
Q_COMMUNITY = "Which models were proposed for machine translation and semantic role labeling?"


@pytest.fixture(autouse=True)
def restore_logging():
    """The CLI points logging at the runner's stderr; reset it afterwards."""
    yield
    configure_logging(level="WARNING", json_output=False)


def invoke(*args: str):
    return runner.invoke(app, ["--log-level", "ERROR", *args])


def mock_args(mock_dir) -> list[str]:
    return ["--backend", "mock", "--fixtures", str(mock_dir), "--strict"]


class TestSchemaAndStats:
    """Tests for introspection commands."""

    def test_schema(self):
        """The schema document lists every kind and signature."""
        result = invoke("schema")
        assert result.exit_code == 0
        document = json.loads(result.stdout)
        assert len(document["entity_kinds"]) == 15
        assert document["signature_count"] == 29

    def test_stats_json(self, snapshot_path, golden):
        """Stats of the fixture snapshot."""
        result = invoke("stats", "--graph", str(snapshot_path), "--json")
        assert result.exit_code == 0
        assert json.loads(result.stdout)["total_triples"] == golden["total_triples"]

    def test_stats_table(self, snapshot_path):
        """The plain table has both sections."""
        result = invoke("stats", "--graph", str(snapshot_path))
        assert "ENTITIES" in result.stdout
        assert "RELATIONS" in result.stdout

    def test_corrupt_snapshot(self, tmp_path):
        """A damaged snapshot fails with its code on stderr."""
        path = tmp_path / "bad.snap"
        path.write_text("not a snapshot\n", encoding="utf-8")
        result = invoke("stats", "--graph", str(path))
        assert result.exit_code == 1
        assert "error[stats] corrupt-snapshot" in result.output


class TestQuery:
    """Tests for entity lookups."""

    def test_walk_to_target(self, snapshot_path):
        """A task reaches its paper's model along the canonical path."""
        result = invoke(
            "query",
            "--graph",
            str(snapshot_path),
            "--kind",
            "task",
            "--surface",
            "Semantic Role Labeling",
            "--target",
            "model",
        )
        assert result.exit_code == 0
        entries = json.loads(result.stdout)
        assert [e["surface"] for e in entries[0]["reached"]] == ["DeepAtt"]

    def test_neighbours(self, snapshot_path):
        """Without a target the entity and its edges are shown."""
        result = invoke(
            "query", "--graph", str(snapshot_path), "--kind", "Model", "--surface", "Transformer"
        )
        assert result.exit_code == 0
        assert json.loads(result.stdout)[0]["kind"] == "Model"

    def test_no_match(self, snapshot_path):
        """An unknown surface exits 1."""
        result = invoke(
            "query", "--graph", str(snapshot_path), "--kind", "Task", "--surface", "parsing"
        )
        assert result.exit_code == 1
        assert "no-matches" in result.output

    def test_unknown_kind(self, snapshot_path):
        """A bad kind name is a usage error."""
        result = invoke(
            "query", "--graph", str(snapshot_path), "--kind", "Algorithm", "--surface", "x"
        )
        assert result.exit_code == 2


class TestPipelineCommands:
    """Tests for artifact-writing commands."""

    def test_build_writes_snapshot_and_manifest(self, corpus_path, mock_dir, tmp_path, golden):
        """A full build leaves a snapshot and one manifest record."""
        out = tmp_path / "graph.snap"
        result = invoke(
            "build", "--corpus", str(corpus_path), "--out", str(out), *mock_args(mock_dir)
        )
        assert result.exit_code == 0, result.output
        assert out.is_file()
        assert "ENTITIES" in result.stdout
        records = (tmp_path / "akg-manifest.jsonl").read_text(encoding="utf-8").splitlines()
        manifest = json.loads(records[-1])
        assert manifest["command"] == "build"
        assert sum(manifest["ledger"].values()) == golden["completions"]
        assert str(corpus_path) in manifest["inputs"]
        assert manifest["outputs"] == [str(out)]

    def test_ingest_rejects_duplicates(self, corpus_path, tmp_path):
        """A repeated corpus id exits 1 after writing the report."""
        corpus = tmp_path / "dup.ndjson"
        text = corpus_path.read_text(encoding="utf-8")
        corpus.write_text(text + text.splitlines()[0] + "\n", encoding="utf-8")
        result = invoke("ingest", "--corpus", str(corpus), "--out", str(tmp_path / "out.ndjson"))
        assert result.exit_code == 1
        assert "duplicate-corpus-id" in result.output

    def test_extract_then_clean(self, corpus_path, mock_dir, tmp_path):
        """Candidate dumps chain into the clean stage and a snapshot."""
        candidates = tmp_path / "candidates.jsonl"
        result = invoke(
            "extract", "--corpus", str(corpus_path), "--out", str(candidates), *mock_args(mock_dir)
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["failures"] == []

        curated = tmp_path / "curated.jsonl"
        graph = tmp_path / "clean.snap"
        result = invoke(
            "clean",
            "--candidates",
            str(candidates),
            "--out",
            str(curated),
            "--graph-out",
            str(graph),
            *mock_args(mock_dir),
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["deleted"] == 0
        assert graph.is_file()
        commands = [
            json.loads(line)["command"]
            for line in (tmp_path / "akg-manifest.jsonl").read_text(encoding="utf-8").splitlines()
        ]
        assert commands == ["extract", "clean"]


class TestAskAndEval:
    """Tests for answering and evaluation."""

    def test_ask(self, snapshot_path, mock_dir, tmp_path):
        """The answer goes to stdout and the trace to a file."""
        trace = tmp_path / "trace.jsonl"
        result = invoke(
            "ask",
            Q_DIRECT,
            "--graph",
            str(snapshot_path),
            "--trace",
            str(trace),
            *mock_args(mock_dir),
        )
        assert result.exit_code == 0, result.output
        assert result.stdout.startswith("A deep attentional network")
        report = json.loads(trace.read_text(encoding="utf-8").splitlines()[0])
        assert report["mode"] == "direct"

    def test_ask_missing_fixture(self, snapshot_path, mock_dir):
        """A strict mock without a fixture fails the intent stage."""
        result = invoke(
            "ask", "What is a parser?", "--graph", str(snapshot_path), *mock_args(mock_dir)
        )
        assert result.exit_code == 1
        assert "error[intent] fixture-missing" in result.output

    def test_eval_kg(self, snapshot_path, mock_dir, fixtures_dir, tmp_path):
        """Every item is scored and records end with a summary."""
        records = tmp_path / "records.jsonl"
        result = invoke(
            "eval",
            "--dataset",
            str(fixtures_dir / "qa.jsonl"),
            "--graph",
            str(snapshot_path),
            "--records",
            str(records),
            *mock_args(mock_dir),
        )
        assert result.exit_code == 0, result.output
        assert "3/3 scored" in result.stdout
        lines = records.read_text(encoding="utf-8").splitlines()
        assert json.loads(lines[-1])["summary"]["system"] == "kg"

    def test_eval_llm_only_csv(self, mock_dir, fixtures_dir):
        """The baseline needs no graph."""
        result = invoke(
            "eval",
            "--dataset",
            str(fixtures_dir / "qa.csv"),
            "--format",
            "csv",
            "--system",
            "llm",
            *mock_args(mock_dir),
        )
        assert result.exit_code == 0, result.output
        assert "2/2 scored" in result.stdout

    def test_eval_bad_dataset(self, tmp_path, mock_dir):
        """A malformed dataset exits 1 with its code."""
        dataset = tmp_path / "bad.jsonl"
        dataset.write_text("{oops\n", encoding="utf-8")
        result = invoke("eval", "--dataset", str(dataset), "--system", "llm", *mock_args(mock_dir))
        assert result.exit_code == 1
        assert "error[eval] format-error" in result.output


class TestServiceParity:
    """The command line and the service answer alike over one snapshot."""

    @pytest.mark.parametrize("question", [Q_DIRECT, Q_COMMUNITY])
    def test_ask_matches_service(self, question, client, snapshot_path, mock_dir, tmp_path):
        """Same answer, mode, prompt digests and ledger from both surfaces."""
        trace_path = tmp_path / "trace.jsonl"
        result = invoke(
            "ask",
            question,
            "--graph",
            str(snapshot_path),
            "--trace",
            str(trace_path),
            *mock_args(mock_dir),
        )
        assert result.exit_code == 0, result.output
        response = client.post("/api/v1/ask", json={"question": question, "include_trace": True})
        assert response.status_code == 200
        data = response.json()
        assert result.stdout == data["answer"] + "\n"
        cli_trace = json.loads(trace_path.read_text(encoding="utf-8").splitlines()[0])
        for key in ("mode", "answer", "prompt_digests", "ledger"):
            assert cli_trace[key] == data["trace"][key], key
