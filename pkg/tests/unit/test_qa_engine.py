"""Unit tests for the question answering chain."""

import asyncio

import pytest

from app.core.exceptions import StageError
from app.reasoning import render_prompt
from app.reasoning.chains import QAEngine
from app.reasoning.prompts import INSUFFICIENT_EVIDENCE_ANSWER
from tests.conftest import mock_gateway, scripted_gateway

Q_DIRECT = "What methods are used for semantic role labeling?"
Q_COMMUNITY = "Which models were proposed for machine translation and semantic role labeling?"
Q_NO_EVIDENCE = "How does quantum error correction work?"


@pytest.fixture
def engine(store, gateway) -> QAEngine:
    return QAEngine(store, gateway)


class TestModes:
    """Tests for direct, community and no-evidence answering."""

    async def test_direct_mode(self, engine):
        """One retrieved paper without links answers directly in two completions."""
        trace = await engine.ask(Q_DIRECT)
        assert trace.mode == "direct"
        assert trace.communities == []
        assert trace.answer.startswith("A deep attentional network")
        assert [e.template_id for e in trace.ledger] == ["intent", "direct_answer"]
        assert trace.completions == 2

    async def test_community_mode(self, engine):
        """Linked papers form a community; 1 + m + 1 completions."""
        trace = await engine.ask(Q_COMMUNITY)
        assert trace.mode == "community"
        assert len(trace.communities) == 1
        assert len(trace.communities[0]) == 2
        assert trace.community_answers[0].text.startswith("DeepAtt for semantic role labeling")
        assert trace.global_answer == trace.answer
        assert [e.template_id for e in trace.ledger] == [
            "intent",
            "community_answer",
            "global_answer",
        ]
        assert trace.completions == 1 + len(trace.communities) + 1

    async def test_unguided_when_nothing_matches(self, engine):
        """No matching entity answers unguided and says so."""
        trace = await engine.ask(Q_NO_EVIDENCE)
        assert trace.no_evidence
        assert trace.unguided
        assert trace.mode == "direct"
        assert trace.bundle is None
        assert trace.completions == 2

    async def test_insufficient_evidence_answer(self, store, gateway):
        """With unguided answering off, the fixed answer costs no extra call."""
        trace = await QAEngine(store, gateway, unguided_fallback=False).ask(Q_NO_EVIDENCE)
        assert trace.answer == INSUFFICIENT_EVIDENCE_ANSWER
        assert not trace.unguided
        assert trace.completions == 1

    async def test_empty_bundle_is_no_evidence(self, store):
        """Matches whose titles lack the target kind count as no evidence."""
        gateway, backend = mock_gateway()
        question = "Which datasets are used for semantic role labeling?"
        backend.add_route(
            "intent", "Entities: semantic role labeling (task)\nQuestion: dataset", question
        )
        backend.add_route("unguided_answer", "Unknown.", question)
        trace = await QAEngine(store, gateway).ask(question)
        assert trace.matches is not None
        assert trace.no_evidence
        assert trace.answer == "Unknown."


class TestPrompts:
    """Tests for what the answering prompts contain."""

    async def test_community_prompt_lists_elements_and_glossary(self, engine):
        """The community prompt carries both papers' models and the glossary."""
        trace = await engine.ask(Q_COMMUNITY)
        bundle = trace.bundle
        elements, _ = bundle.render_elements(trace.communities[0].title_ids, 8000)
        prompt = render_prompt(
            "community_answer",
            {
                "question": Q_COMMUNITY,
                "elements": elements,
                "introductions": bundle.render_introductions(),
            },
        )
        assert "model: DeepAtt" in prompt
        assert "model: Transformer" in prompt
        assert "title: Title of the paper." in prompt
        assert trace.prompt_digests["community_answer"] == [
            trace.community_answers[0].prompt_digest
        ]

    async def test_prompt_composition_order(self, store):
        """Question, elements, glossary, instructions; partial answers before the question."""

        def respond(template_id: str, prompt: str) -> str:
            if template_id == "intent":
                return (
                    "Entities: machine translation (task), semantic role labeling (task)\n"
                    "Question: models"
                )
            return "partial answer" if template_id == "community_answer" else "final answer"

        gateway, backend = scripted_gateway(respond)
        trace = await QAEngine(store, gateway).ask(Q_COMMUNITY)
        assert trace.answer == "final answer"
        prompts = dict(backend.calls)
        community = prompts["community_answer"]
        positions = [
            community.index(marker)
            for marker in (
                f"QUESTION: {Q_COMMUNITY}",
                "model: DeepAtt",
                "=== ELEMENT INTRODUCTIONS ===",
                "INSTRUCTIONS:",
            )
        ]
        assert positions == sorted(positions)
        final = prompts["global_answer"]
        assert final.index("partial answer") < final.index(f"QUESTION: {Q_COMMUNITY}")

    async def test_truncation_is_flagged(self, store, gateway):
        """A tiny context budget marks the trace truncated."""
        trace = await QAEngine(store, gateway, context_chars=40).ask(Q_DIRECT)
        assert trace.truncated


class TestFailures:
    """Tests for stage errors and concurrency."""

    async def test_intent_failure_carries_stage(self, store):
        """A missing intent fixture fails the intent stage."""
        gateway, _ = mock_gateway(strict=True)
        with pytest.raises(StageError) as exc_info:
            await QAEngine(store, gateway).ask(Q_DIRECT)
        error = exc_info.value
        assert error.stage == "intent"
        assert error.code == "fixture-missing"
        assert error.to_dict()["stage"] == "intent"
        assert error.partial.intent is None

    async def test_answer_failure_keeps_partial_trace(self, store):
        """A failing answer stage keeps the identified intent."""
        gateway, backend = mock_gateway(strict=True)
        backend.add_route(
            "intent", "Entities: semantic role labeling (task)\nQuestion: method", Q_DIRECT
        )
        with pytest.raises(StageError) as exc_info:
            await QAEngine(store, gateway).ask(Q_DIRECT)
        error = exc_info.value
        assert error.stage == "direct_answer"
        assert error.partial.intent.target_kind.value == "Method"
        assert error.partial.bundle is not None
        assert [e.template_id for e in error.partial.ledger] == ["intent", "direct_answer"]

    async def test_empty_question(self, engine):
        """Blank questions fail at the intent stage without a call."""
        with pytest.raises(StageError) as exc_info:
            await engine.ask("  ")
        assert exc_info.value.code == "empty-question"
        assert exc_info.value.partial.ledger == []

    async def test_concurrent_asks_keep_separate_ledgers(self, engine):
        """Each trace records only its own completions."""
        direct, community = await asyncio.gather(engine.ask(Q_DIRECT), engine.ask(Q_COMMUNITY))
        assert direct.completions == 2
        assert community.completions == 3

    async def test_store_is_not_modified(self, engine, store):
        """Answering leaves the graph untouched."""
        before = store.stats().to_dict()
        await engine.ask(Q_COMMUNITY)
        assert store.stats().to_dict() == before
        assert store.frozen
