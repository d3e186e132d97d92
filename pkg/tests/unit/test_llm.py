"""Unit tests for the completion gateway and its backends."""

import asyncio

import pytest

from app.core.exceptions import (
    BackendUnreachableError,
    FixtureMissingError,
    LLMError,
    MissingSlotError,
    RateLimitError,
    UnknownTemplateError,
    UnparseableOutputError,
)
from app.reasoning import (
    CompletionRequest,
    LLMGateway,
    MockBackend,
    ScriptedBackend,
    complete_structured,
    prompt_catalog,
    prompt_digest,
    render_prompt,
)
from app.reasoning.llm import BackendReply
from app.reasoning.prompts import TEMPLATE_IDS
from app.utils import sha256_hex
from tests.conftest import mock_gateway, scripted_gateway


async def _no_sleep(_: float) -> None:
    return None


class TestPromptCatalog:
    """Tests for the template catalog."""

    def test_every_template_loads(self):
        """All shipped templates exist and declare slots."""
        for template_id in TEMPLATE_IDS:
            assert prompt_catalog.get(template_id).body

    def test_render_substitutes_slots(self):
        """Slots are replaced by their values."""
        prompt = render_prompt("unguided_answer", {"question": "What is SRL?"})
        assert "QUESTION: What is SRL?" in prompt

    def test_missing_slot(self):
        """Unbound slots are named in the error."""
        with pytest.raises(MissingSlotError) as exc_info:
            render_prompt("community_answer", {"question": "q"})
        assert exc_info.value.details["missing"] == ["elements", "introductions"]

    def test_unknown_template(self):
        """Unknown template ids are rejected."""
        with pytest.raises(UnknownTemplateError):
            render_prompt("summarize_everything", {})

    def test_prompt_digest(self):
        """The digest covers the template id, a newline and the prompt."""
        assert prompt_digest("intent", "abc") == sha256_hex("intent\nabc")


class TestMockBackend:
    """Tests for fixture-backed completions."""

    async def test_registered_fixture(self):
        """A registered prompt replays its text."""
        gateway, backend = mock_gateway()
        prompt = render_prompt("unguided_answer", {"question": "Q"})
        backend.register("unguided_answer", prompt, "A")
        result = await gateway.complete_text("unguided_answer", question="Q")
        assert result.text == "A"
        assert result.prompt_digest == prompt_digest("unguided_answer", prompt)
        assert result.backend_id == "mock"

    async def test_digest_file(self, tmp_path):
        """``<digest>.txt`` files in the fixture directory are served."""
        prompt = render_prompt("baseline_answer", {"question": "Q"})
        (tmp_path / f"{prompt_digest('baseline_answer', prompt)}.txt").write_text("from file")
        gateway = LLMGateway(MockBackend(fixtures_dir=tmp_path))
        result = await gateway.complete_text("baseline_answer", question="Q")
        assert result.text == "from file"

    async def test_routes_file(self, mock_dir):
        """routes.json rules match on template id and fragments."""
        gateway = LLMGateway(MockBackend(fixtures_dir=mock_dir))
        result = await gateway.complete_text("baseline_answer", question="anything")
        assert result.text == "Recurrent neural networks."

    async def test_strict_missing_fixture(self):
        """Strict mode raises with the digest."""
        gateway, _ = mock_gateway(strict=True)
        with pytest.raises(FixtureMissingError) as exc_info:
            await gateway.complete_text("baseline_answer", question="Q")
        assert len(exc_info.value.details["digest"]) == 64

    async def test_lenient_missing_fixture(self):
        """Lenient mode returns an empty completion."""
        gateway, _ = mock_gateway(strict=False)
        result = await gateway.complete_text("baseline_answer", question="Q")
        assert result.text == ""
        assert result.empty

    async def test_deterministic(self, mock_dir):
        """Same request, same text and digest."""
        gateway = LLMGateway(MockBackend(fixtures_dir=mock_dir))
        first = await gateway.complete_text("baseline_answer", question="Q")
        second = await gateway.complete_text("baseline_answer", question="Q")
        assert (first.text, first.prompt_digest) == (second.text, second.prompt_digest)


class TestRetries:
    """Tests for the retry policy."""

    async def test_retries_transport_errors(self):
        """Unreachable then success takes two attempts."""
        backend = ScriptedBackend([BackendUnreachableError("down"), "ok"])
        gateway = LLMGateway(backend, sleep=_no_sleep)
        result = await gateway.complete_text("baseline_answer", question="Q")
        assert result.text == "ok"
        assert result.attempts == 2
        assert len(gateway.ledger) == 1

    async def test_gives_up_after_three_attempts(self):
        """Rate limiting on every attempt surfaces after the budget."""
        backend = ScriptedBackend([RateLimitError("slow down")] * 3)
        gateway = LLMGateway(backend, sleep=_no_sleep)
        with pytest.raises(RateLimitError):
            await gateway.complete_text("baseline_answer", question="Q")
        assert len(backend.calls) == 3

    async def test_other_errors_are_not_retried(self):
        """A rejected request fails on the first attempt."""
        backend = ScriptedBackend([LLMError("bad request"), "never"])
        gateway = LLMGateway(backend, sleep=_no_sleep)
        with pytest.raises(LLMError):
            await gateway.complete_text("baseline_answer", question="Q")
        assert len(backend.calls) == 1

    async def test_backoff_delays(self):
        """Waits grow exponentially from one second."""
        delays: list[float] = []

        async def record(delay: float) -> None:
            delays.append(delay)

        backend = ScriptedBackend([BackendUnreachableError("x")] * 2 + ["ok"])
        gateway = LLMGateway(backend, sleep=record)
        await gateway.complete_text("baseline_answer", question="Q")
        assert delays == [1.0, 2.0]


class TestLedger:
    """Tests for the call ledger."""

    async def test_gathered_calls_recorded_in_submission_order(self):
        """Concurrent calls appear in the order they were dispatched."""
        gateway, _ = scripted_gateway(lambda template_id, prompt: prompt[-3:])
        questions = [f"q{i}" for i in range(6)]
        await asyncio.gather(
            *(gateway.complete_text("baseline_answer", question=q) for q in questions)
        )
        digests = [entry.prompt_digest for entry in gateway.ledger.entries()]
        expected = [
            prompt_digest("baseline_answer", render_prompt("baseline_answer", {"question": q}))
            for q in questions
        ]
        assert digests == expected

    async def test_recording_scopes_calls(self):
        """recording() captures only calls made inside it."""
        gateway, _ = scripted_gateway(lambda template_id, prompt: "x")
        await gateway.complete_text("baseline_answer", question="before")
        with gateway.recording() as scoped:
            await gateway.complete_text("baseline_answer", question="inside")
        assert len(scoped) == 1
        assert len(gateway.ledger) == 2
        assert gateway.ledger.summary() == {"baseline_answer": 2}

    async def test_parallelism_cap(self):
        """No more than the cap are in flight at once."""
        in_flight = 0
        peak = 0

        class SlowBackend:
            backend_id = "slow"

            async def complete(self, template_id, prompt, *, temperature, max_tokens):
                nonlocal in_flight, peak
                in_flight += 1
                peak = max(peak, in_flight)
                await asyncio.sleep(0.01)
                in_flight -= 1
                return BackendReply(text="done")

        gateway = LLMGateway(SlowBackend(), parallelism=2)
        await asyncio.gather(
            *(gateway.complete_text("baseline_answer", question=str(i)) for i in range(7))
        )
        assert peak == 2


class TestStructuredCompletion:
    """Tests for the bounded re-ask loop."""

    @staticmethod
    def _parse_int(text: str) -> int:
        return int(text.strip())

    async def test_reask_then_success(self):
        """A bad answer is re-asked with the reask template."""
        gateway, backend = scripted_gateway(["not a number", "42"])
        result = await complete_structured(
            gateway,
            CompletionRequest("baseline_answer", {"question": "How many?"}),
            self._parse_int,
        )
        assert result.value == 42
        assert [c.template_id for c in result.completions] == ["baseline_answer", "reask"]
        reask_prompt = backend.calls[1][1]
        assert "QUESTION: How many?" in reask_prompt
        assert "not a number" in reask_prompt

    async def test_reask_budget(self):
        """Two re-asks at most, then UnparseableOutputError."""
        gateway, backend = scripted_gateway(["a", "b", "c", "d"])
        with pytest.raises(UnparseableOutputError) as exc_info:
            await complete_structured(
                gateway,
                CompletionRequest("baseline_answer", {"question": "Q"}),
                self._parse_int,
                max_reasks=2,
            )
        assert len(backend.calls) == 3
        assert len(exc_info.value.details["digests"]) == 3
