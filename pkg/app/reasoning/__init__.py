"""Reasoning: the LLM gateway, prompt catalog and question answering chain."""

from app.reasoning.backends import MockBackend, OpenAIBackend, ScriptedBackend, build_gateway
from app.reasoning.llm import CompletionRequest, CompletionResult, LLMGateway, prompt_digest
from app.reasoning.prompts import prompt_catalog, render_prompt
from app.reasoning.structured import complete_structured

__all__ = [
    "MockBackend",
    "OpenAIBackend",
    "ScriptedBackend",
    "build_gateway",
    "CompletionRequest",
    "CompletionResult",
    "LLMGateway",
    "prompt_digest",
    "prompt_catalog",
    "render_prompt",
    "complete_structured",
]
