from __future__ import annotations

import pytest

# (criterion name, passed) pairs recorded by the acceptance suite
ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, passed in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")

from layoutedit.config import AppConfig, ServerConfig
from layoutedit.geometry import BoundingBox, Canvas, Layout, SceneObject
from layoutedit.layout_text import OUTPUT_SENTINEL, serialize_layout
from layoutedit.llm import StubLlmClient, StubScript
from layoutedit.prompting import (
    default_corpus_path,
    default_generation_corpus_path,
    load_corpus,
    load_generation_corpus,
)
from layoutedit.service import EditingService, SessionStore


def completion_for(layout: Layout, qa: list[tuple[str, str]] | None = None) -> str:
    """A completion in the taught format: Q/A lines, sentinel, layout."""
    pairs = qa if qa is not None else [("What changes?", "The layout below.")]
    lines = [f"Q: {q}\nA: {a}" for q, a in pairs]
    lines.append(f"{OUTPUT_SENTINEL}\n{serialize_layout(layout)}")
    return "\n".join(lines)


@pytest.fixture(scope="session")
def shipped_corpus():
    return load_corpus(default_corpus_path())


@pytest.fixture(scope="session")
def shipped_generation_corpus():
    return load_generation_corpus(default_generation_corpus_path())


@pytest.fixture
def three_oranges() -> Layout:
    return Layout(
        Canvas(512, 512),
        "a painting of a wooden table",
        (
            SceneObject(0, "an orange", BoundingBox(150, 400, 100, 100)),
            SceneObject(1, "an orange", BoundingBox(270, 395, 100, 100)),
            SceneObject(2, "an orange", BoundingBox(60, 390, 100, 100)),
        ),
    )


@pytest.fixture
def service_factory(tmp_path, shipped_corpus, shipped_generation_corpus):
    """Build an EditingService backed by tmp storage and an optional stub."""

    def build(
        completions: list[str] | None = None,
        config: AppConfig | None = None,
        data_dir=None,
    ) -> EditingService:
        resolved_config = config or AppConfig(
            server=ServerConfig(data_dir=str(tmp_path / "sessions"))
        )
        store = SessionStore(data_dir or resolved_config.server.data_dir)
        llm = StubLlmClient(StubScript(tuple(completions))) if completions else None
        return EditingService(
            store, shipped_corpus, shipped_generation_corpus, llm, resolved_config
        )

    return build
