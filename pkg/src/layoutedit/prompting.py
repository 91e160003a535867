"""In-context prompt assembly and completion parsing.

A prompt is: a fixed system preamble, then k worked examples (user turn
with layout + instruction, assistant turn with Q/A reasoning lines and the
``OUTPUT LAYOUT:`` sentinel followed by the transformed layout), then the
query as a final user turn. The framing strings below are part of the
behavior contract; changing them invalidates shipped corpora.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import CorpusError, LayoutEditError
from .geometry import Layout
from .instruction import MultimodalInstruction, serialize_instruction
from .layout_text import (
    OUTPUT_SENTINEL,
    extract_layout_block,
    layout_from_jsonable,
    parse_layout,
    serialize_layout,
)

INPUT_LAYOUT_HEADER = "INPUT LAYOUT:"
INSTRUCTION_HEADER = "INSTRUCTION:"
PROMPT_HEADER = "PROMPT:"

EDIT_SYSTEM_TEXT = """\
You edit images represented as object layouts. A layout is a JSON object with
keys "canvas" ({"width", "height"} in pixels), "background" (a scene caption),
and "objects" (an array of {"id", "caption", "box"} entries, where "box" is
{"x", "y", "width", "height"} with the origin at the top-left).

Instructions are natural language and may embed drawn geometry as literals:
points {x: X, y: Y}, boxes {x: X, y: Y, width: W, height: H}, and arrows
{from: {x, y}, to: {x, y}}. A box around an object selects it; a point or box
elsewhere marks a destination; an arrow means "move the object at 'from'
so it is centered at 'to'".

Answer each request with brief reasoning as alternating "Q:" and "A:" lines,
then the line "OUTPUT LAYOUT:" followed by the complete transformed layout as
JSON. Keep ids stable, never reuse the id of an existing object for a new one,
and leave every object you were not asked to change exactly as it was."""

GENERATION_SYSTEM_TEXT = """\
You invent image layouts from scene descriptions. A layout is a JSON object
with keys "canvas" ({"width", "height"} in pixels), "background" (a scene
caption), and "objects" (an array of {"id", "caption", "box"} entries, where
"box" is {"x", "y", "width", "height"} with the origin at the top-left).

Given a scene prompt, answer with brief reasoning as alternating "Q:" and
"A:" lines, then the line "OUTPUT LAYOUT:" followed by a plausible layout as
JSON on a 512x512 canvas: number objects from 0, give each a short caption,
and keep every box inside the canvas."""

CORRECTION_TEMPLATE = """\
That output was not usable: {problems}.
Reply again with "Q:"/"A:" reasoning lines, then the line "OUTPUT LAYOUT:"
followed by the complete corrected layout JSON."""


@dataclass(frozen=True)
class InContextExample:
    layout_text: str
    instruction_text: str
    chain_of_thought: tuple[tuple[str, str], ...]
    output_layout_text: str

    def __post_init__(self) -> None:
        if not self.chain_of_thought:
            raise CorpusError("example chain of thought must be non-empty")
        parse_layout(self.layout_text)
        parse_layout(self.output_layout_text)

    def assistant_text(self) -> str:
        return render_assistant_turn(self.chain_of_thought, self.output_layout_text)

    def user_text(self) -> str:
        return render_edit_query(self.layout_text, self.instruction_text)


@dataclass(frozen=True)
class GenerationExample:
    """Scene-prompt to layout example for the text-to-layout corpus section."""

    prompt: str
    layout_text: str
    chain_of_thought: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if not self.prompt.strip():
            raise CorpusError("generation example prompt must be non-empty")
        parse_layout(self.layout_text)

    def assistant_text(self) -> str:
        return render_assistant_turn(self.chain_of_thought, self.layout_text)


MIN_CORPUS_SIZE = 10
MAX_CORPUS_SIZE = 30


@dataclass(frozen=True)
class ExampleCorpus:
    examples: tuple[InContextExample, ...]
    version: str = "unversioned"

    def __post_init__(self) -> None:
        if len(self.examples) < MIN_CORPUS_SIZE:
            raise CorpusError(
                f"corpus too small: {len(self.examples)} examples, need >= {MIN_CORPUS_SIZE}"
            )
        if len(self.examples) > MAX_CORPUS_SIZE:
            raise CorpusError(
                f"corpus too large: {len(self.examples)} examples, max {MAX_CORPUS_SIZE}"
            )

    def default_k(self) -> int:
        return min(15, len(self.examples))


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    turns: tuple[tuple[str, str], ...]  # (role, content)

    def __post_init__(self) -> None:
        roles = [role for role, _ in self.turns]
        if not roles or roles[-1] != "user":
            raise CorpusError("prompt must end with a user turn")
        for i, role in enumerate(roles):
            expected = "user" if i % 2 == 0 else "assistant"
            if role != expected:
                raise CorpusError("prompt turns must alternate user/assistant")

    def to_messages(self) -> list[dict[str, str]]:
        messages = [{"role": "system", "content": self.system_text}]
        messages.extend({"role": role, "content": content} for role, content in self.turns)
        return messages

    def total_chars(self) -> int:
        return len(self.system_text) + sum(len(content) for _, content in self.turns)

    def extended(self, assistant_text: str, user_text: str) -> "PromptBundle":
        return PromptBundle(
            self.system_text,
            self.turns + (("assistant", assistant_text), ("user", user_text)),
        )


def render_edit_query(layout_text: str, instruction_text: str) -> str:
    return f"{INPUT_LAYOUT_HEADER}\n{layout_text}\n{INSTRUCTION_HEADER}\n{instruction_text}"


def render_generation_query(prompt: str) -> str:
    return f"{PROMPT_HEADER}\n{prompt}"


def render_assistant_turn(
    chain_of_thought: tuple[tuple[str, str], ...], output_layout_text: str
) -> str:
    lines = [f"Q: {q}\nA: {a}" for q, a in chain_of_thought]
    lines.append(f"{OUTPUT_SENTINEL}\n{output_layout_text}")
    return "\n".join(lines)


def _canonical_layout_text(value: Any, where: str) -> str:
    """Corpus layouts may be embedded JSON objects or canonical strings;
    both are pushed through the strict parser and re-serialized."""
    try:
        if isinstance(value, str):
            return serialize_layout(parse_layout(value))
        return serialize_layout(layout_from_jsonable(value))
    except LayoutEditError as exc:
        raise CorpusError(f"{where}: {exc}") from exc


def _chain_from_jsonable(value: Any, where: str) -> tuple[tuple[str, str], ...]:
    if not isinstance(value, list):
        raise CorpusError(f"{where}: chain_of_thought must be an array")
    pairs: list[tuple[str, str]] = []
    for item in value:
        if (
            not isinstance(item, dict)
            or not isinstance(item.get("question"), str)
            or not isinstance(item.get("answer"), str)
        ):
            raise CorpusError(f"{where}: each chain entry needs 'question' and 'answer' strings")
        pairs.append((item["question"], item["answer"]))
    return tuple(pairs)


def load_corpus(path: str | Path) -> ExampleCorpus:
    """Load and validate the edit-example corpus file.

    Accepts either a bare JSON array of examples or an object with
    ``version`` and ``examples`` keys.
    """
    raw = _read_json(path)
    version = "unversioned"
    if isinstance(raw, dict):
        version = str(raw.get("version", version))
        raw = raw.get("examples")
    if not isinstance(raw, list):
        raise CorpusError(f"{path}: corpus must be a JSON array of examples")
    examples: list[InContextExample] = []
    for index, entry in enumerate(raw):
        where = f"example {index}"
        if not isinstance(entry, dict):
            raise CorpusError(f"{where}: must be an object")
        instruction = entry.get("instruction")
        if not isinstance(instruction, str) or not instruction.strip():
            raise CorpusError(f"{where}: 'instruction' must be a non-empty string")
        examples.append(
            InContextExample(
                layout_text=_canonical_layout_text(entry.get("layout"), f"{where} layout"),
                instruction_text=instruction,
                chain_of_thought=_chain_from_jsonable(entry.get("chain_of_thought"), where),
                output_layout_text=_canonical_layout_text(
                    entry.get("output_layout"), f"{where} output layout"
                ),
            )
        )
    return ExampleCorpus(tuple(examples), version=version)


def load_generation_corpus(path: str | Path) -> tuple[GenerationExample, ...]:
    raw = _read_json(path)
    if isinstance(raw, dict):
        raw = raw.get("examples")
    if not isinstance(raw, list) or not raw:
        raise CorpusError(f"{path}: generation corpus must be a non-empty JSON array")
    examples: list[GenerationExample] = []
    for index, entry in enumerate(raw):
        where = f"generation example {index}"
        if not isinstance(entry, dict) or not isinstance(entry.get("prompt"), str):
            raise CorpusError(f"{where}: must be an object with a 'prompt' string")
        examples.append(
            GenerationExample(
                prompt=entry["prompt"],
                layout_text=_canonical_layout_text(entry.get("layout"), f"{where} layout"),
                chain_of_thought=_chain_from_jsonable(
                    entry.get("chain_of_thought", []), where
                ),
            )
        )
    return tuple(examples)


def _read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus file {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"corpus file {path} is not valid JSON: {exc}") from exc


def default_corpus_path() -> Path:
    return Path(str(resources.files("layoutedit").joinpath("data/corpus.json")))


def default_generation_corpus_path() -> Path:
    return Path(str(resources.files("layoutedit").joinpath("data/generation_corpus.json")))


def build_prompt(
    corpus: ExampleCorpus,
    layout: Layout,
    instruction: MultimodalInstruction,
    k: int | None = None,
) -> PromptBundle:
    """Assemble the edit prompt with the first k corpus examples."""
    if k is None:
        k = corpus.default_k()
    if not 1 <= k <= len(corpus.examples):
        raise CorpusError(f"k={k} out of range 1..{len(corpus.examples)}")
    turns: list[tuple[str, str]] = []
    for example in corpus.examples[:k]:
        turns.append(("user", example.user_text()))
        turns.append(("assistant", example.assistant_text()))
    query = render_edit_query(serialize_layout(layout), serialize_instruction(instruction))
    turns.append(("user", query))
    return PromptBundle(EDIT_SYSTEM_TEXT, tuple(turns))


def build_generation_prompt(
    examples: tuple[GenerationExample, ...], prompt: str
) -> PromptBundle:
    """Assemble the text-to-layout prompt from the generation corpus section."""
    if not examples:
        raise CorpusError("generation corpus is empty")
    turns: list[tuple[str, str]] = []
    for example in examples:
        turns.append(("user", render_generation_query(example.prompt)))
        turns.append(("assistant", example.assistant_text()))
    turns.append(("user", render_generation_query(prompt)))
    return PromptBundle(GENERATION_SYSTEM_TEXT, tuple(turns))


def build_correction_turn(problems: list[str]) -> str:
    return CORRECTION_TEMPLATE.format(problems="; ".join(problems))


def parse_completion(text: str) -> tuple[list[tuple[str, str]], Layout]:
    """Split a completion into (chain-of-thought pairs, parsed layout).

    Q/A pairs follow the ``Q:``/``A:`` line convention and may be absent;
    layout extraction and parse errors propagate (they drive the service's
    retry policy).
    """
    block = extract_layout_block(text)
    head_end = text.rfind(block)
    head = text[:head_end] if head_end > 0 else ""
    return _parse_chain(head), parse_layout(block)


def _parse_chain(head: str) -> list[tuple[str, str]]:
    pairs: list[tuple[str, str]] = []
    question: str | None = None
    answer: str | None = None

    def flush() -> None:
        nonlocal question, answer
        if question is not None and answer is not None:
            pairs.append((question, answer))
        question = None
        answer = None

    for line in head.split("\n"):
        stripped = line.strip()
        if stripped.startswith(OUTPUT_SENTINEL):
            break
        if stripped.startswith("Q:"):
            flush()
            question = stripped[2:].strip()
        elif stripped.startswith("A:"):
            if question is not None:
                answer = stripped[2:].strip()
        elif stripped:
            if answer is not None:
                answer += " " + stripped
            elif question is not None:
                question += " " + stripped
    flush()
    return pairs
