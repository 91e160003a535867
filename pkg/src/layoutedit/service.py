"""Editing sessions: creation, instruction application, undo, rendering,
and file-per-session persistence.

Engine selection is "auto" by default: an instruction that matches the
deterministic command grammar runs on the interpreter; anything else goes
to the LLM with the in-context prompt. A completion that fails to parse or
fails a structural check earns exactly one corrective retry quoting the
problems; the best attempt is recorded either way, and the session's
current layout only advances when the record validates (the interpreter
path always does).
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from time import perf_counter
from typing import Any

from .config import AppConfig
from .errors import (
    ConfigError,
    LayoutEditError,
    LayoutInvariantError,
    NoLayoutFound,
    NotAnOracleCommand,
    UnknownSession,
    NothingToUndo,
)
from .geometry import Layout, clamp_layout
from .instruction import (
    MultimodalInstruction,
    instruction_from_jsonable,
    instruction_to_jsonable,
    serialize_instruction,
)
from .layout_text import parse_layout, serialize_layout
from .llm import LlmClient
from .oracle import apply_command, parse_command
from .prompting import (
    ExampleCorpus,
    GenerationExample,
    build_correction_turn,
    build_generation_prompt,
    build_prompt,
    load_corpus,
    load_generation_corpus,
    parse_completion,
)
from .rendering import (
    DiffusionHttpRenderer,
    RenderArtifact,
    RenderBackendConfig,
    render_mock,
)
from .validation import Check, ValidationReport, validate_edit, validate_structure

log = logging.getLogger(__name__)

ENGINE_AUTO = "auto"
ENGINE_ORACLE = "oracle"
ENGINE_LLM = "llm"

COMPLETION_EXCERPT_CHARS = 400


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class EditRecord:
    instruction: MultimodalInstruction
    engine: str
    before: Layout
    after: Layout
    validation: ValidationReport
    completion_text: str | None = None
    duration_ms: float = 0.0
    at: str = field(default_factory=_now)

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "instruction": instruction_to_jsonable(self.instruction),
            "engine": self.engine,
            "before": serialize_layout(self.before),
            "after": serialize_layout(self.after),
            "validation": self.validation.to_jsonable(),
            "completion_text": self.completion_text,
            "duration_ms": self.duration_ms,
            "at": self.at,
        }

    @classmethod
    def from_jsonable(cls, raw: dict[str, Any]) -> "EditRecord":
        return cls(
            instruction=instruction_from_jsonable(raw["instruction"]),
            engine=raw["engine"],
            before=parse_layout(raw["before"]),
            after=parse_layout(raw["after"]),
            validation=_report_from_jsonable(raw["validation"]),
            completion_text=raw.get("completion_text"),
            duration_ms=raw.get("duration_ms", 0.0),
            at=raw.get("at", ""),
        )

    def summary(self) -> dict[str, Any]:
        return {
            "instruction": serialize_instruction(self.instruction),
            "engine": self.engine,
            "ok": self.validation.ok,
            "duration_ms": self.duration_ms,
            "at": self.at,
        }


def _report_from_jsonable(raw: dict[str, Any]) -> ValidationReport:
    checks = tuple(
        Check(c["rule_id"], bool(c["passed"]), c.get("detail", "")) for c in raw["checks"]
    )
    return ValidationReport(checks)


class Session:
    """One editing session; all mutation happens under ``lock``."""

    def __init__(self, session_id: str, initial: Layout) -> None:
        self.session_id = session_id
        self.initial = initial
        self.current = initial
        self.history: list[EditRecord] = []
        self.archived: list[EditRecord] = []
        self.created_at = _now()
        self.updated_at = self.created_at
        self.lock = threading.Lock()

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "initial_layout": serialize_layout(self.initial),
            "current_layout": serialize_layout(self.current),
            "history": [record.to_jsonable() for record in self.history],
            "archived": [record.to_jsonable() for record in self.archived],
        }

    @classmethod
    def from_jsonable(cls, raw: dict[str, Any]) -> "Session":
        session = cls(raw["session_id"], parse_layout(raw["initial_layout"]))
        session.current = parse_layout(raw["current_layout"])
        session.history = [EditRecord.from_jsonable(r) for r in raw.get("history", [])]
        session.archived = [EditRecord.from_jsonable(r) for r in raw.get("archived", [])]
        session.created_at = raw.get("created_at", session.created_at)
        session.updated_at = raw.get("updated_at", session.updated_at)
        return session


class SessionStore:
    """File-per-session JSON persistence with atomic writes."""

    def __init__(self, data_dir: str | Path) -> None:
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.load_warnings: list[str] = []
        self._load_all()

    def _load_all(self) -> None:
        for path in sorted(self.data_dir.glob("*.json")):
            try:
                raw = json.loads(path.read_text(encoding="utf-8"))
                session = Session.from_jsonable(raw)
            except (LayoutEditError, ValueError, KeyError, TypeError) as exc:
                message = f"skipping corrupt session file {path.name}: {exc}"
                log.warning(message)
                self.load_warnings.append(message)
                continue
            self._sessions[session.session_id] = session

    def create(self, initial: Layout) -> Session:
        session = Session(uuid.uuid4().hex, initial)
        with self._lock:
            self._sessions[session.session_id] = session
        self.save(session)
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"unknown session {session_id!r}")
        return session

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._sessions)

    def save(self, session: Session) -> None:
        """Write via a temp file in the same directory, then rename: a
        reader (or a restart) never observes a half-written file."""
        path = self.data_dir / f"{session.session_id}.json"
        payload = json.dumps(session.to_jsonable(), indent=2)
        # .part suffix keeps half-written files out of the *.json restart glob
        fd, tmp_name = tempfile.mkstemp(dir=self.data_dir, prefix=".tmp-", suffix=".part")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp_name, path)
        except BaseException:
            try:
                os.unlink(tmp_name)
            except OSError:
                pass
            raise


class EditingService:
    """Session manager wiring engines, validation, rendering, persistence."""

    def __init__(
        self,
        store: SessionStore,
        corpus: ExampleCorpus | None,
        generation_examples: tuple[GenerationExample, ...],
        llm_client: LlmClient | None,
        config: AppConfig,
    ) -> None:
        self.store = store
        self.corpus = corpus
        self.generation_examples = generation_examples
        self.llm = llm_client
        self.config = config
        self._diffusion: DiffusionHttpRenderer | None = None
        if config.renderer.kind == "diffusion-http":
            self._diffusion = DiffusionHttpRenderer(config.renderer)

    @classmethod
    def from_config(cls, config: AppConfig, llm_client: LlmClient | None) -> "EditingService":
        corpus = load_corpus(config.prompting.resolved_corpus_path())
        generation = load_generation_corpus(config.prompting.resolved_generation_corpus_path())
        store = SessionStore(config.server.data_dir)
        return cls(store, corpus, generation, llm_client, config)

    # -- engines ---------------------------------------------------------

    def engines(self) -> list[str]:
        names = [ENGINE_ORACLE]
        if self.llm is not None:
            names.append(ENGINE_LLM)
        return names

    def renderers(self) -> list[str]:
        names = ["mock"]
        if self._diffusion is not None:
            names.append("diffusion")
        return names

    # -- session lifecycle -------------------------------------------------

    def create_session(
        self, *, prompt: str | None = None, layout: Layout | None = None
    ) -> Session:
        if (prompt is None) == (layout is None):
            raise ConfigError("provide exactly one of prompt or layout")
        if layout is not None:
            initial = self._admit_layout(layout, source="uploaded layout")
        else:
            if not prompt.strip():
                raise ConfigError("prompt must be non-empty")
            initial = self._generate_layout(prompt)
        return self.store.create(initial)

    def _generate_layout(self, prompt: str) -> Layout:
        if self.llm is None:
            raise ConfigError("no llm engine configured; upload a layout instead")
        bundle = build_generation_prompt(self.generation_examples, prompt)
        completion = self.llm.complete(bundle)
        _, layout = parse_completion(completion)
        return self._admit_layout(layout, source="generated layout")

    def _admit_layout(self, layout: Layout, *, source: str) -> Layout:
        clamp = self.config.validation.clamp_policy
        report = validate_structure(layout, clamp_policy=clamp)
        if not report.ok:
            raise LayoutInvariantError(
                f"{source} failed validation: {'; '.join(report.describe_failures())}",
                rule="structure",
            )
        if clamp and not all(layout.canvas.contains_box(o.box) for o in layout.objects):
            layout = clamp_layout(layout)
        return layout

    # -- instructions ------------------------------------------------------

    def apply_instruction(
        self,
        session_id: str,
        instruction: MultimodalInstruction,
        engine: str = ENGINE_AUTO,
    ) -> EditRecord:
        if engine not in (ENGINE_AUTO, ENGINE_ORACLE, ENGINE_LLM):
            raise ConfigError(f"unknown engine {engine!r}")
        session = self.store.get(session_id)
        with session.lock:
            before = session.current
            started = perf_counter()
            if engine == ENGINE_ORACLE:
                record = self._run_oracle(before, instruction)
            elif engine == ENGINE_LLM:
                record = self._run_llm(before, instruction)
            else:
                try:
                    record = self._run_oracle(before, instruction)
                except NotAnOracleCommand:
                    record = self._run_llm(before, instruction)
            record = _with_duration(record, (perf_counter() - started) * 1000.0)
            session.history.append(record)
            if record.engine == ENGINE_ORACLE or record.validation.ok:
                session.current = record.after
            session.updated_at = _now()
            self.store.save(session)
            return record

    def _run_oracle(self, before: Layout, instruction: MultimodalInstruction) -> EditRecord:
        command = parse_command(instruction)
        after = apply_command(before, command)
        report = self._full_report(before, after, instruction)
        return EditRecord(
            instruction=instruction,
            engine=ENGINE_ORACLE,
            before=before,
            after=after,
            validation=report,
        )

    def _run_llm(self, before: Layout, instruction: MultimodalInstruction) -> EditRecord:
        if self.llm is None:
            raise ConfigError("no llm engine configured for free-form instructions")
        if self.corpus is None:
            raise ConfigError("no example corpus loaded")
        bundle = build_prompt(self.corpus, before, instruction, self.config.prompting.k)

        first = self._attempt(before, instruction, bundle)
        if first.usable:
            return first.record  # type: ignore[return-value]

        # one corrective retry quoting what went wrong
        correction = build_correction_turn(first.problems)
        retry_bundle = bundle.extended(first.completion, correction)
        second = self._attempt(before, instruction, retry_bundle)
        best = _best_attempt(first, second)
        if best.record is None:
            raise best.error or NoLayoutFound("no layout found in completion")
        return best.record

    def _attempt(
        self, before: Layout, instruction: MultimodalInstruction, bundle
    ) -> "_Attempt":
        completion = self.llm.complete(bundle)  # type: ignore[union-attr]
        try:
            _, raw_after = parse_completion(completion)
        except LayoutEditError as exc:
            return _Attempt(completion=completion, error=exc, problems=[str(exc)])

        clamp = self.config.validation.clamp_policy
        structure = validate_structure(raw_after, clamp_policy=clamp)
        after = raw_after
        if structure.ok and clamp and not all(
            raw_after.canvas.contains_box(o.box) for o in raw_after.objects
        ):
            after = clamp_layout(raw_after)
        report = structure.merged_with(
            validate_edit(
                before,
                after,
                instruction,
                epsilon_fraction=self.config.validation.epsilon_fraction,
            )
        )
        record = EditRecord(
            instruction=instruction,
            engine=ENGINE_LLM,
            before=before,
            after=after,
            validation=report,
            completion_text=completion,
        )
        return _Attempt(
            completion=completion,
            record=record,
            structural_ok=structure.ok,
            problems=report.describe_failures(),
        )

    def _full_report(
        self, before: Layout, after: Layout, instruction: MultimodalInstruction
    ) -> ValidationReport:
        structure = validate_structure(
            after, clamp_policy=self.config.validation.clamp_policy
        )
        edit = validate_edit(
            before, after, instruction, epsilon_fraction=self.config.validation.epsilon_fraction
        )
        return structure.merged_with(edit)

    # -- undo / render -----------------------------------------------------

    def undo(self, session_id: str) -> Layout:
        session = self.store.get(session_id)
        with session.lock:
            if not session.history:
                raise NothingToUndo("nothing to undo")
            record = session.history.pop()
            session.archived.append(record)
            session.current = record.before
            session.updated_at = _now()
            self.store.save(session)
            return session.current

    def render_session(self, session_id: str, backend: str | None = None) -> RenderArtifact:
        session = self.store.get(session_id)
        with session.lock:
            layout = session.current
        name = backend or ("diffusion" if self._diffusion is not None else "mock")
        if name == "mock":
            return render_mock(layout)
        if name == "diffusion":
            if self._diffusion is None:
                raise ConfigError("diffusion renderer is not configured")
            return self._diffusion.render(layout)
        raise ConfigError(f"unknown render backend {name!r}")


@dataclass
class _Attempt:
    completion: str
    record: EditRecord | None = None
    error: LayoutEditError | None = None
    structural_ok: bool = False
    problems: list[str] = field(default_factory=list)

    @property
    def usable(self) -> bool:
        # a parsed, structurally sound attempt is final even if semantic
        # rules failed; semantic failures are reported, not retried
        return self.record is not None and self.structural_ok


def _best_attempt(first: _Attempt, second: _Attempt) -> _Attempt:
    def rank(attempt: _Attempt) -> tuple[int, int, int]:
        parsed = attempt.record is not None
        ok = parsed and attempt.record.validation.ok
        passed = (
            sum(c.passed for c in attempt.record.validation.checks) if parsed else 0
        )
        return (int(ok), int(parsed), passed)

    # ties go to the retry: it saw the corrective feedback
    return first if rank(first) > rank(second) else second


def _with_duration(record: EditRecord, duration_ms: float) -> EditRecord:
    return EditRecord(
        instruction=record.instruction,
        engine=record.engine,
        before=record.before,
        after=record.after,
        validation=record.validation,
        completion_text=record.completion_text,
        duration_ms=duration_ms,
        at=record.at,
    )
