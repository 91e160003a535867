from __future__ import annotations

import threading
from dataclasses import replace

import pytest

from layoutedit.config import AppConfig, ServerConfig, ValidationConfig
from layoutedit.errors import (
    ConfigError,
    LayoutInvariantError,
    NoLayoutFound,
    NothingToUndo,
    SelectionError,
    UnknownSession,
)
from layoutedit.geometry import BoundingBox, Canvas, Layout, SceneObject
from layoutedit.instruction import parse_inline_instruction
from layoutedit.layout_text import serialize_layout
from layoutedit.service import SessionStore

from conftest import completion_for

MOVE_TEXT = "move {x: 150, y: 400, width: 100, height: 100} to {x: 144, y: 132}"
FREE_FORM = "make the orange in {x: 145, y: 395, width: 110, height: 110} rotten"


class TestCreateSession:
    def test_from_layout(self, service_factory, three_oranges):
        service = service_factory()
        session = service.create_session(layout=three_oranges)
        assert service.store.get(session.session_id).current == three_oranges

    def test_from_prompt_with_stub(self, service_factory, three_oranges):
        service = service_factory(completions=[completion_for(three_oranges)])
        session = service.create_session(prompt="a table with three oranges")
        assert len(session.current.objects) == 3

    def test_empty_prompt_rejected(self, service_factory):
        service = service_factory(completions=["irrelevant"])
        with pytest.raises(ConfigError):
            service.create_session(prompt="   ")

    def test_prompt_without_llm_rejected(self, service_factory):
        service = service_factory()
        with pytest.raises(ConfigError):
            service.create_session(prompt="a beach")

    def test_both_args_rejected(self, service_factory, three_oranges):
        service = service_factory()
        with pytest.raises(ConfigError):
            service.create_session(prompt="x", layout=three_oranges)

    def test_invalid_uploaded_layout_rejected(self, service_factory):
        bad = Layout(
            Canvas(512, 512),
            "bg",
            (
                SceneObject(0, "a", BoundingBox(0, 0, 5, 5)),
                SceneObject(0, "b", BoundingBox(20, 20, 5, 5)),
            ),
        )
        with pytest.raises(LayoutInvariantError):
            service_factory().create_session(layout=bad)

    def test_clamp_policy_admits_and_clamps(self, service_factory, tmp_path):
        config = AppConfig(
            server=ServerConfig(data_dir=str(tmp_path / "s2")),
            validation=ValidationConfig(clamp_policy=True),
        )
        spilling = Layout(
            Canvas(512, 512), "bg", (SceneObject(0, "a", BoundingBox(500, 500, 50, 50)),)
        )
        service = service_factory(config=config)
        session = service.create_session(layout=spilling)
        assert session.current.objects[0].box == BoundingBox(462, 462, 50, 50)


class TestOracleEngine:
    def test_paper_move(self, service_factory, three_oranges):
        service = service_factory()
        session = service.create_session(layout=three_oranges)
        record = service.apply_instruction(
            session.session_id, parse_inline_instruction(MOVE_TEXT)
        )
        assert record.engine == "oracle"
        assert record.validation.ok
        assert record.after.objects[0].box == BoundingBox(94, 82, 100, 100)
        assert session.current == record.after

    def test_selection_failure_propagates(self, service_factory, three_oranges):
        service = service_factory()
        session = service.create_session(layout=three_oranges)
        miss = "move {x: 10, y: 10, width: 5, height: 5} to {x: 99, y: 99}"
        with pytest.raises(SelectionError):
            service.apply_instruction(session.session_id, parse_inline_instruction(miss))
        assert session.current == three_oranges
        assert session.history == []

    def test_unknown_session(self, service_factory):
        with pytest.raises(UnknownSession):
            service_factory().apply_instruction(
                "nope", parse_inline_instruction(MOVE_TEXT)
            )

    def test_forced_oracle_rejects_free_form(self, service_factory, three_oranges):
        service = service_factory()
        session = service.create_session(layout=three_oranges)
        from layoutedit.errors import NotAnOracleCommand

        with pytest.raises(NotAnOracleCommand):
            service.apply_instruction(
                session.session_id,
                parse_inline_instruction("make it pretty"),
                engine="oracle",
            )


class TestLlmEngine:
    def test_free_form_recaption_flow(self, service_factory, three_oranges):
        edited = replace(
            three_oranges,
            objects=(
                replace(three_oranges.objects[0], caption="a rotten orange"),
            )
            + three_oranges.objects[1:],
        )
        service = service_factory(completions=[completion_for(edited)])
        session = service.create_session(layout=three_oranges)
        record = service.apply_instruction(
            session.session_id, parse_inline_instruction(FREE_FORM)
        )
        assert record.engine == "llm"
        assert record.validation.ok, record.validation.describe_failures()
        assert session.current.objects[0].caption == "a rotten orange"
        assert record.completion_text is not None

    def test_free_form_without_llm_is_config_error(self, service_factory, three_oranges):
        service = service_factory()
        session = service.create_session(layout=three_oranges)
        with pytest.raises(ConfigError):
            service.apply_instruction(session.session_id, parse_inline_instruction(FREE_FORM))

    def test_prose_twice_raises_after_one_retry(self, service_factory, three_oranges):
        service = service_factory(completions=["jibber", "jabber"])
        session = service.create_session(layout=three_oranges)
        with pytest.raises(NoLayoutFound):
            service.apply_instruction(session.session_id, parse_inline_instruction(FREE_FORM))
        assert service.llm.consumed == 2
        # the retry carried the corrective turn
        retry_prompt = service.llm.calls[1]
        assert "not usable" in retry_prompt.turns[-1][1]
        assert session.current == three_oranges
        assert session.history == []

    def test_structural_failure_retried_then_good(self, service_factory, three_oranges):
        broken = replace(
            three_oranges,
            objects=three_oranges.objects
            + (SceneObject(0, "a duplicate id", BoundingBox(5, 5, 10, 10)),),
        )
        fixed = replace(
            three_oranges,
            objects=(
                replace(three_oranges.objects[0], caption="a rotten orange"),
            )
            + three_oranges.objects[1:],
        )
        service = service_factory(
            completions=[completion_for(broken), completion_for(fixed)]
        )
        session = service.create_session(layout=three_oranges)
        record = service.apply_instruction(
            session.session_id, parse_inline_instruction(FREE_FORM)
        )
        assert service.llm.consumed == 2
        assert record.validation.ok
        assert session.current == fixed

    def test_frame_violation_recorded_not_retried(self, service_factory, three_oranges):
        # mutates object 2, which the instruction's box does not select
        sneaky = replace(
            three_oranges,
            objects=three_oranges.objects[:2]
            + (replace(three_oranges.objects[2], box=BoundingBox(0, 0, 30, 30)),),
        )
        service = service_factory(completions=[completion_for(sneaky)])
        session = service.create_session(layout=three_oranges)
        record = service.apply_instruction(
            session.session_id, parse_inline_instruction(FREE_FORM)
        )
        assert service.llm.consumed == 1  # structural rules passed: no retry
        assert not record.validation.ok
        assert "frame" in record.validation.failed_rules()
        # rejected output does not advance the session
        assert session.current == three_oranges
        assert len(session.history) == 1

    def test_engine_override_llm_skips_oracle(self, service_factory, three_oranges):
        moved = replace(
            three_oranges,
            objects=(
                replace(three_oranges.objects[0], box=BoundingBox(94, 82, 100, 100)),
            )
            + three_oranges.objects[1:],
        )
        service = service_factory(completions=[completion_for(moved)])
        session = service.create_session(layout=three_oranges)
        record = service.apply_instruction(
            session.session_id, parse_inline_instruction(MOVE_TEXT), engine="llm"
        )
        assert record.engine == "llm"
        assert record.validation.ok


class TestUndo:
    def test_undo_restores_initial(self, service_factory, three_oranges):
        service = service_factory()
        session = service.create_session(layout=three_oranges)
        service.apply_instruction(session.session_id, parse_inline_instruction(MOVE_TEXT))
        assert session.current != three_oranges
        restored = service.undo(session.session_id)
        assert restored == three_oranges
        assert session.history == []
        assert len(session.archived) == 1

    def test_double_undo_errors(self, service_factory, three_oranges):
        service = service_factory()
        session = service.create_session(layout=three_oranges)
        service.apply_instruction(session.session_id, parse_inline_instruction(MOVE_TEXT))
        service.undo(session.session_id)
        with pytest.raises(NothingToUndo):
            service.undo(session.session_id)

    def test_undo_then_reapply_is_deterministic(self, service_factory, three_oranges):
        service = service_factory()
        session = service.create_session(layout=three_oranges)
        instruction = parse_inline_instruction(MOVE_TEXT)
        first = service.apply_instruction(session.session_id, instruction).after
        service.undo(session.session_id)
        second = service.apply_instruction(session.session_id, instruction).after
        assert first == second


class TestRender:
    def test_mock_render_of_session(self, service_factory, three_oranges):
        service = service_factory()
        session = service.create_session(layout=three_oranges)
        artifact = service.render_session(session.session_id)
        assert artifact.media_type == "image/svg+xml"
        assert artifact.renderer_id == "mock"

    def test_unknown_backend(self, service_factory, three_oranges):
        service = service_factory()
        session = service.create_session(layout=three_oranges)
        with pytest.raises(ConfigError):
            service.render_session(session.session_id, backend="watercolor")

    def test_diffusion_not_configured(self, service_factory, three_oranges):
        service = service_factory()
        session = service.create_session(layout=three_oranges)
        with pytest.raises(ConfigError):
            service.render_session(session.session_id, backend="diffusion")


class TestPersistence:
    def test_write_restart_read_equality(self, service_factory, three_oranges, tmp_path):
        data_dir = tmp_path / "persist"
        service = service_factory(data_dir=str(data_dir))
        session = service.create_session(layout=three_oranges)
        service.apply_instruction(session.session_id, parse_inline_instruction(MOVE_TEXT))

        reloaded_store = SessionStore(data_dir)
        reloaded = reloaded_store.get(session.session_id)
        assert reloaded.current == session.current
        assert reloaded.initial == three_oranges
        assert len(reloaded.history) == 1
        assert reloaded.history[0].engine == "oracle"
        assert serialize_layout(reloaded.history[0].after) == serialize_layout(session.current)

    def test_corrupt_file_skipped_others_load(self, service_factory, three_oranges, tmp_path):
        data_dir = tmp_path / "mixed"
        service = service_factory(data_dir=str(data_dir))
        session = service.create_session(layout=three_oranges)
        (data_dir / "junk.json").write_text("{ not json", encoding="utf-8")

        store = SessionStore(data_dir)
        assert store.ids() == [session.session_id]
        assert any("junk.json" in w for w in store.load_warnings)

    def test_missing_data_dir_created(self, tmp_path):
        target = tmp_path / "brand" / "new" / "dir"
        SessionStore(target)
        assert target.is_dir()


class TestConcurrency:
    def test_concurrent_edits_serialize(self, service_factory, three_oranges):
        service = service_factory()
        session = service.create_session(layout=three_oranges)
        instruction = parse_inline_instruction(
            "move {x: 150, y: 400, width: 100, height: 100} to {x: 256, y: 256}"
        )
        errors: list[Exception] = []

        def work():
            try:
                service.apply_instruction(session.session_id, instruction)
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=work) for _ in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert len(session.history) == 2
        assert session.current == session.history[-1].after


class TestStubDeterminism:
    def test_full_pipeline_is_bit_reproducible(self, service_factory, three_oranges, tmp_path):
        from layoutedit.rendering import render_mock

        edited = replace(
            three_oranges,
            objects=(replace(three_oranges.objects[0], caption="a rotten orange"),)
            + three_oranges.objects[1:],
        )
        script = [completion_for(three_oranges), completion_for(edited)]

        def run(tag: str) -> bytes:
            service = service_factory(
                completions=list(script), data_dir=str(tmp_path / tag)
            )
            session = service.create_session(prompt="a table with three oranges")
            service.apply_instruction(
                session.session_id, parse_inline_instruction(FREE_FORM)
            )
            return render_mock(session.current).data

        assert run("a") == run("b")


class TestHistoryReplay:
    def test_oracle_history_replays_to_current(self, service_factory, three_oranges):
        from layoutedit.oracle import apply_command, parse_command

        service = service_factory()
        session = service.create_session(layout=three_oranges)
        for text in (
            MOVE_TEXT,
            "add a silver fork at {x: 420, y: 120}",
            "recaption {x: 270, y: 395, width: 100, height: 100} to a blood orange",
        ):
            service.apply_instruction(session.session_id, parse_inline_instruction(text))

        layout = session.initial
        for record in session.history:
            layout = apply_command(layout, parse_command(record.instruction))
        assert layout == session.current
