"""Command-line front door.

Exit codes are a stable contract: 0 success, 1 validation or instruction
failure, 2 environment/config failure. Domain errors are emitted as JSON
objects on stderr so scripts can match on the ``error`` code.
"""

from __future__ import annotations

import json
import socket
import sys
import tempfile
from pathlib import Path

import click

from .config import AppConfig, load_app_config, make_llm_client
from .errors import (
    ConfigError,
    CorpusError,
    LayoutEditError,
    LlmUnavailable,
    RendererUnavailable,
)
from .geometry import Layout
from .instruction import parse_inline_instruction
from .layout_text import parse_layout, serialize_layout
from .rendering import render_mock
from .service import EditingService, SessionStore
from .validation import validate_structure

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_ENVIRONMENT = 2


def _fail(error: LayoutEditError, code: int) -> "click.exceptions.Exit":
    click.echo(json.dumps(error.to_jsonable()), err=True)
    return click.exceptions.Exit(code)


_ENVIRONMENT_ERRORS = (ConfigError, CorpusError, LlmUnavailable, RendererUnavailable)


def _env_exit_code(error: LayoutEditError) -> int:
    return EXIT_ENVIRONMENT if isinstance(error, _ENVIRONMENT_ERRORS) else EXIT_FAILURE


def _load_config(config_path: str | None) -> AppConfig:
    try:
        return load_app_config(config_path)
    except LayoutEditError as error:
        raise _fail(error, EXIT_ENVIRONMENT)


def _read_layout(path: str) -> Layout:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _fail(ConfigError(f"cannot read layout file {path}: {exc}"), EXIT_ENVIRONMENT)
    try:
        return parse_layout(text)
    except LayoutEditError as error:
        raise _fail(error, EXIT_FAILURE)


def _one_shot_service(config: AppConfig, data_dir: str) -> EditingService:
    try:
        llm = make_llm_client(config.llm)
        store = SessionStore(data_dir)
        from .prompting import load_corpus, load_generation_corpus

        corpus = load_corpus(config.prompting.resolved_corpus_path())
        generation = load_generation_corpus(config.prompting.resolved_generation_corpus_path())
    except LayoutEditError as error:
        raise _fail(error, EXIT_ENVIRONMENT)
    return EditingService(store, corpus, generation, llm, config)


@click.group()
def main() -> None:
    """Edit images as object layouts: serve, edit, replay, validate."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None, help="Config file path.")
def serve(config_path: str | None) -> None:
    """Run the HTTP editing service until interrupted."""
    import uvicorn

    from .api import create_app

    config = _load_config(config_path)
    try:
        llm = make_llm_client(config.llm)
        service = EditingService.from_config(config, llm)
    except LayoutEditError as error:
        raise _fail(error, EXIT_ENVIRONMENT)

    try:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((config.server.host, config.server.port))
        sock.listen(128)
    except OSError as exc:
        raise _fail(
            ConfigError(f"cannot bind {config.server.host}:{config.server.port}: {exc}"),
            EXIT_ENVIRONMENT,
        )

    app = create_app(service)
    server = uvicorn.Server(uvicorn.Config(app, log_level="info"))
    server.run(sockets=[sock])


@main.command()
@click.argument("layout_path", type=click.Path())
@click.argument("instruction_text")
@click.option("--engine", type=click.Choice(["auto", "oracle", "llm"]), default="auto")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write the transformed layout here.")
@click.option("--render", "do_render", is_flag=True, help="Write a mock SVG render beside --out.")
@click.option("--config", "config_path", type=click.Path(), default=None)
def edit(
    layout_path: str,
    instruction_text: str,
    engine: str,
    out_path: str | None,
    do_render: bool,
    config_path: str | None,
) -> None:
    """Apply one instruction to a layout file and print the report."""
    config = _load_config(config_path)
    layout = _read_layout(layout_path)
    try:
        instruction = parse_inline_instruction(instruction_text)
    except LayoutEditError as error:
        raise _fail(error, EXIT_FAILURE)

    with tempfile.TemporaryDirectory(prefix="layoutedit-") as scratch:
        service = _one_shot_service(config, scratch)
        try:
            session = service.create_session(layout=layout)
            record = service.apply_instruction(session.session_id, instruction, engine=engine)
        except LayoutEditError as error:
            raise _fail(error, _env_exit_code(error))

    layout_text = serialize_layout(record.after)
    if out_path:
        Path(out_path).write_text(layout_text + "\n", encoding="utf-8")
        if do_render:
            render_path = Path(out_path).with_suffix(".svg")
            render_path.write_bytes(render_mock(record.after).data)
    else:
        click.echo(layout_text)
    click.echo(json.dumps(record.validation.to_jsonable()))
    if not record.validation.ok:
        raise click.exceptions.Exit(EXIT_FAILURE)


@main.command()
@click.argument("script_path", type=click.Path())
@click.option("--engine", type=click.Choice(["auto", "oracle", "llm"]), default="auto")
@click.option("--out-dir", "out_dir", type=click.Path(), default=None, help="Write per-step layouts and reports here.")
@click.option("--config", "config_path", type=click.Path(), default=None)
def replay(script_path: str, engine: str, out_dir: str | None, config_path: str | None) -> None:
    """Apply a script of edits in order and print a summary."""
    config = _load_config(config_path)
    try:
        lines = Path(script_path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise _fail(ConfigError(f"cannot read script file {script_path}: {exc}"), EXIT_ENVIRONMENT)

    layout_path: str | None = None
    edits: list[str] = []
    for line_number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("layout "):
            if layout_path is not None:
                raise _fail(
                    ConfigError(f"line {line_number}: second 'layout' line"), EXIT_FAILURE
                )
            if edits:
                raise _fail(
                    ConfigError(f"line {line_number}: 'layout' must precede all edits"),
                    EXIT_FAILURE,
                )
            layout_path = line[len("layout ") :].strip()
        elif line.startswith("edit "):
            edits.append(line[len("edit ") :].strip())
        else:
            raise _fail(ConfigError(f"line {line_number}: unrecognized script line"), EXIT_FAILURE)
    if layout_path is None:
        raise _fail(ConfigError("no layout line in script"), EXIT_FAILURE)

    layout = _read_layout(layout_path)
    target_dir = Path(out_dir) if out_dir else None
    if target_dir:
        target_dir.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory(prefix="layoutedit-") as scratch:
        service = _one_shot_service(config, scratch)
        try:
            session = service.create_session(layout=layout)
        except LayoutEditError as error:
            raise _fail(error, _env_exit_code(error))

        steps = []
        for index, instruction_text in enumerate(edits, start=1):
            try:
                instruction = parse_inline_instruction(instruction_text)
                record = service.apply_instruction(session.session_id, instruction, engine=engine)
            except _ENVIRONMENT_ERRORS as error:
                # hard error: abort immediately, naming the step
                payload = error.to_jsonable()
                payload["step"] = index
                click.echo(json.dumps(payload), err=True)
                raise click.exceptions.Exit(EXIT_ENVIRONMENT)
            except LayoutEditError as error:
                # the edit itself failed; record it and keep going
                steps.append({"step": index, "ok": False, "error": error.code})
                continue
            steps.append(
                {"step": index, "ok": record.validation.ok, "engine": record.engine}
            )
            if target_dir:
                stem = f"step_{index:03d}"
                (target_dir / f"{stem}.json").write_text(
                    serialize_layout(record.after) + "\n", encoding="utf-8"
                )
                (target_dir / f"{stem}.report.json").write_text(
                    json.dumps(record.validation.to_jsonable(), indent=2) + "\n",
                    encoding="utf-8",
                )

    ok_count = sum(1 for s in steps if s["ok"])
    summary = {
        "steps": steps,
        "ok": ok_count,
        "failed": len(steps) - ok_count,
    }
    click.echo(json.dumps(summary))
    if ok_count != len(steps):
        raise click.exceptions.Exit(EXIT_FAILURE)


@main.command()
@click.argument("layout_path", type=click.Path())
def validate(layout_path: str) -> None:
    """Check a layout file's structural rules."""
    layout = _read_layout(layout_path)
    report = validate_structure(layout)
    click.echo(json.dumps(report.to_jsonable()))
    if not report.ok:
        raise click.exceptions.Exit(EXIT_FAILURE)


if __name__ == "__main__":
    main()
