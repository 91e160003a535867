"""Application configuration: one JSON file, a few environment overrides.

Sections: ``llm``, ``renderer``, ``server``, ``prompting``, ``validation``.
Environment: ``PNI_CONFIG`` points at the config file, ``PNI_LLM_API_KEY``
supplies the key in live mode, and ``PNI_LLM_STUB_SCRIPT`` (a JSON file
holding an array of completion strings) forces the deterministic stub,
which is how tests and offline runs drive the LLM path.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .llm import API_KEY_ENV, HttpLlmClient, LlmClient, LlmConfig, StubLlmClient, StubScript
from .prompting import default_corpus_path, default_generation_corpus_path
from .rendering import RenderBackendConfig
from .validation import DEFAULT_EPSILON_FRACTION

CONFIG_ENV = "PNI_CONFIG"
STUB_SCRIPT_ENV = "PNI_LLM_STUB_SCRIPT"


@dataclass(frozen=True)
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8321
    data_dir: str = "./sessions"


@dataclass(frozen=True)
class PromptingConfig:
    k: int | None = None  # None = min(15, corpus size)
    corpus_path: str = ""
    generation_corpus_path: str = ""

    def resolved_corpus_path(self) -> Path:
        return Path(self.corpus_path) if self.corpus_path else default_corpus_path()

    def resolved_generation_corpus_path(self) -> Path:
        if self.generation_corpus_path:
            return Path(self.generation_corpus_path)
        return default_generation_corpus_path()


@dataclass(frozen=True)
class ValidationConfig:
    epsilon_fraction: float = DEFAULT_EPSILON_FRACTION
    clamp_policy: bool = False


@dataclass(frozen=True)
class LlmSettings:
    mode: str = "none"  # "http", "stub", or "none"
    base_url: str = ""
    model_name: str = ""
    timeout: float = 60.0
    max_retries: int = 3
    temperature: float = 0.0
    stub_completions: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.mode not in ("http", "stub", "none"):
            raise ConfigError(f"llm mode must be http, stub, or none, got {self.mode!r}")
        if self.mode == "http" and not (self.base_url and self.model_name):
            raise ConfigError("llm mode=http requires base_url and model_name")
        if self.mode == "stub" and not self.stub_completions:
            raise ConfigError("llm mode=stub requires at least one scripted completion")


@dataclass(frozen=True)
class AppConfig:
    llm: LlmSettings = field(default_factory=LlmSettings)
    renderer: RenderBackendConfig = field(default_factory=RenderBackendConfig)
    server: ServerConfig = field(default_factory=ServerConfig)
    prompting: PromptingConfig = field(default_factory=PromptingConfig)
    validation: ValidationConfig = field(default_factory=ValidationConfig)


def load_app_config(path: str | Path | None = None) -> AppConfig:
    """Load configuration from ``path``, ``$PNI_CONFIG``, or defaults."""
    resolved = path or os.environ.get(CONFIG_ENV)
    document: dict[str, Any] = {}
    if resolved:
        try:
            document = json.loads(Path(resolved).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {resolved}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {resolved} is not valid JSON: {exc}") from exc
        if not isinstance(document, dict):
            raise ConfigError(f"config file {resolved} must hold a JSON object")
    return app_config_from_jsonable(document)


def app_config_from_jsonable(document: dict[str, Any]) -> AppConfig:
    try:
        llm = _llm_settings(_section(document, "llm"))
        renderer = RenderBackendConfig(**_known(_section(document, "renderer"), RenderBackendConfig))
        server = ServerConfig(**_known(_section(document, "server"), ServerConfig))
        prompting = PromptingConfig(**_known(_section(document, "prompting"), PromptingConfig))
        validation = ValidationConfig(**_known(_section(document, "validation"), ValidationConfig))
    except TypeError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    return AppConfig(llm=llm, renderer=renderer, server=server, prompting=prompting, validation=validation)


def _section(document: dict[str, Any], name: str) -> dict[str, Any]:
    value = document.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    return value


def _known(section: dict[str, Any], cls: type) -> dict[str, Any]:
    names = set(cls.__dataclass_fields__)  # type: ignore[attr-defined]
    unknown = set(section) - names
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)} for {cls.__name__}")
    return section


def _llm_settings(section: dict[str, Any]) -> LlmSettings:
    stub_path = os.environ.get(STUB_SCRIPT_ENV)
    if stub_path:
        return LlmSettings(mode="stub", stub_completions=_read_stub_script(stub_path))
    known = _known(dict(section), LlmSettings)
    completions = known.pop("stub_completions", ())
    if isinstance(completions, list):
        completions = tuple(completions)
    return LlmSettings(stub_completions=completions, **known)


def _read_stub_script(path: str) -> tuple[str, ...]:
    try:
        scripted = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read stub script {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"stub script {path} is not valid JSON: {exc}") from exc
    if not isinstance(scripted, list) or not all(isinstance(c, str) for c in scripted):
        raise ConfigError(f"stub script {path} must be a JSON array of strings")
    return tuple(scripted)


def make_llm_client(settings: LlmSettings) -> LlmClient | None:
    if settings.mode == "none":
        return None
    if settings.mode == "stub":
        return StubLlmClient(StubScript(settings.stub_completions))
    api_key = os.environ.get(API_KEY_ENV, "")
    if not api_key:
        raise ConfigError(f"llm mode=http requires the {API_KEY_ENV} environment variable")
    return HttpLlmClient(
        LlmConfig(
            base_url=settings.base_url,
            model_name=settings.model_name,
            api_key=api_key,
            timeout=settings.timeout,
            max_retries=settings.max_retries,
            temperature=settings.temperature,
        )
    )
