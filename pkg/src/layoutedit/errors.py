"""Domain exceptions with stable machine-readable codes.

Every error that can cross a process boundary (CLI stderr, HTTP body)
carries a ``code`` string that callers may match on; the human-readable
message may vary, the code never does.
"""

from __future__ import annotations

from typing import Any


class LayoutEditError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.details = details

    def to_jsonable(self) -> dict[str, Any]:
        payload: dict[str, Any] = {"error": self.code, "message": str(self)}
        if self.details:
            payload["details"] = self.details
        return payload


class GeometryError(LayoutEditError):
    """Invalid geometric value or operation."""

    code = "geometry"


class UnplaceableBoxError(GeometryError):
    """Box larger than the canvas in at least one dimension."""

    code = "unplaceable box"


class ShapeParseError(LayoutEditError):
    """Malformed shape literal; ``offset`` points at the offending byte."""

    code = "shape parse error"

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(message, offset=offset)
        self.offset = offset


class ShapeValidationError(LayoutEditError):
    """Shape literal parsed but violates a field invariant."""

    code = "shape validation error"


class DanglingShapeReference(LayoutEditError):
    """Instruction token refers to a shape id with no shape entry."""

    code = "dangling shape reference"


class InstructionError(LayoutEditError):
    """Structurally invalid multimodal instruction."""

    code = "invalid instruction"


class LayoutSyntaxError(LayoutEditError):
    """Layout text is not valid JSON; ``position`` is the byte offset."""

    code = "layout syntax error"

    def __init__(self, message: str, position: int) -> None:
        super().__init__(message, position=position)
        self.position = position


class LayoutSchemaError(LayoutEditError):
    """Layout JSON is missing a key or has a wrongly typed field."""

    code = "layout schema error"

    def __init__(self, message: str, path: str) -> None:
        super().__init__(message, path=path)
        self.path = path


class LayoutInvariantError(LayoutEditError):
    """Layout JSON is well formed but violates a layout invariant."""

    code = "layout invariant error"

    def __init__(self, message: str, rule: str) -> None:
        super().__init__(message, rule=rule)
        self.rule = rule


class NoLayoutFound(LayoutEditError):
    """Completion text contains neither sentinel nor a balanced JSON object."""

    code = "no layout found in completion"


class NotAnOracleCommand(LayoutEditError):
    """Instruction does not match the deterministic command grammar."""

    code = "not an oracle command"


class SelectionError(LayoutEditError):
    """A selector shape resolves to no object in the layout."""

    code = "selection resolves to no object"


class CorpusError(LayoutEditError):
    """In-context example corpus failed to load or validate."""

    code = "corpus error"


class LlmUnavailable(LayoutEditError):
    """Transport failure after exhausting retries."""

    code = "llm unavailable"


class LlmRejected(LayoutEditError):
    """Endpoint rejected the request (4xx other than 429)."""

    code = "llm request rejected"


class LlmProtocolError(LayoutEditError):
    """Endpoint answered with a body we cannot interpret."""

    code = "llm protocol error"


class RendererUnavailable(LayoutEditError):
    code = "renderer unavailable"


class RendererRejected(LayoutEditError):
    code = "renderer rejected layout"


class RendererProtocolError(LayoutEditError):
    code = "renderer protocol error"


class UnknownSession(LayoutEditError):
    code = "unknown session"


class NothingToUndo(LayoutEditError):
    code = "nothing to undo"


class ConfigError(LayoutEditError):
    code = "config error"
