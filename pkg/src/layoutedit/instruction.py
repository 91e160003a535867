"""Multimodal instructions: interleaved text and drawn-shape references.

The textual form of a shape is byte-exact on the way out (single space
after each colon and comma) and whitespace-insensitive on the way in, so
instructions written by hand, by the UI, or by tests all normalize to the
same wire text the LLM sees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterator

from .errors import (
    DanglingShapeReference,
    InstructionError,
    ShapeParseError,
    ShapeValidationError,
)
from .geometry import BoundingBox, Point

POINT_KIND = "point"
BOX_KIND = "box"
ARROW_KIND = "arrow"


@dataclass(frozen=True)
class Shape:
    """One drawn geometry: a point, a box, or an arrow.

    Exactly the fields for ``kind`` are set; ``start``/``end`` serialize as
    ``from``/``to`` (``from`` is reserved in Python).
    """

    kind: str
    shape_id: str = ""
    point: Point | None = None
    box: BoundingBox | None = None
    start: Point | None = None
    end: Point | None = None

    def __post_init__(self) -> None:
        expected = {
            POINT_KIND: ("point",),
            BOX_KIND: ("box",),
            ARROW_KIND: ("start", "end"),
        }
        if self.kind not in expected:
            raise ShapeValidationError(f"unknown shape kind {self.kind!r}")
        for name in ("point", "box", "start", "end"):
            value = getattr(self, name)
            if name in expected[self.kind]:
                if value is None:
                    raise ShapeValidationError(f"{self.kind} shape requires field {name!r}")
            elif value is not None:
                raise ShapeValidationError(f"{self.kind} shape must not set field {name!r}")
        if self.kind == ARROW_KIND and self.start == self.end:
            raise ShapeValidationError("arrow endpoints must differ")
        # drawn geometry lives in canvas space: no negative corners
        # (unlike the internal box type, which clamping may move through)
        if self.kind == BOX_KIND and self.box is not None and (self.box.x < 0 or self.box.y < 0):
            raise ShapeValidationError(
                f"box shape must have non-negative position, got ({self.box.x}, {self.box.y})"
            )


def point_shape(x: int, y: int, shape_id: str = "") -> Shape:
    return Shape(POINT_KIND, shape_id=shape_id, point=Point(x, y))


def box_shape(x: int, y: int, width: int, height: int, shape_id: str = "") -> Shape:
    return Shape(BOX_KIND, shape_id=shape_id, box=BoundingBox(x, y, width, height))


def arrow_shape(from_xy: tuple[int, int], to_xy: tuple[int, int], shape_id: str = "") -> Shape:
    return Shape(ARROW_KIND, shape_id=shape_id, start=Point(*from_xy), end=Point(*to_xy))


@dataclass(frozen=True)
class Token:
    """Either a text span or a reference to a drawn shape."""

    text: str | None = None
    ref: str | None = None

    def __post_init__(self) -> None:
        if (self.text is None) == (self.ref is None):
            raise InstructionError("token must have exactly one of text or ref")
        if self.text is not None and not self.text:
            raise InstructionError("text spans must be non-empty")

    @property
    def is_ref(self) -> bool:
        return self.ref is not None


def text_token(text: str) -> Token:
    return Token(text=text)


def ref_token(shape_id: str) -> Token:
    return Token(ref=shape_id)


@dataclass(frozen=True)
class MultimodalInstruction:
    tokens: tuple[Token, ...]
    shapes: dict[str, Shape] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise InstructionError("instruction must contain at least one token")
        seen: set[str] = set()
        for token in self.tokens:
            if token.ref is None:
                continue
            if token.ref not in self.shapes:
                raise DanglingShapeReference(f"token references unknown shape {token.ref!r}")
            if token.ref in seen:
                raise InstructionError(f"shape {token.ref!r} referenced more than once")
            seen.add(token.ref)

    def referenced_shapes(self) -> Iterator[Shape]:
        for token in self.tokens:
            if token.ref is not None:
                yield self.shapes[token.ref]


def serialize_shape(shape: Shape) -> str:
    if shape.kind == POINT_KIND:
        assert shape.point is not None
        return _point_literal(shape.point)
    if shape.kind == BOX_KIND:
        assert shape.box is not None
        b = shape.box
        return f"{{x: {b.x}, y: {b.y}, width: {b.width}, height: {b.height}}}"
    assert shape.start is not None and shape.end is not None
    return f"{{from: {_point_literal(shape.start)}, to: {_point_literal(shape.end)}}}"


def _point_literal(p: Point) -> str:
    return f"{{x: {p.x}, y: {p.y}}}"


def serialize_instruction(instr: MultimodalInstruction) -> str:
    """Concatenate tokens in order, inserting a single space between
    adjacent tokens only when neither side already supplies whitespace."""
    parts: list[str] = []
    for token in instr.tokens:
        if token.ref is not None:
            if token.ref not in instr.shapes:
                raise DanglingShapeReference(f"token references unknown shape {token.ref!r}")
            piece = serialize_shape(instr.shapes[token.ref])
        else:
            assert token.text is not None
            piece = token.text
        if parts and not parts[-1][-1:].isspace() and not piece[:1].isspace():
            parts.append(" ")
        parts.append(piece)
    return "".join(parts)


class _LiteralScanner:
    """Recursive-descent reader for ``{key: value, ...}`` shape literals."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def error(self, message: str) -> ShapeParseError:
        return ShapeParseError(f"{message} at offset {self.pos}", offset=self.pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str) -> None:
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def read_key(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalpha() or self.text[self.pos] == "_"):
            self.pos += 1
        if self.pos == start:
            raise self.error("expected a field name")
        return self.text[start:self.pos]

    def read_number(self) -> int:
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        digits = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits:
            raise self.error("expected a number")
        if self.pos < len(self.text) and self.text[self.pos] == ".":
            raise ShapeValidationError(
                f"fractional coordinates are not allowed at offset {self.pos}"
            )
        return int(self.text[start:self.pos])

    def read_object(self) -> dict[str, Any]:
        self.skip_ws()
        self.expect("{")
        fields: dict[str, Any] = {}
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == "}":
            self.pos += 1
            return fields
        while True:
            self.skip_ws()
            key = self.read_key()
            if key in fields:
                raise self.error(f"duplicate field {key!r}")
            self.skip_ws()
            self.expect(":")
            self.skip_ws()
            if self.pos < len(self.text) and self.text[self.pos] == "{":
                fields[key] = self.read_object()
            else:
                fields[key] = self.read_number()
            self.skip_ws()
            if self.pos < len(self.text) and self.text[self.pos] == ",":
                self.pos += 1
                continue
            self.expect("}")
            return fields


def parse_shape(text: str, shape_id: str = "") -> Shape:
    """Parse one serialized shape literal; inverse of :func:`serialize_shape`.

    Internal whitespace is tolerated; anything besides a single literal
    (plus surrounding whitespace) is a parse error with a byte offset.
    """
    scanner = _LiteralScanner(text)
    fields = scanner.read_object()
    scanner.skip_ws()
    if scanner.pos != len(text):
        raise scanner.error("trailing characters after shape literal")
    return _shape_from_fields(fields, shape_id)


def _shape_from_fields(fields: dict[str, Any], shape_id: str) -> Shape:
    keys = set(fields)
    try:
        if keys == {"x", "y"}:
            return point_shape(fields["x"], fields["y"], shape_id)
        if keys == {"x", "y", "width", "height"}:
            return box_shape(fields["x"], fields["y"], fields["width"], fields["height"], shape_id)
        if keys == {"from", "to"}:
            src, dst = fields["from"], fields["to"]
            for name, value in (("from", src), ("to", dst)):
                if not isinstance(value, dict) or set(value) != {"x", "y"}:
                    raise ShapeValidationError(f"arrow field {name!r} must be a point literal")
            return arrow_shape((src["x"], src["y"]), (dst["x"], dst["y"]), shape_id)
    except ShapeValidationError:
        raise
    except Exception as exc:  # geometry invariant violations
        raise ShapeValidationError(str(exc)) from exc
    raise ShapeValidationError(f"unrecognized field set {sorted(keys)}")


def parse_inline_instruction(text: str) -> MultimodalInstruction:
    """Split free text with embedded shape literals into tokens + shapes.

    Every balanced ``{...}`` group is parsed via :func:`parse_shape` and
    becomes a ref token; the spans between become text tokens verbatim.
    Shape ids are assigned s1, s2, ... in reading order.
    """
    tokens: list[Token] = []
    shapes: dict[str, Shape] = {}
    cursor = 0
    counter = 0
    while True:
        brace = text.find("{", cursor)
        if brace == -1:
            break
        end = _match_brace(text, brace)
        leading = text[cursor:brace]
        if leading.strip():
            tokens.append(text_token(leading))
        counter += 1
        shape_id = f"s{counter}"
        try:
            shape = parse_shape(text[brace:end], shape_id)
        except ShapeParseError as exc:
            raise ShapeParseError(str(exc), offset=brace + exc.offset) from exc
        shapes[shape_id] = shape
        tokens.append(ref_token(shape_id))
        cursor = end
    trailing = text[cursor:]
    if trailing.strip():
        tokens.append(text_token(trailing))
    if not tokens:
        raise InstructionError("instruction text is empty")
    return MultimodalInstruction(tuple(tokens), shapes)


def _match_brace(text: str, start: int) -> int:
    depth = 0
    for i in range(start, len(text)):
        if text[i] == "{":
            depth += 1
        elif text[i] == "}":
            depth -= 1
            if depth == 0:
                return i + 1
    raise ShapeParseError(f"unbalanced '{{' at offset {start}", offset=start)


def shape_to_jsonable(shape: Shape) -> dict[str, Any]:
    """Wire form of a shape, as used in API request bodies."""
    if shape.kind == POINT_KIND:
        assert shape.point is not None
        return {"kind": POINT_KIND, "x": shape.point.x, "y": shape.point.y}
    if shape.kind == BOX_KIND:
        assert shape.box is not None
        b = shape.box
        return {"kind": BOX_KIND, "x": b.x, "y": b.y, "width": b.width, "height": b.height}
    assert shape.start is not None and shape.end is not None
    return {
        "kind": ARROW_KIND,
        "from": {"x": shape.start.x, "y": shape.start.y},
        "to": {"x": shape.end.x, "y": shape.end.y},
    }


def shape_from_jsonable(value: Any, shape_id: str = "") -> Shape:
    if not isinstance(value, dict):
        raise ShapeValidationError("shape must be an object")
    kind = value.get("kind")
    try:
        if kind == POINT_KIND:
            return point_shape(_int_field(value, "x"), _int_field(value, "y"), shape_id)
        if kind == BOX_KIND:
            return box_shape(
                _int_field(value, "x"),
                _int_field(value, "y"),
                _int_field(value, "width"),
                _int_field(value, "height"),
                shape_id,
            )
        if kind == ARROW_KIND:
            src, dst = value.get("from"), value.get("to")
            if not isinstance(src, dict) or not isinstance(dst, dict):
                raise ShapeValidationError("arrow requires 'from' and 'to' points")
            return arrow_shape(
                (_int_field(src, "x"), _int_field(src, "y")),
                (_int_field(dst, "x"), _int_field(dst, "y")),
                shape_id,
            )
    except ShapeValidationError:
        raise
    except Exception as exc:
        raise ShapeValidationError(str(exc)) from exc
    raise ShapeValidationError(f"unknown shape kind {kind!r}")


def _int_field(mapping: dict[str, Any], key: str) -> int:
    value = mapping.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ShapeValidationError(f"field {key!r} must be an integer")
    return value


def instruction_to_jsonable(instr: MultimodalInstruction) -> dict[str, Any]:
    tokens = [
        {"text": t.text} if t.ref is None else {"ref": t.ref}
        for t in instr.tokens
    ]
    shapes = {shape_id: shape_to_jsonable(shape) for shape_id, shape in instr.shapes.items()}
    return {"tokens": tokens, "shapes": shapes}


def instruction_request_body(instr: MultimodalInstruction, engine: str | None = None) -> str:
    """Compact JSON request body for the instruction endpoint.

    Key order and separators are fixed so independently written clients
    (the web UI, scripts) can be checked byte-for-byte against fixtures.
    """
    body = instruction_to_jsonable(instr)
    if engine is not None:
        body["engine"] = engine
    return json.dumps(body, separators=(",", ":"))


def instruction_from_jsonable(value: Any) -> MultimodalInstruction:
    if not isinstance(value, dict):
        raise InstructionError("instruction must be an object")
    raw_tokens = value.get("tokens")
    raw_shapes = value.get("shapes", {})
    if not isinstance(raw_tokens, list) or not raw_tokens:
        raise InstructionError("instruction requires a non-empty 'tokens' array")
    if not isinstance(raw_shapes, dict):
        raise InstructionError("'shapes' must be an object")
    shapes = {
        str(shape_id): shape_from_jsonable(raw, str(shape_id))
        for shape_id, raw in raw_shapes.items()
    }
    tokens: list[Token] = []
    for raw in raw_tokens:
        if not isinstance(raw, dict):
            raise InstructionError("each token must be an object")
        if "text" in raw and "ref" not in raw:
            if not isinstance(raw["text"], str):
                raise InstructionError("token 'text' must be a string")
            tokens.append(text_token(raw["text"]))
        elif "ref" in raw and "text" not in raw:
            tokens.append(ref_token(str(raw["ref"])))
        else:
            raise InstructionError("token must have exactly one of 'text' or 'ref'")
    return MultimodalInstruction(tuple(tokens), shapes)
