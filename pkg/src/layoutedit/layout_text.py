"""Canonical textual layout grammar: strict JSON out, lenient JSON in.

The canonical form is the single wire format for prompts, persistence,
and the HTTP service. It is byte-deterministic: 2-space indentation,
fixed key order (canvas, background, objects; id, caption, box), one
object per line, no trailing whitespace, ASCII-escaped strings.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import (
    LayoutInvariantError,
    LayoutSchemaError,
    LayoutSyntaxError,
    NoLayoutFound,
)
from .geometry import BoundingBox, Canvas, GeometryError, Layout, SceneObject

OUTPUT_SENTINEL = "OUTPUT LAYOUT:"


def layout_to_jsonable(layout: Layout) -> dict[str, Any]:
    """Plain-dict form of a layout with canonical key order."""
    return {
        "canvas": {"width": layout.canvas.width, "height": layout.canvas.height},
        "background": layout.background,
        "objects": [
            {
                "id": obj.id,
                "caption": obj.caption,
                "box": {
                    "x": obj.box.x,
                    "y": obj.box.y,
                    "width": obj.box.width,
                    "height": obj.box.height,
                },
            }
            for obj in layout.objects
        ],
    }


def serialize_layout(layout: Layout) -> str:
    """Render a layout as canonical text. Equal layouts yield equal bytes."""
    canvas = layout.canvas
    lines = [
        "{",
        f'  "canvas": {{"width": {canvas.width}, "height": {canvas.height}}},',
        f'  "background": {json.dumps(layout.background)},',
    ]
    if not layout.objects:
        lines.append('  "objects": []')
    else:
        lines.append('  "objects": [')
        last = len(layout.objects) - 1
        for i, obj in enumerate(layout.objects):
            entry = json.dumps(
                {
                    "id": obj.id,
                    "caption": obj.caption,
                    "box": {
                        "x": obj.box.x,
                        "y": obj.box.y,
                        "width": obj.box.width,
                        "height": obj.box.height,
                    },
                }
            )
            comma = "" if i == last else ","
            lines.append(f"    {entry}{comma}")
        lines.append("  ]")
    lines.append("}")
    return "\n".join(lines)


def parse_layout(text: str) -> Layout:
    """Parse layout text, accepting any key order and ignoring unknown keys.

    Raises a distinct error per failure class: syntax (bad JSON, with
    position), schema (missing/wrongly typed key), invariant (duplicate
    ids, non-positive box, empty caption, undersized canvas).
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LayoutSyntaxError(f"invalid JSON: {exc.msg} at position {exc.pos}", exc.pos) from exc
    return layout_from_jsonable(document)


def layout_from_jsonable(document: Any) -> Layout:
    if not isinstance(document, dict):
        raise LayoutSchemaError("layout document must be a JSON object", path="$")
    canvas_raw = _require(document, "canvas", dict, path="$")
    background = _require(document, "background", str, path="$")
    objects_raw = _require(document, "objects", list, path="$")

    canvas_w = _coord(_require(canvas_raw, "width", (int, float), path="$.canvas"), "$.canvas.width")
    canvas_h = _coord(_require(canvas_raw, "height", (int, float), path="$.canvas"), "$.canvas.height")
    try:
        canvas = Canvas(canvas_w, canvas_h)
    except GeometryError as exc:
        raise LayoutInvariantError(str(exc), rule="canvas-size") from exc

    objects: list[SceneObject] = []
    for index, raw in enumerate(objects_raw):
        path = f"$.objects[{index}]"
        if not isinstance(raw, dict):
            raise LayoutSchemaError(f"{path} must be an object", path=path)
        object_id = _coord(_require(raw, "id", (int, float), path=path), f"{path}.id")
        caption = _require(raw, "caption", str, path=path)
        box_raw = _require(raw, "box", dict, path=path)
        box_fields = {}
        for key in ("x", "y", "width", "height"):
            box_fields[key] = _coord(
                _require(box_raw, key, (int, float), path=f"{path}.box"), f"{path}.box.{key}"
            )
        if box_fields["width"] < 1 or box_fields["height"] < 1:
            raise LayoutInvariantError(
                f"non-positive box for object {object_id}", rule="non-positive box"
            )
        try:
            box = BoundingBox(**box_fields)
            objects.append(SceneObject(object_id, caption, box))
        except GeometryError as exc:
            raise LayoutInvariantError(str(exc), rule="invalid object") from exc

    ids = [obj.id for obj in objects]
    if len(ids) != len(set(ids)):
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        raise LayoutInvariantError(f"duplicate id {duplicates[0]}", rule="duplicate id")
    return Layout(canvas=canvas, background=background, objects=tuple(objects))


def _require(mapping: dict[str, Any], key: str, types: type | tuple, *, path: str) -> Any:
    if key not in mapping:
        raise LayoutSchemaError(f"missing key {key!r} at {path}", path=f"{path}.{key}")
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, types):
        raise LayoutSchemaError(
            f"key {key!r} at {path} has wrong type {type(value).__name__}", path=f"{path}.{key}"
        )
    return value


def _coord(value: int | float, path: str) -> int:
    """Integral-valued numbers pass; fractional values are rejected."""
    if isinstance(value, float):
        if not value.is_integer():
            raise LayoutInvariantError(f"fractional coordinate at {path}", rule="fractional")
        return int(value)
    return value


def extract_layout_block(completion: str) -> str:
    """Pull the layout text out of an LLM completion.

    Prefers the text after the last line carrying the ``OUTPUT LAYOUT:``
    sentinel; otherwise falls back to the last balanced top-level ``{...}``
    group (string-aware, so braces inside JSON strings do not count).
    """
    lines = completion.split("\n")
    sentinel_at: tuple[int, int] | None = None  # (line index, offset after sentinel)
    for i, line in enumerate(lines):
        stripped = line.lstrip()
        if stripped.startswith(OUTPUT_SENTINEL):
            indent = len(line) - len(stripped)
            sentinel_at = (i, indent + len(OUTPUT_SENTINEL))
    if sentinel_at is not None:
        i, offset = sentinel_at
        block = "\n".join([lines[i][offset:]] + lines[i + 1 :]).strip()
        if block:
            return block
        raise NoLayoutFound("sentinel present but nothing follows it")

    span = _last_balanced_object(completion)
    if span is None:
        raise NoLayoutFound("no layout found in completion")
    return completion[span[0] : span[1]]


def _last_balanced_object(text: str) -> tuple[int, int] | None:
    """Locate the last balanced top-level brace group, skipping over
    double-quoted strings (with backslash escapes) while inside a group."""
    last: tuple[int, int] | None = None
    i = 0
    n = len(text)
    while i < n:
        if text[i] != "{":
            i += 1
            continue
        depth = 0
        j = i
        in_string = False
        escaped = False
        end: int | None = None
        while j < n:
            ch = text[j]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            else:
                if ch == '"':
                    in_string = True
                elif ch == "{":
                    depth += 1
                elif ch == "}":
                    depth -= 1
                    if depth == 0:
                        end = j + 1
                        break
            j += 1
        if end is None:
            i += 1  # unbalanced start; try the next brace
        else:
            last = (i, end)
            i = end
    return last
