"""Deterministic interpreter for the canonical instruction mini-DSL.

Recognized forms (keywords case-insensitive, SHAPE = one shape reference):

    move SHAPE to SHAPE          selector box -> point or box destination
    add <caption> at SHAPE       point (default 128x128 box, clamped) or box
    delete SHAPE                 selector box
    recaption SHAPE to <caption> selector box

Anything else is "not an oracle command" and falls through to the LLM
engine. The interpreter doubles as the reference the validator compares
LLM output against.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .errors import NotAnOracleCommand, SelectionError
from .geometry import (
    BoundingBox,
    Layout,
    Point,
    SceneObject,
    clamp_to_canvas,
    move_center_to,
    resolve_selection,
)
from .instruction import (
    BOX_KIND,
    POINT_KIND,
    MultimodalInstruction,
    Shape,
    box_shape,
    point_shape,
    ref_token,
    text_token,
)

MOVE, ADD, DELETE, RECAPTION = "move", "add", "delete", "recaption"

DEFAULT_ADD_SIZE = 128

_ADD_TEXT = re.compile(r"^add\s+(?P<caption>.+?)\s+at$", re.IGNORECASE | re.DOTALL)
_RECAPTION_TAIL = re.compile(r"^to\s+(?P<caption>.+)$", re.IGNORECASE | re.DOTALL)


@dataclass(frozen=True)
class Command:
    kind: str
    selector: BoundingBox | None = None
    destination: Point | BoundingBox | None = None
    caption: str | None = None


def parse_command(instruction: MultimodalInstruction) -> Command:
    """Match the instruction's token stream against the command grammar."""
    tokens = instruction.tokens
    texts = [t.text.strip() if t.text is not None else None for t in tokens]
    shapes = [instruction.shapes[t.ref] if t.ref is not None else None for t in tokens]

    if len(tokens) == 4 and _is_word(texts[0], "move") and _is_word(texts[2], "to"):
        selector = _selector_box(shapes[1])
        destination = _destination(shapes[3])
        return Command(MOVE, selector=selector, destination=destination)

    if len(tokens) == 2 and texts[0] is not None and shapes[1] is not None:
        match = _ADD_TEXT.match(texts[0])
        if match:
            return Command(ADD, destination=_destination(shapes[1]), caption=match.group("caption"))
        if _is_word(texts[0], "delete"):
            return Command(DELETE, selector=_selector_box(shapes[1]))

    if (
        len(tokens) == 3
        and _is_word(texts[0], "recaption")
        and shapes[1] is not None
        and texts[2] is not None
    ):
        match = _RECAPTION_TAIL.match(texts[2])
        if match:
            return Command(
                RECAPTION,
                selector=_selector_box(shapes[1]),
                caption=match.group("caption").rstrip(),
            )

    raise NotAnOracleCommand("instruction does not match the oracle command grammar")


def _is_word(text: str | None, word: str) -> bool:
    return text is not None and text.lower() == word


def _selector_box(shape: Shape | None) -> BoundingBox:
    if shape is None or shape.kind != BOX_KIND or shape.box is None:
        raise NotAnOracleCommand("selector must be a box shape")
    return shape.box


def _destination(shape: Shape | None) -> Point | BoundingBox:
    if shape is None:
        raise NotAnOracleCommand("destination must be a shape reference")
    if shape.kind == POINT_KIND and shape.point is not None:
        return shape.point
    if shape.kind == BOX_KIND and shape.box is not None:
        return shape.box
    raise NotAnOracleCommand("destination must be a point or a box")


def apply_command(layout: Layout, cmd: Command) -> Layout:
    """Execute a command, returning a new layout; untouched objects are
    identical field-for-field and insertion order is preserved."""
    if cmd.kind == ADD:
        return _apply_add(layout, cmd)

    assert cmd.selector is not None
    selected = resolve_selection(layout, cmd.selector)
    if not selected:
        raise SelectionError("selection resolves to no object")

    if cmd.kind == MOVE:
        return _apply_move(layout, cmd, selected)
    if cmd.kind == DELETE:
        objects = tuple(obj for obj in layout.objects if obj.id not in selected)
        return replace(layout, objects=objects)
    if cmd.kind == RECAPTION:
        assert cmd.caption is not None
        objects = tuple(
            replace(obj, caption=cmd.caption) if obj.id in selected else obj
            for obj in layout.objects
        )
        return replace(layout, objects=objects)
    raise NotAnOracleCommand(f"unknown command kind {cmd.kind!r}")


def _apply_move(layout: Layout, cmd: Command, selected: list[int]) -> Layout:
    destination = cmd.destination
    new_boxes: dict[int, BoundingBox] = {}
    if isinstance(destination, Point):
        for object_id in selected:
            obj = layout.find(object_id)
            assert obj is not None
            new_boxes[object_id] = move_center_to(obj.box, destination, layout.canvas)
    else:
        assert isinstance(destination, BoundingBox)
        # Leader (highest coverage, first in selection order) adopts the
        # destination box entirely; the rest translate by the same center
        # offset so the group keeps its relative arrangement.
        leader = layout.find(selected[0])
        assert leader is not None
        dx = destination.center[0] - leader.box.center[0]
        dy = destination.center[1] - leader.box.center[1]
        new_boxes[leader.id] = destination
        for object_id in selected[1:]:
            obj = layout.find(object_id)
            assert obj is not None
            new_boxes[object_id] = obj.box.translated(dx, dy)
    objects = tuple(
        replace(obj, box=new_boxes[obj.id]) if obj.id in new_boxes else obj
        for obj in layout.objects
    )
    return replace(layout, objects=objects)


def _apply_add(layout: Layout, cmd: Command) -> Layout:
    assert cmd.caption is not None and cmd.destination is not None
    if isinstance(cmd.destination, Point):
        size = DEFAULT_ADD_SIZE
        box = move_center_to(BoundingBox(0, 0, size, size), cmd.destination, layout.canvas)
    else:
        box = cmd.destination
    ids = layout.object_ids()
    new_id = max(ids) + 1 if ids else 0
    objects = layout.objects + (SceneObject(new_id, cmd.caption, box),)
    return replace(layout, objects=objects)


def command_to_instruction(cmd: Command) -> MultimodalInstruction:
    """Render a command back into the multimodal instruction it parses from.

    Inverse of :func:`parse_command` up to whitespace; used by scripted
    tests and the randomized validation sweeps.
    """
    shapes: dict[str, Shape] = {}

    def shape_for(value: Point | BoundingBox) -> str:
        shape_id = f"s{len(shapes) + 1}"
        if isinstance(value, Point):
            shapes[shape_id] = point_shape(value.x, value.y, shape_id)
        else:
            shapes[shape_id] = box_shape(value.x, value.y, value.width, value.height, shape_id)
        return shape_id

    if cmd.kind == MOVE:
        assert cmd.selector is not None and cmd.destination is not None
        tokens = (
            text_token("move"),
            ref_token(shape_for(cmd.selector)),
            text_token("to"),
            ref_token(shape_for(cmd.destination)),
        )
    elif cmd.kind == ADD:
        assert cmd.caption is not None and cmd.destination is not None
        tokens = (
            text_token(f"add {cmd.caption} at"),
            ref_token(shape_for(cmd.destination)),
        )
    elif cmd.kind == DELETE:
        assert cmd.selector is not None
        tokens = (text_token("delete"), ref_token(shape_for(cmd.selector)))
    elif cmd.kind == RECAPTION:
        assert cmd.selector is not None and cmd.caption is not None
        tokens = (
            text_token("recaption"),
            ref_token(shape_for(cmd.selector)),
            text_token(f"to {cmd.caption}"),
        )
    else:
        raise NotAnOracleCommand(f"unknown command kind {cmd.kind!r}")
    return MultimodalInstruction(tokens, shapes)
