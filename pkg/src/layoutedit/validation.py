"""Structural and semantic checks for transformed layouts.

Structural rules look at one layout in isolation. Edit rules compare a
before/after pair against the instruction: they pin down what must not
change (canvas, background, untouched objects) and, when the instruction
parses as a deterministic command, compare the result against the
interpreter's reference output. Free-form instructions get the structural
and frame rules only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from .errors import LayoutEditError, NotAnOracleCommand, SelectionError
from .geometry import BoundingBox, Layout, resolve_selection
from .instruction import (
    ARROW_KIND,
    BOX_KIND,
    POINT_KIND,
    MultimodalInstruction,
)
from .oracle import ADD, DELETE, MOVE, RECAPTION, apply_command, parse_command

DEFAULT_EPSILON_FRACTION = 0.05


@dataclass(frozen=True)
class Check:
    rule_id: str
    passed: bool
    detail: str

    def to_jsonable(self) -> dict[str, Any]:
        return {"rule_id": self.rule_id, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    def __post_init__(self) -> None:
        if not self.checks:
            raise ValueError("a validation report needs at least one check")

    @property
    def ok(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed_rules(self) -> list[str]:
        return [c.rule_id for c in self.checks if not c.passed]

    def describe_failures(self) -> list[str]:
        return [f"{c.rule_id}: {c.detail}" for c in self.checks if not c.passed]

    def merged_with(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.checks + other.checks)

    def to_jsonable(self) -> dict[str, Any]:
        return {"ok": self.ok, "checks": [c.to_jsonable() for c in self.checks]}


def validate_structure(layout: Layout, *, clamp_policy: bool = False) -> ValidationReport:
    """Check a single layout: unique ids, positive boxes, captions, and
    boxes inside the canvas (or clampable, when the clamp policy is on)."""
    checks: list[Check] = []

    ids = layout.object_ids()
    duplicates = sorted({i for i in ids if ids.count(i) > 1})
    checks.append(
        Check(
            "unique-ids",
            not duplicates,
            "all object ids distinct" if not duplicates else f"duplicate ids {duplicates}",
        )
    )

    bad_boxes = [obj.id for obj in layout.objects if obj.box.width < 1 or obj.box.height < 1]
    checks.append(
        Check(
            "positive-boxes",
            not bad_boxes,
            "all boxes have positive area" if not bad_boxes else f"non-positive boxes on {bad_boxes}",
        )
    )

    empty_captions = [obj.id for obj in layout.objects if not obj.caption.strip()]
    checks.append(
        Check(
            "captions",
            not empty_captions,
            "all captions non-empty" if not empty_captions else f"empty captions on {empty_captions}",
        )
    )

    outside = [obj for obj in layout.objects if not layout.canvas.contains_box(obj.box)]
    if not outside:
        checks.append(Check("in-canvas", True, "all boxes inside the canvas"))
    elif clamp_policy:
        fits = [
            obj
            for obj in outside
            if obj.box.width <= layout.canvas.width and obj.box.height <= layout.canvas.height
        ]
        oversize = [obj.id for obj in outside if obj not in fits]
        if oversize:
            checks.append(Check("in-canvas", False, f"unplaceable boxes on {oversize}"))
        else:
            noted = ", ".join(f"clamped object {obj.id}" for obj in fits)
            checks.append(Check("in-canvas", True, noted))
    else:
        checks.append(
            Check("in-canvas", False, f"boxes outside canvas on {[o.id for o in outside]}")
        )

    return ValidationReport(tuple(checks))


def validate_edit(
    before: Layout,
    after: Layout,
    instruction: MultimodalInstruction,
    *,
    epsilon_fraction: float = DEFAULT_EPSILON_FRACTION,
) -> ValidationReport:
    """Check a transformation against its instruction."""
    checks: list[Check] = []

    checks.append(
        Check(
            "canvas-fixed",
            after.canvas == before.canvas,
            "canvas unchanged"
            if after.canvas == before.canvas
            else f"canvas changed {before.canvas} -> {after.canvas}",
        )
    )

    checks.append(_background_check(before, after, instruction))
    checks.append(_id_monotonic_check(before, after))
    checks.append(_frame_check(before, after, instruction))

    try:
        command = parse_command(instruction)
    except NotAnOracleCommand:
        command = None
    if command is not None:
        checks.extend(_oracle_checks(before, after, command, epsilon_fraction))

    return ValidationReport(tuple(checks))


def _background_check(before: Layout, after: Layout, instruction: MultimodalInstruction) -> Check:
    if after.background == before.background:
        return Check("background-fixed", True, "background unchanged")
    has_refs = any(token.is_ref for token in instruction.tokens)
    text = " ".join(t.text for t in instruction.tokens if t.text is not None).lower()
    if not has_refs and "background" in text:
        # heuristic carve-out: a pure-text instruction about the background
        # is allowed to rewrite it; reported, not enforced
        return Check("background-fixed", True, "background change permitted by instruction")
    return Check(
        "background-fixed", False, f"background changed to {after.background!r} unprompted"
    )


def _id_monotonic_check(before: Layout, after: Layout) -> Check:
    before_ids = set(before.object_ids())
    added = [i for i in after.object_ids() if i not in before_ids]
    floor = max(before_ids) if before_ids else -1
    reused = [i for i in added if i <= floor]
    return Check(
        "id-monotonic",
        not reused,
        "new ids are fresh" if not reused else f"new objects reuse low ids {reused}",
    )


def instruction_selection(before: Layout, instruction: MultimodalInstruction) -> set[int]:
    """Objects the instruction's shapes plausibly target: box selections,
    objects containing a referenced point, and objects under an arrow tail."""
    selected: set[int] = set()
    for shape in instruction.referenced_shapes():
        if shape.kind == BOX_KIND and shape.box is not None:
            selected.update(resolve_selection(before, shape.box))
        elif shape.kind == POINT_KIND and shape.point is not None:
            selected.update(o.id for o in before.objects if o.box.contains_point(shape.point))
        elif shape.kind == ARROW_KIND and shape.start is not None:
            selected.update(o.id for o in before.objects if o.box.contains_point(shape.start))
    return selected


def _frame_check(before: Layout, after: Layout, instruction: MultimodalInstruction) -> Check:
    selected = instruction_selection(before, instruction)
    touched: list[int] = []
    for obj in before.objects:
        if obj.id in selected:
            continue
        counterpart = after.find(obj.id)
        if counterpart != obj:
            touched.append(obj.id)
    return Check(
        "frame",
        not touched,
        "non-selected objects unchanged"
        if not touched
        else f"non-selected objects changed: {touched}",
    )


def _oracle_checks(
    before: Layout, after: Layout, command: Any, epsilon_fraction: float
) -> list[Check]:
    try:
        expected = apply_command(before, command)
    except (SelectionError, LayoutEditError) as exc:
        return [Check("oracle-applicable", False, f"reference interpreter failed: {exc}")]

    if command.kind in (DELETE, RECAPTION):
        same = after == expected
        return [
            Check(
                f"oracle-{command.kind}",
                same,
                "matches the reference result exactly"
                if same
                else "differs from the reference result",
            )
        ]

    epsilon = epsilon_fraction * max(before.canvas.width, before.canvas.height)

    if command.kind == MOVE:
        moved_ids = resolve_selection(before, command.selector)
        checks = []
        for object_id in moved_ids:
            got = after.find(object_id)
            want = expected.find(object_id)
            assert want is not None
            if got is None:
                checks.append(Check("oracle-move", False, f"object {object_id} disappeared"))
                continue
            size_ok = (got.box.width, got.box.height) == (want.box.width, want.box.height)
            distance = _center_distance(got.box, want.box)
            ok = size_ok and distance <= epsilon
            checks.append(
                Check(
                    "oracle-move",
                    ok,
                    f"object {object_id} center within {distance:.1f}px of reference"
                    if ok
                    else f"object {object_id}: size_ok={size_ok}, center off by {distance:.1f}px"
                    f" (tolerance {epsilon:.1f})",
                )
            )
        return checks

    if command.kind == ADD:
        added = [o for o in after.objects if before.find(o.id) is None]
        want = expected.objects[-1]
        if len(added) != 1:
            return [Check("oracle-add", False, f"expected exactly one new object, found {len(added)}")]
        got = added[0]
        caption_ok = got.caption.strip().lower() == (command.caption or "").strip().lower()
        distance = _center_distance(got.box, want.box)
        ok = caption_ok and distance <= epsilon
        return [
            Check(
                "oracle-add",
                ok,
                f"new object {got.id} placed within {distance:.1f}px of reference"
                if ok
                else f"new object: caption_ok={caption_ok}, center off by {distance:.1f}px"
                f" (tolerance {epsilon:.1f})",
            )
        ]

    return [Check("oracle-applicable", False, f"unknown command kind {command.kind!r}")]


def _center_distance(a: BoundingBox, b: BoundingBox) -> float:
    (ax, ay), (bx, by) = a.center, b.center
    return math.hypot(ax - bx, ay - by)
