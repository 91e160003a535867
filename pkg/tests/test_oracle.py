from __future__ import annotations

import random

import pytest

from layoutedit.errors import NotAnOracleCommand, SelectionError
from layoutedit.geometry import BoundingBox, Canvas, Layout, Point, SceneObject
from layoutedit.layout_text import parse_layout, serialize_layout
from layoutedit.oracle import (
    ADD,
    DELETE,
    MOVE,
    RECAPTION,
    Command,
    apply_command,
    command_to_instruction,
    parse_command,
)
from layoutedit.instruction import parse_inline_instruction


def scene(*objects: SceneObject, canvas: Canvas = Canvas(512, 512)) -> Layout:
    return Layout(canvas, "a gray wall", tuple(objects))


THREE_ORANGES = scene(
    SceneObject(0, "an orange", BoundingBox(150, 400, 100, 100)),
    SceneObject(1, "an orange", BoundingBox(280, 390, 100, 100)),
    SceneObject(2, "a wooden table", BoundingBox(40, 330, 430, 160)),
)


class TestParseCommand:
    def test_move_form(self):
        instr = parse_inline_instruction(
            "move {x: 150, y: 400, width: 100, height: 100} to {x: 144, y: 132}"
        )
        cmd = parse_command(instr)
        assert cmd.kind == MOVE
        assert cmd.selector == BoundingBox(150, 400, 100, 100)
        assert cmd.destination == Point(144, 132)

    def test_move_to_box(self):
        instr = parse_inline_instruction("MOVE {x: 0, y: 0, width: 9, height: 9} To {x: 5, y: 5, width: 20, height: 20}")
        cmd = parse_command(instr)
        assert cmd.destination == BoundingBox(5, 5, 20, 20)

    def test_add_form(self):
        instr = parse_inline_instruction("add a red apple at {x: 256, y: 256}")
        cmd = parse_command(instr)
        assert cmd.kind == ADD
        assert cmd.caption == "a red apple"
        assert cmd.destination == Point(256, 256)

    def test_delete_form(self):
        instr = parse_inline_instruction("delete {x: 1, y: 2, width: 3, height: 4}")
        assert parse_command(instr).kind == DELETE

    def test_recaption_form(self):
        instr = parse_inline_instruction("recaption {x: 1, y: 2, width: 3, height: 4} to a black dog")
        cmd = parse_command(instr)
        assert cmd.kind == RECAPTION
        assert cmd.caption == "a black dog"

    def test_free_form_is_not_a_command(self):
        with pytest.raises(NotAnOracleCommand):
            parse_command(parse_inline_instruction("make the dog fluffy"))

    def test_point_selector_is_not_a_command(self):
        instr = parse_inline_instruction("delete {x: 1, y: 2}")
        with pytest.raises(NotAnOracleCommand):
            parse_command(instr)

    def test_arrow_destination_is_not_a_command(self):
        instr = parse_inline_instruction(
            "move {x: 1, y: 2, width: 3, height: 4} to {from: {x: 1, y: 1}, to: {x: 9, y: 9}}"
        )
        with pytest.raises(NotAnOracleCommand):
            parse_command(instr)

    def test_command_round_trip_through_instruction(self):
        for cmd in (
            Command(MOVE, selector=BoundingBox(1, 2, 3, 4), destination=Point(9, 9)),
            Command(ADD, destination=BoundingBox(5, 5, 10, 10), caption="a tiny hat"),
            Command(DELETE, selector=BoundingBox(1, 2, 3, 4)),
            Command(RECAPTION, selector=BoundingBox(1, 2, 3, 4), caption="a blue cup"),
        ):
            assert parse_command(command_to_instruction(cmd)) == cmd


class TestMove:
    def test_paper_literals(self):
        cmd = Command(MOVE, selector=BoundingBox(150, 400, 100, 100), destination=Point(144, 132))
        after = apply_command(THREE_ORANGES, cmd)
        assert after.objects[0].box == BoundingBox(94, 82, 100, 100)
        assert after.objects[1] == THREE_ORANGES.objects[1]
        assert after.objects[2] == THREE_ORANGES.objects[2]
        assert after.canvas == THREE_ORANGES.canvas
        assert after.background == THREE_ORANGES.background

    def test_move_to_box_adopts_box(self):
        cmd = Command(
            MOVE,
            selector=BoundingBox(150, 400, 100, 100),
            destination=BoundingBox(10, 10, 50, 60),
        )
        after = apply_command(THREE_ORANGES, cmd)
        assert after.objects[0].box == BoundingBox(10, 10, 50, 60)

    def test_group_move_leader_plus_offset(self):
        layout = scene(
            SceneObject(0, "an apple", BoundingBox(100, 100, 40, 40)),
            SceneObject(1, "an apple", BoundingBox(150, 100, 40, 40)),
        )
        selector = BoundingBox(95, 95, 100, 50)  # covers both fully
        destination = BoundingBox(300, 300, 40, 40)
        cmd = Command(MOVE, selector=selector, destination=destination)
        after = apply_command(layout, cmd)
        # leader = higher coverage; both are 1.0 so ascending id wins: object 0
        assert after.objects[0].box == destination
        # follower translated by the leader's center offset (+200, +200)
        assert after.objects[1].box == BoundingBox(350, 300, 40, 40)

    def test_empty_selection_errors(self):
        cmd = Command(MOVE, selector=BoundingBox(1, 1, 5, 5), destination=Point(9, 9))
        with pytest.raises(SelectionError):
            apply_command(scene(SceneObject(0, "far away", BoundingBox(400, 400, 20, 20))), cmd)


class TestAdd:
    def test_add_at_point_default_size(self):
        cmd = Command(ADD, destination=Point(256, 256), caption="a red apple")
        after = apply_command(THREE_ORANGES, cmd)
        added = after.objects[-1]
        assert added.id == 3
        assert added.caption == "a red apple"
        assert added.box == BoundingBox(192, 192, 128, 128)

    def test_add_at_box(self):
        cmd = Command(ADD, destination=BoundingBox(7, 8, 20, 30), caption="a blue cup")
        after = apply_command(THREE_ORANGES, cmd)
        assert after.objects[-1].box == BoundingBox(7, 8, 20, 30)

    def test_add_to_empty_layout_gets_id_zero(self):
        cmd = Command(ADD, destination=Point(50, 50), caption="a bird")
        after = apply_command(scene(), cmd)
        assert after.objects[0].id == 0

    def test_add_never_reuses_ids(self):
        layout = scene(SceneObject(7, "a thing", BoundingBox(0, 0, 10, 10)))
        after = apply_command(layout, Command(ADD, destination=Point(100, 100), caption="new"))
        assert after.objects[-1].id == 8


class TestDeleteRecaption:
    def test_delete_removes_selected(self):
        cmd = Command(DELETE, selector=BoundingBox(150, 400, 100, 100))
        after = apply_command(THREE_ORANGES, cmd)
        assert [o.id for o in after.objects] == [1, 2]

    def test_recaption_verbatim(self):
        layout = scene(SceneObject(0, "a white dog", BoundingBox(150, 400, 100, 100)))
        cmd = Command(RECAPTION, selector=BoundingBox(150, 400, 100, 100), caption="a black dog")
        after = apply_command(layout, cmd)
        assert after.objects[0].caption == "a black dog"
        assert after.objects[0].box == layout.objects[0].box
        assert after.objects[0].id == layout.objects[0].id

    def test_delete_empty_selection_errors(self):
        cmd = Command(DELETE, selector=BoundingBox(0, 0, 5, 5))
        with pytest.raises(SelectionError):
            apply_command(scene(SceneObject(0, "far", BoundingBox(300, 300, 9, 9))), cmd)


def random_layout(rng: random.Random, max_objects: int = 6) -> Layout:
    canvas = Canvas(512, 512)
    count = rng.randrange(1, max_objects + 1)
    ids = rng.sample(range(0, 50), count)
    nouns = ["a dog", "a cat", "an orange", "a red ball", "a plate", "a cup", "a lamp"]
    objects = []
    for object_id in ids:
        w = rng.randrange(20, 160)
        h = rng.randrange(20, 160)
        x = rng.randrange(0, canvas.width - w)
        y = rng.randrange(0, canvas.height - h)
        objects.append(SceneObject(object_id, rng.choice(nouns), BoundingBox(x, y, w, h)))
    return Layout(canvas, "a plain room", tuple(objects))


def random_command(rng: random.Random, layout: Layout) -> Command:
    target = rng.choice(layout.objects)
    selector = target.box  # exact box guarantees a non-empty selection
    kind = rng.choice([MOVE, ADD, DELETE, RECAPTION])
    if kind == MOVE:
        if rng.random() < 0.5:
            destination: Point | BoundingBox = Point(
                rng.randrange(0, layout.canvas.width), rng.randrange(0, layout.canvas.height)
            )
        else:
            w = rng.randrange(10, 120)
            h = rng.randrange(10, 120)
            destination = BoundingBox(
                rng.randrange(0, layout.canvas.width - w),
                rng.randrange(0, layout.canvas.height - h),
                w,
                h,
            )
        return Command(MOVE, selector=selector, destination=destination)
    if kind == ADD:
        destination = Point(rng.randrange(0, layout.canvas.width), rng.randrange(0, layout.canvas.height))
        return Command(ADD, destination=destination, caption="a potted plant")
    if kind == DELETE:
        return Command(DELETE, selector=selector)
    return Command(RECAPTION, selector=selector, caption="a repainted thing")


class TestProperties:
    def test_frame_conservation_freshness_determinism(self):
        rng = random.Random(1234)
        for _ in range(300):
            layout = random_layout(rng)
            cmd = random_command(rng, layout)
            before_ids = set(layout.object_ids())
            try:
                after = apply_command(layout, cmd)
            except SelectionError:
                pytest.fail("exact-box selectors must always select")

            # determinism
            assert apply_command(layout, cmd) == after

            # conservation
            if cmd.kind == ADD:
                assert len(after.objects) == len(layout.objects) + 1
            elif cmd.kind == DELETE:
                assert len(after.objects) < len(layout.objects)
            else:
                assert len(after.objects) == len(layout.objects)

            # id freshness
            for object_id in after.object_ids():
                if object_id not in before_ids:
                    assert cmd.kind == ADD
                    assert object_id == max(before_ids) + 1

            # frame: objects outside the selection are untouched
            from layoutedit.geometry import resolve_selection

            selected = set(resolve_selection(layout, cmd.selector)) if cmd.selector else set()
            for obj in layout.objects:
                if obj.id not in selected:
                    assert layout.find(obj.id) == after.find(obj.id)

            # validity closure: canonical round trip accepts the result
            assert parse_layout(serialize_layout(after)) == after

    def test_commutation_on_disjoint_targets(self):
        layout = scene(
            SceneObject(0, "a dog", BoundingBox(10, 10, 50, 50)),
            SceneObject(1, "a cat", BoundingBox(300, 300, 50, 50)),
        )
        c1 = Command(RECAPTION, selector=BoundingBox(10, 10, 50, 50), caption="a husky")
        c2 = Command(MOVE, selector=BoundingBox(300, 300, 50, 50), destination=Point(400, 100))
        forward = apply_command(apply_command(layout, c1), c2)
        backward = apply_command(apply_command(layout, c2), c1)
        assert forward == backward
