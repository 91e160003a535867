#!/usr/bin/env python3
"""Regenerate the shipped in-context example corpora.

Output layouts for commands the deterministic interpreter covers are
computed by running it, so the shipped examples can never drift from the
executable semantics. Free-form examples are constructed with the same
geometry helpers. Run from the repo root:

    python3 scripts/build_corpus.py
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

from layoutedit.geometry import (
    BoundingBox,
    Canvas,
    Layout,
    Point,
    SceneObject,
    move_center_to,
    resolve_selection,
)
from layoutedit.instruction import (
    MultimodalInstruction,
    arrow_shape,
    box_shape,
    point_shape,
    ref_token,
    serialize_instruction,
    serialize_shape,
    text_token,
)
from layoutedit.layout_text import layout_to_jsonable
from layoutedit.oracle import Command, ADD, DELETE, MOVE, RECAPTION, apply_command
from layoutedit.prompting import InContextExample, render_assistant_turn, parse_completion
from layoutedit.layout_text import parse_layout, serialize_layout

CANVAS = Canvas(512, 512)

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "layoutedit" / "data"


def scene(background: str, *objects: SceneObject) -> Layout:
    return Layout(CANVAS, background, tuple(objects))


def instr(*parts) -> MultimodalInstruction:
    """Build an instruction from str and Shape parts."""
    tokens = []
    shapes = {}
    for part in parts:
        if isinstance(part, str):
            tokens.append(text_token(part))
        else:
            shape_id = f"s{len(shapes) + 1}"
            shape = replace(part, shape_id=shape_id)
            shapes[shape_id] = shape
            tokens.append(ref_token(shape_id))
    return MultimodalInstruction(tuple(tokens), shapes)


def selection_answer(layout: Layout, instruction: MultimodalInstruction) -> str:
    """Describe what each drawn shape selects, mirroring selection semantics."""
    clauses = []
    for shape in instruction.referenced_shapes():
        literal = serialize_shape(shape)
        if shape.kind == "box":
            ids = resolve_selection(layout, shape.box)
            if ids:
                noun = "object" if len(ids) == 1 else "objects"
                clauses.append(f"the box {literal} selects {noun} {', '.join(map(str, ids))}")
            else:
                clauses.append(f"the box {literal} marks a destination region")
        elif shape.kind == "point":
            clauses.append(f"the point {literal} marks a destination, not a selection")
        else:
            ids = [o.id for o in layout.objects if o.box.contains_point(shape.start)]
            src = f"object {ids[0]}" if ids else "nothing"
            clauses.append(f"the arrow starts on {src} and its tip marks the destination")
    return "; ".join(clauses).capitalize() + "." if clauses else "No shapes were drawn."


def example(
    layout: Layout,
    instruction: MultimodalInstruction,
    output: Layout,
    operation_answer: str,
    result_answer: str,
) -> dict:
    cot = (
        ("Which object ids does each drawn shape select?", selection_answer(layout, instruction)),
        ("What operation does the instruction request?", operation_answer),
        ("What is the new box or caption for each affected object?", result_answer),
    )
    entry = InContextExample(
        layout_text=serialize_layout(layout),
        instruction_text=serialize_instruction(instruction),
        chain_of_thought=cot,
        output_layout_text=serialize_layout(output),
    )
    # authoring-time self-consistency check
    pairs, parsed = parse_completion(entry.assistant_text())
    assert pairs == list(cot), "chain of thought must survive a parse round trip"
    assert parsed == parse_layout(entry.output_layout_text)
    return {
        "layout": layout_to_jsonable(layout),
        "instruction": entry.instruction_text,
        "chain_of_thought": [{"question": q, "answer": a} for q, a in cot],
        "output_layout": layout_to_jsonable(output),
    }


def box_str(b: BoundingBox) -> str:
    return f"{{x: {b.x}, y: {b.y}, width: {b.width}, height: {b.height}}}"


def build_edit_examples() -> list[dict]:
    examples = []

    # 1. move one orange to a starred point
    oranges = scene(
        "a painting of a wooden table",
        SceneObject(0, "an orange", BoundingBox(150, 400, 100, 100)),
        SceneObject(1, "an orange", BoundingBox(270, 395, 100, 100)),
        SceneObject(2, "an orange", BoundingBox(60, 390, 100, 100)),
    )
    sel = box_shape(150, 400, 100, 100)
    dst = point_shape(144, 132)
    ins = instr("move", sel, "to", dst)
    out = apply_command(oranges, Command(MOVE, selector=sel.box, destination=dst.point))
    examples.append(
        example(
            oranges,
            ins,
            out,
            "Move the selected object so its center sits at the starred point, keeping its size.",
            f"Object 0 keeps caption and size; its box becomes {box_str(out.objects[0].box)}.",
        )
    )

    # 2. move a dog into a destination box (adopts position and size)
    dogs = scene(
        "a sunny park with a path",
        SceneObject(0, "a white dog", BoundingBox(80, 260, 120, 140)),
        SceneObject(1, "a brown dog", BoundingBox(330, 270, 110, 130)),
    )
    sel = box_shape(75, 255, 130, 150)
    dst = box_shape(300, 60, 140, 160)
    ins = instr("move", sel, "to", dst)
    out = apply_command(dogs, Command(MOVE, selector=sel.box, destination=dst.box))
    examples.append(
        example(
            dogs,
            ins,
            out,
            "Move the selected dog into the destination box, adopting its position and size.",
            f"Object 0 keeps its caption; its box becomes {box_str(out.objects[0].box)}.",
        )
    )

    # 3. group move: two apples onto a plate box
    apples = scene(
        "a kitchen counter",
        SceneObject(0, "a red apple", BoundingBox(90, 120, 70, 70)),
        SceneObject(1, "a red apple", BoundingBox(180, 125, 70, 70)),
        SceneObject(2, "a white plate", BoundingBox(160, 330, 220, 120)),
    )
    sel = box_shape(80, 110, 180, 95)
    dst = box_shape(200, 340, 70, 70)
    ins = instr("move", sel, "to", dst)
    out = apply_command(apples, Command(MOVE, selector=sel.box, destination=dst.box))
    examples.append(
        example(
            apples,
            ins,
            out,
            "Move both selected apples toward the plate: the best-covered one adopts the "
            "destination box and the other shifts by the same offset.",
            f"Object 0 becomes {box_str(out.objects[0].box)} and object 1 becomes "
            f"{box_str(out.objects[1].box)}; captions are unchanged.",
        )
    )

    # 4. add at a point (default size, clamped)
    livingroom = scene(
        "a cozy living room",
        SceneObject(0, "a gray sofa", BoundingBox(60, 300, 260, 150)),
        SceneObject(1, "a floor lamp", BoundingBox(400, 180, 70, 260)),
    )
    dst = point_shape(380, 90)
    ins = instr("add a framed painting at", dst)
    out = apply_command(livingroom, Command(ADD, destination=dst.point, caption="a framed painting"))
    examples.append(
        example(
            livingroom,
            ins,
            out,
            "Add a new object captioned 'a framed painting' centered at the marked point.",
            f"A new object 2 appears with box {box_str(out.objects[-1].box)}; "
            "existing objects are untouched.",
        )
    )

    # 5. add into an exact box
    beach = scene(
        "a sandy beach at noon",
        SceneObject(0, "a striped umbrella", BoundingBox(300, 120, 150, 180)),
    )
    dst = box_shape(70, 330, 120, 90)
    ins = instr("add a beach towel at", dst)
    out = apply_command(beach, Command(ADD, destination=dst.box, caption="a beach towel"))
    examples.append(
        example(
            beach,
            ins,
            out,
            "Add a new object captioned 'a beach towel' filling the drawn box exactly.",
            f"A new object 1 appears with box {box_str(out.objects[-1].box)}.",
        )
    )

    # 6. delete a selected object
    desk = scene(
        "a cluttered desk",
        SceneObject(0, "a laptop", BoundingBox(140, 180, 220, 150)),
        SceneObject(1, "a coffee mug", BoundingBox(390, 240, 70, 90)),
        SceneObject(2, "a notebook", BoundingBox(60, 350, 130, 90)),
    )
    sel = box_shape(385, 235, 80, 100)
    ins = instr("delete", sel)
    out = apply_command(desk, Command(DELETE, selector=sel.box))
    examples.append(
        example(
            desk,
            ins,
            out,
            "Remove the selected object from the layout entirely.",
            "Object 1 is removed; objects 0 and 2 are unchanged.",
        )
    )

    # 7. recaption via the canonical verb
    yard = scene(
        "a fenced backyard",
        SceneObject(0, "a white dog", BoundingBox(180, 240, 150, 160)),
    )
    sel = box_shape(175, 235, 160, 170)
    ins = instr("recaption", sel, "to a black dog")
    out = apply_command(yard, Command(RECAPTION, selector=sel.box, caption="a black dog"))
    examples.append(
        example(
            yard,
            ins,
            out,
            "Replace the selected object's caption with 'a black dog'; geometry stays put.",
            "Object 0's caption becomes 'a black dog'; its box does not move.",
        )
    )

    # 8. free-form appearance edit phrased naturally
    dogs2 = scene(
        "a snowy field",
        SceneObject(0, "a white dog", BoundingBox(90, 280, 140, 150)),
        SceneObject(1, "a sled", BoundingBox(300, 300, 160, 110)),
    )
    sel = box_shape(85, 275, 150, 160)
    ins = instr("make the dog in", sel, "black")
    out = replace(
        dogs2,
        objects=(replace(dogs2.objects[0], caption="a black dog"), dogs2.objects[1]),
    )
    examples.append(
        example(
            dogs2,
            ins,
            out,
            "Change the appearance of the selected dog by rewriting its caption to describe "
            "a black dog.",
            "Object 0's caption becomes 'a black dog'; box and id are unchanged.",
        )
    )

    # 9. free-form object swap
    table = scene(
        "a painting of a table with fruit",
        SceneObject(0, "an orange", BoundingBox(210, 300, 90, 90)),
        SceneObject(1, "a pewter bowl", BoundingBox(150, 270, 220, 140)),
    )
    sel = box_shape(205, 295, 100, 100)
    ins = instr("make", sel, "an apple")
    out = replace(
        table,
        objects=(replace(table.objects[0], caption="an apple"), table.objects[1]),
    )
    examples.append(
        example(
            table,
            ins,
            out,
            "Turn the selected object into an apple by rewriting its caption.",
            "Object 0's caption becomes 'an apple'; nothing else changes.",
        )
    )

    # 10. arrow: move the object under the tail to the tip
    balls = scene(
        "a grassy field",
        SceneObject(0, "a red ball", BoundingBox(100, 350, 80, 80)),
        SceneObject(1, "a red ball", BoundingBox(350, 340, 80, 80)),
    )
    arrow = arrow_shape((140, 390), (400, 120))
    ins = instr("move the ball along", arrow)
    moved = move_center_to(balls.objects[0].box, Point(400, 120), CANVAS)
    out = replace(balls, objects=(replace(balls.objects[0], box=moved), balls.objects[1]))
    examples.append(
        example(
            balls,
            ins,
            out,
            "Move the ball under the arrow's tail so its center sits at the arrow's tip.",
            f"Object 0's box becomes {box_str(moved)}; object 1 stays where it is.",
        )
    )

    # 11. free-form relative move
    shelf = scene(
        "a bookshelf against a wall",
        SceneObject(0, "a potted cactus", BoundingBox(330, 60, 90, 110)),
        SceneObject(1, "a row of books", BoundingBox(70, 220, 320, 100)),
    )
    sel = box_shape(325, 55, 100, 120)
    ins = instr("move", sel, "to the left side of the image")
    out = replace(
        shelf,
        objects=(replace(shelf.objects[0], box=BoundingBox(20, 60, 90, 110)), shelf.objects[1]),
    )
    examples.append(
        example(
            shelf,
            ins,
            out,
            "Move the selected object horizontally to the left edge region, keeping its "
            "size and vertical position.",
            "Object 0's box becomes {x: 20, y: 60, width: 90, height: 110}.",
        )
    )

    # 12. background-only edit, no shapes
    street = scene(
        "a quiet street at midday",
        SceneObject(0, "a bicycle", BoundingBox(120, 300, 180, 120)),
    )
    ins = instr("change the background to a quiet street at sunset")
    out = replace(street, background="a quiet street at sunset")
    examples.append(
        example(
            street,
            ins,
            out,
            "Rewrite the background caption; no object is selected or changed.",
            "The background becomes 'a quiet street at sunset'; object 0 is untouched.",
        )
    )

    # 13. move that clamps at the canvas edge
    corner = scene(
        "a studio backdrop",
        SceneObject(0, "a wooden crate", BoundingBox(200, 200, 120, 120)),
        SceneObject(1, "a spotlight", BoundingBox(40, 40, 90, 90)),
    )
    sel = box_shape(195, 195, 130, 130)
    dst = point_shape(500, 500)
    ins = instr("move", sel, "to", dst)
    out = apply_command(corner, Command(MOVE, selector=sel.box, destination=dst.point))
    examples.append(
        example(
            corner,
            ins,
            out,
            "Move the crate so its center approaches the marked point, clamped to stay "
            "fully inside the canvas.",
            f"Object 0's box becomes {box_str(out.objects[0].box)} after clamping.",
        )
    )

    # 14. free-form add anchored to an existing object
    husky = scene(
        "a city sidewalk",
        SceneObject(0, "a husky", BoundingBox(170, 250, 160, 180)),
    )
    sel = box_shape(165, 245, 170, 190)
    ins = instr("put a red party hat on the dog in", sel)
    hat = BoundingBox(210, 190, 80, 60)  # sits on top of the head region
    out = replace(husky, objects=husky.objects + (SceneObject(1, "a red party hat", hat),))
    examples.append(
        example(
            husky,
            ins,
            out,
            "Add a new object captioned 'a red party hat' directly above the selected "
            "dog's head.",
            f"A new object 1 appears with box {box_str(hat)}; the dog is unchanged.",
        )
    )

    # 15. free-form resize
    court = scene(
        "an indoor court",
        SceneObject(0, "a basketball", BoundingBox(230, 330, 60, 60)),
        SceneObject(1, "a hoop", BoundingBox(210, 40, 110, 90)),
    )
    sel = box_shape(225, 325, 70, 70)
    ins = instr("make the ball in", sel, "twice as big")
    grown = BoundingBox(200, 300, 120, 120)  # doubled size, same center
    out = replace(court, objects=(replace(court.objects[0], box=grown), court.objects[1]))
    examples.append(
        example(
            court,
            ins,
            out,
            "Scale the selected ball to twice its width and height around its center.",
            f"Object 0's box becomes {box_str(grown)}; the hoop is unchanged.",
        )
    )

    return examples


def build_generation_examples() -> list[dict]:
    scenes = [
        (
            "a painting of a table with three oranges",
            scene(
                "a painting of a wooden table",
                SceneObject(0, "an orange", BoundingBox(60, 390, 100, 100)),
                SceneObject(1, "an orange", BoundingBox(200, 385, 100, 100)),
                SceneObject(2, "an orange", BoundingBox(340, 395, 100, 100)),
            ),
            "A wooden table backdrop with three oranges resting along its surface near the bottom.",
        ),
        (
            "a white dog playing in a park",
            scene(
                "a sunny park with trees",
                SceneObject(0, "a white dog", BoundingBox(180, 260, 150, 160)),
                SceneObject(1, "a yellow tennis ball", BoundingBox(90, 380, 50, 50)),
            ),
            "A park backdrop, a white dog mid-frame, and a tennis ball on the grass beside it.",
        ),
        (
            "two sailboats on a calm sea",
            scene(
                "a calm sea under a pale sky",
                SceneObject(0, "a sailboat", BoundingBox(90, 200, 130, 170)),
                SceneObject(1, "a sailboat", BoundingBox(310, 230, 110, 140)),
            ),
            "Open water with two sailboats at different distances, the nearer one larger.",
        ),
        (
            "a cat sleeping on a red sofa",
            scene(
                "a living room wall",
                SceneObject(0, "a red sofa", BoundingBox(60, 280, 380, 170)),
                SceneObject(1, "a sleeping cat", BoundingBox(200, 250, 140, 90)),
            ),
            "A wide red sofa low in the frame with a curled-up cat on its cushion.",
        ),
        (
            "a bowl of fruit on a kitchen counter",
            scene(
                "a tiled kitchen counter",
                SceneObject(0, "a ceramic bowl", BoundingBox(140, 280, 230, 130)),
                SceneObject(1, "a bunch of grapes", BoundingBox(170, 240, 90, 70)),
                SceneObject(2, "a green pear", BoundingBox(280, 245, 70, 70)),
            ),
            "A bowl centered on the counter with grapes and a pear peeking over its rim.",
        ),
    ]
    entries = []
    for prompt, layout, plan in scenes:
        cot = (("Which objects should the scene contain and where?", plan),)
        # reuse the same authoring-time consistency check
        pairs, parsed = parse_completion(render_assistant_turn(cot, serialize_layout(layout)))
        assert pairs == list(cot) and parsed == layout
        entries.append(
            {
                "prompt": prompt,
                "chain_of_thought": [{"question": q, "answer": a} for q, a in cot],
                "layout": layout_to_jsonable(layout),
            }
        )
    return entries


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    corpus = {"version": "1", "examples": build_edit_examples()}
    (DATA_DIR / "corpus.json").write_text(json.dumps(corpus, indent=2) + "\n", encoding="utf-8")
    generation = {"version": "1", "examples": build_generation_examples()}
    (DATA_DIR / "generation_corpus.json").write_text(
        json.dumps(generation, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {DATA_DIR / 'corpus.json'} ({len(corpus['examples'])} examples)")
    print(f"wrote {DATA_DIR / 'generation_corpus.json'} ({len(generation['examples'])} examples)")


if __name__ == "__main__":
    main()
