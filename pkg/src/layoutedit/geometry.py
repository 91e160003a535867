"""Layout data model and deterministic spatial operations.

Coordinates are integer pixels with the origin at the canvas top-left;
y grows downward. A box (x, y, w, h) occupies the half-open pixel cells
[x, x+w) x [y, y+h), which is the convention the pixel-grid test oracle
counts with.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import GeometryError, UnplaceableBoxError

SELECTION_COVERAGE_THRESHOLD = Fraction(7, 10)


def _require_int(name: str, value: object) -> None:
    # bool is an int subclass; reject it explicitly.
    if isinstance(value, bool) or not isinstance(value, int):
        raise GeometryError(f"{name} must be an integer, got {value!r}")


@dataclass(frozen=True)
class Point:
    x: int
    y: int

    def __post_init__(self) -> None:
        _require_int("x", self.x)
        _require_int("y", self.y)
        if self.x < 0 or self.y < 0:
            raise GeometryError(f"point coordinates must be non-negative, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class BoundingBox:
    x: int
    y: int
    width: int
    height: int

    def __post_init__(self) -> None:
        for name in ("x", "y", "width", "height"):
            _require_int(name, getattr(self, name))
        if self.width < 1 or self.height < 1:
            raise GeometryError(f"box must have positive size, got {self.width}x{self.height}")

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def center(self) -> tuple[int, int]:
        return (self.x + self.width // 2, self.y + self.height // 2)

    def contains_point(self, p: Point) -> bool:
        return self.x <= p.x < self.x + self.width and self.y <= p.y < self.y + self.height

    def translated(self, dx: int, dy: int) -> "BoundingBox":
        return replace(self, x=self.x + dx, y=self.y + dy)


@dataclass(frozen=True)
class Canvas:
    width: int
    height: int

    def __post_init__(self) -> None:
        _require_int("width", self.width)
        _require_int("height", self.height)
        if self.width < 16 or self.height < 16:
            raise GeometryError(f"canvas must be at least 16x16, got {self.width}x{self.height}")

    def contains_box(self, box: BoundingBox) -> bool:
        return (
            box.x >= 0
            and box.y >= 0
            and box.x + box.width <= self.width
            and box.y + box.height <= self.height
        )


DEFAULT_CANVAS = Canvas(512, 512)


@dataclass(frozen=True)
class SceneObject:
    id: int
    caption: str
    box: BoundingBox

    def __post_init__(self) -> None:
        _require_int("id", self.id)
        if self.id < 0:
            raise GeometryError(f"object id must be non-negative, got {self.id}")
        if not self.caption.strip():
            raise GeometryError(f"object {self.id} has an empty caption")


@dataclass(frozen=True)
class Layout:
    """Canvas, background caption, and an ordered list of captioned boxes.

    Object order is significant and survives serialization round trips.
    Id uniqueness is deliberately not enforced here: the strict parser and
    the structural validator check it, so that a malformed in-memory layout
    can still be constructed, inspected, and reported on.
    """

    canvas: Canvas
    background: str
    objects: tuple[SceneObject, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.objects, tuple):
            object.__setattr__(self, "objects", tuple(self.objects))

    def object_ids(self) -> list[int]:
        return [obj.id for obj in self.objects]

    def find(self, object_id: int) -> SceneObject | None:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        return None

    def has_unique_ids(self) -> bool:
        ids = self.object_ids()
        return len(ids) == len(set(ids))


def intersection_area(a: BoundingBox, b: BoundingBox) -> int:
    iw = min(a.x + a.width, b.x + b.width) - max(a.x, b.x)
    ih = min(a.y + a.height, b.y + b.height) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0
    return iw * ih


def iou(a: BoundingBox, b: BoundingBox) -> Fraction:
    """Intersection-over-union of two boxes, exact in [0, 1]."""
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    return Fraction(inter, union)


def coverage(selector: BoundingBox, obj: BoundingBox) -> Fraction:
    """Fraction of ``obj``'s area covered by ``selector``, exact in [0, 1]."""
    return Fraction(intersection_area(selector, obj), obj.area)


def resolve_selection(layout: Layout, selector: BoundingBox) -> list[int]:
    """Resolve which objects a drawn selector box picks.

    All objects with coverage >= 0.7 qualify, ordered by descending
    coverage then ascending id. If none qualifies, falls back to the single
    object with maximal IoU (provided IoU > 0, ties broken by ascending id).
    An empty result means the selector hit nothing.
    """
    covered: list[tuple[Fraction, int]] = []
    for obj in layout.objects:
        c = coverage(selector, obj.box)
        if c >= SELECTION_COVERAGE_THRESHOLD:
            covered.append((c, obj.id))
    if covered:
        covered.sort(key=lambda pair: (-pair[0], pair[1]))
        return [object_id for _, object_id in covered]

    best: tuple[Fraction, int] | None = None
    for obj in layout.objects:
        score = iou(selector, obj.box)
        if score == 0:
            continue
        if best is None or score > best[0] or (score == best[0] and obj.id < best[1]):
            best = (score, obj.id)
    return [best[1]] if best is not None else []


def clamp_to_canvas(box: BoundingBox, canvas: Canvas) -> BoundingBox:
    """Minimal translation of ``box`` so it lies fully inside ``canvas``.

    Size is never changed; a box larger than the canvas cannot be placed.
    """
    if box.width > canvas.width or box.height > canvas.height:
        raise UnplaceableBoxError(
            f"box {box.width}x{box.height} does not fit canvas {canvas.width}x{canvas.height}"
        )
    x = min(max(box.x, 0), canvas.width - box.width)
    y = min(max(box.y, 0), canvas.height - box.height)
    return BoundingBox(x, y, box.width, box.height)


def move_center_to(box: BoundingBox, target: Point, canvas: Canvas) -> BoundingBox:
    """Re-place ``box`` so its center sits at ``target``, then clamp.

    The center of a box is top-left + floor(size / 2). Clamping translates
    the result back inside the canvas without resizing.
    """
    if box.width > canvas.width or box.height > canvas.height:
        raise UnplaceableBoxError(
            f"box {box.width}x{box.height} does not fit canvas {canvas.width}x{canvas.height}"
        )
    if target.x >= canvas.width or target.y >= canvas.height:
        raise GeometryError(
            f"target ({target.x}, {target.y}) outside canvas {canvas.width}x{canvas.height}"
        )
    moved = BoundingBox(
        target.x - box.width // 2,
        target.y - box.height // 2,
        box.width,
        box.height,
    )
    return clamp_to_canvas(moved, canvas)


def clamp_layout(layout: Layout) -> Layout:
    """Clamp every object's box to the canvas (used by the clamp policy)."""
    objects = tuple(
        replace(obj, box=clamp_to_canvas(obj.box, layout.canvas)) for obj in layout.objects
    )
    return replace(layout, objects=objects)
