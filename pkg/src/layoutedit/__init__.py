"""Image editing over object layouts.

Images are represented as layouts (a canvas, a background caption, and
captioned bounding boxes). Users combine drawn geometry with natural
language; instructions either run on a deterministic interpreter or are
serialized into an in-context LLM prompt, validated, and rendered through
pluggable backends.
"""

from .errors import LayoutEditError
from .geometry import (
    BoundingBox,
    Canvas,
    DEFAULT_CANVAS,
    Layout,
    Point,
    SceneObject,
    clamp_to_canvas,
    coverage,
    iou,
    move_center_to,
    resolve_selection,
)
from .instruction import (
    MultimodalInstruction,
    Shape,
    Token,
    arrow_shape,
    box_shape,
    parse_inline_instruction,
    parse_shape,
    point_shape,
    serialize_instruction,
    serialize_shape,
)
from .layout_text import (
    extract_layout_block,
    layout_from_jsonable,
    layout_to_jsonable,
    parse_layout,
    serialize_layout,
)
from .oracle import Command, apply_command, parse_command
from .prompting import (
    ExampleCorpus,
    InContextExample,
    PromptBundle,
    build_generation_prompt,
    build_prompt,
    load_corpus,
    load_generation_corpus,
    parse_completion,
)
from .llm import HttpLlmClient, LlmConfig, StubLlmClient, StubScript
from .rendering import RenderArtifact, RenderBackendConfig, render_diffusion, render_mock
from .service import EditingService, EditRecord, Session, SessionStore
from .validation import ValidationReport, validate_edit, validate_structure

__version__ = "0.1.0"
