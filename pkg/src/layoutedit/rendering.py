"""Layout-to-image rendering backends.

``mock`` draws the layout as a deterministic SVG: a background wash and
one translucent labeled rectangle per object, with colors derived from
caption hashes so equal captions always render alike. ``diffusion-http``
posts the canonical layout JSON to an external generation service and
expects a PNG back; the heavy lifting lives entirely behind that seam.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from xml.sax.saxutils import escape

import httpx

from .errors import (
    ConfigError,
    RendererProtocolError,
    RendererRejected,
    RendererUnavailable,
)
from .geometry import Layout
from .layout_text import serialize_layout

SVG_MEDIA_TYPE = "image/svg+xml"
PNG_MEDIA_TYPE = "image/png"
PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class RenderArtifact:
    data: bytes
    media_type: str
    renderer_id: str
    layout_hash: str

    def __post_init__(self) -> None:
        if not self.data:
            raise RendererProtocolError("render artifact must not be empty")


@dataclass(frozen=True)
class RenderBackendConfig:
    kind: str = "mock"  # or "diffusion-http"
    endpoint: str = ""
    timeout: float = 300.0
    max_in_flight: int = 2

    def __post_init__(self) -> None:
        if self.kind not in ("mock", "diffusion-http"):
            raise ConfigError(f"unknown renderer kind {self.kind!r}")
        if (self.kind == "diffusion-http") != bool(self.endpoint):
            raise ConfigError("endpoint is required exactly when kind is diffusion-http")


def fnv1a64(text: str) -> int:
    value = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        value = ((value ^ byte) * _FNV_PRIME) & _MASK64
    return value


def caption_hue(caption: str) -> int:
    return fnv1a64(caption) % 360


def layout_hash(layout: Layout) -> str:
    return hashlib.sha256(serialize_layout(layout).encode("utf-8")).hexdigest()


def render_mock(layout: Layout) -> RenderArtifact:
    """Deterministic SVG rendering: identical layouts yield identical bytes."""
    width, height = layout.canvas.width, layout.canvas.height
    background_hue = caption_hue(layout.background)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'  <rect x="0" y="0" width="{width}" height="{height}" '
        f'fill="hsl({background_hue}, 40%, 85%)"/>',
    ]
    for obj in layout.objects:
        hue = caption_hue(obj.caption)
        color = f"hsl({hue}, 70%, 60%)"
        b = obj.box
        parts.append(
            f'  <rect x="{b.x}" y="{b.y}" width="{b.width}" height="{b.height}" '
            f'fill="{color}" fill-opacity="0.3" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'  <text x="{b.x}" y="{b.y}" dominant-baseline="hanging" '
            f'font-family="sans-serif" font-size="12">{escape(obj.caption)}</text>'
        )
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    return RenderArtifact(
        data=svg.encode("utf-8"),
        media_type=SVG_MEDIA_TYPE,
        renderer_id="mock",
        layout_hash=layout_hash(layout),
    )


class DiffusionHttpRenderer:
    """Adapter to an external layout-to-image HTTP service.

    Wire contract: POST the canonical layout JSON (application/json) to the
    endpoint; a 2xx response must carry a PNG body. Concurrency toward the
    service is capped by ``max_in_flight``.
    """

    def __init__(self, config: RenderBackendConfig, transport: httpx.BaseTransport | None = None):
        if config.kind != "diffusion-http":
            raise ConfigError("DiffusionHttpRenderer requires kind=diffusion-http")
        self.config = config
        self._gate = threading.Semaphore(config.max_in_flight)
        self._http = httpx.Client(timeout=config.timeout, transport=transport)

    def render(self, layout: Layout) -> RenderArtifact:
        body = serialize_layout(layout).encode("utf-8")
        with self._gate:
            try:
                response = self._http.post(
                    self.config.endpoint,
                    content=body,
                    headers={"Content-Type": "application/json"},
                )
            except httpx.HTTPError as exc:
                raise RendererUnavailable(f"renderer unavailable: {type(exc).__name__}") from exc
        if not 200 <= response.status_code < 300:
            raise RendererRejected(
                f"renderer rejected layout: HTTP {response.status_code}: {response.text[:200]}"
            )
        if not response.content.startswith(PNG_MAGIC):
            raise RendererProtocolError("renderer protocol error: body is not a PNG image")
        return RenderArtifact(
            data=response.content,
            media_type=PNG_MEDIA_TYPE,
            renderer_id="diffusion-http",
            layout_hash=layout_hash(layout),
        )

    def close(self) -> None:
        self._http.close()


def render_diffusion(config: RenderBackendConfig, layout: Layout) -> RenderArtifact:
    renderer = DiffusionHttpRenderer(config)
    try:
        return renderer.render(layout)
    finally:
        renderer.close()
