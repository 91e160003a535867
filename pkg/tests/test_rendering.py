from __future__ import annotations

import base64
import threading
import xml.etree.ElementTree as ET
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from layoutedit.errors import (
    ConfigError,
    RendererProtocolError,
    RendererRejected,
    RendererUnavailable,
)
from layoutedit.geometry import BoundingBox, Canvas, Layout, SceneObject
from layoutedit.layout_text import serialize_layout
from layoutedit.rendering import (
    DiffusionHttpRenderer,
    RenderBackendConfig,
    caption_hue,
    fnv1a64,
    layout_hash,
    render_mock,
)

SVG_NS = "{http://www.w3.org/2000/svg}"

# smallest valid PNG (1x1, transparent)
TINY_PNG = base64.b64decode(
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mNk"
    "YPhfDwAChwGA60e6kgAAAABJRU5ErkJggg=="
)


def layout_with(*objects: SceneObject) -> Layout:
    return Layout(Canvas(512, 512), "a plain wall", tuple(objects))


class TestCaptionHash:
    def test_fnv1a64_known_values(self):
        # recomputed by hand: offset-basis xor byte, times prime, mod 2^64
        assert fnv1a64("a") == 0xAF63DC4C8601EC8C
        assert fnv1a64("a red ball") == 15713552875848491560

    def test_hue_is_hash_mod_360(self):
        assert caption_hue("a red ball") == 40
        assert caption_hue("a") == 196


class TestRenderMock:
    def test_byte_determinism(self):
        layout = layout_with(SceneObject(0, "a dog", BoundingBox(10, 20, 30, 40)))
        assert render_mock(layout).data == render_mock(layout).data

    def test_empty_layout_has_background_rect_only(self):
        artifact = render_mock(layout_with())
        root = ET.fromstring(artifact.data)
        rects = root.findall(f"{SVG_NS}rect")
        assert len(rects) == 1
        assert rects[0].get("width") == "512"
        assert artifact.media_type == "image/svg+xml"

    def test_equal_captions_equal_fills(self):
        layout = layout_with(
            SceneObject(0, "an orange", BoundingBox(10, 10, 40, 40)),
            SceneObject(1, "an orange", BoundingBox(100, 100, 40, 40)),
            SceneObject(2, "a plum", BoundingBox(200, 200, 40, 40)),
        )
        root = ET.fromstring(render_mock(layout).data)
        fills = [r.get("fill") for r in root.findall(f"{SVG_NS}rect")[1:]]
        assert fills[0] == fills[1]
        assert fills[0] != fills[2]

    def test_rect_coordinates_match_boxes_exactly(self):
        layout = layout_with(
            SceneObject(0, "a dog", BoundingBox(150, 400, 100, 100)),
            SceneObject(1, "a cat", BoundingBox(5, 6, 7, 8)),
        )
        root = ET.fromstring(render_mock(layout).data)
        rects = root.findall(f"{SVG_NS}rect")[1:]
        got = [
            tuple(int(r.get(k)) for k in ("x", "y", "width", "height"))
            for r in rects
        ]
        assert got == [(150, 400, 100, 100), (5, 6, 7, 8)]

    def test_captions_rendered_at_box_origin(self):
        layout = layout_with(SceneObject(0, "a <weird> & dog", BoundingBox(10, 20, 30, 40)))
        root = ET.fromstring(render_mock(layout).data)
        text = root.find(f"{SVG_NS}text")
        assert text is not None
        assert (text.get("x"), text.get("y")) == ("10", "20")
        assert text.text == "a <weird> & dog"

    def test_layout_hash_matches_canonical_text(self):
        import hashlib

        layout = layout_with(SceneObject(0, "a dog", BoundingBox(1, 2, 3, 4)))
        artifact = render_mock(layout)
        expected = hashlib.sha256(serialize_layout(layout).encode()).hexdigest()
        assert artifact.layout_hash == expected
        assert layout_hash(layout) == expected


class PngServer:
    def __init__(self, status: int = 200, body: bytes = TINY_PNG, content_type: str = "image/png"):
        self.received: list[bytes] = []
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):  # noqa: N802
                length = int(self.headers.get("Content-Length", 0))
                outer.received.append(self.rfile.read(length))
                self.send_response(status)
                self.send_header("Content-Type", content_type)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        threading.Thread(target=self.server.serve_forever, daemon=True).start()

    @property
    def url(self) -> str:
        host, port = self.server.server_address
        return f"http://{host}:{port}/render"

    def close(self):
        self.server.shutdown()
        self.server.server_close()


class TestDiffusionHttp:
    def test_png_round_trip(self):
        server = PngServer()
        try:
            config = RenderBackendConfig(kind="diffusion-http", endpoint=server.url, timeout=5)
            renderer = DiffusionHttpRenderer(config)
            layout = layout_with(SceneObject(0, "a dog", BoundingBox(1, 2, 3, 4)))
            artifact = renderer.render(layout)
            assert artifact.media_type == "image/png"
            assert artifact.data == TINY_PNG
            assert artifact.renderer_id == "diffusion-http"
            # the request body is the canonical layout text, byte for byte
            assert server.received[0] == serialize_layout(layout).encode()
        finally:
            server.close()

    def test_422_is_rejected(self):
        server = PngServer(status=422, body=b"bad layout", content_type="text/plain")
        try:
            config = RenderBackendConfig(kind="diffusion-http", endpoint=server.url, timeout=5)
            with pytest.raises(RendererRejected):
                DiffusionHttpRenderer(config).render(layout_with())
        finally:
            server.close()

    def test_non_png_body_is_protocol_error(self):
        server = PngServer(body=b"<html>nope</html>", content_type="text/html")
        try:
            config = RenderBackendConfig(kind="diffusion-http", endpoint=server.url, timeout=5)
            with pytest.raises(RendererProtocolError):
                DiffusionHttpRenderer(config).render(layout_with())
        finally:
            server.close()

    def test_unreachable_endpoint_unavailable(self):
        config = RenderBackendConfig(
            kind="diffusion-http", endpoint="http://127.0.0.1:1/render", timeout=0.2
        )
        with pytest.raises(RendererUnavailable):
            DiffusionHttpRenderer(config).render(layout_with())

    def test_config_invariants(self):
        with pytest.raises(ConfigError):
            RenderBackendConfig(kind="diffusion-http")
        with pytest.raises(ConfigError):
            RenderBackendConfig(kind="mock", endpoint="http://x")
        with pytest.raises(ConfigError):
            RenderBackendConfig(kind="watercolor")
