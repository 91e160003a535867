// Minimal stand-in for the editing service, for scripted UI tests.
//
// Speaks just enough of the HTTP API: session creation from a prompt,
// one canned "move" transform per instruction, mock-style SVG rendering
// of the current layout, and undo. Records raw request bodies so tests
// can assert the client submitted canonical bytes.

import { createServer, type Server } from "node:http";
import type { AddressInfo } from "node:net";

interface Box {
  x: number;
  y: number;
  width: number;
  height: number;
}

interface SceneObject {
  id: number;
  caption: string;
  box: Box;
}

interface Layout {
  canvas: { width: number; height: number };
  background: string;
  objects: SceneObject[];
}

const INITIAL_LAYOUT: Layout = {
  canvas: { width: 512, height: 512 },
  background: "a sunny backyard",
  objects: [
    { id: 0, caption: "a white dog", box: { x: 120, y: 160, width: 140, height: 120 } },
    { id: 1, caption: "a shade tree", box: { x: 330, y: 40, width: 150, height: 300 } },
  ],
};

function clone(layout: Layout): Layout {
  return JSON.parse(JSON.stringify(layout)) as Layout;
}

function renderSvg(layout: Layout): string {
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${layout.canvas.width}" height="${layout.canvas.height}">`,
    `<rect x="0" y="0" width="${layout.canvas.width}" height="${layout.canvas.height}" fill="hsl(90, 40%, 85%)"/>`,
  ];
  for (const object of layout.objects) {
    const b = object.box;
    parts.push(
      `<rect x="${b.x}" y="${b.y}" width="${b.width}" height="${b.height}" fill="hsl(200, 70%, 60%)" fill-opacity="0.3" stroke="hsl(200, 70%, 60%)" stroke-width="2"/>`
    );
    parts.push(`<text x="${b.x}" y="${b.y}">${object.caption}</text>`);
  }
  parts.push("</svg>");
  return parts.join("\n");
}

export interface StubServer {
  url: string;
  receivedInstructionBodies: string[];
  currentLayout(): Layout;
  close(): Promise<void>;
}

export function startStubServer(): Promise<StubServer> {
  let current = clone(INITIAL_LAYOUT);
  const history: Layout[] = [];
  const receivedInstructionBodies: string[] = [];

  const server: Server = createServer((request, response) => {
    const chunks: Buffer[] = [];
    request.on("data", (chunk: Buffer) => chunks.push(chunk));
    request.on("end", () => {
      const body = Buffer.concat(chunks).toString("utf-8");
      const url = request.url ?? "";
      const headers: Record<string, string> = {
        "Access-Control-Allow-Origin": "*",
        "Access-Control-Allow-Methods": "GET, POST, OPTIONS",
        "Access-Control-Allow-Headers": "Content-Type",
      };

      const reply = (status: number, payload: string, contentType = "application/json") => {
        response.writeHead(status, { ...headers, "Content-Type": contentType });
        response.end(payload);
      };

      if (request.method === "OPTIONS") {
        reply(204, "");
        return;
      }
      if (request.method === "POST" && url === "/v1/sessions") {
        current = clone(INITIAL_LAYOUT);
        history.length = 0;
        reply(201, JSON.stringify({ session_id: "stub-session", layout: current }));
        return;
      }
      if (request.method === "POST" && url.endsWith("/instructions")) {
        receivedInstructionBodies.push(body);
        history.push(clone(current));
        // canned transform: recenter object 0 at the submitted point shape,
        // or fall back to a fixed spot
        const parsed = JSON.parse(body) as {
          shapes?: Record<string, { kind: string; x?: number; y?: number }>;
        };
        let target = { x: 144, y: 132 };
        for (const shape of Object.values(parsed.shapes ?? {})) {
          if (shape.kind === "point" && shape.x !== undefined && shape.y !== undefined) {
            target = { x: shape.x, y: shape.y };
          }
        }
        const moved = current.objects[0];
        moved.box.x = target.x - Math.floor(moved.box.width / 2);
        moved.box.y = target.y - Math.floor(moved.box.height / 2);
        reply(
          200,
          JSON.stringify({
            layout: current,
            validation: { ok: true, checks: [{ rule_id: "frame", passed: true, detail: "" }] },
            engine: "oracle",
          })
        );
        return;
      }
      if (request.method === "POST" && url.endsWith("/undo")) {
        const previous = history.pop();
        if (!previous) {
          reply(409, JSON.stringify({ error: "nothing to undo", message: "nothing to undo" }));
          return;
        }
        current = previous;
        reply(200, JSON.stringify({ layout: current }));
        return;
      }
      if (request.method === "GET" && url.includes("/render")) {
        reply(200, renderSvg(current), "image/svg+xml");
        return;
      }
      if (request.method === "GET" && url.startsWith("/v1/sessions/")) {
        reply(200, JSON.stringify({ layout: current, history: [] }));
        return;
      }
      reply(404, JSON.stringify({ error: "not found", message: url }));
    });
  });

  return new Promise((resolve) => {
    server.listen(0, "127.0.0.1", () => {
      const address = server.address() as AddressInfo;
      resolve({
        url: `http://127.0.0.1:${address.port}`,
        receivedInstructionBodies,
        currentLayout: () => current,
        close: () =>
          new Promise<void>((done) => {
            server.close(() => done());
          }),
      });
    });
  });
}
