// Annotation canvas: five tools (select, erase, box, arrow, star) drawing
// onto an SVG overlay. Drawn shapes are annotations referenced from the
// instruction text, not scene objects; select/erase act on them only.

import type { CanvasShape, Shape, ToolName } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const MIN_BOX_SIZE = 4;

const PALETTE = ["#00bcd4", "#e91e63", "#8bc34a", "#ff9800", "#9c27b0", "#3f51b5"];

export interface CanvasCallbacks {
  onShapeAdded(shape: CanvasShape): void;
  onShapeErased(shapeId: string): void;
}

export class AnnotationCanvas {
  readonly svg: SVGSVGElement;
  tool: ToolName = "select";
  private shapes = new Map<string, CanvasShape>();
  private counter = 0;
  private width: number;
  private height: number;
  private callbacks: CanvasCallbacks;
  private dragStart: { x: number; y: number } | null = null;
  private selectedId: string | null = null;

  constructor(
    host: HTMLElement,
    width: number,
    height: number,
    callbacks: CanvasCallbacks
  ) {
    this.width = width;
    this.height = height;
    this.callbacks = callbacks;
    this.svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("class", "annotation-layer");
    this.svg.setAttribute("width", String(width));
    this.svg.setAttribute("height", String(height));
    this.svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    host.appendChild(this.svg);

    this.svg.addEventListener("mousedown", (event) => this.onDown(event as MouseEvent));
    this.svg.addEventListener("mouseup", (event) => this.onUp(event as MouseEvent));
  }

  setTool(tool: ToolName): void {
    this.tool = tool;
  }

  setCanvasSize(width: number, height: number): void {
    this.width = width;
    this.height = height;
    this.svg.setAttribute("width", String(width));
    this.svg.setAttribute("height", String(height));
    this.svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  }

  shapeIds(): string[] {
    return Array.from(this.shapes.keys());
  }

  getShape(shapeId: string): CanvasShape | undefined {
    return this.shapes.get(shapeId);
  }

  /** Remove a shape (chip-side removal or erase tool). */
  removeShape(shapeId: string): void {
    if (!this.shapes.delete(shapeId)) {
      return;
    }
    if (this.selectedId === shapeId) {
      this.selectedId = null;
    }
    this.svg.querySelectorAll(`[data-shape-id="${shapeId}"]`).forEach((n) => n.remove());
  }

  clear(): void {
    for (const shapeId of this.shapeIds()) {
      this.removeShape(shapeId);
    }
  }

  selected(): string | null {
    return this.selectedId;
  }

  private point(event: MouseEvent): { x: number; y: number } {
    const rect = this.svg.getBoundingClientRect();
    const x = Math.round(event.clientX - rect.left);
    const y = Math.round(event.clientY - rect.top);
    return {
      x: Math.min(Math.max(x, 0), this.width - 1),
      y: Math.min(Math.max(y, 0), this.height - 1),
    };
  }

  private onDown(event: MouseEvent): void {
    const at = this.point(event);
    if (this.tool === "box" || this.tool === "arrow") {
      this.dragStart = at;
      return;
    }
    if (this.tool === "star") {
      this.addShape({ kind: "point", x: at.x, y: at.y });
      return;
    }
    const hit = this.hitTest(at.x, at.y);
    if (this.tool === "erase") {
      if (hit) {
        this.removeShape(hit);
        this.callbacks.onShapeErased(hit);
      }
      return;
    }
    // select tool
    this.selectedId = hit;
    this.svg.querySelectorAll(".shape-selected").forEach((n) => n.classList.remove("shape-selected"));
    if (hit) {
      this.svg
        .querySelectorAll(`[data-shape-id="${hit}"]`)
        .forEach((n) => n.classList.add("shape-selected"));
    }
  }

  private onUp(event: MouseEvent): void {
    if (!this.dragStart) {
      return;
    }
    const start = this.dragStart;
    this.dragStart = null;
    const end = this.point(event);
    if (this.tool === "box") {
      const x = Math.min(start.x, end.x);
      const y = Math.min(start.y, end.y);
      const width = Math.abs(end.x - start.x);
      const height = Math.abs(end.y - start.y);
      if (width < MIN_BOX_SIZE || height < MIN_BOX_SIZE) {
        return; // degenerate drag: nothing added
      }
      this.addShape({ kind: "box", x, y, width, height });
    } else if (this.tool === "arrow") {
      if (start.x === end.x && start.y === end.y) {
        return;
      }
      this.addShape({
        kind: "arrow",
        from: { x: start.x, y: start.y },
        to: { x: end.x, y: end.y },
      });
    }
  }

  private addShape(shape: Shape): void {
    this.counter += 1;
    const shapeId = `s${this.counter}`;
    const color = PALETTE[(this.counter - 1) % PALETTE.length];
    const canvasShape: CanvasShape = { shapeId, shape, color };
    this.shapes.set(shapeId, canvasShape);
    this.draw(canvasShape);
    this.callbacks.onShapeAdded(canvasShape);
  }

  private draw(canvasShape: CanvasShape): void {
    const { shape, shapeId, color } = canvasShape;
    if (shape.kind === "box") {
      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("x", String(shape.x));
      rect.setAttribute("y", String(shape.y));
      rect.setAttribute("width", String(shape.width));
      rect.setAttribute("height", String(shape.height));
      rect.setAttribute("fill", "none");
      rect.setAttribute("stroke", color);
      rect.setAttribute("stroke-width", "2");
      rect.setAttribute("class", "shape shape-box");
      rect.dataset.shapeId = shapeId;
      this.svg.appendChild(rect);
    } else if (shape.kind === "point") {
      const star = document.createElementNS(SVG_NS, "text");
      star.setAttribute("x", String(shape.x));
      star.setAttribute("y", String(shape.y));
      star.setAttribute("fill", color);
      star.setAttribute("text-anchor", "middle");
      star.setAttribute("dominant-baseline", "central");
      star.setAttribute("class", "shape shape-star");
      star.textContent = "★";
      star.dataset.shapeId = shapeId;
      this.svg.appendChild(star);
    } else {
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(shape.from.x));
      line.setAttribute("y1", String(shape.from.y));
      line.setAttribute("x2", String(shape.to.x));
      line.setAttribute("y2", String(shape.to.y));
      line.setAttribute("stroke", color);
      line.setAttribute("stroke-width", "2");
      line.setAttribute("class", "shape shape-arrow");
      line.dataset.shapeId = shapeId;
      const head = document.createElementNS(SVG_NS, "text");
      head.setAttribute("x", String(shape.to.x));
      head.setAttribute("y", String(shape.to.y));
      head.setAttribute("fill", color);
      head.setAttribute("class", "shape shape-arrowhead");
      head.textContent = "➤";
      head.dataset.shapeId = shapeId;
      this.svg.appendChild(line);
      this.svg.appendChild(head);
    }
  }

  private hitTest(x: number, y: number): string | null {
    const entries = Array.from(this.shapes.values()).reverse(); // last drawn wins
    for (const { shapeId, shape } of entries) {
      if (shape.kind === "box") {
        if (
          x >= shape.x - 3 &&
          x <= shape.x + shape.width + 3 &&
          y >= shape.y - 3 &&
          y <= shape.y + shape.height + 3
        ) {
          return shapeId;
        }
      } else if (shape.kind === "point") {
        if (Math.abs(x - shape.x) <= 8 && Math.abs(y - shape.y) <= 8) {
          return shapeId;
        }
      } else {
        if (distanceToSegment(x, y, shape.from, shape.to) <= 6) {
          return shapeId;
        }
      }
    }
    return null;
  }
}

function distanceToSegment(
  px: number,
  py: number,
  a: { x: number; y: number },
  b: { x: number; y: number }
): number {
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const lengthSquared = dx * dx + dy * dy;
  let t = lengthSquared === 0 ? 0 : ((px - a.x) * dx + (py - a.y) * dy) / lengthSquared;
  t = Math.max(0, Math.min(1, t));
  const cx = a.x + t * dx;
  const cy = a.y + t * dy;
  return Math.hypot(px - cx, py - cy);
}
