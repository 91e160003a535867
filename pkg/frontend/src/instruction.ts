// Instruction box model: text segments interleaved with shape chips.
//
// The model owns the chip/shape bijection: every drawn shape has exactly
// one chip and erasing either side removes both. The rendered DOM is a
// sequence of <input> text segments and <span class="chip"> elements.

import type { CanvasShape, Shape, Token } from "./types.js";

interface ChipEntry {
  kind: "chip";
  shapeId: string;
}

interface TextEntry {
  kind: "text";
  value: string;
}

type Entry = ChipEntry | TextEntry;

const CHIP_GLYPHS: Record<Shape["kind"], string> = {
  box: "□", // white square
  point: "★", // black star
  arrow: "→", // rightwards arrow
};

export class InstructionBox {
  readonly element: HTMLElement;
  private entries: Entry[] = [{ kind: "text", value: "" }];
  private shapes = new Map<string, CanvasShape>();
  private onChipRemoved: (shapeId: string) => void;

  constructor(element: HTMLElement, onChipRemoved: (shapeId: string) => void = () => {}) {
    this.element = element;
    this.element.classList.add("instruction-box");
    this.onChipRemoved = onChipRemoved;
    this.render();
  }

  /** Append a chip for a newly drawn shape (always at the end, followed
   * by a fresh text segment the user can keep typing into). */
  addShape(canvasShape: CanvasShape): void {
    this.captureText();
    this.shapes.set(canvasShape.shapeId, canvasShape);
    this.entries.push({ kind: "chip", shapeId: canvasShape.shapeId });
    this.entries.push({ kind: "text", value: "" });
    this.render();
  }

  /** Remove a shape's chip (canvas-side erase). */
  removeShape(shapeId: string): void {
    if (!this.shapes.has(shapeId)) {
      return;
    }
    this.captureText();
    this.shapes.delete(shapeId);
    this.entries = mergeAdjacentText(
      this.entries.filter((e) => e.kind !== "chip" || e.shapeId !== shapeId)
    );
    this.render();
  }

  /** User removed the chip from the text box: drop the shape too. */
  removeChipFromText(shapeId: string): void {
    this.removeShape(shapeId);
    this.onChipRemoved(shapeId);
  }

  clear(): void {
    this.entries = [{ kind: "text", value: "" }];
    this.shapes.clear();
    this.render();
  }

  shapeIds(): string[] {
    return this.entries.filter((e): e is ChipEntry => e.kind === "chip").map((e) => e.shapeId);
  }

  chipElements(): HTMLElement[] {
    return Array.from(this.element.querySelectorAll<HTMLElement>(".chip"));
  }

  textSegments(): HTMLInputElement[] {
    return Array.from(this.element.querySelectorAll<HTMLInputElement>("input.text-seg"));
  }

  setSegmentText(index: number, value: string): void {
    const segments = this.textSegments();
    if (index < 0 || index >= segments.length) {
      throw new Error(`no text segment at index ${index}`);
    }
    segments[index].value = value;
  }

  isEmpty(): boolean {
    this.captureText();
    return this.tokens().length === 0;
  }

  tokens(): Token[] {
    this.captureText();
    const tokens: Token[] = [];
    for (const entry of this.entries) {
      if (entry.kind === "chip") {
        tokens.push({ ref: entry.shapeId });
      } else {
        const text = entry.value.trim();
        if (text) {
          tokens.push({ text });
        }
      }
    }
    return tokens;
  }

  /** Compact JSON request body; key order and separators are pinned by
   * the shared fixtures the service's tests also assert against. */
  toRequestBody(engine?: string): string {
    const body: Record<string, unknown> = {
      tokens: this.tokens(),
      shapes: this.referencedShapes(),
    };
    if (engine) {
      body.engine = engine;
    }
    return JSON.stringify(body);
  }

  private referencedShapes(): Record<string, Shape> {
    const out: Record<string, Shape> = {};
    for (const entry of this.entries) {
      if (entry.kind === "chip") {
        const canvasShape = this.shapes.get(entry.shapeId);
        if (!canvasShape) {
          throw new Error(`chip without shape: ${entry.shapeId}`);
        }
        out[entry.shapeId] = canvasShape.shape;
      }
    }
    return out;
  }

  /** Pull current input values back into the model before mutating. */
  private captureText(): void {
    const inputs = this.textSegments();
    let i = 0;
    for (const entry of this.entries) {
      if (entry.kind === "text") {
        if (i < inputs.length) {
          entry.value = inputs[i].value;
        }
        i += 1;
      }
    }
  }

  private render(): void {
    this.element.textContent = "";
    for (const entry of this.entries) {
      if (entry.kind === "text") {
        const input = document.createElement("input");
        input.type = "text";
        input.className = "text-seg";
        input.value = entry.value;
        input.setAttribute("aria-label", "instruction text");
        this.element.appendChild(input);
      } else {
        const canvasShape = this.shapes.get(entry.shapeId);
        const chip = document.createElement("span");
        chip.className = "chip";
        chip.dataset.shapeId = entry.shapeId;
        if (canvasShape) {
          chip.style.borderColor = canvasShape.color;
          chip.style.color = canvasShape.color;
          chip.textContent = CHIP_GLYPHS[canvasShape.shape.kind];
        }
        const remove = document.createElement("button");
        remove.className = "chip-remove";
        remove.type = "button";
        remove.textContent = "×";
        remove.addEventListener("click", () => this.removeChipFromText(entry.shapeId));
        chip.appendChild(remove);
        this.element.appendChild(chip);
      }
    }
  }
}

function mergeAdjacentText(entries: Entry[]): Entry[] {
  const merged: Entry[] = [];
  for (const entry of entries) {
    const last = merged[merged.length - 1];
    if (entry.kind === "text" && last && last.kind === "text") {
      last.value = joinText(last.value, entry.value);
    } else {
      merged.push({ ...entry });
    }
  }
  if (merged.length === 0 || merged[0].kind !== "text") {
    merged.unshift({ kind: "text", value: "" });
  }
  return merged;
}

function joinText(a: string, b: string): string {
  if (!a.trim()) return b;
  if (!b.trim()) return a;
  return `${a.replace(/\s+$/, "")} ${b.replace(/^\s+/, "")}`;
}
