// Application shell: toolbar, prompt form, image panel with annotation
// layer, instruction box with chips, run/undo, and a debug overlay that
// draws the current layout's boxes over the image.

import { ApiClient, ApiError } from "./api.js";
import { AnnotationCanvas } from "./canvas.js";
import { InstructionBox } from "./instruction.js";
import type { LayoutDoc, ToolName } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const TOOLS: ToolName[] = ["select", "erase", "box", "arrow", "star"];

export interface AppElements {
  promptInput: HTMLInputElement;
  generateButton: HTMLButtonElement;
  toolButtons: Map<ToolName, HTMLButtonElement>;
  imagePanel: HTMLElement;
  overlayLayer: SVGSVGElement;
  runButton: HTMLButtonElement;
  undoButton: HTMLButtonElement;
  overlayToggle: HTMLInputElement;
  status: HTMLElement;
  historyList: HTMLElement;
}

export class App {
  readonly elements: AppElements;
  readonly canvas: AnnotationCanvas;
  readonly instruction: InstructionBox;
  sessionId: string | null = null;
  layout: LayoutDoc | null = null;
  pending = false;

  constructor(
    root: HTMLElement,
    private readonly client: ApiClient
  ) {
    this.elements = buildDom(root);
    this.canvas = new AnnotationCanvas(
      this.elements.imagePanel,
      512,
      512,
      {
        onShapeAdded: (shape) => this.instruction.addShape(shape),
        onShapeErased: (shapeId) => this.instruction.removeShape(shapeId),
      }
    );
    const instructionHost = root.querySelector<HTMLElement>(".instruction-host")!;
    this.instruction = new InstructionBox(instructionHost, (shapeId) =>
      this.canvas.removeShape(shapeId)
    );

    for (const [tool, button] of this.elements.toolButtons) {
      button.addEventListener("click", () => this.selectTool(tool));
    }
    this.elements.generateButton.addEventListener("click", () => {
      void this.generate();
    });
    this.elements.runButton.addEventListener("click", () => {
      void this.run();
    });
    this.elements.undoButton.addEventListener("click", () => {
      void this.undo();
    });
    this.elements.overlayToggle.addEventListener("change", () => this.refreshOverlay());
    this.selectTool("select");
  }

  selectTool(tool: ToolName): void {
    this.canvas.setTool(tool);
    for (const [name, button] of this.elements.toolButtons) {
      button.classList.toggle("tool-active", name === tool);
    }
  }

  async generate(): Promise<void> {
    const prompt = this.elements.promptInput.value.trim();
    if (!prompt || this.pending) {
      return;
    }
    await this.guarded(async () => {
      const session = await this.client.createSessionFromPrompt(prompt);
      this.sessionId = session.session_id;
      this.layout = session.layout;
      this.canvas.setCanvasSize(session.layout.canvas.width, session.layout.canvas.height);
      await this.refreshImage();
      this.setStatus("session ready");
    });
  }

  async run(): Promise<void> {
    if (this.pending || !this.sessionId) {
      return;
    }
    if (this.instruction.isEmpty()) {
      this.setStatus("nothing to run: draw a shape or type an instruction", true);
      return;
    }
    await this.guarded(async () => {
      const body = this.instruction.toRequestBody();
      const result = await this.client.applyInstruction(this.sessionId!, body);
      if (result.validation.ok) {
        this.layout = result.layout;
        await this.refreshImage();
        this.pushHistory(`ok (${result.engine})`);
        this.canvas.clear();
        this.instruction.clear();
        this.setStatus("edit applied");
      } else {
        // keep canvas and chips so the user can adjust and re-run
        const failed = result.validation.checks
          .filter((c) => !c.passed)
          .map((c) => `${c.rule_id}: ${c.detail}`)
          .join("; ");
        this.pushHistory(`rejected (${result.engine})`);
        this.setStatus(`edit rejected - ${failed}`, true);
      }
    });
  }

  async undo(): Promise<void> {
    if (this.pending || !this.sessionId) {
      return;
    }
    await this.guarded(async () => {
      const response = await this.client.undo(this.sessionId!);
      this.layout = response.layout;
      await this.refreshImage();
      this.pushHistory("undo");
      this.setStatus("undone");
    });
  }

  async refreshImage(): Promise<void> {
    if (!this.sessionId) {
      return;
    }
    const svg = await this.client.renderSvg(this.sessionId);
    const rendering = this.elements.imagePanel.querySelector<HTMLElement>(".rendering")!;
    rendering.innerHTML = svg;
    this.refreshOverlay();
  }

  refreshOverlay(): void {
    const overlay = this.elements.overlayLayer;
    overlay.textContent = "";
    if (!this.elements.overlayToggle.checked || !this.layout) {
      return;
    }
    for (const object of this.layout.objects) {
      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("x", String(object.box.x));
      rect.setAttribute("y", String(object.box.y));
      rect.setAttribute("width", String(object.box.width));
      rect.setAttribute("height", String(object.box.height));
      rect.setAttribute("fill", "none");
      rect.setAttribute("stroke", "#ff1744");
      rect.setAttribute("stroke-dasharray", "4 3");
      rect.setAttribute("class", "overlay-box");
      overlay.appendChild(rect);
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(object.box.x + 2));
      label.setAttribute("y", String(object.box.y + 12));
      label.setAttribute("fill", "#ff1744");
      label.setAttribute("class", "overlay-label");
      label.textContent = `${object.id}: ${object.caption}`;
      overlay.appendChild(label);
    }
  }

  private pushHistory(outcome: string): void {
    const item = document.createElement("li");
    item.textContent = outcome;
    this.elements.historyList.appendChild(item);
  }

  private setStatus(message: string, isError = false): void {
    this.elements.status.textContent = message;
    this.elements.status.classList.toggle("status-error", isError);
  }

  private async guarded(work: () => Promise<void>): Promise<void> {
    this.pending = true;
    this.elements.runButton.disabled = true;
    this.elements.generateButton.disabled = true;
    this.elements.undoButton.disabled = true;
    try {
      await work();
    } catch (error) {
      if (error instanceof ApiError) {
        this.setStatus(error.body || `HTTP ${error.status}`, true);
      } else {
        this.setStatus(`network failure: ${String(error)}`, true);
      }
    } finally {
      this.pending = false;
      this.elements.runButton.disabled = false;
      this.elements.generateButton.disabled = false;
      this.elements.undoButton.disabled = false;
    }
  }
}

export function createApp(root: HTMLElement, client: ApiClient): App {
  return new App(root, client);
}

function buildDom(root: HTMLElement): AppElements {
  root.classList.add("layoutedit-app");
  root.innerHTML = `
    <div class="prompt-row">
      <input type="text" class="prompt-input" placeholder="describe a scene to generate" />
      <button type="button" class="generate-button">generate</button>
    </div>
    <div class="toolbar"></div>
    <div class="workspace">
      <div class="image-panel">
        <div class="rendering"></div>
      </div>
      <div class="side-panel">
        <div class="instruction-host"></div>
        <div class="actions">
          <button type="button" class="run-button">run</button>
          <button type="button" class="undo-button">undo</button>
          <label class="overlay-label-toggle">
            <input type="checkbox" class="overlay-toggle" /> layout overlay
          </label>
        </div>
        <div class="status"></div>
        <ol class="history"></ol>
      </div>
    </div>
  `;

  const toolbar = root.querySelector<HTMLElement>(".toolbar")!;
  const toolButtons = new Map<ToolName, HTMLButtonElement>();
  for (const tool of TOOLS) {
    const button = document.createElement("button");
    button.type = "button";
    button.className = `tool tool-${tool}`;
    button.textContent = tool;
    toolbar.appendChild(button);
    toolButtons.set(tool, button);
  }

  const imagePanel = root.querySelector<HTMLElement>(".image-panel")!;
  const overlayLayer = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  overlayLayer.setAttribute("class", "overlay-layer");
  overlayLayer.setAttribute("width", "512");
  overlayLayer.setAttribute("height", "512");
  imagePanel.appendChild(overlayLayer);

  return {
    promptInput: root.querySelector<HTMLInputElement>(".prompt-input")!,
    generateButton: root.querySelector<HTMLButtonElement>(".generate-button")!,
    toolButtons,
    imagePanel,
    overlayLayer,
    runButton: root.querySelector<HTMLButtonElement>(".run-button")!,
    undoButton: root.querySelector<HTMLButtonElement>(".undo-button")!,
    overlayToggle: root.querySelector<HTMLInputElement>(".overlay-toggle")!,
    status: root.querySelector<HTMLElement>(".status")!,
    historyList: root.querySelector<HTMLElement>(".history")!,
  };
}
