// Wire types mirroring the editing service's JSON API.

export interface PointShape {
  kind: "point";
  x: number;
  y: number;
}

export interface BoxShape {
  kind: "box";
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface ArrowShape {
  kind: "arrow";
  from: { x: number; y: number };
  to: { x: number; y: number };
}

export type Shape = PointShape | BoxShape | ArrowShape;

export type Token = { text: string } | { ref: string };

export interface BoxDoc {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface SceneObjectDoc {
  id: number;
  caption: string;
  box: BoxDoc;
}

export interface LayoutDoc {
  canvas: { width: number; height: number };
  background: string;
  objects: SceneObjectDoc[];
}

export interface ValidationCheck {
  rule_id: string;
  passed: boolean;
  detail: string;
}

export interface ValidationReport {
  ok: boolean;
  checks: ValidationCheck[];
}

export interface SessionResponse {
  session_id: string;
  layout: LayoutDoc;
}

export interface InstructionResponse {
  layout: LayoutDoc;
  validation: ValidationReport;
  engine: string;
  completion_excerpt?: string;
}

export type ToolName = "select" | "erase" | "box" | "arrow" | "star";

/** A drawn annotation: wire shape plus canvas bookkeeping. */
export interface CanvasShape {
  shapeId: string;
  shape: Shape;
  color: string;
}
