/** Wire shapes exchanged with the workbench service. */

export interface WireInstance {
  sigs: Record<string, string[]>;
  fields: Record<string, string[][]>;
}

export type Universe = Record<string, string[]>;

export interface Diagnostic {
  severity: "error" | "warning";
  code: string;
  span: [number, number];
  message: string;
}

export interface SessionWire {
  id: string;
  generation: number;
  semanticGeneration: number;
  stale: boolean;
  diagnostics: Diagnostic[];
  modelText: string;
  universe: Universe | null;
  error?: string;
}

export interface CategoryView {
  category: string;
  instance: WireInstance | null;
  instanceText: string | null;
  stale: boolean;
  representative: boolean;
  exhausted: boolean;
  position: number;
  generation: number;
  error?: string;
}

export interface BindingDiff {
  bindings: Record<string, string>;
  valueOnA: boolean;
  valueOnB: boolean;
}

export interface BreakdownRow {
  id: string;
  span: [number, number];
  formula: string;
  valueOnA: boolean;
  valueOnB: boolean;
  perBinding?: BindingDiff[];
}

export interface BreakdownReport {
  rows: BreakdownRow[];
}

export interface FocusEntryWire {
  index: number;
  expected: "valid" | "invalid";
  currentStatus: "valid" | "invalid" | null;
  instance: WireInstance | null;
  instanceText: string | null;
  closest: WireInstance | null;
  closestText: string | null;
  breakdown: BreakdownReport | null;
  stale: boolean;
  generation: number;
  error?: string;
}

export interface Suggestion {
  text: string;
  type: string;
  value: string | null;
}

export interface SuggestResponse {
  suggestions: Suggestion[];
  truncated: boolean;
}

export interface SessionEvent {
  t: number;
  type: string;
  generation: number;
  [key: string]: unknown;
}

export interface EventMessage {
  generation: number;
  event: SessionEvent;
}
