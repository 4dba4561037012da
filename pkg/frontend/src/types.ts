// Payload shapes of the /v1 session API. The UI renders these verbatim;
// it never derives one number from another.

export type NodeKind = "chance" | "deterministic" | "decision" | "value";

export interface NodeDoc {
  id: string;
  kind: NodeKind;
  outcomes?: string[];
  parents: string[];
  table?: number[][];
  map?: number[];
  values?: number[];
}

export interface DiagramDoc {
  name: string;
  objective: "maximize" | "minimize";
  nodes: NodeDoc[];
}

export interface EvidenceDoc {
  node: string;
  outcome?: string;
  conditional?: Record<string, string>;
}

export interface RuleDoc {
  parents: string[];
  choices: Record<string, string>;
}

export type PolicyDoc = Record<string, RuleDoc>;

export interface SessionState {
  id: string;
  name: string;
  baselineEv: number;
  ev: number;
  policy: PolicyDoc;
  maxSpace: number;
  evidence: EvidenceDoc[];
  voeFromBaseline: number;
  evidenceWeight?: number;
  delta?: number;
}

export interface VoeEntryDoc {
  outcome: string;
  probability: number;
  evAfter: number;
  voe: number;
  policy: PolicyDoc;
}

export interface MetricsResponse {
  node: string;
  mode: string;
  method: string;
  report: {
    node: string;
    mode: string;
    baselineEv: number;
    entries: VoeEntryDoc[];
  };
  outcomeSensitivity: number;
  vopi: { fromVoe: number; standard: number | null; decision: string | null };
  voc: { fromVoe: number };
  maxSpace: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details?: string[];
}
