// Canned /v1 responses for the bundled mission-planning example. The
// numbers mirror the backend's own verified outputs (see the service test
// suite in the repository root): baseline 56 choosing Venus, observing a
// successful mission is worth +44, a failed one -46.

import type {
  DiagramDoc,
  MetricsResponse,
  SessionState,
} from "../src/types.js";

export const marsDiagram: DiagramDoc = {
  name: "mars-venus",
  objective: "maximize",
  nodes: [
    { id: "Destination", kind: "decision", outcomes: ["Mars", "Venus"], parents: [] },
    {
      id: "Mission",
      kind: "chance",
      outcomes: ["Success", "Failure"],
      parents: ["Destination"],
      table: [
        [0.6, 0.4],
        [0.6, 0.4],
      ],
    },
    {
      id: "V",
      kind: "value",
      parents: ["Destination", "Mission"],
      values: [50, 10, 100, -10],
    },
  ],
};

export const marsAfterEvidence: DiagramDoc = {
  name: "mars-venus",
  objective: "maximize",
  nodes: [
    { id: "Destination", kind: "decision", outcomes: ["Mars", "Venus"], parents: [] },
    { id: "V", kind: "value", parents: ["Destination"], values: [50, 100] },
  ],
};

const venusPolicy = { Destination: { parents: [], choices: { "-": "Venus" } } };

export const freshState: SessionState = {
  id: "s1",
  name: "mars-venus",
  baselineEv: 56.0,
  ev: 56.0,
  policy: venusPolicy,
  maxSpace: 4,
  evidence: [],
  voeFromBaseline: 0.0,
};

export const afterSuccess: SessionState = {
  id: "s1",
  name: "mars-venus",
  baselineEv: 56.0,
  ev: 100.0,
  policy: venusPolicy,
  maxSpace: 2,
  evidence: [{ node: "Mission", outcome: "Success" }],
  voeFromBaseline: 44.0,
  evidenceWeight: 0.6,
  delta: 44.0,
};

export const naiveMetrics: MetricsResponse = {
  node: "Mission",
  mode: "naive",
  method: "1",
  report: {
    node: "Mission",
    mode: "naive",
    baselineEv: 56.0,
    entries: [
      {
        outcome: "Success",
        probability: 0.6,
        evAfter: 100.0,
        voe: 44.0,
        policy: venusPolicy,
      },
      {
        outcome: "Failure",
        probability: 0.4,
        evAfter: 10.0,
        voe: -46.0,
        policy: { Destination: { parents: [], choices: { "-": "Mars" } } },
      },
    ],
  },
  outcomeSensitivity: 90.0,
  vopi: { fromVoe: 8.0, standard: 8.0, decision: "Destination" },
  voc: { fromVoe: 44.0 },
  maxSpace: 4,
};
