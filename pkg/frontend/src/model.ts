// Explorer state machine. Holds the session, the current diagram, and the
// metrics panel, and exposes view structures of pre-formatted strings.
// Contract: every number shown comes from a backend response; this module
// only formats. It never adds, subtracts, or re-derives metric values.

import type { ExplorerApi, MetricsQuery } from "./api.js";
import type {
  DiagramDoc,
  EvidenceDoc,
  MetricsResponse,
  NodeDoc,
  PolicyDoc,
  SessionState,
} from "./types.js";

export function formatNumber(x: number): string {
  const trimmed = Number(x.toPrecision(10));
  return String(trimmed);
}

export function formatSigned(x: number): string {
  const text = formatNumber(x);
  return x >= 0 ? `+${text}` : text;
}

export function policyLines(policy: PolicyDoc): string[] {
  const lines: string[] = [];
  for (const decision of Object.keys(policy).sort()) {
    const rule = policy[decision];
    for (const config of Object.keys(rule.choices).sort()) {
      const where = config === "-" ? "" : ` [${config}]`;
      lines.push(`${decision}${where}: ${rule.choices[config]}`);
    }
  }
  return lines;
}

export interface HeaderView {
  name: string;
  ev: string;
  baselineEv: string;
  voeFromBaseline: string;
  policy: string[];
  maxSpace: string;
}

export interface MetricsRowView {
  outcome: string;
  probability: string;
  evAfter: string;
  voe: string;
  direction: "up" | "down";
  policy: string[];
}

export interface MetricsView {
  node: string;
  mode: string;
  method: string;
  baselineEv: string;
  rows: MetricsRowView[];
  outcomeSensitivity: string;
  vopi: string;
  vopiStandard: string | null;
  vopiDecision: string | null;
  voc: string;
  maxSpace: string;
}

export interface PickerView {
  node: string;
  outcomes: string[];
  // one selector per decision-predecessor configuration; empty for plain
  // observations
  configs: { label: string; decisions: string[] }[];
}

export class ExplorerModel {
  private readonly api: ExplorerApi;
  session: SessionState | null = null;
  diagram: DiagramDoc | null = null;
  selectedNode: string | null = null;
  metrics: MetricsResponse | null = null;
  metricsQuery: MetricsQuery = { mode: "naive", method: "1" };
  lastError: string | null = null;
  // per-node change in expected value recorded when its evidence applied
  private badgeByNode = new Map<string, number>();

  constructor(api: ExplorerApi) {
    this.api = api;
  }

  async loadDiagram(doc: DiagramDoc): Promise<void> {
    this.lastError = null;
    try {
      this.session = await this.api.createSession(doc);
      this.diagram = await this.api.getDiagram(this.session.id);
      this.selectedNode = null;
      this.metrics = null;
      this.badgeByNode.clear();
    } catch (err) {
      this.session = null;
      this.diagram = null;
      this.fail(err);
    }
  }

  node(id: string): NodeDoc | null {
    return this.diagram?.nodes.find((n) => n.id === id) ?? null;
  }

  decisionParents(id: string): NodeDoc[] {
    const node = this.node(id);
    if (!node) return [];
    return node.parents
      .map((p) => this.node(p))
      .filter((p): p is NodeDoc => p !== null && p.kind === "decision");
  }

  picker(id: string): PickerView | null {
    const node = this.node(id);
    if (!node || !this.session) return null;
    if (node.kind !== "chance" && node.kind !== "deterministic") return null;
    if (!node.outcomes) return null;
    const decisions = this.decisionParents(id);
    const configs = decisions.length
      ? crossProduct(decisions.map((d) => d.outcomes ?? [])).map((combo) => ({
          label: combo.join(","),
          decisions: combo,
        }))
      : [];
    return { node: id, outcomes: node.outcomes, configs };
  }

  async applyPick(node: string, byConfig: Record<string, string>): Promise<void> {
    const picks = Object.values(byConfig);
    const allSame = picks.every((p) => p === picks[0]);
    const evidence: EvidenceDoc =
      picks.length <= 1 || allSame
        ? { node, outcome: picks[0] }
        : { node, conditional: byConfig };
    await this.applyEvidence(evidence);
  }

  async applyEvidence(evidence: EvidenceDoc): Promise<void> {
    if (!this.session) return;
    this.lastError = null;
    try {
      const state = await this.api.applyEvidence(this.session.id, evidence);
      this.badgeByNode.set(evidence.node, state.delta ?? state.voeFromBaseline);
      await this.refreshAfterStateChange(state);
    } catch (err) {
      this.fail(err);
    }
  }

  async retract(node: string): Promise<void> {
    if (!this.session) return;
    this.lastError = null;
    try {
      const state = await this.api.retractEvidence(this.session.id, node);
      this.badgeByNode.delete(node);
      await this.refreshAfterStateChange(state);
    } catch (err) {
      this.fail(err);
    }
  }

  async reset(): Promise<void> {
    if (!this.session) return;
    this.lastError = null;
    try {
      const state = await this.api.reset(this.session.id);
      this.badgeByNode.clear();
      await this.refreshAfterStateChange(state);
    } catch (err) {
      this.fail(err);
    }
  }

  private async refreshAfterStateChange(state: SessionState): Promise<void> {
    this.session = state;
    this.diagram = await this.api.getDiagram(state.id);
    if (this.selectedNode && !this.node(this.selectedNode)) {
      this.selectedNode = null;
      this.metrics = null;
    } else if (this.selectedNode) {
      await this.fetchMetrics(this.selectedNode);
    }
  }

  async selectNode(id: string): Promise<void> {
    this.selectedNode = id;
    await this.fetchMetrics(id);
  }

  async fetchMetrics(node: string): Promise<void> {
    if (!this.session) return;
    this.lastError = null;
    try {
      this.metrics = await this.api.getMetrics(this.session.id, node, this.metricsQuery);
    } catch (err) {
      this.metrics = null;
      this.fail(err);
    }
  }

  async setMetricsOptions(query: MetricsQuery): Promise<void> {
    this.metricsQuery = { ...this.metricsQuery, ...query };
    if (this.selectedNode) await this.fetchMetrics(this.selectedNode);
  }

  async registerJoint(node: string, joint: Record<string, number>): Promise<void> {
    if (!this.session) return;
    this.lastError = null;
    try {
      await this.api.registerJoint(this.session.id, node, joint);
    } catch (err) {
      this.fail(err);
    }
  }

  private fail(err: unknown): void {
    this.lastError = err instanceof Error ? err.message : String(err);
  }

  // -- view structures ------------------------------------------------------

  header(): HeaderView | null {
    if (!this.session) return null;
    return {
      name: this.session.name,
      ev: formatNumber(this.session.ev),
      baselineEv: formatNumber(this.session.baselineEv),
      voeFromBaseline: formatSigned(this.session.voeFromBaseline),
      policy: policyLines(this.session.policy),
      maxSpace: String(this.session.maxSpace),
    };
  }

  badge(node: string): string | null {
    const value = this.badgeByNode.get(node);
    return value === undefined ? null : formatSigned(value);
  }

  evidencedNodes(): string[] {
    return (this.session?.evidence ?? []).map((e) => e.node);
  }

  metricsView(): MetricsView | null {
    if (!this.metrics) return null;
    const m = this.metrics;
    return {
      node: m.node,
      mode: m.mode,
      method: m.method,
      baselineEv: formatNumber(m.report.baselineEv),
      rows: m.report.entries.map((e) => ({
        outcome: e.outcome,
        probability: formatNumber(e.probability),
        evAfter: formatNumber(e.evAfter),
        voe: formatSigned(e.voe),
        direction: e.voe >= 0 ? "up" : "down",
        policy: policyLines(e.policy),
      })),
      outcomeSensitivity: formatNumber(m.outcomeSensitivity),
      vopi: formatNumber(m.vopi.fromVoe),
      vopiStandard: m.vopi.standard === null ? null : formatNumber(m.vopi.standard),
      vopiDecision: m.vopi.decision,
      voc: formatNumber(m.voc.fromVoe),
      maxSpace: String(m.maxSpace),
    };
  }
}

function crossProduct(lists: string[][]): string[][] {
  let acc: string[][] = [[]];
  for (const list of lists) {
    const next: string[][] = [];
    for (const prefix of acc) {
      for (const item of list) {
        next.push([...prefix, item]);
      }
    }
    acc = next;
  }
  return acc;
}
