// DOM/SVG rendering. Nothing here computes: it draws the layout and the
// view structures produced by the model.

import { LAYER_WIDTH, MARGIN, ROW_HEIGHT, layoutDiagram } from "./layout.js";
import type { ExplorerModel, MetricsView, PickerView } from "./model.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_R = 26;

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function glyph(kind: string, x: number, y: number): SVGElement {
  switch (kind) {
    case "decision":
      return svgEl("rect", {
        x: String(x - NODE_R),
        y: String(y - NODE_R * 0.8),
        width: String(NODE_R * 2),
        height: String(NODE_R * 1.6),
        class: "glyph decision",
      });
    case "value": {
      const points = [
        [x, y - NODE_R],
        [x + NODE_R, y],
        [x, y + NODE_R],
        [x - NODE_R, y],
      ]
        .map((p) => p.join(","))
        .join(" ");
      return svgEl("polygon", { points, class: "glyph value" });
    }
    case "deterministic": {
      const group = svgEl("g", {});
      group.appendChild(
        svgEl("circle", { cx: String(x), cy: String(y), r: String(NODE_R), class: "glyph chance" }),
      );
      group.appendChild(
        svgEl("circle", {
          cx: String(x),
          cy: String(y),
          r: String(NODE_R - 5),
          class: "glyph chance inner",
        }),
      );
      return group;
    }
    default:
      return svgEl("circle", {
        cx: String(x),
        cy: String(y),
        r: String(NODE_R),
        class: "glyph chance",
      });
  }
}

export function renderDiagram(
  container: HTMLElement,
  model: ExplorerModel,
  onSelect: (node: string) => void,
): void {
  container.replaceChildren();
  const doc = model.diagram;
  if (!doc) return;
  const layout = layoutDiagram(doc);
  const width = MARGIN * 2 + (layout.layerCount - 1) * LAYER_WIDTH + NODE_R * 2;
  const height = MARGIN * 2 + (layout.rowCount - 1) * ROW_HEIGHT + NODE_R * 2;
  const svg = svgEl("svg", {
    viewBox: `0 0 ${Math.max(width, 320)} ${Math.max(height, 220)}`,
    class: "diagram",
  });

  const marker = svgEl("marker", {
    id: "arrow",
    viewBox: "0 0 10 10",
    refX: "9",
    refY: "5",
    markerWidth: "7",
    markerHeight: "7",
    orient: "auto-start-reverse",
  });
  marker.appendChild(svgEl("path", { d: "M 0 0 L 10 5 L 0 10 z", class: "arrowhead" }));
  const defs = svgEl("defs", {});
  defs.appendChild(marker);
  svg.appendChild(defs);

  for (const edge of layout.edges) {
    const from = layout.positions.get(edge.from);
    const to = layout.positions.get(edge.to);
    if (!from || !to) continue;
    const dx = to.x - from.x;
    const dy = to.y - from.y;
    const len = Math.hypot(dx, dy) || 1;
    const line = svgEl("line", {
      x1: String(from.x + (dx / len) * NODE_R),
      y1: String(from.y + (dy / len) * NODE_R),
      x2: String(to.x - (dx / len) * (NODE_R + 6)),
      y2: String(to.y - (dy / len) * (NODE_R + 6)),
      class: edge.informational ? "arc informational" : "arc conditional",
      "marker-end": "url(#arrow)",
    });
    svg.appendChild(line);
  }

  const evidenced = new Set(model.evidencedNodes());
  for (const node of doc.nodes) {
    const position = layout.positions.get(node.id);
    if (!position) continue;
    const group = svgEl("g", { class: "node", "data-node": node.id });
    if (node.id === model.selectedNode) group.classList.add("selected");
    group.appendChild(glyph(node.kind, position.x, position.y));
    const label = svgEl("text", {
      x: String(position.x),
      y: String(position.y + NODE_R + 16),
      class: "node-label",
      "text-anchor": "middle",
    });
    label.textContent = node.id;
    group.appendChild(label);
    const badge = model.badge(node.id);
    if (badge) {
      const badgeText = svgEl("text", {
        x: String(position.x),
        y: String(position.y - NODE_R - 8),
        class: badge.startsWith("+") ? "badge up" : "badge down",
        "text-anchor": "middle",
      });
      badgeText.textContent = badge;
      group.appendChild(badgeText);
    }
    if (evidenced.has(node.id)) group.classList.add("evidenced");
    group.addEventListener("click", () => onSelect(node.id));
    svg.appendChild(group);
  }
  container.appendChild(svg);
}

export function renderHeader(container: HTMLElement, model: ExplorerModel): void {
  container.replaceChildren();
  const header = model.header();
  if (!header) {
    container.appendChild(el("p", "hint", "Load a diagram file to start a session."));
    return;
  }
  container.appendChild(el("h2", "diagram-name", header.name));
  const stats = el("div", "stats");
  const evBox = el("div", "stat");
  evBox.appendChild(el("span", "stat-label", "expected value"));
  evBox.appendChild(el("span", "stat-value ev", header.ev));
  stats.appendChild(evBox);
  const baseBox = el("div", "stat");
  baseBox.appendChild(el("span", "stat-label", "baseline"));
  baseBox.appendChild(el("span", "stat-value", header.baselineEv));
  stats.appendChild(baseBox);
  const deltaBox = el("div", "stat");
  deltaBox.appendChild(el("span", "stat-label", "vs baseline"));
  deltaBox.appendChild(
    el(
      "span",
      `stat-value ${header.voeFromBaseline.startsWith("+") ? "up" : "down"}`,
      header.voeFromBaseline,
    ),
  );
  stats.appendChild(deltaBox);
  const spaceBox = el("div", "stat");
  spaceBox.appendChild(el("span", "stat-label", "max space"));
  spaceBox.appendChild(el("span", "stat-value", header.maxSpace));
  stats.appendChild(spaceBox);
  container.appendChild(stats);
  const policy = el("div", "policy");
  policy.appendChild(el("span", "stat-label", "optimal policy"));
  for (const line of header.policy) policy.appendChild(el("div", "policy-line", line));
  container.appendChild(policy);
}

export function renderEvidenceLog(
  container: HTMLElement,
  model: ExplorerModel,
  onRetract: (node: string) => void,
  onReset: () => void,
): void {
  container.replaceChildren();
  const items = model.session?.evidence ?? [];
  container.appendChild(el("h3", undefined, "Evidence"));
  if (!items.length) {
    container.appendChild(el("p", "hint", "Click a chance node to observe an outcome."));
    return;
  }
  for (const item of items) {
    const row = el("div", "evidence-row");
    const text = item.outcome
      ? `${item.node} = ${item.outcome}`
      : `${item.node} | ${Object.entries(item.conditional ?? {})
          .map(([k, v]) => `${k}:${v}`)
          .join(", ")}`;
    row.appendChild(el("span", "evidence-text", text));
    const button = el("button", "retract", "retract");
    button.addEventListener("click", () => onRetract(item.node));
    row.appendChild(button);
    container.appendChild(row);
  }
  const reset = el("button", "reset", "reset all");
  reset.addEventListener("click", onReset);
  container.appendChild(reset);
}

export function renderPicker(
  container: HTMLElement,
  picker: PickerView | null,
  onApply: (node: string, byConfig: Record<string, string>) => void,
): void {
  container.replaceChildren();
  if (!picker) return;
  container.appendChild(el("h3", undefined, `Observe ${picker.node}`));
  const selects: { key: string; select: HTMLSelectElement }[] = [];
  const addSelect = (key: string, labelText: string) => {
    const row = el("div", "picker-row");
    row.appendChild(el("label", undefined, labelText));
    const select = el("select");
    for (const outcome of picker.outcomes) {
      const option = el("option", undefined, outcome);
      option.value = outcome;
      select.appendChild(option);
    }
    row.appendChild(select);
    container.appendChild(row);
    selects.push({ key, select });
  };
  if (picker.configs.length) {
    for (const config of picker.configs) addSelect(config.label, `if ${config.label}`);
  } else {
    addSelect("", "outcome");
  }
  const apply = el("button", "apply", "apply evidence");
  apply.addEventListener("click", () => {
    const byConfig: Record<string, string> = {};
    for (const { key, select } of selects) byConfig[key] = select.value;
    onApply(picker.node, byConfig);
  });
  container.appendChild(apply);
}

export function renderMetrics(
  container: HTMLElement,
  view: MetricsView | null,
  onOptions: (mode: "naive" | "full", method: "1" | "2") => void,
): void {
  container.replaceChildren();
  container.appendChild(el("h3", undefined, "Information measures"));
  if (!view) {
    container.appendChild(el("p", "hint", "Select a chance node to inspect."));
    return;
  }
  const toggles = el("div", "toggles");
  for (const mode of ["naive", "full"] as const) {
    const button = el("button", view.mode === mode ? "toggle active" : "toggle", mode);
    button.addEventListener("click", () => onOptions(mode, view.method as "1" | "2"));
    toggles.appendChild(button);
  }
  for (const method of ["1", "2"] as const) {
    const button = el(
      "button",
      view.method === method ? "toggle active" : "toggle",
      `method ${method}`,
    );
    button.addEventListener("click", () => onOptions(view.mode as "naive" | "full", method));
    toggles.appendChild(button);
  }
  container.appendChild(toggles);

  const table = el("table", "voe-table");
  const head = el("tr");
  for (const text of ["outcome", "p", "value after", "value of evidence", "policy"]) {
    head.appendChild(el("th", undefined, text));
  }
  table.appendChild(head);
  for (const row of view.rows) {
    const tr = el("tr");
    tr.appendChild(el("td", undefined, row.outcome));
    tr.appendChild(el("td", undefined, row.probability));
    tr.appendChild(el("td", undefined, row.evAfter));
    tr.appendChild(el("td", row.direction === "up" ? "voe up" : "voe down", row.voe));
    tr.appendChild(el("td", "policy-cell", row.policy.join("; ")));
    table.appendChild(tr);
  }
  container.appendChild(table);

  const summary = el("dl", "summary");
  const add = (label: string, value: string) => {
    summary.appendChild(el("dt", undefined, label));
    summary.appendChild(el("dd", undefined, value));
  };
  add("baseline", view.baselineEv);
  add("outcome sensitivity", view.outcomeSensitivity);
  add(
    view.vopiDecision ? `value of information (${view.vopiDecision})` : "value of information",
    view.vopiStandard === null ? view.vopi : `${view.vopi} / standard ${view.vopiStandard}`,
  );
  add("value of control", view.voc);
  add("max outcome space", view.maxSpace);
  container.appendChild(summary);
}

export function renderError(container: HTMLElement, message: string | null): void {
  container.replaceChildren();
  if (message) container.appendChild(el("div", "error-banner", message));
}
