import { HttpApiClient } from "./api.js";
import { ExplorerModel } from "./model.js";
import {
  renderDiagram,
  renderError,
  renderEvidenceLog,
  renderHeader,
  renderMetrics,
  renderPicker,
} from "./render.js";
import type { DiagramDoc } from "./types.js";

const api = new HttpApiClient("");
const model = new ExplorerModel(api);

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function redraw(): void {
  renderError(byId("errors"), model.lastError);
  renderHeader(byId("header"), model);
  renderDiagram(byId("canvas"), model, (node) => {
    void select(node);
  });
  renderEvidenceLog(
    byId("evidence"),
    model,
    (node) => void retract(node),
    () => void reset(),
  );
  renderPicker(
    byId("picker"),
    model.selectedNode ? model.picker(model.selectedNode) : null,
    (node, byConfig) => void apply(node, byConfig),
  );
  renderMetrics(byId("metrics"), model.metricsView(), (mode, method) => {
    void model.setMetricsOptions({ mode, method }).then(redraw);
  });
}

async function select(node: string): Promise<void> {
  await model.selectNode(node);
  redraw();
}

async function apply(node: string, byConfig: Record<string, string>): Promise<void> {
  await model.applyPick(node, byConfig);
  redraw();
}

async function retract(node: string): Promise<void> {
  await model.retract(node);
  redraw();
}

async function reset(): Promise<void> {
  await model.reset();
  redraw();
}

async function loadFromFile(file: File): Promise<void> {
  const text = await file.text();
  let doc: DiagramDoc;
  try {
    doc = JSON.parse(text) as DiagramDoc;
  } catch {
    model.lastError = `${file.name} is not valid JSON`;
    redraw();
    return;
  }
  await model.loadDiagram(doc);
  redraw();
}

async function loadJointFromFile(file: File): Promise<void> {
  if (!model.selectedNode) {
    model.lastError = "select the node the joint belongs to first";
    redraw();
    return;
  }
  try {
    const doc = JSON.parse(await file.text()) as { node?: string; joint: Record<string, number> };
    await model.registerJoint(doc.node ?? model.selectedNode, doc.joint);
    await model.setMetricsOptions({ mode: "full" });
  } catch (err) {
    model.lastError = err instanceof Error ? err.message : String(err);
  }
  redraw();
}

function wire(): void {
  const diagramInput = byId("diagram-file") as HTMLInputElement;
  diagramInput.addEventListener("change", () => {
    const file = diagramInput.files?.[0];
    if (file) void loadFromFile(file);
    diagramInput.value = "";
  });
  const jointInput = byId("joint-file") as HTMLInputElement;
  jointInput.addEventListener("change", () => {
    const file = jointInput.files?.[0];
    if (file) void loadJointFromFile(file);
    jointInput.value = "";
  });
  void api
    .defaultDiagram()
    .then(async (doc) => {
      if (doc) {
        await model.loadDiagram(doc);
        redraw();
      }
    })
    .catch(() => undefined);
  redraw();
}

document.addEventListener("DOMContentLoaded", wire);
