/** Application shell: wires the palette, the SVG canvas, the parameter
 * dialog, the run-options panel and the result charts to the editor model
 * and the HTTP client.  All interaction is event delegation over the
 * data-* attributes the renderer emits.
 */

import { ApiClient, ApiError, SimulateReply } from "./api.js";
import { DEMOS } from "./demos.js";
import { EditorModel } from "./editor.js";
import {
  Diagnostic,
  PaletteEntry,
  SettingsJson,
  SolverName,
  formatDiagnostic,
} from "./interchange.js";
import { renderChart, renderDiagram } from "./render.js";
import { inputPos, outputPos } from "./routing.js";

const AUTOSAVE_KEY = "xcosw.editor.autosave";

const api = new ApiClient();
const model = new EditorModel();
const paletteByKind = new Map<string, PaletteEntry>();
const labels = new Map<string, string>();
let simulating = false;

function el<T extends Element>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`markup is missing #${id}`);
  }
  return node as unknown as T;
}

const canvas = el<SVGSVGElement>("canvas");
const scene = el<SVGGElement>("scene");
const rubber = el<SVGPathElement>("rubber");
const paletteBox = el<HTMLElement>("palette");
const statusBar = el<HTMLElement>("status");
const toast = el<HTMLElement>("toast");
const banner = el<HTMLElement>("banner");
const bannerMsg = el<HTMLElement>("banner-msg");
const diagList = el<HTMLUListElement>("diagnostics");
const chartsBox = el<HTMLElement>("charts");
const runNote = el<HTMLElement>("run-note");
const titleInput = el<HTMLInputElement>("title");
const simulateBtn = el<HTMLButtonElement>("btn-simulate");
const fileInput = el<HTMLInputElement>("file-input");
const dialog = el<HTMLDialogElement>("param-dialog");

// ------------------------------------------------------------------ state

interface WireDrag {
  mode: "wire";
  from: { block: string; index: number };
}

interface MoveDrag {
  mode: "move";
  id: string;
  offsetX: number;
  offsetY: number;
  moved: boolean;
}

let drag: WireDrag | MoveDrag | null = null;

function svgPoint(e: MouseEvent): { x: number; y: number } {
  const r = canvas.getBoundingClientRect();
  return { x: e.clientX - r.left, y: e.clientY - r.top };
}

function errorBlocks(diags: Diagnostic[]): Set<string> {
  const out = new Set<string>();
  for (const d of diags) {
    if (d.severity === "error") {
      for (const b of d.blocks) {
        out.add(b);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- painting

function paint(): void {
  scene.innerHTML = renderDiagram(model.doc, {
    selection: model.selection,
    highlights: errorBlocks(model.lastDiagnostics),
    labels,
  });
  const n = model.doc.blocks.length;
  const m = model.doc.links.length;
  statusBar.textContent =
    `${n} block${n === 1 ? "" : "s"} · ${m} link${m === 1 ? "" : "s"}` +
    (model.dirty ? " · modified" : "");
  if (titleInput.value !== model.doc.title) {
    titleInput.value = model.doc.title;
  }
  autosave();
}

function paintDiagnostics(): void {
  diagList.innerHTML = "";
  if (model.lastDiagnostics.length === 0) {
    const li = document.createElement("li");
    li.className = "quiet";
    li.textContent = "no findings";
    diagList.appendChild(li);
    return;
  }
  for (const d of model.lastDiagnostics) {
    const li = document.createElement("li");
    li.className = d.severity;
    li.textContent = formatDiagnostic(d);
    if (d.blocks.length > 0) {
      li.title = "click to highlight";
      li.addEventListener("click", () => {
        model.selection = d.blocks[0] ?? null;
        paint();
      });
    }
    diagList.appendChild(li);
  }
}

function paintCharts(): void {
  chartsBox.innerHTML = "";
  const result = model.lastResult;
  if (!result) {
    return;
  }
  const names = Object.keys(result.signals).sort();
  if (names.length === 0) {
    chartsBox.innerHTML = `<p class="quiet">run produced no probe signals</p>`;
    return;
  }
  for (const name of names) {
    const div = document.createElement("div");
    div.innerHTML = renderChart(name, result.times, result.signals[name] ?? []);
    chartsBox.appendChild(div);
  }
}

function flash(message: string): void {
  toast.textContent = message;
  toast.hidden = false;
  toast.classList.add("show");
  window.setTimeout(() => {
    toast.classList.remove("show");
    toast.hidden = true;
  }, 2600);
}

function shake(blockId: string): void {
  const node = scene.querySelector(`[data-block-id="${CSS.escape(blockId)}"]`);
  if (node) {
    node.classList.add("shake");
    window.setTimeout(() => node.classList.remove("shake"), 450);
  }
}

function showBanner(message: string): void {
  bannerMsg.textContent = message;
  banner.hidden = false;
}

function autosave(): void {
  try {
    window.localStorage.setItem(AUTOSAVE_KEY, JSON.stringify(model.doc));
  } catch {
    // storage full or unavailable: autosave is best-effort
  }
}

function restoreAutosave(): boolean {
  try {
    const raw = window.localStorage.getItem(AUTOSAVE_KEY);
    if (!raw) {
      return false;
    }
    model.load(JSON.parse(raw));
    return true;
  } catch {
    return false;
  }
}

// ----------------------------------------------------------------- palette

async function loadPalette(): Promise<void> {
  banner.hidden = true;
  paletteBox.innerHTML = `<p class="quiet">loading palette…</p>`;
  let entries: PaletteEntry[];
  try {
    entries = await api.blocks();
  } catch (e) {
    paletteBox.innerHTML = "";
    showBanner(
      e instanceof ApiError && e.connectivity
        ? "simulation service unreachable — is `xcosw serve` running?"
        : `palette fetch failed: ${e instanceof Error ? e.message : e}`
    );
    return;
  }
  paletteByKind.clear();
  labels.clear();
  paletteBox.innerHTML = "";
  for (const entry of entries) {
    paletteByKind.set(entry.kind, entry);
    labels.set(entry.kind, entry.label);
    const item = document.createElement("div");
    item.className = "palette-item";
    item.draggable = true;
    item.dataset["kind"] = entry.kind;
    item.innerHTML =
      `<span class="label"></span><span class="kind"></span>` +
      `<span class="arity">${entry.n_in} → ${entry.n_out}</span>`;
    (item.querySelector(".label") as HTMLElement).textContent = entry.label;
    (item.querySelector(".kind") as HTMLElement).textContent = entry.kind;
    item.addEventListener("dragstart", (e) => {
      e.dataTransfer?.setData("application/x-block-kind", entry.kind);
      e.dataTransfer!.effectAllowed = "copy";
    });
    paletteBox.appendChild(item);
  }
  paint();
}

canvas.addEventListener("dragover", (e) => {
  if (e.dataTransfer?.types.includes("application/x-block-kind")) {
    e.preventDefault();
    e.dataTransfer.dropEffect = "copy";
  }
});

canvas.addEventListener("drop", (e) => {
  const kind = e.dataTransfer?.getData("application/x-block-kind");
  if (!kind) {
    return;
  }
  e.preventDefault();
  const entry = paletteByKind.get(kind);
  if (!entry) {
    return;
  }
  const p = svgPoint(e);
  const block = model.addBlock(entry, Math.max(0, p.x - 60), Math.max(0, p.y - 24));
  model.selection = block.id;
  paint();
});

// ------------------------------------------------------------------ canvas

function portOf(target: Element | null): { block: string; dir: string; index: number } | null {
  const port = target?.closest?.(".port") as SVGElement | null;
  if (!port) {
    return null;
  }
  return {
    block: port.dataset["block"] ?? "",
    dir: port.dataset["port"] ?? "",
    index: Number(port.dataset["index"] ?? -1),
  };
}

function blockIdOf(target: Element | null): string | null {
  const g = target?.closest?.("[data-block-id]") as SVGElement | null;
  return g?.dataset["blockId"] ?? null;
}

function linkIdOf(target: Element | null): string | null {
  const g = target?.closest?.("[data-link-id]") as SVGElement | null;
  return g?.dataset["linkId"] ?? null;
}

canvas.addEventListener("pointerdown", (e) => {
  const target = e.target as Element;
  const port = portOf(target);
  if (port && port.dir === "out") {
    drag = { mode: "wire", from: { block: port.block, index: port.index } };
    canvas.setPointerCapture(e.pointerId);
    e.preventDefault();
    return;
  }
  const blockId = blockIdOf(target);
  if (blockId) {
    const block = model.block(blockId);
    if (block) {
      const p = svgPoint(e);
      drag = {
        mode: "move",
        id: blockId,
        offsetX: p.x - block.position[0],
        offsetY: p.y - block.position[1],
        moved: false,
      };
      canvas.setPointerCapture(e.pointerId);
    }
    model.selection = blockId;
    paint();
    return;
  }
  const linkId = linkIdOf(target);
  model.selection = linkId;
  paint();
});

canvas.addEventListener("pointermove", (e) => {
  if (!drag) {
    return;
  }
  const p = svgPoint(e);
  if (drag.mode === "move") {
    drag.moved = true;
    model.moveBlock(drag.id, p.x - drag.offsetX, p.y - drag.offsetY);
    paint();
    return;
  }
  const from = model.block(drag.from.block);
  if (from) {
    const a = outputPos(from, drag.from.index);
    rubber.setAttribute("d", `M ${a.x} ${a.y} L ${p.x} ${p.y}`);
    rubber.removeAttribute("hidden");
  }
});

canvas.addEventListener("pointerup", (e) => {
  if (!drag) {
    return;
  }
  const finished = drag;
  drag = null;
  rubber.setAttribute("hidden", "");
  if (finished.mode === "move") {
    return;
  }
  const target = document.elementFromPoint(e.clientX, e.clientY);
  const port = portOf(target);
  if (!port || port.dir !== "in") {
    return;
  }
  const res = model.addLink(
    [finished.from.block, finished.from.index],
    [port.block, port.index]
  );
  if (!res.ok) {
    shake(port.block);
    flash(res.message ?? "cannot connect");
    return;
  }
  paint();
});

canvas.addEventListener("dblclick", (e) => {
  const blockId = blockIdOf(e.target as Element);
  if (blockId) {
    openParamDialog(blockId);
  }
});

window.addEventListener("keydown", (e) => {
  const tag = (e.target as HTMLElement).tagName;
  if (tag === "INPUT" || tag === "TEXTAREA" || tag === "SELECT" || dialog.open) {
    return;
  }
  if (e.key === "Delete" || e.key === "Backspace") {
    model.removeSelected();
    paint();
    e.preventDefault();
  } else if (e.key === "Escape" && drag) {
    drag = null;
    rubber.setAttribute("hidden", "");
  }
});

// --------------------------------------------------------- parameter dialog

function openParamDialog(blockId: string): void {
  const block = model.block(blockId);
  if (!block) {
    return;
  }
  const names = Object.keys(block.params);
  if (names.length === 0) {
    flash(`${block.kind} has no parameters`);
    return;
  }
  const spec = paletteByKind.get(block.kind);
  el<HTMLElement>("param-title").textContent =
    `${labels.get(block.kind) ?? block.kind} — ${block.id}`;
  const rows = el<HTMLElement>("param-rows");
  rows.innerHTML = "";
  for (const name of names) {
    const row = document.createElement("label");
    row.className = "param-row";
    const unit = spec?.params[name]?.unit;
    const caption = document.createElement("span");
    caption.textContent = unit ? `${name} [${unit}]` : name;
    const input = document.createElement("input");
    input.type = "text";
    input.name = name;
    input.value = block.params[name] ?? "";
    input.placeholder = "%s";
    input.spellcheck = false;
    row.append(caption, input);
    rows.appendChild(row);
  }
  dialog.returnValue = "";
  dialog.showModal();
  dialog.dataset["blockId"] = blockId;
}

el<HTMLButtonElement>("param-cancel").addEventListener("click", () => {
  dialog.close("cancel");
});

el<HTMLFormElement>("param-form").addEventListener("submit", (e) => {
  e.preventDefault();
  const blockId = dialog.dataset["blockId"];
  if (!blockId) {
    dialog.close();
    return;
  }
  let prunedCount = 0;
  for (const input of dialog.querySelectorAll<HTMLInputElement>("input[name]")) {
    const { pruned } = model.setParam(blockId, input.name, input.value);
    prunedCount += pruned.length;
  }
  dialog.close("ok");
  if (prunedCount > 0) {
    flash(`${prunedCount} link${prunedCount === 1 ? "" : "s"} removed by the new sign list`);
  }
  paint();
  void runValidate(false);
});

// ------------------------------------------------------------- run options

function collectOptions(): SettingsJson | { error: string } {
  const patch: SettingsJson = {};
  const tfRaw = el<HTMLInputElement>("opt-tf").value.trim();
  const dtRaw = el<HTMLInputElement>("opt-dt").value.trim();
  const rtolRaw = el<HTMLInputElement>("opt-rtol").value.trim();
  const solver = el<HTMLSelectElement>("opt-solver").value;
  if (tfRaw !== "") {
    const tf = Number(tfRaw);
    const t0 = model.doc.settings.t0 ?? 0;
    if (!isFinite(tf)) {
      return { error: "final time must be a number" };
    }
    if (tf <= t0) {
      return { error: `final time must exceed the start time (${t0})` };
    }
    patch.tf = tf;
  }
  if (solver === "rk4" || solver === "adaptive") {
    patch.solver = solver as SolverName;
  }
  if (dtRaw !== "") {
    const dt = Number(dtRaw);
    if (!isFinite(dt) || dt <= 0) {
      return { error: "step size must be a positive number" };
    }
    patch.dt = dt;
  }
  if (rtolRaw !== "") {
    const rtol = Number(rtolRaw);
    if (!isFinite(rtol) || rtol <= 0) {
      return { error: "relative tolerance must be a positive number" };
    }
    patch.rtol = rtol;
  }
  return patch;
}

// ----------------------------------------------------------------- actions

async function runValidate(announce = true): Promise<void> {
  try {
    model.lastDiagnostics = await api.validate(model.doc);
  } catch (e) {
    if (e instanceof ApiError && e.connectivity) {
      showBanner("simulation service unreachable — is `xcosw serve` running?");
    } else {
      flash(`validate failed: ${e instanceof Error ? e.message : e}`);
    }
    return;
  }
  paintDiagnostics();
  paint();
  if (announce && model.lastDiagnostics.length === 0) {
    flash("no findings — diagram is runnable");
  }
}

async function runSimulate(): Promise<void> {
  if (simulating) {
    return;
  }
  const options = collectOptions();
  if ("error" in options) {
    flash(options.error);
    return;
  }
  simulating = true;
  simulateBtn.disabled = true;
  runNote.textContent = "running…";
  try {
    const reply: SimulateReply = await api.simulate(model.doc, options);
    if (reply.kind === "ok") {
      model.lastDiagnostics = reply.diagnostics;
      model.lastResult = reply.result;
      runNote.textContent =
        `${reply.result.times.length} points in ${reply.timingMs.toFixed(0)} ms` +
        ` (${reply.result.metadata["solver"] ?? "solver"})`;
    } else if (reply.kind === "invalid") {
      model.lastDiagnostics = reply.diagnostics;
      model.lastResult = null;
      runNote.textContent = "diagram rejected — see diagnostics";
    } else {
      model.lastResult = null;
      runNote.textContent = `${reply.code}: ${reply.message}`;
    }
  } catch (e) {
    model.lastResult = null;
    if (e instanceof ApiError && e.connectivity) {
      showBanner("simulation service unreachable — is `xcosw serve` running?");
      runNote.textContent = "service unreachable";
    } else {
      runNote.textContent = `request failed: ${e instanceof Error ? e.message : e}`;
    }
  } finally {
    simulating = false;
    simulateBtn.disabled = false;
  }
  paintDiagnostics();
  paintCharts();
  paint();
}

function download(name: string, text: string, type: string): void {
  const blob = new Blob([text], { type });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = name;
  a.click();
  URL.revokeObjectURL(url);
}

async function exportXml(): Promise<void> {
  try {
    const xml = await api.toXml(model.doc);
    const stem = model.doc.title.replace(/[^\w.-]+/g, "_") || "diagram";
    download(`${stem}.xcosw.xml`, xml, "application/xml");
    model.dirty = false;
    paint();
  } catch (e) {
    flash(`export failed: ${e instanceof Error ? e.message : e}`);
  }
}

async function importFile(file: File): Promise<void> {
  const text = await file.text();
  try {
    const doc = text.trimStart().startsWith("<")
      ? await api.fromXml(text)
      : await api.normalize(JSON.parse(text));
    model.load(doc);
    model.lastDiagnostics = [];
    paintDiagnostics();
    paintCharts();
    paint();
    void runValidate(false);
  } catch (e) {
    // canvas stays untouched; surface the parse verdict
    const payload = e instanceof ApiError ? e.payload : null;
    const diags = (payload as { diagnostics?: Diagnostic[] } | null)?.diagnostics;
    if (Array.isArray(diags)) {
      model.lastDiagnostics = diags;
      paintDiagnostics();
    }
    flash(`import failed: ${e instanceof Error ? e.message : e}`);
  }
}

// ----------------------------------------------------------------- toolbar

el<HTMLButtonElement>("btn-new").addEventListener("click", () => {
  if (model.doc.blocks.length > 0 && !window.confirm("Discard the current diagram?")) {
    return;
  }
  model.clear();
  model.lastDiagnostics = [];
  paintDiagnostics();
  paintCharts();
  paint();
});

{
  const select = el<HTMLSelectElement>("demo-select");
  for (let i = 0; i < DEMOS.length; i++) {
    const option = document.createElement("option");
    option.value = String(i);
    const demo = DEMOS[i];
    option.textContent = demo ? `${demo.name} — ${demo.blurb}` : "";
    select.appendChild(option);
  }
  select.addEventListener("change", () => {
    const demo = DEMOS[Number(select.value)];
    select.value = "";
    if (!demo) {
      return;
    }
    model.load(demo.build());
    paintDiagnostics();
    paintCharts();
    paint();
    void runValidate(false);
  });
}

el<HTMLButtonElement>("btn-import").addEventListener("click", () => fileInput.click());

fileInput.addEventListener("change", () => {
  const file = fileInput.files?.[0];
  fileInput.value = "";
  if (file) {
    void importFile(file);
  }
});

el<HTMLButtonElement>("btn-export").addEventListener("click", () => void exportXml());
el<HTMLButtonElement>("btn-validate").addEventListener("click", () => void runValidate());
simulateBtn.addEventListener("click", () => void runSimulate());
el<HTMLButtonElement>("btn-retry").addEventListener("click", () => void loadPalette());

titleInput.addEventListener("change", () => {
  model.setTitle(titleInput.value);
  paint();
});

// -------------------------------------------------------------------- boot

restoreAutosave();
paint();
paintDiagnostics();
void loadPalette();
