// DOM wiring: schema-driven entry form, lock toggles, ranked results table,
// and the per-class density overlay. All logic lives in the imported pure
// modules; this file only moves data between them and the document.

import { WhatIfClient } from "./api.js";
import type { KdeCurve, SchemaInfo } from "./api.js";
import { WhatIfController } from "./controller.js";
import { overlayGeometry } from "./kdepanel.js";
import { WhatIfSession } from "./session.js";
import type { WhatIfView } from "./view.js";

const PALETTE = ["#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4", "#8c613c"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

function buildForm(
  schema: SchemaInfo,
  session: WhatIfSession,
  onProbeChange: (feature: string) => void,
): HTMLElement {
  const form = el("div", { class: "entry-grid" });
  for (const feature of schema.features) {
    const row = el("div", { class: "entry-row" });
    const label = el("label", { class: feature.immutable ? "locked-label" : "" }, feature.name);
    const input = el("input", {
      type: "number",
      step: "any",
      value: "0",
      "data-feature": feature.name,
    });
    input.addEventListener("change", () => {
      const value = Number(input.value);
      if (Number.isFinite(value)) {
        session.setValue(feature.name, value);
        onProbeChange(feature.name);
      }
    });
    const lock = el("input", { type: "checkbox", title: "lock this feature" });
    (lock as HTMLInputElement).checked = session.isLocked(feature.name);
    if (feature.immutable) {
      (lock as HTMLInputElement).disabled = true;
      row.classList.add("immutable");
    }
    lock.addEventListener("change", () => {
      const box = lock as HTMLInputElement;
      if (box.checked) {
        session.lock(feature.name);
      } else if (!session.unlock(feature.name)) {
        box.checked = true; // immutable features stay locked
      }
    });
    row.append(lock, label, input);
    form.append(row);
  }
  return form;
}

function renderResults(view: WhatIfView, schema: SchemaInfo, container: HTMLElement): void {
  container.replaceChildren();
  if (view.predicted) {
    container.append(el("p", { class: "predicted" }, `Closest class: ${view.predicted}`));
  } else {
    container.append(el("p", { class: "predicted none" }, "No class converged"));
  }
  const table = el("table", { class: "ranking" });
  const head = el("tr");
  head.append(el("th", {}, "class"), el("th", {}, "distance"));
  for (const feature of schema.features) {
    head.append(el("th", { class: "feat" }, feature.name));
  }
  table.append(head);
  for (const row of view.ranking) {
    const tr = el("tr", { class: "ok" });
    tr.append(el("td", {}, row.label));
    tr.append(el("td", {}, row.distance!.toFixed(3)));
    for (const cell of row.cells) {
      const td = el("td", { class: "feat" }, cell.display);
      if (cell.changed) td.classList.add("changed");
      if (cell.locked) td.classList.add("locked");
      tr.append(td);
    }
    table.append(tr);
  }
  container.append(table);
  for (const row of view.failures) {
    container.append(
      el("p", { class: "failure-notice" }, `${row.label}: ${row.failure}`),
    );
  }
}

function renderOverlay(
  curves: { label: string; curve: KdeCurve }[],
  probe: number | null,
  svg: SVGSVGElement,
  legend: HTMLElement,
): void {
  const geometry = overlayGeometry(curves, probe, { width: 640, height: 220, padding: 24 });
  svg.replaceChildren();
  legend.replaceChildren();
  geometry.curves.forEach((curve, i) => {
    const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
    path.setAttribute("d", curve.path);
    path.setAttribute("fill", "none");
    path.setAttribute("stroke", PALETTE[i % PALETTE.length]!);
    path.setAttribute("stroke-width", "1.6");
    svg.append(path);
    const chip = el("span", { class: "chip" }, curve.label);
    chip.style.borderColor = PALETTE[i % PALETTE.length]!;
    legend.append(chip);
  });
  if (geometry.probeX !== null) {
    const line = document.createElementNS("http://www.w3.org/2000/svg", "line");
    line.setAttribute("x1", String(geometry.probeX));
    line.setAttribute("x2", String(geometry.probeX));
    line.setAttribute("y1", "10");
    line.setAttribute("y2", "210");
    line.setAttribute("stroke", "#222");
    line.setAttribute("stroke-dasharray", "4 3");
    svg.append(line);
  }
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  // same-origin by default; ?api=http://host:port points elsewhere
  const apiBase = new URLSearchParams(window.location.search).get("api") ?? "";
  const client = new WhatIfClient(apiBase);
  const banner = el("div", { class: "banner", hidden: "hidden" });
  root.append(banner);

  let schema: SchemaInfo;
  try {
    schema = await client.fetchSchema();
  } catch (error) {
    banner.hidden = false;
    banner.textContent = `Cannot load schema: ${String(error)}`;
    return;
  }
  const session = new WhatIfSession(schema);
  const controller = new WhatIfController(client, session);

  const results = el("div", { class: "results" });
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", "0 0 640 220");
  svg.setAttribute("class", "kde");
  const legend = el("div", { class: "legend" });
  const featurePick = el("select", { class: "kde-pick" });
  for (const feature of schema.features) {
    featurePick.append(el("option", { value: feature.name }, feature.name));
  }

  const refreshOverlay = async () => {
    const feature = (featurePick as HTMLSelectElement).value || schema.features[0]!.name;
    const curves: { label: string; curve: KdeCurve }[] = [];
    for (const label of schema.classes) {
      try {
        curves.push({ label, curve: await client.fetchKde(feature, label) });
      } catch {
        // classes without enough samples simply drop out of the overlay
      }
    }
    renderOverlay(curves, session.getValue(feature), svg, legend);
  };
  featurePick.addEventListener("change", refreshOverlay);

  const form = buildForm(schema, session, () => void refreshOverlay());
  const submit = el("button", {}, "Generate counterfactuals");
  submit.addEventListener("click", async () => {
    banner.hidden = true;
    submit.setAttribute("disabled", "disabled");
    try {
      const outcome = await controller.submit(5, 0);
      if (outcome.aborted) return;
      if (outcome.banner) {
        banner.hidden = false;
        banner.textContent = outcome.banner;
        return;
      }
      if (outcome.view) renderResults(outcome.view, schema, results);
    } finally {
      submit.removeAttribute("disabled");
    }
  });

  root.append(
    el("h1", {}, "What-if explorer"),
    el("p", { class: "hint" },
      "Enter feature values, lock anything that must not move, and rank the " +
      "classes by how little the record must change to belong to each."),
    form,
    submit,
    results,
    el("h2", {}, "Density overlay"),
    featurePick,
    legend,
  );
  root.append(svg);
  void refreshOverlay();
}

if (typeof document !== "undefined") {
  void boot();
}
