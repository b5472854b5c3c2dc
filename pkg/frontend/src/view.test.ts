import { describe, expect, it } from "vitest";

import { MalformedResponseError } from "./api.js";
import type { SchemaInfo, WhatIfResponse } from "./api.js";
import { renderWhatIf } from "./view.js";

const MODALITIES = ["T2", "FLAIR", "DWI", "ADC", "T1", "T1CE"];
const PARTS = ["Tumor", "Parenchyma", "Ratio"];

export function panelSchema(): SchemaInfo {
  const features = MODALITIES.flatMap((m) =>
    PARTS.map((p) => ({
      name: `${m}_${p}`,
      immutable: p === "Parenchyma",
      min: 0,
      max: 1e6,
    })),
  );
  return { features, classes: ["MB", "EP", "PA", "BG"] };
}

function lockedDefaults(schema: SchemaInfo): string[] {
  return schema.features.filter((f) => f.immutable).map((f) => f.name);
}

describe("renderWhatIf", () => {
  it("ranks classes ascending by distance", () => {
    const schema = panelSchema();
    const response: WhatIfResponse = {
      predicted: "EP",
      per_class: {
        MB: {
          distance: 2.985,
          changed: {
            FLAIR_Tumor: { old: 0.5, new: -2.0 },
            T1CE_Tumor: { old: -0.795, new: 0.836 },
          },
        },
        EP: { distance: 0.35, changed: { T2_Tumor: { old: -0.583, new: -0.233 } } },
        PA: {
          distance: 4.031,
          changed: {
            T2_Tumor: { old: -0.583, new: 1.982 },
            ADC_Tumor: { old: -0.816, new: 1.225 },
            T1CE_Tumor: { old: -0.795, new: 1.55 },
          },
        },
        BG: {
          distance: 4.082,
          changed: {
            DWI_Tumor: { old: 0.5, new: -2.0 },
            ADC_Tumor: { old: -0.816, new: 1.225 },
            T1CE_Ratio: { old: 0.5, new: -2.0 },
          },
        },
      },
      locked: lockedDefaults(schema),
      seed: 0,
    };
    const view = renderWhatIf(response, schema);
    expect(view.ranking.map((r) => r.label)).toEqual(["EP", "MB", "PA", "BG"]);
    expect(view.failures).toHaveLength(0);
    expect(view.predicted).toBe("EP");
    const distances = view.ranking.map((r) => r.distance!);
    expect([...distances].sort((a, b) => a - b)).toEqual(distances);
  });

  it("shows changed features as old -> new and untouched ones as '-'", () => {
    const schema = panelSchema();
    const response: WhatIfResponse = {
      predicted: "EP",
      per_class: {
        EP: { distance: 0.35, changed: { T2_Tumor: { old: -0.583, new: -0.233 } } },
      },
      locked: lockedDefaults(schema),
      seed: 0,
    };
    const view = renderWhatIf(response, schema);
    const row = view.ranking[0]!;
    const byName = new Map(row.cells.map((c) => [c.name, c]));
    const changed = byName.get("T2_Tumor")!;
    expect(changed.changed).toBe(true);
    expect(changed.display).toContain("->");
    expect(changed.display).toContain("-0.583");
    expect(changed.display).toContain("-0.233");
    const untouched = byName.get("FLAIR_Tumor")!;
    expect(untouched.changed).toBe(false);
    expect(untouched.display).toBe("-");
  });

  it("marks locked features distinctly", () => {
    const schema = panelSchema();
    const locked = [...lockedDefaults(schema), "T2_Ratio"];
    const response: WhatIfResponse = {
      predicted: "EP",
      per_class: { EP: { distance: 0, changed: {} } },
      locked,
      seed: 0,
    };
    const view = renderWhatIf(response, schema);
    const row = view.ranking[0]!;
    const byName = new Map(row.cells.map((c) => [c.name, c]));
    expect(byName.get("T2_Parenchyma")!.locked).toBe(true);
    expect(byName.get("T2_Ratio")!.locked).toBe(true);
    expect(byName.get("T2_Tumor")!.locked).toBe(false);
    expect(view.lockedFeatures).toContain("T2_Ratio");
  });

  it("renders all-failure responses as an empty ranking with per-class notices", () => {
    const schema = panelSchema();
    const response: WhatIfResponse = {
      predicted: null,
      per_class: {
        MB: { error: "GenerationFailed" },
        EP: { error: "GenerationFailed" },
        PA: { error: "GenerationFailed" },
        BG: { error: "GenerationFailed" },
      },
      locked: lockedDefaults(schema),
      seed: 0,
    };
    const view = renderWhatIf(response, schema);
    expect(view.ranking).toHaveLength(0);
    expect(view.failures).toHaveLength(4);
    expect(view.failures.map((f) => f.label)).toEqual(["MB", "EP", "PA", "BG"]);
    expect(view.failures.every((f) => f.failure === "GenerationFailed")).toBe(true);
    expect(view.predicted).toBeNull();
  });

  it("shows a zero-change class with distance 0 and no highlighted features", () => {
    const schema = panelSchema();
    const response: WhatIfResponse = {
      predicted: "MB",
      per_class: { MB: { distance: 0, changed: {} } },
      locked: lockedDefaults(schema),
      seed: 0,
    };
    const view = renderWhatIf(response, schema);
    const row = view.ranking[0]!;
    expect(row.distance).toBe(0);
    expect(row.nChanged).toBe(0);
    expect(row.cells.every((c) => !c.changed)).toBe(true);
    expect(row.cells.every((c) => c.display === "-")).toBe(true);
  });

  it("rejects responses that mention unknown classes", () => {
    const schema = panelSchema();
    const response: WhatIfResponse = {
      predicted: null,
      per_class: { GLIOMA: { distance: 1 } },
      locked: [],
      seed: 0,
    };
    expect(() => renderWhatIf(response, schema)).toThrow(MalformedResponseError);
  });
});
