// Pure view-state construction: turns a what-if response into the ranked,
// renderable structure the DOM layer draws. Classes sort ascending by
// distance (failures trail, in schema class order); per-feature cells show
// "-" for untouched features and "old -> new" for edits.

import { MalformedResponseError } from "./api.js";
import type { SchemaInfo, WhatIfResponse } from "./api.js";

export interface FeatureCell {
  name: string;
  display: string;
  changed: boolean;
  locked: boolean;
  oldValue?: number;
  newValue?: number;
}

export interface ClassRow {
  label: string;
  ok: boolean;
  distance: number | null;
  failure: string | null;
  nChanged: number;
  cells: FeatureCell[];
}

export interface WhatIfView {
  predicted: string | null;
  ranking: ClassRow[]; // converged classes, ascending by distance
  failures: ClassRow[]; // per-class failure notices, schema class order
  lockedFeatures: string[];
}

function formatValue(value: number): string {
  if (Number.isInteger(value)) return value.toString();
  const magnitude = Math.abs(value);
  if (magnitude >= 100) return value.toFixed(1);
  if (magnitude >= 1) return value.toFixed(2);
  return value.toPrecision(3);
}

export function renderWhatIf(response: WhatIfResponse, schema: SchemaInfo): WhatIfView {
  const lockedSet = new Set(response.locked);
  const known = new Set(schema.classes);
  for (const label of Object.keys(response.per_class)) {
    if (!known.has(label)) {
      throw new MalformedResponseError(`response mentions unknown class ${label}`);
    }
  }

  const rows: ClassRow[] = [];
  for (const label of schema.classes) {
    const outcome = response.per_class[label];
    if (outcome === undefined) continue;
    if (outcome.error !== undefined || outcome.distance === undefined) {
      rows.push({
        label,
        ok: false,
        distance: null,
        failure: outcome.error ?? "missing distance",
        nChanged: 0,
        cells: schema.features.map((f) => ({
          name: f.name,
          display: "-",
          changed: false,
          locked: lockedSet.has(f.name),
        })),
      });
      continue;
    }
    const changed = outcome.changed ?? {};
    const cells: FeatureCell[] = schema.features.map((feature) => {
      const change = changed[feature.name];
      if (change === undefined) {
        return {
          name: feature.name,
          display: "-",
          changed: false,
          locked: lockedSet.has(feature.name),
        };
      }
      return {
        name: feature.name,
        display: `${formatValue(change.old)} -> ${formatValue(change.new)}`,
        changed: true,
        locked: lockedSet.has(feature.name),
        oldValue: change.old,
        newValue: change.new,
      };
    });
    rows.push({
      label,
      ok: true,
      distance: outcome.distance,
      failure: null,
      nChanged: Object.keys(changed).length,
      cells,
    });
  }

  const succeeded = rows.filter((r) => r.ok);
  const failed = rows.filter((r) => !r.ok);
  succeeded.sort((a, b) => {
    if (a.distance !== b.distance) return (a.distance ?? 0) - (b.distance ?? 0);
    if (a.nChanged !== b.nChanged) return a.nChanged - b.nChanged;
    return schema.classes.indexOf(a.label) - schema.classes.indexOf(b.label);
  });

  return {
    predicted: response.predicted,
    ranking: succeeded,
    failures: failed,
    lockedFeatures: [...lockedSet].sort(),
  };
}
