// Typed client for the counterfactual what-if JSON API.
// The shapes here mirror the service responses exactly; parse helpers throw
// MalformedResponseError so callers can show an error banner without
// touching session state.

export interface FeatureInfo {
  name: string;
  immutable: boolean;
  min: number;
  max: number;
}

export interface SchemaInfo {
  features: FeatureInfo[];
  classes: string[];
}

export interface FeatureChange {
  old: number;
  new: number;
}

export interface ClassOutcome {
  distance?: number;
  changed?: Record<string, FeatureChange>;
  counterfactuals?: { delta: Record<string, FeatureChange>; distance: number }[];
  error?: string;
}

export interface WhatIfResponse {
  predicted: string | null;
  per_class: Record<string, ClassOutcome>;
  locked: string[];
  seed: number;
}

export interface WhatIfRequest {
  values: Record<string, number>;
  locked: string[];
  k: number;
  targets?: string[];
  seed: number;
}

export interface KdeCurve {
  feature: string;
  class: string;
  bandwidth: number;
  grid: number[];
  density: number[];
}

export interface ApiError {
  code: string;
  message: string;
  detail?: unknown;
}

export class MalformedResponseError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "MalformedResponseError";
  }
}

export class ServiceError extends Error {
  readonly code: string;
  constructor(payload: ApiError) {
    super(payload.message);
    this.name = "ServiceError";
    this.code = payload.code;
  }
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

export function parseSchema(payload: unknown): SchemaInfo {
  if (!isRecord(payload) || !Array.isArray(payload.features) || !Array.isArray(payload.classes)) {
    throw new MalformedResponseError("schema payload missing features/classes");
  }
  const features = payload.features.map((f) => {
    if (!isRecord(f) || typeof f.name !== "string" || typeof f.immutable !== "boolean") {
      throw new MalformedResponseError("schema feature entry malformed");
    }
    return {
      name: f.name,
      immutable: f.immutable,
      min: typeof f.min === "number" ? f.min : Number.NEGATIVE_INFINITY,
      max: typeof f.max === "number" ? f.max : Number.POSITIVE_INFINITY,
    };
  });
  const classes = payload.classes.map((c) => {
    if (typeof c !== "string") throw new MalformedResponseError("class name is not a string");
    return c;
  });
  if (features.length === 0 || classes.length === 0) {
    throw new MalformedResponseError("schema payload is empty");
  }
  return { features, classes };
}

export function parseWhatIf(payload: unknown): WhatIfResponse {
  if (!isRecord(payload) || !isRecord(payload.per_class)) {
    throw new MalformedResponseError("what-if payload missing per_class");
  }
  const perClass: Record<string, ClassOutcome> = {};
  for (const [label, raw] of Object.entries(payload.per_class)) {
    if (!isRecord(raw)) throw new MalformedResponseError(`outcome for ${label} malformed`);
    if (raw.error !== undefined) {
      if (typeof raw.error !== "string") {
        throw new MalformedResponseError(`error field for ${label} is not a string`);
      }
      perClass[label] = { error: raw.error };
      continue;
    }
    if (typeof raw.distance !== "number" || !Number.isFinite(raw.distance)) {
      throw new MalformedResponseError(`distance for ${label} is not a finite number`);
    }
    const changed: Record<string, FeatureChange> = {};
    if (raw.changed !== undefined) {
      if (!isRecord(raw.changed)) {
        throw new MalformedResponseError(`changed map for ${label} malformed`);
      }
      for (const [feature, change] of Object.entries(raw.changed)) {
        if (!isRecord(change) || typeof change.old !== "number" || typeof change.new !== "number") {
          throw new MalformedResponseError(`change entry ${feature} malformed`);
        }
        changed[feature] = { old: change.old, new: change.new };
      }
    }
    perClass[label] = { distance: raw.distance, changed };
  }
  const predicted = payload.predicted;
  if (predicted !== null && typeof predicted !== "string") {
    throw new MalformedResponseError("predicted is neither string nor null");
  }
  return {
    predicted: (predicted as string | null) ?? null,
    per_class: perClass,
    locked: Array.isArray(payload.locked) ? payload.locked.filter((x): x is string => typeof x === "string") : [],
    seed: typeof payload.seed === "number" ? payload.seed : 0,
  };
}

export function parseKde(payload: unknown): KdeCurve {
  if (
    !isRecord(payload) ||
    typeof payload.feature !== "string" ||
    typeof payload.class !== "string" ||
    typeof payload.bandwidth !== "number" ||
    !Array.isArray(payload.grid) ||
    !Array.isArray(payload.density) ||
    payload.grid.length !== payload.density.length
  ) {
    throw new MalformedResponseError("kde payload malformed");
  }
  return {
    feature: payload.feature,
    class: payload.class,
    bandwidth: payload.bandwidth,
    grid: payload.grid as number[],
    density: payload.density as number[],
  };
}

async function readJson(response: Response): Promise<unknown> {
  let body: unknown;
  try {
    body = await response.json();
  } catch {
    throw new MalformedResponseError(`response is not JSON (status ${response.status})`);
  }
  if (!response.ok) {
    if (isRecord(body) && typeof body.code === "string" && typeof body.message === "string") {
      throw new ServiceError(body as unknown as ApiError);
    }
    // FastAPI validation errors carry {detail: ...}
    if (isRecord(body) && body.detail !== undefined) {
      throw new ServiceError({ code: "ValidationError", message: JSON.stringify(body.detail) });
    }
    throw new ServiceError({ code: "HttpError", message: `status ${response.status}` });
  }
  return body;
}

export class WhatIfClient {
  constructor(private readonly baseUrl: string = "") {}

  async fetchSchema(): Promise<SchemaInfo> {
    const response = await fetch(`${this.baseUrl}/schema`);
    return parseSchema(await readJson(response));
  }

  async submitWhatIf(request: WhatIfRequest, signal?: AbortSignal): Promise<WhatIfResponse> {
    const response = await fetch(`${this.baseUrl}/whatif`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
      signal,
    });
    return parseWhatIf(await readJson(response));
  }

  async fetchKde(feature: string, label: string): Promise<KdeCurve> {
    const params = new URLSearchParams({ feature, class: label });
    const response = await fetch(`${this.baseUrl}/kde?${params}`);
    return parseKde(await readJson(response));
  }
}
