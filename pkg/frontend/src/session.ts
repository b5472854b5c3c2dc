// Session state for the explorer: current record values, the lock set, the
// last response, and an append-only request history.
//
// The lock set can never lose a schema-immutable feature; every request
// built from the session therefore carries the full immutable set, which is
// the client-side half of the service's InvalidLock contract.

import type { SchemaInfo, WhatIfRequest, WhatIfResponse } from "./api.js";

export interface HistoryEntry {
  request: WhatIfRequest;
  at: number; // monotonic sequence number, not wall time
}

export class WhatIfSession {
  readonly schema: SchemaInfo;
  private readonly values = new Map<string, number>();
  private readonly locks = new Set<string>();
  private readonly immutables = new Set<string>();
  private readonly history: HistoryEntry[] = [];
  private lastResponse: WhatIfResponse | null = null;
  private sequence = 0;

  constructor(schema: SchemaInfo) {
    this.schema = schema;
    for (const feature of schema.features) {
      this.values.set(feature.name, 0);
      if (feature.immutable) {
        this.immutables.add(feature.name);
        this.locks.add(feature.name);
      }
    }
  }

  isImmutable(feature: string): boolean {
    return this.immutables.has(feature);
  }

  isLocked(feature: string): boolean {
    return this.locks.has(feature);
  }

  setValue(feature: string, value: number): void {
    if (!this.values.has(feature)) {
      throw new Error(`unknown feature ${feature}`);
    }
    if (!Number.isFinite(value)) {
      throw new Error(`value for ${feature} must be finite`);
    }
    this.values.set(feature, value);
  }

  setValues(values: Record<string, number>): void {
    for (const [feature, value] of Object.entries(values)) {
      this.setValue(feature, value);
    }
  }

  getValue(feature: string): number {
    const value = this.values.get(feature);
    if (value === undefined) throw new Error(`unknown feature ${feature}`);
    return value;
  }

  lock(feature: string): void {
    if (!this.values.has(feature)) {
      throw new Error(`unknown feature ${feature}`);
    }
    this.locks.add(feature);
  }

  /** Unlocking an immutable feature is refused; returns whether the feature
   * is unlocked afterwards. */
  unlock(feature: string): boolean {
    if (this.immutables.has(feature)) {
      return false;
    }
    this.locks.delete(feature);
    return true;
  }

  lockedFeatures(): string[] {
    return [...this.locks].sort();
  }

  buildRequest(k: number, seed: number, targets?: string[]): WhatIfRequest {
    const values: Record<string, number> = {};
    for (const feature of this.schema.features) {
      values[feature.name] = this.getValue(feature.name);
    }
    // Invariant: the outgoing lock set always includes every immutable.
    const locked = new Set(this.locks);
    for (const name of this.immutables) {
      locked.add(name);
    }
    const request: WhatIfRequest = {
      values,
      locked: [...locked].sort(),
      k,
      seed,
      ...(targets && targets.length > 0 ? { targets } : {}),
    };
    this.history.push({ request, at: this.sequence++ });
    return request;
  }

  recordResponse(response: WhatIfResponse): void {
    this.lastResponse = response;
  }

  getLastResponse(): WhatIfResponse | null {
    return this.lastResponse;
  }

  getHistory(): readonly HistoryEntry[] {
    return this.history;
  }
}
