// Submission controller: at most one what-if request is in flight; a new
// submission aborts the previous one. Malformed responses surface as an
// error banner message while the session (values, locks, history) survives.

import { MalformedResponseError, ServiceError, WhatIfClient } from "./api.js";
import type { WhatIfResponse } from "./api.js";
import { WhatIfSession } from "./session.js";
import { renderWhatIf } from "./view.js";
import type { WhatIfView } from "./view.js";

export interface SubmitOutcome {
  view: WhatIfView | null;
  banner: string | null;
  aborted: boolean;
}

export class WhatIfController {
  private inFlight: AbortController | null = null;

  constructor(
    private readonly client: WhatIfClient,
    readonly session: WhatIfSession,
  ) {}

  async submit(k: number, seed: number, targets?: string[]): Promise<SubmitOutcome> {
    this.inFlight?.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    const request = this.session.buildRequest(k, seed, targets);
    let response: WhatIfResponse;
    try {
      response = await this.client.submitWhatIf(request, controller.signal);
    } catch (error) {
      if (controller.signal.aborted) {
        return { view: null, banner: null, aborted: true };
      }
      if (error instanceof MalformedResponseError) {
        return { view: null, banner: `Malformed response: ${error.message}`, aborted: false };
      }
      if (error instanceof ServiceError) {
        return { view: null, banner: `${error.code}: ${error.message}`, aborted: false };
      }
      return { view: null, banner: `Request failed: ${String(error)}`, aborted: false };
    } finally {
      if (this.inFlight === controller) {
        this.inFlight = null;
      }
    }
    try {
      const view = renderWhatIf(response, this.session.schema);
      this.session.recordResponse(response);
      return { view, banner: null, aborted: false };
    } catch (error) {
      if (error instanceof MalformedResponseError) {
        return { view: null, banner: `Malformed response: ${error.message}`, aborted: false };
      }
      throw error;
    }
  }
}
