/** Typed API client with per-panel latest-wins request cancellation. */

import type { ApiResult } from "./types.js";

export interface ResponseLike {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { signal?: AbortSignal }
) => Promise<ResponseLike>;

/** Marker for responses superseded by a newer request on the same panel. */
export const STALE = Symbol("stale");

export class ApiClient {
  private controllers = new Map<string, AbortController>();
  readonly requests: string[] = []; // request log, inspected by tests

  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init)
  ) {}

  /**
   * GET a path on behalf of a panel.  A newer request for the same panel
   * aborts this one, which then resolves to STALE and must be ignored.
   */
  async get<T>(panel: string, path: string): Promise<ApiResult<T> | typeof STALE> {
    this.controllers.get(panel)?.abort();
    const controller = new AbortController();
    this.controllers.set(panel, controller);
    const url = this.base + path;
    this.requests.push(url);
    try {
      const response = await this.fetchFn(url, { signal: controller.signal });
      if (controller.signal.aborted) return STALE;
      const body = (await response.json()) as T;
      return { status: response.status, body };
    } catch (err) {
      if (controller.signal.aborted) return STALE;
      return {
        status: 0,
        body: { code: "NetworkError", message: String(err), detail: null } as never,
      };
    }
  }
}
