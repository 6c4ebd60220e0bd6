import { readFileSync } from "node:fs";

import type { FetchLike } from "../src/api.js";

export interface Recorded<T = unknown> {
  url: string;
  status: number;
  body: T;
}

export function fixture<T = unknown>(name: string): Recorded<T> {
  const url = new URL(`../fixtures/${name}.json`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")) as Recorded<T>;
}

/** Fetch stub serving recorded fixtures; longest matching prefix wins. */
export function fixtureFetch(routes: Record<string, Recorded>): FetchLike {
  return async (url: string) => {
    const path = url.split("#")[0];
    const keys = Object.keys(routes).sort((a, b) => b.length - a.length);
    for (const key of keys) {
      if (path === key || path.startsWith(key)) {
        const recorded = routes[key];
        return {
          status: recorded.status,
          json: async () => JSON.parse(JSON.stringify(recorded.body)),
        };
      }
    }
    return {
      status: 404,
      json: async () => ({ code: "UnknownRoute", message: path, detail: null }),
    };
  };
}
