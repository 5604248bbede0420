import type { FetchJson } from "./types.js";

/** Real transport over the platform fetch; JSON in, JSON out. */
export function httpJson(baseUrl = "", baseHeaders: Record<string, string> = {}): FetchJson {
  return async (path, init = {}) => {
    const res = await fetch(baseUrl + path, {
      method: init.method ?? "GET",
      headers: {
        ...(init.body !== undefined ? { "content-type": "application/json" } : {}),
        ...baseHeaders,
        ...(init.headers ?? {}),
      },
      body: init.body !== undefined ? JSON.stringify(init.body) : undefined,
    });
    let body: unknown = null;
    const text = await res.text();
    if (text !== "") {
      try {
        body = JSON.parse(text);
      } catch {
        body = text;
      }
    }
    return { status: res.status, body };
  };
}
