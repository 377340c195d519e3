/** Test helpers: fixture loading and a canned-response fetch. */
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { FetchLike } from "../src/api.js";

export function fixtureText(name: string): string {
  // vitest runs with the package root as cwd
  return readFileSync(join(process.cwd(), "tests", "fixtures", name), "utf-8");
}

export function fixtureJson<T>(name: string): T {
  return JSON.parse(fixtureText(name)) as T;
}

export interface Route {
  method: string;
  /** Path with query string, e.g. "/logs/log-000001/sightings?ap=ap1". */
  path: string;
  status?: number;
  body: unknown | ((requestBody: unknown) => unknown);
}

/** Fetch stub that replays recorded responses keyed by method + path. */
export function cannedFetch(routes: Route[], base = "http://svc"): FetchLike {
  return async (url: string, init?: RequestInit) => {
    const method = init?.method ?? "GET";
    const path = url.startsWith(base) ? url.slice(base.length) : url;
    const route = routes.find((r) => r.method === method && r.path === path);
    if (!route) {
      throw new Error(`no canned route for ${method} ${path}`);
    }
    const requestBody = init?.body ? JSON.parse(init.body as string) : undefined;
    const body = typeof route.body === "function"
      ? (route.body as (b: unknown) => unknown)(requestBody)
      : route.body;
    return new Response(JSON.stringify(body), {
      status: route.status ?? 200,
      headers: { "content-type": "application/json" },
    });
  };
}

/** Parse the CLI's fixed-width text table into trimmed cell rows. */
export function parseCliTable(text: string): string[][] {
  return text
    .trimEnd()
    .split("\n")
    .map((line) => line.trim().split(/\s{2,}/));
}
