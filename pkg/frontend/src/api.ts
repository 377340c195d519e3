/** Typed client for the probesift service. The console talks to nothing else. */
import {
  FilterConfigDoc,
  InvestigationDoc,
  ResultTableDoc,
  RunResponseDoc,
  SightingDoc,
  StayingIntervalDoc,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Service error with the API's machine-readable code (validation / not_found / conflict / internal) or "network" when the request never completed. */
export class ApiError extends Error {
  constructor(
    readonly code: string,
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  private readonly baseUrl: string;

  constructor(
    baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError("network", 0, `service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let code = "internal";
      let message = `${response.status}`;
      try {
        const doc = (await response.json()) as { code?: string; message?: string };
        code = doc.code ?? code;
        message = doc.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(code, response.status, message);
    }
    return (await response.json()) as T;
  }

  async listAps(logId: string): Promise<string[]> {
    const doc = await this.request<{ aps: string[] }>(
      "GET", `/logs/${encodeURIComponent(logId)}/aps`);
    return doc.aps;
  }

  async listSightings(
    logId: string, ap?: string, from?: number, to?: number,
  ): Promise<SightingDoc[]> {
    const params = new URLSearchParams();
    if (ap !== undefined) params.set("ap", ap);
    if (from !== undefined) params.set("from", String(from));
    if (to !== undefined) params.set("to", String(to));
    const query = params.toString();
    const doc = await this.request<{ sightings: SightingDoc[] }>(
      "GET",
      `/logs/${encodeURIComponent(logId)}/sightings${query ? `?${query}` : ""}`);
    return doc.sightings;
  }

  createInvestigation(logId: string, config?: FilterConfigDoc): Promise<InvestigationDoc> {
    const body: Record<string, unknown> = { log_id: logId };
    if (config !== undefined) body.config = config;
    return this.request<InvestigationDoc>("POST", "/investigations", body);
  }

  getInvestigation(id: string): Promise<InvestigationDoc> {
    return this.request<InvestigationDoc>("GET", `/investigations/${encodeURIComponent(id)}`);
  }

  putIntervals(
    id: string, version: number, intervals: StayingIntervalDoc[],
    config?: FilterConfigDoc,
  ): Promise<InvestigationDoc> {
    const body: Record<string, unknown> = { version, intervals };
    if (config !== undefined) body.config = config;
    return this.request<InvestigationDoc>(
      "PUT", `/investigations/${encodeURIComponent(id)}/intervals`, body);
  }

  runFilter(id: string, version: number): Promise<RunResponseDoc> {
    return this.request<RunResponseDoc>(
      "POST", `/investigations/${encodeURIComponent(id)}/run`, { version });
  }

  getResult(id: string): Promise<ResultTableDoc> {
    return this.request<ResultTableDoc>(
      "GET", `/investigations/${encodeURIComponent(id)}/result`);
  }
}
