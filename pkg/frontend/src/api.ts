/**
 * Typed client for the noise service.
 *
 * Two concurrency rules from the UI contract live here: identical in-flight
 * GETs are deduplicated per (endpoint, params), and snapshot-style fetches
 * carry a per-topic sequence number so a slow response never overwrites a
 * newer one.
 */

import {
  FeatureCollection,
  HistoryPayload,
  LivePayload,
  SelJobPayload,
  SelRequest,
  VesselDetail,
} from './types';

export class ApiError extends Error {
  status: number;
  detail: string;
  body: unknown;

  constructor(status: number, detail: string, body: unknown = null) {
    super(detail);
    this.status = status;
    this.detail = detail;
    this.body = body;
  }
}

export type Params = Record<string, string | number | undefined>;

export interface CsvDownload {
  filename: string;
  text: string;
}

function queryString(params?: Params): string {
  if (!params) return '';
  // Sorted keys make the dedup key canonical regardless of caller order.
  const entries = Object.entries(params)
    .filter(([, v]) => v !== undefined)
    .map(([k, v]) => [k, String(v)] as [string, string])
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
  const q = new URLSearchParams(entries).toString();
  return q ? `?${q}` : '';
}

async function errorFrom(resp: Response): Promise<ApiError> {
  let detail = `${resp.status} ${resp.statusText}`;
  let body: unknown = null;
  try {
    body = await resp.json();
    const d = (body as { detail?: unknown }).detail;
    if (typeof d === 'string') detail = d;
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(resp.status, detail, body);
}

export class ApiClient {
  private fetchFn: typeof fetch;
  private inflight = new Map<string, Promise<unknown>>();
  private seqs = new Map<string, number>();

  constructor(private base = '', fetchFn?: typeof fetch) {
    this.fetchFn = fetchFn ?? ((...args) => fetch(...args));
  }

  async getJson<T>(path: string, params?: Params): Promise<T> {
    const url = this.base + path + queryString(params);
    const pending = this.inflight.get(url);
    if (pending) return pending as Promise<T>;
    const request = (async () => {
      const resp = await this.fetchFn(url);
      if (!resp.ok) throw await errorFrom(resp);
      return (await resp.json()) as T;
    })().finally(() => this.inflight.delete(url));
    this.inflight.set(url, request);
    return request;
  }

  /**
   * getJson that resolves null when a newer request was issued on the same
   * topic before this one settled; callers drop the stale snapshot.
   */
  async latest<T>(topic: string, path: string, params?: Params): Promise<T | null> {
    const seq = (this.seqs.get(topic) ?? 0) + 1;
    this.seqs.set(topic, seq);
    const out = await this.getJson<T>(path, params);
    return this.seqs.get(topic) === seq ? out : null;
  }

  async postJson<T>(path: string, body: unknown, headers?: Record<string, string>): Promise<T> {
    const resp = await this.fetchFn(this.base + path, {
      method: 'POST',
      headers: { 'content-type': 'application/json', ...headers },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw await errorFrom(resp);
    return (await resp.json()) as T;
  }

  /** Fetch a CSV attachment, keeping the server-side filename. */
  async getCsv(path: string, params?: Params): Promise<CsvDownload> {
    const resp = await this.fetchFn(this.base + path + queryString(params));
    if (!resp.ok) throw await errorFrom(resp);
    const disposition = resp.headers.get('content-disposition') ?? '';
    const match = /filename="([^"]+)"/.exec(disposition);
    return {
      filename: match ? match[1] : 'export.csv',
      text: await resp.text(),
    };
  }

  live(params: Params): Promise<LivePayload | null> {
    return this.latest<LivePayload>('live', '/api/live', params);
  }

  history(params: Params): Promise<HistoryPayload | null> {
    return this.latest<HistoryPayload>('history', '/api/history', params);
  }

  vessel(mmsi: number, model: string): Promise<VesselDetail> {
    return this.getJson<VesselDetail>(`/api/vessel/${mmsi}`, { model });
  }

  mpas(): Promise<FeatureCollection> {
    return this.getJson<FeatureCollection>('/api/mpa');
  }

  regions(): Promise<FeatureCollection> {
    return this.getJson<FeatureCollection>('/api/regions');
  }

  submitSel(request: SelRequest, apiKey?: string): Promise<{ job_id: string; status: string }> {
    const headers = apiKey ? { 'x-api-key': apiKey } : undefined;
    return this.postJson('/api/sel', request, headers);
  }

  selJob(jobId: string): Promise<SelJobPayload> {
    return this.getJson<SelJobPayload>(`/api/sel/${jobId}`);
  }

  selExport(jobId: string, variant: 'baseline' | 'scenario'): Promise<CsvDownload> {
    return this.getCsv(`/api/sel/${jobId}/export`, { variant });
  }
}
