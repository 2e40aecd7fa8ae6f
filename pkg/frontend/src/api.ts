/** Typed HTTP client for the exploration API.
 *
 * Pure transport: no retries, no caching.  Non-2xx responses become ApiError
 * carrying the server's detail string so the UI can surface them inline.
 */

import type {
  Api,
  CodeTuple,
  HealthResponse,
  MixTake,
  ModelDoc,
  ResultItem,
  SampleRequest,
  SampleResponse,
  SweepResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = 'ApiError';
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient implements Api {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => globalThis.fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `cannot reach ${this.baseUrl}: ${String(err)}`);
    }
    if (!res.ok) {
      let detail = `${res.status} ${res.statusText}`;
      try {
        const body = (await res.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body, keep the status line
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<HealthResponse> {
    return this.request<HealthResponse>('/health');
  }

  sample(req: SampleRequest): Promise<SampleResponse> {
    return this.post<SampleResponse>('/sample', req);
  }

  encode(model: ModelDoc): Promise<ResultItem> {
    return this.post<ResultItem>('/encode', { model });
  }

  decode(codes: CodeTuple): Promise<ResultItem> {
    return this.post<ResultItem>('/decode', { codes });
  }

  interpolate(a: ModelDoc, b: ModelDoc, steps: number): Promise<SweepResponse> {
    return this.post<SweepResponse>('/interpolate', {
      modelA: a,
      modelB: b,
      steps,
    });
  }

  mix(a: ModelDoc, b: ModelDoc, take: MixTake): Promise<ResultItem> {
    return this.post<ResultItem>('/mix', { modelA: a, modelB: b, take });
  }
}
