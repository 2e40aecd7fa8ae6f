/** Wire types for the checkpoint exploration API.
 *
 * Model JSON is opaque to the UI: it is only ever echoed back to the server
 * (mix, interpolate, encode) or rendered through the svg/obj fields that
 * arrive next to it.
 */

export type Branch = 'topology' | 'geometry' | 'extrude';
export const BRANCHES: readonly Branch[] = ['topology', 'geometry', 'extrude'];

export type Source = 'A' | 'B';

/** Mixing selection: every code branch comes from exactly one reference. */
export type MixTake = Record<Branch, Source>;

export type ModelDoc = Record<string, unknown>;

export type CodeTuple = Record<Branch, number[]>;

/** One decoded model as the server reports it. */
export interface ResultItem {
  model: ModelDoc | null;
  codes: CodeTuple | null;
  svg: string[];
  obj: string;
  valid: boolean;
  diagnostics: string[];
}

export interface SampleRequest {
  n: number;
  seed: number;
  nucleus_p: number;
  condition?: Partial<Record<Branch, number[]>>;
}

export interface SampleResponse {
  results: ResultItem[];
  n_requested: number;
  n_attempts: number;
  validity_percent: number;
  exhausted: boolean;
}

export interface SweepResponse {
  results: ResultItem[];
  steps: number;
}

export interface HealthResponse {
  status: string;
  loaded: boolean;
  selectors?: string[];
  meta?: Record<string, unknown>;
}

/** The surface the UI consumes; ApiClient speaks it over HTTP, tests over a
 * mock. */
export interface Api {
  health(): Promise<HealthResponse>;
  sample(req: SampleRequest): Promise<SampleResponse>;
  encode(model: ModelDoc): Promise<ResultItem>;
  decode(codes: CodeTuple): Promise<ResultItem>;
  interpolate(a: ModelDoc, b: ModelDoc, steps: number): Promise<SweepResponse>;
  mix(a: ModelDoc, b: ModelDoc, take: MixTake): Promise<ResultItem>;
}
