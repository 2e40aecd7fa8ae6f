/** Exploration state: one plain snapshot plus pure update helpers.
 *
 * The view renders snapshots verbatim; every code index on screen comes from
 * a ResultItem held here exactly as the API returned it.
 */

import type { Branch, MixTake, ResultItem, Source } from './types.js';
import { BRANCHES } from './types.js';

export interface ExplorationState {
  gallery: ResultItem[];
  refA: ResultItem | null;
  refB: ResultItem | null;
  /** Mixing selection; invariant: every branch assigned to exactly A or B. */
  take: MixTake;
  /** Branches whose codes a conditioned resample holds fixed (from ref A). */
  keep: Branch[];
  /** Interpolation sweep resolution (number of decoded frames). */
  steps: number;
  /** Slider position in [0, 1]; indexes into the fetched sweep. */
  t: number;
  /** Decoded sweep frames; empty until a sweep runs, then length == steps. */
  sweep: ResultItem[];
  /** Inspector subject: the most recently produced or picked result. */
  focus: ResultItem | null;
  /** Last mix output, kept for re-rendering alongside new focus targets. */
  mixed: ResultItem | null;
  seed: number;
  nucleusP: number;
  /** Action currently in flight, for the status pill; null when idle. */
  busy: string | null;
  error: string | null;
}

export function initialState(seed = 0): ExplorationState {
  return {
    gallery: [],
    refA: null,
    refB: null,
    take: { topology: 'A', geometry: 'A', extrude: 'A' },
    keep: [],
    steps: 8,
    t: 0,
    sweep: [],
    focus: null,
    mixed: null,
    seed,
    nucleusP: 0.9,
    busy: null,
    error: null,
  };
}

/** Throws unless every branch maps to 'A' or 'B' and nothing else is there. */
export function assertTake(take: MixTake): void {
  for (const branch of BRANCHES) {
    const source = take[branch];
    if (source !== 'A' && source !== 'B') {
      throw new Error(`mix selection leaves ${branch} unassigned`);
    }
  }
  const extra = Object.keys(take).filter(
    (key) => !(BRANCHES as readonly string[]).includes(key),
  );
  if (extra.length) {
    throw new Error(`mix selection has unknown branches: ${extra.join(', ')}`);
  }
}

export function withTake(
  state: ExplorationState,
  branch: Branch,
  source: Source,
): ExplorationState {
  const take = { ...state.take, [branch]: source };
  assertTake(take);
  return { ...state, take };
}

/** Picking a reference also focuses it, so the inspector follows the click. */
export function withReference(
  state: ExplorationState,
  item: ResultItem,
  which: Source,
): ExplorationState {
  return which === 'A'
    ? { ...state, refA: item, focus: item }
    : { ...state, refB: item, focus: item };
}

export function withKeep(
  state: ExplorationState,
  branch: Branch,
  on: boolean,
): ExplorationState {
  const keep = state.keep.filter((b) => b !== branch);
  if (on) keep.push(branch);
  keep.sort((x, y) => BRANCHES.indexOf(x) - BRANCHES.indexOf(y));
  return { ...state, keep };
}

/** Sweep frame index for the current slider position. */
export function sweepIndex(state: ExplorationState): number {
  if (state.sweep.length < 2) return 0;
  const last = state.sweep.length - 1;
  return Math.min(last, Math.max(0, Math.round(state.t * last)));
}

export function currentFrame(state: ExplorationState): ResultItem | null {
  return state.sweep.length ? state.sweep[sweepIndex(state)] : null;
}
