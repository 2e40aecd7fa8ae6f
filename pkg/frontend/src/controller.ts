/** Action layer between the DOM and the API.
 *
 * Concurrency: at most one request per action kind is honored.  Every call
 * takes a serial number; a response only lands if its serial is still the
 * newest for that kind, so stale responses are discarded rather than
 * clobbering fresher state.  API failures land in state.error, never a
 * silent drop.
 */

import {
  assertTake,
  currentFrame,
  initialState,
  withKeep,
  withReference,
  withTake,
  type ExplorationState,
} from './state.js';
import type { Api, Branch, ResultItem, Source } from './types.js';

export interface View {
  render(state: ExplorationState): void;
}

type ActionKind = 'gallery' | 'mix' | 'sweep';

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

export class Controller {
  private state: ExplorationState;
  private serial = 0;
  private latest: Partial<Record<ActionKind, number>> = {};

  constructor(
    private readonly api: Api,
    private readonly view: View,
    seed = 0,
  ) {
    this.state = initialState(seed);
    this.view.render(this.state);
  }

  snapshot(): ExplorationState {
    return this.state;
  }

  private commit(next: ExplorationState): void {
    this.state = next;
    this.view.render(next);
  }

  private begin(kind: ActionKind): number {
    this.serial += 1;
    this.latest[kind] = this.serial;
    return this.serial;
  }

  private fresh(kind: ActionKind, id: number): boolean {
    return this.latest[kind] === id;
  }

  // ---- local state actions ----

  pick(item: ResultItem, which: Source): void {
    if (!item.model || !item.codes) {
      this.commit({
        ...this.state,
        error: 'an invalid result cannot become a reference',
      });
      return;
    }
    this.commit(withReference(this.state, item, which));
  }

  pickFromGallery(index: number, which: Source): void {
    const item = this.state.gallery[index];
    if (item) this.pick(item, which);
  }

  setTake(branch: Branch, source: Source): void {
    this.commit(withTake(this.state, branch, source));
  }

  setKeep(branch: Branch, on: boolean): void {
    this.commit(withKeep(this.state, branch, on));
  }

  setSteps(steps: number): void {
    this.commit({ ...this.state, steps });
  }

  setSeed(seed: number): void {
    this.commit({ ...this.state, seed });
  }

  setNucleus(p: number): void {
    this.commit({ ...this.state, nucleusP: p });
  }

  /** Slider moves only re-index the already-decoded sweep; no requests. */
  setSlider(t: number): void {
    const next = { ...this.state, t: Math.min(1, Math.max(0, t)) };
    const frame = currentFrame(next);
    this.commit(frame ? { ...next, focus: frame } : next);
  }

  // ---- API actions ----

  async drawGallery(n: number): Promise<void> {
    const id = this.begin('gallery');
    const seed = this.state.seed;
    this.commit({ ...this.state, busy: 'sampling', error: null, seed: seed + 1 });
    try {
      const res = await this.api.sample({
        n,
        seed,
        nucleus_p: this.state.nucleusP,
      });
      if (!this.fresh('gallery', id)) return;
      this.commit({ ...this.state, gallery: res.results, busy: null });
    } catch (err) {
      if (!this.fresh('gallery', id)) return;
      this.commit({ ...this.state, busy: null, error: message(err) });
    }
  }

  /** Resample the gallery with the kept branches pinned to reference A's
   * codes; with nothing kept this is a plain redraw. */
  async resampleKeeping(n: number): Promise<void> {
    const ref = this.state.refA;
    if (this.state.keep.length && !ref?.codes) {
      this.commit({
        ...this.state,
        error: 'conditioned resampling needs reference A',
      });
      return;
    }
    const condition: Partial<Record<Branch, number[]>> = {};
    for (const branch of this.state.keep) {
      condition[branch] = ref!.codes![branch];
    }
    const id = this.begin('gallery');
    const seed = this.state.seed;
    this.commit({ ...this.state, busy: 'resampling', error: null, seed: seed + 1 });
    try {
      const res = await this.api.sample({
        n,
        seed,
        nucleus_p: this.state.nucleusP,
        condition: this.state.keep.length ? condition : undefined,
      });
      if (!this.fresh('gallery', id)) return;
      const focus = res.results[0] ?? this.state.focus;
      this.commit({ ...this.state, gallery: res.results, focus, busy: null });
    } catch (err) {
      if (!this.fresh('gallery', id)) return;
      this.commit({ ...this.state, busy: null, error: message(err) });
    }
  }

  async runMix(): Promise<void> {
    const { refA, refB, take } = this.state;
    if (!refA?.model || !refB?.model) {
      this.commit({ ...this.state, error: 'mixing needs both references set' });
      return;
    }
    assertTake(take);
    const id = this.begin('mix');
    this.commit({ ...this.state, busy: 'mixing', error: null });
    try {
      const item = await this.api.mix(refA.model, refB.model, take);
      if (!this.fresh('mix', id)) return;
      this.commit({ ...this.state, mixed: item, focus: item, busy: null });
    } catch (err) {
      if (!this.fresh('mix', id)) return;
      this.commit({ ...this.state, busy: null, error: message(err) });
    }
  }

  /** Fetch the whole sweep once; setSlider then walks the frames locally. */
  async runSweep(): Promise<void> {
    const { refA, refB } = this.state;
    if (!refA?.model || !refB?.model) {
      this.commit({
        ...this.state,
        error: 'interpolation needs both references set',
      });
      return;
    }
    const id = this.begin('sweep');
    this.commit({ ...this.state, busy: 'interpolating', error: null });
    try {
      const res = await this.api.interpolate(
        refA.model,
        refB.model,
        this.state.steps,
      );
      if (!this.fresh('sweep', id)) return;
      const next = { ...this.state, sweep: res.results, t: 0, busy: null };
      this.commit({ ...next, focus: currentFrame(next) ?? next.focus });
    } catch (err) {
      if (!this.fresh('sweep', id)) return;
      this.commit({ ...this.state, busy: null, error: message(err) });
    }
  }
}
