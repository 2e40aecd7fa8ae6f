/** DOM rendering and event wiring.
 *
 * Everything on screen is read straight from the state snapshot; this layer
 * never recomputes codes or validity, so the inspector always shows exactly
 * what the API returned.
 */

import { drawWireframe, parseObj, type WireMesh } from './objview.js';
import { sweepIndex, type ExplorationState } from './state.js';
import type { Branch, CodeTuple, ResultItem, Source } from './types.js';
import { BRANCHES } from './types.js';

export const GALLERY_N = 8;

export interface Handlers {
  drawGallery(n: number): void | Promise<void>;
  resampleKeeping(n: number): void | Promise<void>;
  pickFromGallery(index: number, which: Source): void;
  setTake(branch: Branch, source: Source): void;
  setKeep(branch: Branch, on: boolean): void;
  setSteps(steps: number): void;
  setSlider(t: number): void;
  setSeed(seed: number): void;
  setNucleus(p: number): void;
  runMix(): void | Promise<void>;
  runSweep(): void | Promise<void>;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function codeRows(codes: CodeTuple | null): string {
  if (!codes) return '<div class="code-row muted">no codes</div>';
  return BRANCHES.map(
    (branch) =>
      `<div class="code-row"><span class="branch-name">${branch}</span>` +
      `<span class="chips">${codes[branch].join(' ')}</span></div>`,
  ).join('');
}

function refCard(label: Source, item: ResultItem | null): string {
  if (!item) {
    return `<div class="ref-head">${label}</div>` +
      '<div class="muted">click a result to set</div>';
  }
  return `<div class="ref-head">${label}</div>` +
    `<div class="thumb small">${item.svg[0] ?? ''}</div>` +
    codeRows(item.codes);
}

export class DomView {
  private readonly el: Record<string, HTMLElement> = {};
  private mesh: WireMesh | null = null;
  private meshSource = '';
  private yaw = 0.7;
  private pitch = 0.5;

  constructor(private readonly root: HTMLElement) {
    this.root.innerHTML = this.skeleton();
    for (const node of this.root.querySelectorAll<HTMLElement>('[id]')) {
      this.el[node.id] = node;
    }
  }

  private skeleton(): string {
    const keepBoxes = BRANCHES.map(
      (b) =>
        `<label class="keep-box"><input type="checkbox" data-keep="${b}">` +
        `${b}</label>`,
    ).join('');
    return `
  <main class="shell">
    <header class="hero">
      <div>
        <h1>Skexcraft Explorer</h1>
        <p class="subtitle">Sample construction sequences, pick references,
        recombine their codes and walk the latent path between them.</p>
      </div>
      <div class="hero-side">
        <span class="pill" id="status-pill">idle</span>
        <span class="muted" id="api-target"></span>
      </div>
    </header>
    <div class="error-banner" id="error-banner" hidden></div>
    <section class="columns">
      <div class="panel">
        <div class="panel-head">
          <h2>Gallery</h2>
          <div class="controls">
            <label>seed <input type="number" id="seed" value="0"></label>
            <label>p <input type="number" id="nucleus" value="0.9"
                           step="0.05" min="0.05" max="1"></label>
            <button class="primary" id="draw">Sample ${GALLERY_N}</button>
          </div>
        </div>
        <div class="grid" id="gallery"></div>
        <div class="panel-foot">
          <span>keep from A:</span>${keepBoxes}
          <button id="resample">Resample</button>
        </div>
      </div>
      <div class="panel side">
        <h2>References</h2>
        <div class="refs">
          <div class="ref-card" id="ref-a"></div>
          <div class="ref-card" id="ref-b"></div>
        </div>
        <h2>Mix</h2>
        <div id="mix-take"></div>
        <button class="primary" id="mix">Mix A + B</button>
        <h2>Interpolate</h2>
        <div class="controls">
          <label>steps <input type="number" id="steps" value="8"
                              min="2" max="64"></label>
          <button class="primary" id="sweep">Fetch sweep</button>
        </div>
        <input type="range" id="slider" min="0" max="1000" value="0">
        <div class="muted" id="sweep-label">no sweep yet</div>
        <h2>Inspector</h2>
        <div id="inspector"></div>
        <canvas id="wire" width="300" height="220"></canvas>
        <div class="svg-strip" id="focus-svgs"></div>
        <div class="diagnostics" id="diagnostics"></div>
      </div>
    </section>
  </main>`;
  }

  /** Attach event listeners; handlers is the controller. */
  bind(h: Handlers): void {
    this.el['draw'].addEventListener('click', () => void h.drawGallery(GALLERY_N));
    this.el['resample'].addEventListener('click', () =>
      void h.resampleKeeping(GALLERY_N));
    this.el['mix'].addEventListener('click', () => void h.runMix());
    this.el['sweep'].addEventListener('click', () => void h.runSweep());

    this.el['gallery'].addEventListener('click', (ev) => {
      const btn = (ev.target as HTMLElement).closest<HTMLElement>('[data-pick]');
      if (!btn) return;
      h.pickFromGallery(Number(btn.dataset.index), btn.dataset.pick as Source);
    });
    this.el['mix-take'].addEventListener('click', (ev) => {
      const btn = (ev.target as HTMLElement).closest<HTMLElement>('[data-take]');
      if (!btn) return;
      h.setTake(btn.dataset.branch as Branch, btn.dataset.take as Source);
    });
    for (const box of this.root.querySelectorAll<HTMLInputElement>('[data-keep]')) {
      box.addEventListener('change', () =>
        h.setKeep(box.dataset.keep as Branch, box.checked));
    }

    const seed = this.el['seed'] as HTMLInputElement;
    seed.addEventListener('change', () => h.setSeed(Number(seed.value) || 0));
    const nucleus = this.el['nucleus'] as HTMLInputElement;
    nucleus.addEventListener('change', () =>
      h.setNucleus(Math.min(1, Math.max(0.05, Number(nucleus.value) || 0.9))));
    const steps = this.el['steps'] as HTMLInputElement;
    steps.addEventListener('change', () =>
      h.setSteps(Math.min(64, Math.max(2, Math.round(Number(steps.value) || 8)))));
    const slider = this.el['slider'] as HTMLInputElement;
    slider.addEventListener('input', () => h.setSlider(Number(slider.value) / 1000));

    this.bindOrbit(this.el['wire'] as HTMLCanvasElement);
  }

  private bindOrbit(canvas: HTMLCanvasElement): void {
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    canvas.addEventListener('pointerdown', (ev) => {
      dragging = true;
      lastX = ev.clientX;
      lastY = ev.clientY;
      canvas.setPointerCapture(ev.pointerId);
    });
    canvas.addEventListener('pointermove', (ev) => {
      if (!dragging) return;
      this.yaw += (ev.clientX - lastX) * 0.01;
      this.pitch = Math.min(
        Math.PI / 2,
        Math.max(-Math.PI / 2, this.pitch + (ev.clientY - lastY) * 0.01),
      );
      lastX = ev.clientX;
      lastY = ev.clientY;
      this.drawMesh();
    });
    canvas.addEventListener('pointerup', () => {
      dragging = false;
    });
  }

  setApiTarget(url: string): void {
    this.el['api-target'].textContent = url;
  }

  render(state: ExplorationState): void {
    this.renderStatus(state);
    this.renderGallery(state);
    this.renderRefs(state);
    this.renderMixTake(state);
    this.renderSweep(state);
    this.renderInspector(state);
  }

  private renderStatus(state: ExplorationState): void {
    const pill = this.el['status-pill'];
    pill.textContent = state.busy ?? 'idle';
    pill.classList.toggle('busy', state.busy !== null);
    const banner = this.el['error-banner'];
    banner.hidden = state.error === null;
    banner.textContent = state.error ?? '';
    (this.el['seed'] as HTMLInputElement).value = String(state.seed);
    (this.el['nucleus'] as HTMLInputElement).value = String(state.nucleusP);
    (this.el['steps'] as HTMLInputElement).value = String(state.steps);
    for (const box of this.root.querySelectorAll<HTMLInputElement>('[data-keep]')) {
      box.checked = state.keep.includes(box.dataset.keep as Branch);
    }
  }

  private renderGallery(state: ExplorationState): void {
    const cards = state.gallery.map((item, i) => {
      const badge = item.valid
        ? '<span class="badge ok">valid</span>'
        : '<span class="badge bad">invalid</span>';
      const picks = item.valid
        ? `<button data-pick="A" data-index="${i}">A</button>` +
          `<button data-pick="B" data-index="${i}">B</button>`
        : '';
      const mark =
        item === state.refA ? ' is-a' : item === state.refB ? ' is-b' : '';
      return `<div class="card${mark}">` +
        `<div class="thumb">${item.svg[0] ?? ''}</div>` +
        `<div class="card-foot">${badge}${picks}</div></div>`;
    });
    this.el['gallery'].innerHTML =
      cards.join('') || '<div class="muted">press Sample to draw models</div>';
  }

  private renderRefs(state: ExplorationState): void {
    this.el['ref-a'].innerHTML = refCard('A', state.refA);
    this.el['ref-b'].innerHTML = refCard('B', state.refB);
  }

  private renderMixTake(state: ExplorationState): void {
    this.el['mix-take'].innerHTML = BRANCHES.map((branch) => {
      const btn = (src: Source) =>
        `<button data-take="${src}" data-branch="${branch}"` +
        ` class="${state.take[branch] === src ? 'on' : ''}">${src}</button>`;
      return `<div class="take-row"><span class="branch-name">${branch}` +
        `</span>${btn('A')}${btn('B')}</div>`;
    }).join('');
  }

  private renderSweep(state: ExplorationState): void {
    const slider = this.el['slider'] as HTMLInputElement;
    slider.value = String(Math.round(state.t * 1000));
    slider.disabled = state.sweep.length === 0;
    this.el['sweep-label'].textContent = state.sweep.length
      ? `frame ${sweepIndex(state) + 1} / ${state.sweep.length}`
      : 'no sweep yet';
  }

  private renderInspector(state: ExplorationState): void {
    const focus = state.focus;
    const head = focus
      ? focus.valid
        ? '<span class="badge ok">valid</span>'
        : '<span class="badge bad">invalid</span>'
      : '<span class="muted">nothing selected</span>';
    this.el['inspector'].innerHTML = head + codeRows(focus?.codes ?? null);
    this.el['focus-svgs'].innerHTML = focus
      ? focus.svg.map((s) => `<div class="thumb small">${s}</div>`).join('')
      : '';
    this.el['diagnostics'].innerHTML = focus
      ? focus.diagnostics
          .map((d) => `<div class="diag">${escapeHtml(d)}</div>`)
          .join('')
      : '';
    const obj = focus?.obj ?? '';
    if (obj !== this.meshSource) {
      this.meshSource = obj;
      this.mesh = obj ? parseObj(obj) : null;
    }
    this.drawMesh();
  }

  private drawMesh(): void {
    const canvas = this.el['wire'] as HTMLCanvasElement;
    const ctx = canvas.getContext('2d');
    if (!ctx) return;
    if (!this.mesh) {
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      return;
    }
    drawWireframe(ctx, this.mesh, canvas.width, canvas.height,
                  this.yaw, this.pitch);
  }
}
