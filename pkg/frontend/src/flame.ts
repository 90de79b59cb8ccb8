/** Canvas flame graph: executes a draw plan and translates pointer
 * events into the host's callbacks. All geometry lives in viewmodel.ts;
 * this file only paints and dispatches. */

import type {ExportDoc} from './types.js';
import {DrawRect, displayLabel, hitTest, planFlame, ROW_HEIGHT} from './viewmodel.js';

export interface FlameCallbacks {
  onSelect(rect: DrawRect): void;
  onZoom(rect: DrawRect): void;
  onCodeLink(rect: DrawRect): void;
  onHover(rect: DrawRect | null): void;
}

export class FlameGraph {
  private canvas: HTMLCanvasElement;
  private doc: ExportDoc | null = null;
  private plan: DrawRect[] = [];
  zoomNode = -1;
  selectedNode = -1;
  matches: Set<number> | null = null;

  constructor(private container: HTMLElement,
              private callbacks: FlameCallbacks) {
    this.canvas = document.createElement('canvas');
    this.canvas.className = 'flame';
    container.appendChild(this.canvas);
    this.canvas.addEventListener('click', (ev) => {
      const rect = this.rectAt(ev);
      if (rect && rect.node >= 0) this.callbacks.onSelect(rect);
    });
    this.canvas.addEventListener('dblclick', (ev) => {
      const rect = this.rectAt(ev);
      if (rect && rect.node >= 0) this.callbacks.onZoom(rect);
    });
    this.canvas.addEventListener('contextmenu', (ev) => {
      ev.preventDefault();
      const rect = this.rectAt(ev);
      if (rect) this.callbacks.onCodeLink(rect);
    });
    this.canvas.addEventListener('mousemove', (ev) => {
      this.callbacks.onHover(this.rectAt(ev));
    });
    this.canvas.addEventListener('mouseleave', () => this.callbacks.onHover(null));
    this.canvas.addEventListener('keydown', (ev) => {
      if (ev.key === 'Enter') {
        const rect = this.plan.find((r) => r.node === this.selectedNode);
        if (rect) this.callbacks.onCodeLink(rect);
      }
    });
    this.canvas.tabIndex = 0;
  }

  setDocument(doc: ExportDoc): void {
    this.doc = doc;
    this.render();
  }

  private rectAt(ev: MouseEvent): DrawRect | null {
    const bounds = this.canvas.getBoundingClientRect();
    return hitTest(this.plan, ev.clientX - bounds.left, ev.clientY - bounds.top);
  }

  depthOf(doc: ExportDoc): number {
    return doc.rects.reduce((m, r) => Math.max(m, r[1]), 0) + 1;
  }

  render(): void {
    if (!this.doc) return;
    const cssWidth = this.container.clientWidth || 800;
    const cssHeight = Math.max(this.depthOf(this.doc) * ROW_HEIGHT + 4, 120);
    const scale = window.devicePixelRatio || 1;
    this.canvas.width = Math.round(cssWidth * scale);
    this.canvas.height = Math.round(cssHeight * scale);
    this.canvas.style.width = `${cssWidth}px`;
    this.canvas.style.height = `${cssHeight}px`;
    this.plan = planFlame(this.doc, {
      width: cssWidth,
      height: cssHeight,
      zoomNode: this.zoomNode,
      selectedNode: this.selectedNode,
      matches: this.matches,
    });
    // hit testing works off the plan even when 2D contexts are
    // unavailable (headless test environments)
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    ctx.setTransform(scale, 0, 0, scale, 0, 0);
    ctx.clearRect(0, 0, cssWidth, cssHeight);
    ctx.font = '11px ui-monospace, monospace';
    ctx.textBaseline = 'middle';
    for (const rect of this.plan) {
      ctx.globalAlpha = rect.dimmed ? 0.25 : 1.0;
      ctx.fillStyle = rect.color;
      ctx.fillRect(rect.x, rect.y, Math.max(rect.w - 0.5, 0.5), rect.h);
      if (rect.selected) {
        ctx.strokeStyle = '#111';
        ctx.lineWidth = 1.5;
        ctx.strokeRect(rect.x + 0.75, rect.y + 0.75, rect.w - 2, rect.h - 1.5);
      }
      if (rect.w >= 28) {
        ctx.fillStyle = '#15121a';
        const text = displayLabel(rect);
        ctx.save();
        ctx.beginPath();
        ctx.rect(rect.x + 2, rect.y, rect.w - 5, rect.h);
        ctx.clip();
        ctx.fillText(text, rect.x + 4, rect.y + rect.h / 2 + 0.5);
        ctx.restore();
      }
    }
    ctx.globalAlpha = 1.0;
  }
}
