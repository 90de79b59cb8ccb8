/** Pure view-model math for the flame graph: hierarchy reconstruction,
 * zoom renormalization, hit testing, and the draw plan. Everything here
 * is a plain function of (document, state, canvas size) so the test
 * suite can check geometry without a canvas. */

import type {ExportDoc, RectRow} from './types.js';

export const ROW_HEIGHT = 18;

export interface DrawRect {
  rectIndex: number;
  node: number;            // -1 for merged «…» rects
  x: number;               // device pixels
  y: number;
  w: number;
  h: number;
  label: string;
  tag: string;             // '' when untagged
  color: string;
  dimmed: boolean;
  selected: boolean;
  sourceIdx: number;       // -1 when the node has no code mapping
}

/** Parent rect index per rect, derived from pre-order + depth. */
export function rectParents(rects: RectRow[]): Int32Array {
  const parents = new Int32Array(rects.length).fill(-1);
  const lastAtDepth: number[] = [];
  rects.forEach((rect, i) => {
    const depth = rect[1];
    if (depth > 0) parents[i] = lastAtDepth[depth - 1] ?? -1;
    lastAtDepth[depth] = i;
    lastAtDepth.length = depth + 1;
  });
  return parents;
}

export function rectIndexOfNode(doc: ExportDoc, node: number): number {
  return doc.rects.findIndex((r) => r[0] === node);
}

/** True when `maybeAncestor` is an ancestor-or-self of `rectIndex`. */
export function isAncestorOrSelf(
    parents: Int32Array, maybeAncestor: number, rectIndex: number): boolean {
  for (let i = rectIndex; i >= 0; i = parents[i]) {
    if (i === maybeAncestor) return true;
  }
  return false;
}

export interface PlanOptions {
  width: number;           // device pixels
  height: number;
  zoomNode: number;        // -1 for the whole profile
  selectedNode: number;    // -1 for none
  matches: Set<number> | null;  // search hits; null disables dimming
}

/** Lay the visible rects out in device pixels. Zooming renormalizes the
 * zoom node's interval to the full width and hides everything outside
 * its subtree; rects narrower than one device pixel are skipped. */
export function planFlame(doc: ExportDoc, opts: PlanOptions): DrawRect[] {
  const parents = rectParents(doc.rects);
  const zoomIdx = opts.zoomNode >= 0 ? rectIndexOfNode(doc, opts.zoomNode) : -1;
  let x0 = 0;
  let x1 = 1;
  if (zoomIdx >= 0) {
    x0 = doc.rects[zoomIdx][2];
    x1 = doc.rects[zoomIdx][3];
  }
  const span = x1 - x0 || 1;
  const out: DrawRect[] = [];
  doc.rects.forEach((rect, i) => {
    const depth = rect[1];
    const y = depth * ROW_HEIGHT;
    if (y >= opts.height) return;
    if (zoomIdx >= 0 && !isAncestorOrSelf(parents, zoomIdx, i)) {
      // ancestors of the zoom node stay visible as full-width context
      if (!isAncestorOrSelf(parents, i, zoomIdx)) return;
      out.push(makeRect(doc, i, 0, y, opts.width, opts, true));
      return;
    }
    const px0 = ((Math.max(rect[2], x0) - x0) / span) * opts.width;
    const px1 = ((Math.min(rect[3], x1) - x0) / span) * opts.width;
    if (px1 - px0 < 1) return;
    out.push(makeRect(doc, i, px0, y, px1 - px0, opts, false));
  });
  return out;
}

function makeRect(doc: ExportDoc, i: number, x: number, y: number, w: number,
                  opts: PlanOptions, isContext: boolean): DrawRect {
  const [node, , , , labelIdx, colorIdx, tagIdx, srcIdx] = doc.rects[i];
  const tag = tagIdx >= 0 ? doc.tags[tagIdx] : '';
  const colorKey = colorIdx >= 0 ? doc.labels[colorIdx] : '';
  const hasSource = srcIdx >= 0;
  const matched = opts.matches === null || node < 0 || opts.matches.has(node);
  return {
    rectIndex: i,
    node,
    x,
    y,
    w,
    h: ROW_HEIGHT - 1,
    label: doc.labels[labelIdx],
    tag,
    color: rectColor(doc.kind, colorKey, tag, hasSource, isContext),
    dimmed: !matched,
    selected: node >= 0 && node === opts.selectedNode,
    sourceIdx: srcIdx,
  };
}

const TAG_COLORS: Record<string, string> = {
  '[A]': 'hsl(145, 55%, 44%)',   // added
  '[D]': 'hsl(275, 35%, 55%)',   // deleted
  '[+]': 'hsl(5, 70%, 52%)',     // larger in the second profile
  '[-]': 'hsl(210, 65%, 50%)',   // smaller in the second profile
  '': 'hsl(40, 15%, 62%)',
};

/** Categorical palette keyed by module/file; diff views use the tag
 * palette instead, and missing line mapping renders darker. */
export function rectColor(kind: ExportDoc['kind'], colorKey: string,
                          tag: string, hasSource: boolean,
                          isContext: boolean): string {
  if (isContext) return 'hsl(220, 10%, 80%)';
  if (kind === 'diff') return TAG_COLORS[tag] ?? TAG_COLORS[''];
  const hue = (hashString(colorKey) % 360 + 360) % 360;
  const light = hasSource ? 62 : 45;
  return `hsl(${hue}, 60%, ${light}%)`;
}

export function hashString(text: string): number {
  let h = 2166136261;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

/** The rect under a device-pixel point, deepest row wins. */
export function hitTest(plan: DrawRect[], px: number, py: number): DrawRect | null {
  let hit: DrawRect | null = null;
  for (const rect of plan) {
    if (px >= rect.x && px < rect.x + rect.w &&
        py >= rect.y && py < rect.y + rect.h) {
      if (hit === null || rect.y > hit.y) hit = rect;
    }
  }
  return hit;
}

/** Display label: diff tags become visible prefixes, e.g. "[A] f". */
export function displayLabel(rect: DrawRect): string {
  return rect.tag ? `${rect.tag} ${rect.label}` : rect.label;
}

/** Search hits from the document's own index (used when the server is
 * unreachable mid-interaction and for instant feedback). */
export function localSearch(doc: ExportDoc, query: string): Set<number> {
  const q = query.toLowerCase();
  const out = new Set<number>();
  for (const [name, nodes] of Object.entries(doc.searchIndex)) {
    if (name.toLowerCase().includes(q)) nodes.forEach((n) => out.add(n));
  }
  return out;
}

export function percentOfTotal(doc: ExportDoc, rectIndex: number): number {
  const [, , x0, x1] = doc.rects[rectIndex];
  return (x1 - x0) * 100;
}
