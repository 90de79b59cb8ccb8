// @vitest-environment happy-dom
/** Interaction tests: the app wired to a faked server (the export
 * documents are the backend's own golden files). The canvas cannot
 * paint headlessly, but hit testing, selection, code links, and the
 * panes are real DOM. */

import {beforeEach, describe, expect, it, vi} from 'vitest';

import srcDoc from '../../tests/golden/src.view_topdown.json';
import {App} from '../src/app.js';
import {ROW_HEIGHT} from '../src/viewmodel.js';

const PROFILES = {
  profiles: [{
    handle: 0,
    name: 'src.folded',
    collector: 'folded',
    timestamp: '',
    properties: {},
    metrics: [{name: 'samples', unit: 'samples', kind: 'additive',
               aggregator: 'sum', total: 10}],
    nodes: 4,
    points: 2,
    roles: [],
  }],
};

const ROWS: Record<string, unknown> = {
  'null': {rows: [{id: 0, depth: 0, label: '«root»', inclusive: 10,
                   exclusive: 0, percent: 100, expandable: true, source: null}]},
  '0': {rows: [{id: 1, depth: 1, label: 'main', inclusive: 10, exclusive: 0,
                percent: 100, expandable: true, source: ['m.c', 2]}]},
};

const SOURCE_TEXT = 'int main() {\n  parse();\n  return 0;\n}';

function fakeFetch(url: string): Response {
  const u = new URL(url, 'http://localhost');
  const json = (body: unknown) => new Response(JSON.stringify(body), {
    status: 200, headers: {'Content-Type': 'application/json'}});
  if (u.pathname === '/api/profiles') return json(PROFILES);
  if (u.pathname === '/api/view') return json(srcDoc);
  if (u.pathname === '/api/search') {
    return json({ids: [2]});
  }
  if (u.pathname === '/api/rows') {
    return json(ROWS[u.searchParams.get('node') ?? 'null']);
  }
  if (u.pathname === '/api/source') {
    return new Response(SOURCE_TEXT, {status: 200});
  }
  if (u.pathname.endsWith('/hover')) {
    return json({node: 1, function: 'main', module: 'app', file: 'm.c',
                 line: 2, metrics: []});
  }
  return new Response(JSON.stringify({error: `no route ${u.pathname}`}),
                      {status: 404});
}

async function settle(): Promise<void> {
  for (let i = 0; i < 6; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

async function makeApp(): Promise<{app: App; root: HTMLElement}> {
  vi.stubGlobal('fetch', vi.fn(async (url: string) => fakeFetch(String(url))));
  document.body.innerHTML = '';
  location.hash = '';
  const root = document.createElement('div');
  document.body.appendChild(root);
  const app = new App(root);
  await app.start();
  await settle();
  return {app, root};
}

function canvasOf(root: HTMLElement): HTMLCanvasElement {
  return root.querySelector('.flame-host canvas.flame') as HTMLCanvasElement;
}

function clickAt(canvas: HTMLCanvasElement, x: number, y: number,
                 type = 'click'): void {
  canvas.dispatchEvent(new MouseEvent(type, {
    clientX: x, clientY: y, bubbles: true, cancelable: true}));
}

describe('app interactions', () => {
  beforeEach(() => vi.unstubAllGlobals());

  it('clicking a frame selects it and opens the metric panel', async () => {
    const {app, root} = await makeApp();
    // depth-2 row, left 60%: the "parse" rect (node 2) in the golden doc
    clickAt(canvasOf(root), 100, 2 * ROW_HEIGHT + 4);
    expect(app.state.selected).toBe(2);
    const panel = root.querySelector('.details .metric-panel');
    expect(panel).not.toBeNull();
    expect(panel!.querySelector('.sel-label')!.textContent).toBe('parse');
    expect(panel!.querySelector('.sel-share')!.textContent)
        .toContain('60.00%');
    expect(location.hash).toContain('sel=2');
  });

  it('right-click opens the source pane at the line, highlighted', async () => {
    const {root} = await makeApp();
    clickAt(canvasOf(root), 100, 1 * ROW_HEIGHT + 4, 'contextmenu');
    await settle();
    const header = root.querySelector('.source-header')!;
    expect(header.textContent).toBe('m.c:2');
    const highlighted = root.querySelectorAll('.source-line.highlight');
    expect(highlighted.length).toBe(1);
    expect(highlighted[0].textContent).toContain('parse();');
    expect(location.hash).toContain('src=m.c%3A2');
  });

  it('typing a query dims non-matching rects', async () => {
    const {app, root} = await makeApp();
    const box = root.querySelector('.toolbar input') as HTMLInputElement;
    box.value = 'parse';
    box.dispatchEvent(new Event('input', {bubbles: true}));
    await settle();
    expect(app.flame.matches).not.toBeNull();
    expect(app.flame.matches!.has(2)).toBe(true);
    expect(app.flame.matches!.has(3)).toBe(false);
    expect(location.hash).toContain('q=parse');
  });

  it('double-click zooms and drops selections outside the subtree', async () => {
    const {app, root} = await makeApp();
    const canvas = canvasOf(root);
    clickAt(canvas, 700, 2 * ROW_HEIGHT + 4);          // select deflate (node 3)
    expect(app.state.selected).toBe(3);
    clickAt(canvas, 100, 2 * ROW_HEIGHT + 4, 'dblclick');  // zoom parse
    expect(app.state.zoom).toBe(2);
    expect(app.state.selected).toBe(-1);
    expect(location.hash).toContain('zoom=2');
  });

  it('restores a view from the URL fragment', async () => {
    vi.stubGlobal('fetch', vi.fn(async (url: string) => fakeFetch(String(url))));
    document.body.innerHTML = '';
    location.hash = '#p=0&kind=topdown&metric=0&zoom=2&q=parse';
    const root = document.createElement('div');
    document.body.appendChild(root);
    const app = new App(root);
    await app.start();
    await settle();
    expect(app.state.zoom).toBe(2);
    expect(app.state.query).toBe('parse');
    expect(app.flame.zoomNode).toBe(2);
    const box = root.querySelector('.toolbar input') as HTMLInputElement;
    expect(box.value).toBe('parse');
  });

  it('tree table starts at the root and expands on demand', async () => {
    const {app, root} = await makeApp();
    void app;
    const rowsBefore = root.querySelectorAll('.table-host tr').length;
    expect(rowsBefore).toBe(2);  // header + root row
    const caretCell = root.querySelector('.table-host td') as HTMLElement;
    caretCell.click();
    await settle();
    const labels = [...root.querySelectorAll('.table-host tr td:first-child')]
        .map((td) => (td.textContent ?? '').trim());
    expect(labels.some((t) => t.endsWith('main'))).toBe(true);
  });
});
