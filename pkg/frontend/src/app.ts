/** Application shell: three panes (source on top, flame graph or tree
 * table below, details on the right) driven by a URL-fragment state.
 * All metric math comes from server documents; this side only renders. */

import * as api from './api.js';
import {FlameGraph} from './flame.js';
import {renderHistogram} from './histogram.js';
import {SourcePane} from './source.js';
import {TableModel, SortColumn} from './table.js';
import type {ExportDoc, ProfileInfo, TableRow} from './types.js';
import {decodeState, DEFAULT_STATE, encodeState, ViewState} from './state.js';
import {DrawRect, isAncestorOrSelf, localSearch, rectIndexOfNode,
        rectParents} from './viewmodel.js';

const KINDS = ['topdown', 'bottomup', 'flat', 'diff', 'aggregate'] as const;

class App {
  state: ViewState = {...DEFAULT_STATE};
  profiles: ProfileInfo[] = [];
  doc: ExportDoc | null = null;
  flame: FlameGraph;
  source: SourcePane;
  table: TableModel | null = null;
  private viewChannel = new api.LatestOnly();
  private searchChannel = new api.LatestOnly();
  private detailChannel = new api.LatestOnly();

  private toolbar = el('div', 'toolbar');
  private main = el('div', 'main-pane');
  private flameHost = el('div', 'flame-host');
  private tableHost = el('div', 'table-host');
  private details = el('div', 'details');
  private status = el('div', 'status');
  private correlateHost = el('div', 'correlate-host');

  constructor(root: HTMLElement) {
    const sourceHost = el('div', 'source-pane');
    this.source = new SourcePane(sourceHost);
    const lower = el('div', 'lower');
    this.main.appendChild(this.flameHost);
    this.main.appendChild(this.tableHost);
    this.main.appendChild(this.correlateHost);
    lower.appendChild(this.main);
    lower.appendChild(this.details);
    root.appendChild(this.toolbar);
    root.appendChild(this.status);
    root.appendChild(sourceHost);
    root.appendChild(lower);
    this.flame = new FlameGraph(this.flameHost, {
      onSelect: (rect) => this.select(rect.node),
      onZoom: (rect) => this.zoomTo(rect.node),
      onCodeLink: (rect) => this.codeLink(rect),
      onHover: (rect) => this.hoverInfo(rect),
    });
    window.addEventListener('hashchange', () => {
      this.state = decodeState(location.hash);
      void this.refresh(false);
    });
    window.addEventListener('resize', () => this.flame.render());
  }

  async start(): Promise<void> {
    this.profiles = await api.profiles();
    if (location.hash.length > 1) this.state = decodeState(location.hash);
    this.buildToolbar();
    await this.refresh(false);
  }

  private pushState(): void {
    const fragment = encodeState(this.state);
    if (location.hash !== fragment) history.replaceState(null, '', fragment);
  }

  private buildToolbar(): void {
    this.toolbar.textContent = '';
    const profSelect = select(
        this.profiles.map((p) => [String(p.handle), `${p.handle}: ${p.name || p.collector || 'profile'}`]),
        String(this.state.profiles[0] ?? 0));
    profSelect.addEventListener('change', () => {
      this.state.profiles[0] = parseInt(profSelect.value, 10);
      this.resetView();
    });
    this.toolbar.appendChild(label('profile', profSelect));

    const otherSelect = select(
        this.profiles.map((p) => [String(p.handle), `${p.handle}: ${p.name || 'profile'}`]),
        String(this.state.profiles[1] ?? (this.profiles[1]?.handle ?? 0)));
    otherSelect.addEventListener('change', () => {
      if (this.state.kind === 'diff' || this.state.kind === 'aggregate') {
        this.state.profiles = [this.state.profiles[0], parseInt(otherSelect.value, 10)];
        this.resetView();
      }
    });
    this.toolbar.appendChild(label('vs', otherSelect));

    const kindGroup = el('span', 'kind-group');
    for (const kind of KINDS) {
      const button = document.createElement('button');
      button.textContent = kind;
      button.className = kind === this.state.kind ? 'active' : '';
      button.addEventListener('click', () => {
        this.state.kind = kind;
        if (kind === 'diff' || kind === 'aggregate') {
          const second = parseInt(otherSelect.value, 10);
          this.state.profiles = [this.state.profiles[0],
                                 Number.isInteger(second) ? second : 0];
        } else {
          this.state.profiles = [this.state.profiles[0]];
        }
        this.resetView();
        this.buildToolbar();
      });
      kindGroup.appendChild(button);
    }
    this.toolbar.appendChild(kindGroup);

    const current = this.profiles[this.state.profiles[0]];
    const metricSelect = select(
        (current?.metrics ?? []).map((m, i) => [String(i), `${m.name} (${m.unit || m.kind})`]),
        this.state.metric);
    metricSelect.addEventListener('change', () => {
      this.state.metric = metricSelect.value;
      this.resetView();
    });
    this.toolbar.appendChild(label('metric', metricSelect));

    const modeButton = document.createElement('button');
    modeButton.textContent = this.state.mode === 'flame' ? 'tree table' : 'flame graph';
    modeButton.addEventListener('click', () => {
      this.state.mode = this.state.mode === 'flame' ? 'table' : 'flame';
      modeButton.textContent = this.state.mode === 'flame' ? 'tree table' : 'flame graph';
      this.pushState();
      void this.refresh(true);
    });
    this.toolbar.appendChild(modeButton);

    const searchBox = document.createElement('input');
    searchBox.placeholder = 'search function…';
    searchBox.value = this.state.query;
    searchBox.addEventListener('input', () => {
      this.state.query = searchBox.value;
      this.pushState();
      this.applySearch();
    });
    this.toolbar.appendChild(label('find', searchBox));

    const resetZoom = document.createElement('button');
    resetZoom.textContent = 'reset zoom';
    resetZoom.addEventListener('click', () => this.zoomTo(-1));
    this.toolbar.appendChild(resetZoom);
  }

  private resetView(): void {
    this.state.zoom = -1;
    this.state.selected = -1;
    this.pushState();
    void this.refresh(true);
  }

  private fetchDoc(): Promise<ExportDoc> {
    const [p1, p2 = 0] = this.state.profiles;
    if (this.state.kind === 'diff') {
      return api.diffDoc(p1, p2, 'topdown', this.state.metric);
    }
    if (this.state.kind === 'aggregate') {
      return api.aggregateDoc(this.state.profiles.length > 1 ?
          this.state.profiles : [p1, p2], this.state.metric);
    }
    return api.viewDoc(p1, this.state.kind, this.state.metric);
  }

  async refresh(keepToolbar: boolean): Promise<void> {
    if (!keepToolbar) this.buildToolbar();
    this.status.textContent = 'loading…';
    await this.viewChannel.run(
        () => this.fetchDoc(),
        (doc) => {
          if (doc.version !== 1) {
            this.showError(`unsupported document version ${doc.version}`);
            return;
          }
          this.doc = doc;
          this.status.textContent = '';
          this.flame.zoomNode = this.state.zoom;
          this.flame.selectedNode = this.state.selected;
          this.flame.setDocument(doc);
          this.applySearch();
          this.renderDetails(null);
          void this.renderTable();
          this.renderCorrelate();
          if (this.state.source) {
            void this.source.show(this.state.source.file, this.state.source.line);
          }
          this.flameHost.style.display = this.state.mode === 'flame' ? '' : 'none';
          this.tableHost.style.display = this.state.mode === 'table' ? '' : 'none';
        },
        (err) => this.showError(err.message));
  }

  private showError(message: string): void {
    this.status.textContent = '';
    const banner = el('div', 'error-banner');
    banner.textContent = `error: ${message}`;
    this.status.appendChild(banner);
  }

  private applySearch(): void {
    const doc = this.doc;
    if (!doc) return;
    if (!this.state.query) {
      this.flame.matches = null;
      this.flame.render();
      return;
    }
    // instant local feedback; the server result replaces it when it lands
    this.flame.matches = localSearch(doc, this.state.query);
    this.flame.render();
    if (this.state.kind === 'diff' || this.state.kind === 'aggregate') return;
    void this.searchChannel.run(
        () => api.search(this.state.profiles[0], this.state.kind,
                         this.state.metric, this.state.query),
        (ids) => {
          this.flame.matches = new Set(ids);
          this.flame.render();
        });
  }

  private select(node: number): void {
    this.state.selected = node;
    this.flame.selectedNode = node;
    this.pushState();
    this.flame.render();
    this.renderDetails(node);
  }

  private zoomTo(node: number): void {
    const doc = this.doc;
    if (doc && node >= 0 && this.state.selected >= 0) {
      // the zoom node must stay an ancestor-or-self of the selection
      const parents = rectParents(doc.rects);
      const z = rectIndexOfNode(doc, node);
      const s = rectIndexOfNode(doc, this.state.selected);
      if (z >= 0 && s >= 0 && !isAncestorOrSelf(parents, z, s)) {
        this.state.selected = -1;
        this.flame.selectedNode = -1;
      }
    }
    this.state.zoom = node;
    this.flame.zoomNode = node;
    this.pushState();
    this.flame.render();
  }

  private codeLink(rect: DrawRect): void {
    const doc = this.doc;
    if (!doc || rect.sourceIdx < 0) return;
    const [file, line] = doc.sources[rect.sourceIdx];
    this.state.source = {file, line};
    this.pushState();
    void this.source.show(file, line);
  }

  private hoverInfo(rect: DrawRect | null): void {
    if (!rect || rect.node < 0 || this.state.kind === 'diff' ||
        this.state.kind === 'aggregate') {
      return;
    }
    void this.detailChannel.run(
        () => api.hover(this.state.profiles[0], rect.node),
        (info) => {
          const hoverBox = this.details.querySelector('.hover-box');
          if (!hoverBox) return;
          hoverBox.textContent = '';
          const title = el('div', 'hover-title');
          title.textContent = info.file
              ? `${info.function} · ${info.file}:${info.line}`
              : info.function;
          hoverBox.appendChild(title);
          for (const m of info.metrics) {
            const row = el('div', 'hover-row');
            const line = m.line_total === null ? '' :
                ` (line total ${m.line_total}${m.unit ? ' ' + m.unit : ''})`;
            row.textContent = `${m.name}: ${m.value ?? '—'}${line}`;
            hoverBox.appendChild(row);
          }
        });
  }

  private renderDetails(node: number | null): void {
    this.details.textContent = '';
    const doc = this.doc;
    const heading = el('div', 'details-heading');
    heading.textContent = doc ? `${doc.kind} · ${doc.metric} · total ${doc.total}` : '';
    this.details.appendChild(heading);
    if (doc && node !== null && node >= 0) {
      const idx = rectIndexOfNode(doc, node);
      if (idx >= 0) {
        const [, , x0, x1, labelIdx, , tagIdx] = doc.rects[idx];
        const panel = el('div', 'metric-panel');
        const tag = tagIdx >= 0 && doc.tags[tagIdx] ? doc.tags[tagIdx] + ' ' : '';
        panel.appendChild(textDiv(`${tag}${doc.labels[labelIdx]}`, 'sel-label'));
        panel.appendChild(textDiv(
            `${((x1 - x0) * 100).toFixed(2)}% of total`, 'sel-share'));
        this.details.appendChild(panel);
        if (doc.kind === 'aggregate' && doc.vectors) {
          const vector = doc.vectors[idx];
          if (vector) {
            const box = el('div', 'histogram-box');
            this.details.appendChild(box);
            renderHistogram(box, vector, doc.profiles ?? []);
          }
        }
      }
    }
    this.details.appendChild(el('div', 'hover-box'));
  }

  private async renderTable(): Promise<void> {
    this.tableHost.textContent = '';
    this.table = null;
    if (!this.doc) return;
    if (this.state.kind === 'diff' || this.state.kind === 'aggregate') {
      this.tableHost.textContent =
          'the tree table shows top-down, bottom-up, and flat views';
      return;
    }
    this.table = new TableModel(
        (node) => api.rows(this.state.profiles[0], this.state.kind,
                           this.state.metric, node));
    await this.table.init();
    this.paintTable();
  }

  private paintTable(): void {
    const model = this.table;
    if (!model) return;
    this.tableHost.textContent = '';
    const table = document.createElement('table');
    table.className = 'tree-table';
    const head = document.createElement('tr');
    const columns: [string, SortColumn | null][] = [
      ['function', 'label'], ['inclusive', 'inclusive'],
      ['exclusive', 'exclusive'], ['% of total', 'percent'],
    ];
    for (const [title, column] of columns) {
      const th = document.createElement('th');
      th.textContent = title;
      if (column) {
        th.addEventListener('click', () => {
          model.setSort(column);
          this.paintTable();
        });
      }
      head.appendChild(th);
    }
    table.appendChild(head);
    for (const {row, indent, expanded} of model.visibleRows()) {
      table.appendChild(this.tableRow(model, row, indent, expanded));
    }
    this.tableHost.appendChild(table);
  }

  private tableRow(model: TableModel, row: TableRow, indent: number,
                   expanded: boolean): HTMLTableRowElement {
    const tr = document.createElement('tr');
    const name = document.createElement('td');
    name.style.paddingLeft = `${indent * 16 + 4}px`;
    const caret = document.createElement('span');
    caret.className = 'caret';
    caret.textContent = row.expandable ? (expanded ? '▾ ' : '▸ ') : '   ';
    name.appendChild(caret);
    name.appendChild(document.createTextNode(
        (row.tagText ? row.tagText + ' ' : '') + row.label));
    if (row.expandable) {
      name.addEventListener('click', () => {
        void model.toggle(row.id).then(() => this.paintTable());
      });
    }
    if (row.source) {
      name.addEventListener('contextmenu', (ev) => {
        ev.preventDefault();
        const [file, line] = row.source as [string, number];
        this.state.source = {file, line};
        this.pushState();
        void this.source.show(file, line);
      });
    }
    tr.appendChild(name);
    tr.appendChild(cell(row.inclusive));
    tr.appendChild(cell(row.exclusive));
    tr.appendChild(cell(row.percent === null ? null : `${row.percent.toFixed(2)}%`));
    return tr;
  }

  /** Correlated flame graphs: picking a node in one pane projects its
   * monitoring points onto the next role (alloc -> use -> reuse). */
  private renderCorrelate(): void {
    this.correlateHost.textContent = '';
    const info = this.profiles[this.state.profiles[0]];
    if (!info || info.roles.length < 2 || this.state.kind !== 'topdown') return;
    const note = el('div', 'correlate-note');
    note.textContent = `correlated roles: ${info.roles.join(' → ')} ` +
        '(click a frame in one pane to project the next role)';
    this.correlateHost.appendChild(note);
    const panes = el('div', 'correlate-panes');
    this.correlateHost.appendChild(panes);
    this.buildCorrelatePane(panes, info.roles, 0, -1);
  }

  private buildCorrelatePane(host: HTMLElement, roles: string[],
                             step: number, anchor: number): void {
    if (step >= roles.length - 1) return;
    const paneHost = el('div', 'correlate-pane');
    host.appendChild(paneHost);
    const title = el('div', 'correlate-title');
    title.textContent = `${roles[step]} → ${roles[step + 1]}`;
    paneHost.appendChild(title);
    if (anchor < 0 && step > 0) return;
    const graph = new FlameGraph(paneHost, {
      onSelect: (rect) => {
        while (paneHost.nextSibling) paneHost.nextSibling.remove();
        this.buildCorrelatePane(host, roles, step + 1, rect.node);
      },
      onZoom: () => undefined,
      onCodeLink: (rect) => this.codeLink(rect),
      onHover: () => undefined,
    });
    void new api.LatestOnly().run(
        () => step === 0
            ? api.viewDoc(this.state.profiles[0], 'topdown', this.state.metric)
            : api.correlateDoc(this.state.profiles[0], anchor,
                               roles[step - 1], roles[step]),
        (doc) => graph.setDocument(doc));
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}

function textDiv(text: string, className: string): HTMLElement {
  const node = el('div', className);
  node.textContent = text;
  return node;
}

function cell(value: number | string | null): HTMLTableCellElement {
  const td = document.createElement('td');
  td.className = 'num';
  td.textContent = value === null ? '—' : String(value);
  return td;
}

function select(options: [string, string][], value: string): HTMLSelectElement {
  const node = document.createElement('select');
  for (const [key, text] of options) {
    const opt = document.createElement('option');
    opt.value = key;
    opt.textContent = text;
    node.appendChild(opt);
  }
  node.value = value;
  return node;
}

function label(text: string, control: HTMLElement): HTMLElement {
  const wrap = el('label', 'control');
  const span = document.createElement('span');
  span.textContent = text;
  wrap.appendChild(span);
  wrap.appendChild(control);
  return wrap;
}

const rootElement = document.getElementById('app');
if (rootElement) {
  const app = new App(rootElement);
  void app.start();
}

export {App};
