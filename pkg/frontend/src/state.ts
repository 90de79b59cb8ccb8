/** View state, fully encodable in the URL fragment so any view can be
 * shared or restored: #p=0&kind=topdown&metric=0&zoom=5&q=foo&sel=3.
 * Reloading with the same fragment reproduces the identical view. */

export type ViewMode = 'flame' | 'table';
export type DocKind = 'topdown' | 'bottomup' | 'flat' | 'diff' | 'aggregate';

export interface ViewState {
  profiles: number[];       // one handle, two for diff, many for aggregate
  kind: DocKind;
  metric: string;           // name or numeric index as text
  mode: ViewMode;
  zoom: number;             // node id, -1 for none
  selected: number;         // node id, -1 for none
  query: string;
  source: {file: string; line: number} | null;
}

export const DEFAULT_STATE: ViewState = {
  profiles: [0],
  kind: 'topdown',
  metric: '0',
  mode: 'flame',
  zoom: -1,
  selected: -1,
  query: '',
  source: null,
};

export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  params.set('p', state.profiles.join(','));
  params.set('kind', state.kind);
  params.set('metric', state.metric);
  if (state.mode !== 'flame') params.set('mode', state.mode);
  if (state.zoom >= 0) params.set('zoom', String(state.zoom));
  if (state.selected >= 0) params.set('sel', String(state.selected));
  if (state.query) params.set('q', state.query);
  if (state.source) params.set('src', `${state.source.file}:${state.source.line}`);
  return '#' + params.toString();
}

export function decodeState(fragment: string): ViewState {
  const params = new URLSearchParams(fragment.replace(/^#/, ''));
  const state: ViewState = {...DEFAULT_STATE, source: null, profiles: [0]};
  const p = params.get('p');
  if (p) {
    const handles = p.split(',').map((x) => parseInt(x, 10))
        .filter((x) => Number.isInteger(x) && x >= 0);
    if (handles.length) state.profiles = handles;
  }
  const kind = params.get('kind');
  if (kind && ['topdown', 'bottomup', 'flat', 'diff', 'aggregate'].includes(kind)) {
    state.kind = kind as DocKind;
  }
  state.metric = params.get('metric') ?? state.metric;
  if (params.get('mode') === 'table') state.mode = 'table';
  state.zoom = intOr(params.get('zoom'), -1);
  state.selected = intOr(params.get('sel'), -1);
  state.query = params.get('q') ?? '';
  const src = params.get('src');
  if (src) {
    const at = src.lastIndexOf(':');
    const line = at >= 0 ? parseInt(src.slice(at + 1), 10) : NaN;
    if (at > 0 && Number.isInteger(line)) {
      state.source = {file: src.slice(0, at), line};
    }
  }
  return state;
}

function intOr(text: string | null, fallback: number): number {
  if (text === null) return fallback;
  const v = parseInt(text, 10);
  return Number.isInteger(v) ? v : fallback;
}
