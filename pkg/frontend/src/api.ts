/** Typed client for the local server. Every fetcher carries a
 * monotonically increasing request id per channel so a stale response
 * can never overwrite a newer one (responses may arrive out of order
 * when the user clicks around quickly). */

import type {ExportDoc, HistogramDoc, HoverDoc, ProfileInfo, TableRow} from './types.js';

async function getJson<T>(url: string): Promise<T> {
  const resp = await fetch(url);
  if (!resp.ok) {
    let message = `${resp.status}`;
    try {
      const body = await resp.json();
      if (body && body.error) message = body.error;
    } catch {
      // non-JSON error body; keep the status code
    }
    throw new Error(message);
  }
  return resp.json() as Promise<T>;
}

export function profiles(): Promise<ProfileInfo[]> {
  return getJson<{profiles: ProfileInfo[]}>('/api/profiles')
      .then((doc) => doc.profiles);
}

export function viewDoc(p: number, kind: string, metric: string): Promise<ExportDoc> {
  return getJson(`/api/view?p=${p}&kind=${kind}&metric=${encodeURIComponent(metric)}`);
}

export function diffDoc(p1: number, p2: number, kind: string,
                        metric: string): Promise<ExportDoc> {
  return getJson(`/api/diff?p1=${p1}&p2=${p2}&kind=${kind}&metric=${encodeURIComponent(metric)}`);
}

export function aggregateDoc(handles: number[], metric: string): Promise<ExportDoc> {
  return getJson(`/api/aggregate?p=${handles.join(',')}&metric=${encodeURIComponent(metric)}`);
}

export function correlateDoc(p: number, anchor: number, from: string,
                             to: string): Promise<ExportDoc> {
  return getJson(`/api/correlate?p=${p}&anchor=${anchor}` +
                 `&from=${encodeURIComponent(from)}&to=${encodeURIComponent(to)}`);
}

export function search(p: number, kind: string, metric: string,
                       query: string): Promise<number[]> {
  return getJson<{ids: number[]}>(
      `/api/search?p=${p}&kind=${kind}&metric=${encodeURIComponent(metric)}` +
      `&q=${encodeURIComponent(query)}`).then((doc) => doc.ids);
}

export function rows(p: number, kind: string, metric: string,
                     node: number | null): Promise<TableRow[]> {
  const suffix = node === null ? '' : `&node=${node}`;
  return getJson<{rows: TableRow[]}>(
      `/api/rows?p=${p}&kind=${kind}&metric=${encodeURIComponent(metric)}${suffix}`)
      .then((doc) => doc.rows);
}

export function hover(p: number, node: number): Promise<HoverDoc> {
  return getJson(`/api/node/${node}/hover?p=${p}`);
}

export function histogram(handles: number[], metric: string,
                          node: number): Promise<HistogramDoc> {
  return getJson(`/api/node/${node}/histogram?agg=${handles.join(',')}` +
                 `&metric=${encodeURIComponent(metric)}`);
}

export async function sourceSlice(file: string, from: number,
                                  to: number): Promise<string> {
  const resp = await fetch(`/api/source?file=${encodeURIComponent(file)}` +
                           `&from=${from}&to=${to}`);
  if (!resp.ok) throw new Error(`source unavailable (${resp.status})`);
  return resp.text();
}

/** Keeps only the newest in-flight request per channel. */
export class LatestOnly {
  private seq = 0;

  async run<T>(work: () => Promise<T>, apply: (value: T) => void,
               onError?: (err: Error) => void): Promise<void> {
    const ticket = ++this.seq;
    try {
      const value = await work();
      if (ticket === this.seq) apply(value);
    } catch (err) {
      if (ticket === this.seq && onError) onError(err as Error);
    }
  }
}
