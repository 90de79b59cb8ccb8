/** Wire types for the server's JSON documents. */

/** One rect row: [node, depth, x0, x1, labelIdx, colorIdx, tagIdx, srcIdx]. */
export type RectRow = [number, number, number, number, number, number, number, number];

export interface ExportDoc {
  version: number;
  kind: 'topdown' | 'bottomup' | 'flat' | 'diff' | 'aggregate';
  metric: string;
  total: number;
  rects: RectRow[];
  labels: string[];
  tags: string[];
  sources: [string, number][];
  searchIndex: Record<string, number[]>;
  vectors?: (number | null)[][] | null[];
  profiles?: string[];
}

export interface MetricInfo {
  name: string;
  unit: string;
  kind: string;
  aggregator: string;
  total: number | null;
}

export interface ProfileInfo {
  handle: number;
  name: string;
  collector: string;
  timestamp: string;
  properties: Record<string, string>;
  metrics: MetricInfo[];
  nodes: number;
  points: number;
  roles: string[];
}

export interface TableRow {
  id: number;
  depth: number;
  label: string;
  inclusive: number | null;
  exclusive: number | null;
  percent: number;
  expandable: boolean;
  source: [string, number] | null;
  tag?: string;
  tagText?: string;
  m1?: number | null;
  m2?: number | null;
  delta?: number | null;
  ratio?: number | null;
  vector?: (number | null)[];
  stats?: Record<string, number | null>;
}

export interface HoverMetric {
  name: string;
  unit: string;
  kind: string;
  value: number | null;
  line_total: number | null;
}

export interface HoverDoc {
  node: number;
  function: string;
  module: string;
  file: string | null;
  line: number | null;
  metrics: HoverMetric[];
}

export interface HistogramDoc {
  node: number;
  label: string;
  vector: (number | null)[];
  profiles: string[];
  stats: Record<string, number | null>;
}
