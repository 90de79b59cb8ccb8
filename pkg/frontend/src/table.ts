/** Expansion-driven tree-table model.
 *
 * Rows are fetched lazily per expansion (the server streams children on
 * demand), cached, and flattened into the visible list on each render.
 * Sorting applies within every sibling group. The model itself is pure
 * bookkeeping so tests can drive it with a fake fetcher. */

import type {TableRow} from './types.js';

export type SortColumn = 'inclusive' | 'exclusive' | 'percent' | 'label';

export interface VisibleRow {
  row: TableRow;
  indent: number;
  expanded: boolean;
}

export class TableModel {
  private children = new Map<number, TableRow[]>();
  private expanded = new Set<number>();
  private roots: TableRow[] = [];
  sortBy: SortColumn = 'inclusive';
  sortAscending = false;

  constructor(private fetchRows: (node: number | null) => Promise<TableRow[]>) {}

  async init(): Promise<void> {
    this.children.clear();
    this.expanded.clear();
    this.roots = await this.fetchRows(null);
  }

  isExpanded(id: number): boolean {
    return this.expanded.has(id);
  }

  async toggle(id: number): Promise<void> {
    if (this.expanded.has(id)) {
      this.expanded.delete(id);
      return;
    }
    if (!this.children.has(id)) {
      this.children.set(id, await this.fetchRows(id));
    }
    this.expanded.add(id);
  }

  collapseAll(): void {
    this.expanded.clear();
  }

  async expandPath(ids: number[]): Promise<void> {
    for (const id of ids) {
      if (!this.expanded.has(id)) await this.toggle(id);
    }
  }

  setSort(column: SortColumn): void {
    if (this.sortBy === column) {
      this.sortAscending = !this.sortAscending;
    } else {
      this.sortBy = column;
      this.sortAscending = column === 'label';
    }
  }

  private compare(a: TableRow, b: TableRow): number {
    const dir = this.sortAscending ? 1 : -1;
    if (this.sortBy === 'label') return dir * a.label.localeCompare(b.label);
    const va = (a[this.sortBy] ?? 0) as number;
    const vb = (b[this.sortBy] ?? 0) as number;
    if (va !== vb) return dir * (va - vb);
    return a.label.localeCompare(b.label);
  }

  visibleRows(): VisibleRow[] {
    const out: VisibleRow[] = [];
    const emit = (rows: TableRow[], indent: number) => {
      for (const row of [...rows].sort((a, b) => this.compare(a, b))) {
        const expanded = this.expanded.has(row.id);
        out.push({row, indent, expanded});
        if (expanded) {
          emit(this.children.get(row.id) ?? [], indent + 1);
        }
      }
    };
    emit(this.roots, 0);
    return out;
  }
}
