/** The single selection store shared by every linked view.
 *
 * Selection = intersection of the active constraints:
 *   - a lasso cell set (from any heatmap or the sensitivity panel)
 *   - PCP axis brushes (rows whose tuple lies inside every brushed range)
 * With no active constraint the selection is empty; brushing the full range
 * on every axis (and no lasso) therefore selects every record.
 */

export type CellKey = string; // "i,j"

export function cellKey(i: number, j: number): CellKey {
  return `${i},${j}`;
}

export function parseKey(key: CellKey): [number, number] {
  const [i, j] = key.split(",").map(Number);
  return [i, j];
}

export interface PcpRow {
  i: number;
  j: number;
  values: Record<string, number>; // axis name -> value
}

export type Origin = "heatmap" | "pcp" | "sensitivity" | null;

export interface SelectionState {
  cells: Set<CellKey>;
  origin: Origin;
}

type Listener = (state: SelectionState) => void;

export class SelectionStore {
  private lassoCells: Set<CellKey> | null = null;
  private brushes = new Map<string, [number, number]>();
  private rows: PcpRow[] = [];
  private origin: Origin = null;
  private listeners: Listener[] = [];

  setRows(rows: PcpRow[]): void {
    this.rows = rows;
    this.emit();
  }

  setLasso(cells: Iterable<CellKey>, origin: Origin = "heatmap"): void {
    this.lassoCells = new Set(cells);
    this.origin = origin;
    this.emit();
  }

  clearLasso(): void {
    this.lassoCells = null;
    this.origin = this.brushes.size ? "pcp" : null;
    this.emit();
  }

  setBrush(axis: string, range: [number, number] | null): void {
    if (range === null) {
      this.brushes.delete(axis);
    } else {
      this.brushes.set(axis, [Math.min(...range), Math.max(...range)]);
    }
    if (this.origin === null || this.brushes.size) this.origin = "pcp";
    if (!this.brushes.size && this.lassoCells === null) this.origin = null;
    this.emit();
  }

  clearAll(): void {
    this.lassoCells = null;
    this.brushes.clear();
    this.origin = null;
    this.emit();
  }

  getBrush(axis: string): [number, number] | null {
    return this.brushes.get(axis) ?? null;
  }

  /** Rows passing every brushed axis (conjunction). */
  private brushSet(): Set<CellKey> {
    const out = new Set<CellKey>();
    for (const row of this.rows) {
      let ok = true;
      for (const [axis, [lo, hi]] of this.brushes) {
        const v = row.values[axis];
        if (v === undefined || v < lo || v > hi) {
          ok = false;
          break;
        }
      }
      if (ok) out.add(cellKey(row.i, row.j));
    }
    return out;
  }

  get selection(): SelectionState {
    const active: Set<CellKey>[] = [];
    if (this.lassoCells !== null) active.push(this.lassoCells);
    if (this.brushes.size) active.push(this.brushSet());
    if (!active.length) return { cells: new Set(), origin: this.origin };
    let cells = active[0];
    for (const other of active.slice(1)) {
      cells = new Set([...cells].filter((k) => other.has(k)));
    }
    return { cells, origin: this.origin };
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    fn(this.selection);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(): void {
    const state = this.selection;
    for (const fn of this.listeners) fn(state);
  }
}
