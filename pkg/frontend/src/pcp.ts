/** Parallel coordinates over the six per-view quantities.
 *
 * Axes default to (MC-Un, MC-Err, MC-ErrStd, Ens-Un, Ens-Err, Ens-ErrStd);
 * dragging along an axis brushes a range, conjunctions across axes refine
 * the shared selection, and lassoed cells highlight their polylines.
 */

import { PcpPayload } from "./api";
import { cellKey, CellKey, PcpRow, SelectionStore } from "./state";

export const AXIS_LABELS: Record<string, string> = {
  mc_unc: "MC-Un",
  mc_err: "MC-Err",
  mc_errstd: "MC-ErrStd",
  ens_unc: "Ens-Un",
  ens_err: "Ens-Err",
  ens_errstd: "Ens-ErrStd",
};

export interface AxisGeom {
  name: string;
  x: number;
  min: number;
  max: number;
}

export function pcpRows(payload: PcpPayload, grid: { n_theta: number }): PcpRow[] {
  return payload.rows.map((tuple, index) => {
    const values: Record<string, number> = {};
    payload.axes.forEach((axis, k) => (values[axis] = tuple[k]));
    return { i: index % grid.n_theta, j: Math.floor(index / grid.n_theta), values };
  });
}

export class Pcp {
  readonly canvas: HTMLCanvasElement;
  readonly axes: AxisGeom[];
  private selected = new Set<CellKey>();
  private dragAxis: AxisGeom | null = null;
  private dragStartY = 0;

  constructor(
    payload: PcpPayload,
    private rows: PcpRow[],
    private store: SelectionStore,
    private width = 640,
    private height = 240,
  ) {
    this.canvas = document.createElement("canvas");
    this.canvas.width = width;
    this.canvas.height = height;
    this.canvas.className = "pcp";
    const pad = 40;
    const step = (width - 2 * pad) / (payload.axes.length - 1);
    this.axes = payload.axes.map((name, k) => {
      const values = rows.map((r) => r.values[name]);
      return {
        name,
        x: pad + k * step,
        min: Math.min(...values),
        max: Math.max(...values),
      };
    });
    this.canvas.addEventListener("pointerdown", (e) => this.onDown(e));
    this.canvas.addEventListener("pointermove", (e) => this.onMove(e));
    this.canvas.addEventListener("pointerup", (e) => this.onUp(e));
    store.subscribe((state) => {
      this.selected = state.cells;
      this.render();
    });
  }

  yFor(axis: AxisGeom, value: number): number {
    const t = axis.max > axis.min ? (value - axis.min) / (axis.max - axis.min) : 0.5;
    return this.height - 20 - t * (this.height - 40);
  }

  valueAt(axis: AxisGeom, y: number): number {
    const t = (this.height - 20 - y) / (this.height - 40);
    return axis.min + Math.min(Math.max(t, 0), 1) * (axis.max - axis.min);
  }

  render(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.width, this.height);
    ctx.font = "10px sans-serif";
    for (const axis of this.axes) {
      ctx.strokeStyle = "#888";
      ctx.beginPath();
      ctx.moveTo(axis.x, 20);
      ctx.lineTo(axis.x, this.height - 20);
      ctx.stroke();
      ctx.fillStyle = "#ddd";
      ctx.fillText(AXIS_LABELS[axis.name] ?? axis.name, axis.x - 18, 12);
      const brush = this.store.getBrush(axis.name);
      if (brush) {
        const y1 = this.yFor(axis, brush[1]);
        const y2 = this.yFor(axis, brush[0]);
        ctx.fillStyle = "rgba(255, 223, 0, 0.25)";
        ctx.fillRect(axis.x - 6, y1, 12, y2 - y1);
      }
    }
    for (const row of this.rows) {
      const key = cellKey(row.i, row.j);
      const hot = this.selected.has(key);
      ctx.strokeStyle = hot ? "#ffdf00" : "rgba(100, 160, 220, 0.25)";
      ctx.lineWidth = hot ? 1.4 : 0.6;
      ctx.beginPath();
      this.axes.forEach((axis, k) => {
        const y = this.yFor(axis, row.values[axis.name]);
        if (k === 0) ctx.moveTo(axis.x, y);
        else ctx.lineTo(axis.x, y);
      });
      ctx.stroke();
    }
  }

  private nearestAxis(x: number): AxisGeom | null {
    let best: AxisGeom | null = null;
    let dist = 12;
    for (const axis of this.axes) {
      const d = Math.abs(axis.x - x);
      if (d < dist) {
        dist = d;
        best = axis;
      }
    }
    return best;
  }

  private local(e: PointerEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    return { x: e.clientX - rect.left, y: e.clientY - rect.top };
  }

  private onDown(e: PointerEvent): void {
    const p = this.local(e);
    this.dragAxis = this.nearestAxis(p.x);
    this.dragStartY = p.y;
    if (this.dragAxis) this.canvas.setPointerCapture(e.pointerId);
  }

  private onMove(e: PointerEvent): void {
    if (!this.dragAxis) return;
    const p = this.local(e);
    this.applyBrush(this.dragAxis.name, this.dragStartY, p.y);
  }

  private onUp(e: PointerEvent): void {
    if (!this.dragAxis) return;
    const p = this.local(e);
    if (Math.abs(p.y - this.dragStartY) < 3) {
      this.store.setBrush(this.dragAxis.name, null); // click clears the brush
    } else {
      this.applyBrush(this.dragAxis.name, this.dragStartY, p.y);
    }
    this.dragAxis = null;
  }

  /** Publish a brush given two canvas y positions (exposed for tests). */
  applyBrush(axisName: string, y1: number, y2: number): void {
    const axis = this.axes.find((a) => a.name === axisName);
    if (!axis) return;
    this.store.setBrush(axisName, [this.valueAt(axis, y1), this.valueAt(axis, y2)]);
  }
}
