/** View-space heatmap with lasso selection and linked highlighting.
 *
 * Grids arrive in the service layout (phi-major, values[j*nTheta+i]); the
 * canvas draws phi increasing upward. Each quantity shares one color scale
 * across the two methods so the methods compare directly.
 */

import { HeatmapPayload } from "./api";
import { viridisCss } from "./colormap";
import { lassoToCells, Point } from "./lasso";
import { CellKey, cellKey, Origin, SelectionStore } from "./state";

export interface QuantityScale {
  min: number;
  max: number;
}

/** One shared scale per quantity across both methods' grids. */
export function sharedScale(payloads: HeatmapPayload[]): QuantityScale {
  return {
    min: Math.min(...payloads.map((p) => p.min)),
    max: Math.max(...payloads.map((p) => p.max)),
  };
}

export function normalize(value: number, scale: QuantityScale): number {
  return scale.max > scale.min ? (value - scale.min) / (scale.max - scale.min) : 0;
}

export class Heatmap {
  readonly canvas: HTMLCanvasElement;
  private polygon: Point[] = [];
  private drawing = false;
  private selected = new Set<CellKey>();

  constructor(
    private data: HeatmapPayload,
    private scale: QuantityScale,
    private store: SelectionStore,
    private origin: Origin = "heatmap",
    private cellPx = 10,
  ) {
    this.canvas = document.createElement("canvas");
    this.canvas.width = data.n_theta * cellPx;
    this.canvas.height = data.n_phi * cellPx;
    this.canvas.className = "heatmap";
    this.canvas.addEventListener("pointerdown", (e) => this.onDown(e));
    this.canvas.addEventListener("pointermove", (e) => this.onMove(e));
    this.canvas.addEventListener("pointerup", () => this.onUp());
    store.subscribe((state) => {
      this.selected = state.cells;
      this.render();
    });
  }

  cellRect(i: number, j: number): { x: number; y: number; w: number; h: number } {
    // row 0 of the canvas is the highest elevation band
    return {
      x: i * this.cellPx,
      y: (this.data.n_phi - 1 - j) * this.cellPx,
      w: this.cellPx,
      h: this.cellPx,
    };
  }

  value(i: number, j: number): number {
    return this.data.values[j * this.data.n_theta + i];
  }

  render(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    for (let j = 0; j < this.data.n_phi; j++) {
      for (let i = 0; i < this.data.n_theta; i++) {
        const r = this.cellRect(i, j);
        ctx.fillStyle = viridisCss(normalize(this.value(i, j), this.scale));
        ctx.fillRect(r.x, r.y, r.w, r.h);
        if (this.selected.has(cellKey(i, j))) {
          ctx.strokeStyle = "#ffdf00";
          ctx.lineWidth = 1.5;
          ctx.strokeRect(r.x + 0.75, r.y + 0.75, r.w - 1.5, r.h - 1.5);
        }
      }
    }
    if (this.polygon.length > 1) {
      ctx.strokeStyle = "#ffdf00";
      ctx.lineWidth = 1;
      ctx.beginPath();
      ctx.moveTo(this.polygon[0].x, this.polygon[0].y);
      for (const p of this.polygon.slice(1)) ctx.lineTo(p.x, p.y);
      ctx.stroke();
    }
  }

  private local(e: PointerEvent): Point {
    const rect = this.canvas.getBoundingClientRect();
    return { x: e.clientX - rect.left, y: e.clientY - rect.top };
  }

  private onDown(e: PointerEvent): void {
    this.drawing = true;
    this.polygon = [this.local(e)];
    this.canvas.setPointerCapture(e.pointerId);
  }

  private onMove(e: PointerEvent): void {
    if (!this.drawing) return;
    this.polygon.push(this.local(e));
    this.render();
  }

  private onUp(): void {
    if (!this.drawing) return;
    this.drawing = false;
    this.applyLasso(this.polygon);
    this.polygon = [];
  }

  /** Resolve the polygon to cells and publish it (exposed for tests). */
  applyLasso(polygon: Point[]): Set<CellKey> {
    const cells = lassoToCells(polygon, this.data.n_theta, this.data.n_phi,
                               (i, j) => this.cellRect(i, j));
    if (cells.size) {
      this.store.setLasso(cells, this.origin);
    } else {
      this.store.clearLasso();
    }
    return cells;
  }

  get selectedCells(): Set<CellKey> {
    return this.selected;
  }
}
