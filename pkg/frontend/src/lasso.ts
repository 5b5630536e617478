/** Lasso geometry: resolved client-side to cell sets before calling /select. */

import { CellKey, cellKey } from "./state";

export interface Point {
  x: number;
  y: number;
}

/** Even-odd rule point-in-polygon. */
export function pointInPolygon(p: Point, polygon: Point[]): boolean {
  let inside = false;
  const n = polygon.length;
  for (let a = 0, b = n - 1; a < n; b = a++) {
    const pa = polygon[a];
    const pb = polygon[b];
    const crosses =
      pa.y > p.y !== pb.y > p.y &&
      p.x < ((pb.x - pa.x) * (p.y - pa.y)) / (pb.y - pa.y) + pa.x;
    if (crosses) inside = !inside;
  }
  return inside;
}

/**
 * Cells whose centers fall inside the lasso polygon (canvas pixel space).
 * cellRect maps (i, j) to the drawn cell rectangle.
 */
export function lassoToCells(
  polygon: Point[],
  nTheta: number,
  nPhi: number,
  cellRect: (i: number, j: number) => { x: number; y: number; w: number; h: number },
): Set<CellKey> {
  const out = new Set<CellKey>();
  if (polygon.length < 3) return out;
  for (let j = 0; j < nPhi; j++) {
    for (let i = 0; i < nTheta; i++) {
      const r = cellRect(i, j);
      if (pointInPolygon({ x: r.x + r.w / 2, y: r.y + r.h / 2 }, polygon)) {
        out.add(cellKey(i, j));
      }
    }
  }
  return out;
}
