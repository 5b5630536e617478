/** A small, internally consistent fixture sweep (4x3 grid) plus a fetch mock
 * implementing the service contract over it. UI tests run against this. */

import { vi } from "vitest";

export const N_THETA = 4;
export const N_PHI = 3;

const FIELD_BASES = ["unc", "err", "errstd"] as const;

function cellValue(i: number, j: number, salt: number): number {
  // deterministic, strictly positive, distinct per (cell, field)
  return 0.1 + 0.05 * i + 0.02 * j + 0.001 * salt + 0.013 * ((i * 7 + j * 3 + salt) % 5);
}

export interface FixtureRecord extends Record<string, number> {
  i: number;
  j: number;
}

export function fixtureRecords(): FixtureRecord[] {
  const out: FixtureRecord[] = [];
  for (let j = 0; j < N_PHI; j++) {
    for (let i = 0; i < N_THETA; i++) {
      const rec: FixtureRecord = {
        i, j,
        index: j * N_THETA + i,
        theta: (i + 0.5) * (360 / N_THETA),
        phi: -90 + (j + 0.5) * (180 / N_PHI),
      } as FixtureRecord;
      let salt = 0;
      for (const prefix of ["mc", "ens"]) {
        for (const base of FIELD_BASES) {
          rec[`${prefix}_${base}`] = cellValue(i, j, salt++);
          for (const c of ["r", "g", "b"]) {
            rec[`${prefix}_${base}_${c}`] = cellValue(i, j, salt++);
          }
        }
        rec[`${prefix}_sens`] = cellValue(i, j, salt++);
        rec[`${prefix}_sens_std`] = cellValue(i, j, salt++);
      }
      out.push(rec);
    }
  }
  return out;
}

const FIELD_OF: Record<string, string> = {
  uncertainty: "unc",
  error: "err",
  error_std: "errstd",
  sensitivity: "sens",
  sensitivity_std: "sens_std",
};

export const PCP_AXES = ["mc_unc", "mc_err", "mc_errstd", "ens_unc", "ens_err", "ens_errstd"];

export function imageNames(): string[] {
  const names = ["gt", "mc_mean", "ens_mean"];
  for (const p of ["mc", "ens"]) {
    for (const q of FIELD_BASES) {
      for (const suffix of ["", "_r", "_g", "_b"]) names.push(`${p}_${q}${suffix}`);
    }
  }
  return names;
}

/** Installs a fetch mock serving the fixture sweep as dataset "fix". */
export function installFetchMock(): FixtureRecord[] {
  const records = fixtureRecords();
  const fetchMock = vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input), "http://test");
    const q = url.searchParams;
    const json = (payload: unknown, status = 200) =>
      new Response(JSON.stringify(payload), {
        status,
        headers: { "Content-Type": "application/json" },
      });

    if (url.pathname === "/datasets") {
      return json({
        datasets: [{
          id: "fix",
          grid: { n_theta: N_THETA, n_phi: N_PHI },
          resolution: 16,
          methods: { mc_dropout: { m: 5, eta: 0.1 }, ensemble: { k: 3 } },
        }],
      });
    }
    if (url.pathname === "/heatmap" || url.pathname === "/sensitivity") {
      const method = q.get("method") === "ensemble" ? "ens" : "mc";
      let base: string;
      if (url.pathname === "/sensitivity") {
        base = q.get("stat") === "std" ? "sens_std" : "sens";
      } else {
        base = FIELD_OF[q.get("quantity") ?? ""];
        const channel = q.get("channel") ?? "combined";
        if (!base) return json({ error: { status: 400, message: "bad quantity" } }, 400);
        if (channel !== "combined") base = `${base}_${channel.toLowerCase()}`;
      }
      const field = `${method}_${base}`;
      const values = records.map((r) => r[field]);
      return json({
        dataset: "fix", field, n_theta: N_THETA, n_phi: N_PHI,
        values, min: Math.min(...values), max: Math.max(...values),
      });
    }
    if (url.pathname === "/view") {
      const i = Number(q.get("i"));
      const j = Number(q.get("j"));
      const rec = records.find((r) => r.i === i && r.j === j);
      if (!rec) return json({ error: { status: 404, message: "no cell" } }, 404);
      const images: Record<string, string> = {};
      for (const name of imageNames()) images[name] = `/files/fix/img/${i}_${j}/${name}.png`;
      return json({ dataset: "fix", i, j, record: rec, map_ranges: {}, images });
    }
    if (url.pathname === "/select") {
      const body = JSON.parse(String(init?.body ?? "{}"));
      const rows = (body.cells as Array<[number, number]>).map(([i, j]) => {
        const rec = records.find((r) => r.i === i && r.j === j);
        if (!rec) throw new Error(`bad cell ${i},${j}`);
        return { ...rec };
      });
      rows.sort((a, b) => b.mc_unc + b.ens_unc - (a.mc_unc + a.ens_unc));
      return json({ dataset: "fix", records: rows });
    }
    if (url.pathname === "/pcp") {
      return json({
        dataset: "fix",
        axes: PCP_AXES,
        rows: records.map((r) => PCP_AXES.map((a) => r[a])),
      });
    }
    if (url.pathname === "/demo1d") {
      const x = Array.from({ length: 20 }, (_, k) => k / 2);
      return json({
        methods: {
          mc_dropout: { x, mean: x.map((v) => v * Math.sin(v)), std: x.map(() => 0.3) },
          ensemble: { x, mean: x.map((v) => v * Math.sin(v)), std: x.map(() => 0.2) },
        },
      });
    }
    return json({ error: { status: 404, message: `no route ${url.pathname}` } }, 404);
  });
  vi.stubGlobal("fetch", fetchMock);
  return records;
}
