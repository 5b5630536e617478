/** Typed client for the analysis-service JSON endpoints. */

export interface GridSpec {
  n_theta: number;
  n_phi: number;
}

export interface DatasetInfo {
  id: string;
  grid: GridSpec;
  resolution: number;
  methods: Record<string, unknown>;
}

export interface HeatmapPayload {
  dataset: string;
  field: string;
  n_theta: number;
  n_phi: number;
  values: number[];
  min: number;
  max: number;
}

export interface ViewPayload {
  dataset: string;
  i: number;
  j: number;
  record: Record<string, number>;
  map_ranges: Record<string, [number, number]>;
  images: Record<string, string>;
}

export interface SelectRecord extends Record<string, number> {
  i: number;
  j: number;
  index: number;
}

export interface PcpPayload {
  dataset: string;
  axes: string[];
  rows: number[][];
}

export interface Demo1dPayload {
  methods: Record<string, { x: number[]; mean: number[]; std: number[] }>;
}

export type Method = "mc_dropout" | "ensemble";
export type Quantity = "uncertainty" | "error" | "error_std" | "sensitivity" | "sensitivity_std";
export type Channel = "R" | "G" | "B" | "combined";

async function getJson<T>(url: string): Promise<T> {
  const resp = await fetch(url);
  if (!resp.ok) {
    const body = await resp.json().catch(() => ({}));
    const detail = (body as { error?: { message?: string } }).error?.message ?? resp.statusText;
    throw new Error(`${resp.status}: ${detail}`);
  }
  return resp.json() as Promise<T>;
}

export class ApiClient {
  constructor(private base: string = "") {}

  datasets(): Promise<{ datasets: DatasetInfo[] }> {
    return getJson(`${this.base}/datasets`);
  }

  heatmap(dataset: string, method: Method, quantity: Quantity, channel: Channel): Promise<HeatmapPayload> {
    const q = new URLSearchParams({ dataset, method, quantity, channel });
    return getJson(`${this.base}/heatmap?${q}`);
  }

  view(dataset: string, i: number, j: number): Promise<ViewPayload> {
    const q = new URLSearchParams({ dataset, i: String(i), j: String(j) });
    return getJson(`${this.base}/view?${q}`);
  }

  async select(dataset: string, cells: Array<[number, number]>): Promise<{ records: SelectRecord[] }> {
    const resp = await fetch(`${this.base}/select`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ dataset, cells }),
    });
    if (!resp.ok) throw new Error(`select failed: ${resp.status}`);
    return resp.json();
  }

  pcp(dataset: string): Promise<PcpPayload> {
    return getJson(`${this.base}/pcp?${new URLSearchParams({ dataset })}`);
  }

  sensitivity(dataset: string, method: Method, stat: "mean" | "std"): Promise<HeatmapPayload> {
    const q = new URLSearchParams({ dataset, method, stat });
    return getJson(`${this.base}/sensitivity?${q}`);
  }

  demo1d(): Promise<Demo1dPayload> {
    return getJson(`${this.base}/demo1d`);
  }

  imageUrl(path: string): string {
    return `${this.base}${path}`;
  }
}
