/** Explorer app: six linked heatmaps, PCP, image panel, sensitivity tab. */

import { ApiClient, DatasetInfo, HeatmapPayload, Method, Quantity } from "./api";
import { Heatmap, sharedScale } from "./heatmap";
import { ImagePanel } from "./imagepanel";
import { Pcp, pcpRows, AXIS_LABELS } from "./pcp";
import { parseKey, SelectionStore } from "./state";

const QUANTITIES: Quantity[] = ["uncertainty", "error", "error_std"];
const METHODS: Method[] = ["mc_dropout", "ensemble"];

function el(tag: string, cls: string, text = ""): HTMLElement {
  const node = document.createElement(tag);
  node.className = cls;
  if (text) node.textContent = text;
  return node;
}

async function buildMainTab(api: ApiClient, dataset: DatasetInfo,
                            store: SelectionStore, channel: string): Promise<HTMLElement> {
  const root = el("div", "tab-main");
  const grids: Record<string, HeatmapPayload[]> = {};
  for (const quantity of QUANTITIES) {
    grids[quantity] = await Promise.all(
      METHODS.map((m) => api.heatmap(dataset.id, m, quantity, channel as never)),
    );
  }

  const heatRow = (method_idx: number, label: string) => {
    const row = el("div", "heatmap-row");
    row.appendChild(el("span", "row-label", label));
    for (const quantity of QUANTITIES) {
      const wrap = el("div", "heatmap-wrap");
      wrap.appendChild(el("div", "heatmap-title", quantity.replace("_", " ")));
      const hm = new Heatmap(grids[quantity][method_idx], sharedScale(grids[quantity]),
                             store);
      wrap.appendChild(hm.canvas);
      hm.render();
      row.appendChild(wrap);
    }
    return row;
  };
  root.appendChild(heatRow(0, "MC-Dropout"));
  root.appendChild(heatRow(1, "Ensemble"));

  const pcpPayload = await api.pcp(dataset.id);
  const rows = pcpRows(pcpPayload, dataset.grid);
  store.setRows(rows);
  const pcp = new Pcp(pcpPayload, rows, store);
  const pcpWrap = el("div", "pcp-wrap");
  pcpWrap.appendChild(el("div", "heatmap-title",
                         `parallel coordinates (${Object.values(AXIS_LABELS).join(", ")})`));
  pcpWrap.appendChild(pcp.canvas);
  pcp.render();
  root.appendChild(pcpWrap);
  return root;
}

async function buildSensitivityTab(api: ApiClient, dataset: DatasetInfo,
                                   store: SelectionStore): Promise<HTMLElement> {
  const root = el("div", "tab-sensitivity");
  for (const method of METHODS) {
    const row = el("div", "heatmap-row");
    row.appendChild(el("span", "row-label",
                       method === "mc_dropout" ? "MC-Dropout" : "Ensemble"));
    const mean = await api.sensitivity(dataset.id, method, "mean");
    const std = await api.sensitivity(dataset.id, method, "std");
    for (const [payload, label] of [[mean, "sensitivity"], [std, "sensitivity std"]] as const) {
      const wrap = el("div", "heatmap-wrap");
      wrap.appendChild(el("div", "heatmap-title", label));
      const hm = new Heatmap(payload, { min: payload.min, max: payload.max },
                             store, "sensitivity");
      wrap.appendChild(hm.canvas);
      hm.render();
      row.appendChild(wrap);
    }
    root.appendChild(row);
  }
  return root;
}

async function buildDemoTab(api: ApiClient): Promise<HTMLElement> {
  const root = el("div", "tab-demo");
  let payload;
  try {
    payload = await api.demo1d();
  } catch (err) {
    root.appendChild(el("p", "notice", `1-D demo data unavailable: ${err}`));
    return root;
  }
  for (const [method, env] of Object.entries(payload.methods)) {
    const canvas = document.createElement("canvas");
    canvas.width = 480;
    canvas.height = 220;
    const ctx = canvas.getContext("2d");
    const wrap = el("div", "demo-wrap");
    wrap.appendChild(el("div", "heatmap-title", `${method}: mean ± std envelope`));
    wrap.appendChild(canvas);
    root.appendChild(wrap);
    if (!ctx) continue;
    const xs = env.x;
    const lo = Math.min(...env.mean.map((m, k) => m - env.std[k]));
    const hi = Math.max(...env.mean.map((m, k) => m + env.std[k]));
    const px = (x: number) => ((x - xs[0]) / (xs[xs.length - 1] - xs[0])) * 460 + 10;
    const py = (y: number) => 210 - ((y - lo) / (hi - lo || 1)) * 200;
    ctx.fillStyle = "rgba(255, 120, 120, 0.35)";
    ctx.beginPath();
    xs.forEach((x, k) => ctx.lineTo(px(x), py(env.mean[k] + env.std[k])));
    [...xs].reverse().forEach((x, k) =>
      ctx.lineTo(px(x), py(env.mean[xs.length - 1 - k] - env.std[xs.length - 1 - k])));
    ctx.closePath();
    ctx.fill();
    ctx.strokeStyle = "#4a90e2";
    ctx.beginPath();
    xs.forEach((x, k) => (k ? ctx.lineTo(px(x), py(env.mean[k])) : ctx.moveTo(px(x), py(env.mean[k]))));
    ctx.stroke();
  }
  return root;
}

export async function startApp(root: HTMLElement, api = new ApiClient()): Promise<void> {
  const { datasets } = await api.datasets();
  if (!datasets.length) {
    root.appendChild(el("p", "notice", "no sweeps available"));
    return;
  }

  const bar = el("div", "topbar");
  const dsSelect = document.createElement("select");
  datasets.forEach((d) => {
    const opt = document.createElement("option");
    opt.value = d.id;
    opt.textContent = d.id;
    dsSelect.appendChild(opt);
  });
  const channelSelect = document.createElement("select");
  for (const c of ["combined", "R", "G", "B"]) {
    const opt = document.createElement("option");
    opt.value = c;
    opt.textContent = `channel: ${c}`;
    channelSelect.appendChild(opt);
  }
  const clearBtn = el("button", "clear-btn", "clear selection");
  const tabs = el("div", "tabs");
  bar.append(dsSelect, channelSelect, clearBtn, tabs);
  root.appendChild(bar);

  const content = el("div", "content");
  const panelWrap = el("div", "panel-wrap");
  panelWrap.appendChild(el("div", "heatmap-title", "selected views (by combined uncertainty)"));
  root.append(content, panelWrap);

  let store = new SelectionStore();
  const rebuild = async () => {
    store.clearAll();
    store = new SelectionStore();
    const dataset = datasets.find((d) => d.id === dsSelect.value) ?? datasets[0];
    const panel = new ImagePanel(api);
    content.textContent = "";
    panelWrap.querySelectorAll(".image-panel").forEach((n) => n.remove());
    panelWrap.appendChild(panel.element);

    const views: Record<string, HTMLElement> = {
      "uncertainty & error": await buildMainTab(api, dataset, store, channelSelect.value),
      sensitivity: await buildSensitivityTab(api, dataset, store),
      "1-D demo": await buildDemoTab(api),
    };
    tabs.textContent = "";
    const show = (name: string) => {
      content.textContent = "";
      content.appendChild(views[name]);
      tabs.querySelectorAll("button").forEach((b) =>
        b.classList.toggle("active", b.textContent === name));
    };
    for (const name of Object.keys(views)) {
      const btn = el("button", "tab-btn", name);
      btn.addEventListener("click", () => show(name));
      tabs.appendChild(btn);
    }
    show("uncertainty & error");

    let token = 0;
    store.subscribe((state) => {
      const mine = ++token;
      const cells = [...state.cells].map(parseKey);
      api.select(dataset.id, cells).then(({ records }) => {
        if (token === mine) void panel.update(dataset.id, records);
      });
    });
    clearBtn.onclick = () => store.clearAll();
  };

  dsSelect.addEventListener("change", rebuild);
  channelSelect.addEventListener("change", rebuild);
  await rebuild();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void startApp(document.getElementById("app") as HTMLElement);
}
