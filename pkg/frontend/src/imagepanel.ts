/** Image panel for the current selection plus the channel drill-down popup.
 *
 * Rows follow the /select ranking (combined uncertainty, descending) and
 * show ground truth, mean, uncertainty, error and error-std images per
 * method; clicking any image opens the 2 methods x 4 channels x 3
 * quantities popup for that view.
 */

import { ApiClient, SelectRecord, ViewPayload } from "./api";

export const PANEL_COLUMNS = [
  "gt", "mc_mean", "mc_unc", "mc_err", "mc_errstd",
  "ens_mean", "ens_unc", "ens_err", "ens_errstd",
] as const;

export const POPUP_METHODS = ["mc", "ens"] as const;
export const POPUP_CHANNELS = ["combined", "r", "g", "b"] as const;
export const POPUP_QUANTITIES = ["unc", "err", "errstd"] as const;

export function popupImageName(method: string, quantity: string, channel: string): string {
  return channel === "combined" ? `${method}_${quantity}` : `${method}_${quantity}_${channel}`;
}

/** The 2x4x3 grid of image names for one view's popup. */
export function popupGrid(): string[][] {
  const grid: string[][] = [];
  for (const method of POPUP_METHODS) {
    for (const channel of POPUP_CHANNELS) {
      grid.push(POPUP_QUANTITIES.map((q) => popupImageName(method, q, channel)));
    }
  }
  return grid;
}

export class ImagePanel {
  readonly element: HTMLElement;
  private maxRows: number;

  constructor(private api: ApiClient, maxRows = 12) {
    this.element = document.createElement("div");
    this.element.className = "image-panel";
    this.maxRows = maxRows;
  }

  async update(dataset: string, records: SelectRecord[]): Promise<void> {
    this.element.textContent = "";
    if (!records.length) return;
    for (const record of records.slice(0, this.maxRows)) {
      const view = await this.api.view(dataset, record.i, record.j);
      this.element.appendChild(this.row(view));
    }
  }

  private row(view: ViewPayload): HTMLElement {
    const row = document.createElement("div");
    row.className = "panel-row";
    row.dataset.cell = `${view.i},${view.j}`;
    const label = document.createElement("span");
    label.className = "panel-label";
    label.textContent =
      `θ=${view.record.theta.toFixed(1)}° φ=${view.record.phi.toFixed(1)}°`;
    row.appendChild(label);
    for (const name of PANEL_COLUMNS) {
      const url = view.images[name];
      const img = document.createElement("img");
      img.className = "panel-img";
      img.title = name;
      if (url) {
        img.src = this.api.imageUrl(url);
      } else {
        img.alt = `${name} missing`;
        img.classList.add("missing");
      }
      img.addEventListener("click", () => this.openPopup(view));
      row.appendChild(img);
    }
    return row;
  }

  openPopup(view: ViewPayload): HTMLElement {
    const overlay = buildPopup(view, this.api);
    document.body.appendChild(overlay);
    return overlay;
  }
}

export function buildPopup(view: ViewPayload, api: ApiClient): HTMLElement {
  const overlay = document.createElement("div");
  overlay.className = "popup-overlay";
  const box = document.createElement("div");
  box.className = "popup";
  const title = document.createElement("h3");
  title.textContent =
    `Channel detail — θ=${view.record.theta.toFixed(1)}° φ=${view.record.phi.toFixed(1)}°`;
  box.appendChild(title);
  for (const method of POPUP_METHODS) {
    for (const channel of POPUP_CHANNELS) {
      const row = document.createElement("div");
      row.className = "popup-row";
      const label = document.createElement("span");
      label.className = "popup-label";
      label.textContent = `${method === "mc" ? "MC-Dropout" : "Ensemble"} ${channel}`;
      row.appendChild(label);
      for (const quantity of POPUP_QUANTITIES) {
        const name = popupImageName(method, quantity, channel);
        const img = document.createElement("img");
        img.className = "popup-img";
        img.title = name;
        const url = view.images[name];
        if (url) img.src = api.imageUrl(url);
        else img.classList.add("missing");
        row.appendChild(img);
      }
      box.appendChild(row);
    }
  }
  overlay.appendChild(box);
  overlay.addEventListener("click", (e) => {
    if (e.target === overlay) overlay.remove();
  });
  return overlay;
}
