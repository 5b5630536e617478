"""Heatmap export: grid blobs, color-mapped PNGs, min/max sidecars."""

import json
from pathlib import Path

import numpy as np

from ..uq.colormap import save_map_png
from .grid import GridSpec
from .runner import SweepManifest, load_manifest, load_records

QUANTITY_TO_FIELD = {
    "uncertainty": "unc",
    "error": "err",
    "error_std": "errstd",
    "sensitivity": "sens",
    "sensitivity_std": "sens_std",
}
METHOD_TO_PREFIX = {"mc_dropout": "mc", "ensemble": "ens"}
CHANNELS = ("R", "G", "B", "combined")


def record_field(method: str, quantity: str, channel: str = "combined") -> str:
    """Map (method, quantity, channel) to the record field name."""
    if method not in METHOD_TO_PREFIX:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHOD_TO_PREFIX)}")
    if quantity not in QUANTITY_TO_FIELD:
        raise ValueError(f"unknown quantity {quantity!r}; choose from {sorted(QUANTITY_TO_FIELD)}")
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}; choose from {CHANNELS}")
    base = f"{METHOD_TO_PREFIX[method]}_{QUANTITY_TO_FIELD[quantity]}"
    if channel == "combined":
        return base
    if quantity.startswith("sensitivity"):
        raise ValueError("sensitivity has no per-channel variant; use channel='combined'")
    return f"{base}_{channel.lower()}"


def heatmap_grid(records: dict[str, np.ndarray], grid: GridSpec, field: str) -> np.ndarray:
    """(n_phi, n_theta) array; row j holds phi_j, record order preserved."""
    return records[field].reshape(grid.n_phi, grid.n_theta)


def export_heatmaps(sweep_dir, quantity: str, channel: str, method: str,
                    out_dir=None, scale: int = 8) -> dict:
    """Write {name}.bin (f32 LE, phi-major), {name}.png (viridis, top row =
    highest elevation), {name}.json (min/max sidecar); returns paths+grid."""
    sweep_dir = Path(sweep_dir)
    manifest: SweepManifest = load_manifest(sweep_dir)
    if not manifest.complete:
        raise ValueError(f"sweep at {sweep_dir} is incomplete; finish it before exporting")
    records = load_records(sweep_dir)
    field = record_field(method, quantity, channel)
    values = heatmap_grid(records, manifest.grid, field)

    out_dir = sweep_dir / "heatmaps" if out_dir is None else Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = field if channel == "combined" else field  # field already carries channel
    blob_path = out_dir / f"{name}.bin"
    png_path = out_dir / f"{name}.png"
    meta_path = out_dir / f"{name}.json"

    with open(blob_path, "wb") as f:
        f.write(values.astype("<f4").tobytes())
    save_map_png(values[::-1], png_path, scale=scale)  # flip: image top = +phi
    meta = {
        "field": field,
        "method": method,
        "quantity": quantity,
        "channel": channel,
        "min": float(values.min()),
        "max": float(values.max()),
        "n_theta": manifest.grid.n_theta,
        "n_phi": manifest.grid.n_phi,
        "layout": "blob row-major (phi-major, phi ascending); png flipped so top = +phi",
    }
    with open(meta_path, "w") as f:
        json.dump(meta, f, indent=1, sort_keys=True)
    return {"grid": values, "blob": blob_path, "png": png_path, "meta": meta_path,
            "min": meta["min"], "max": meta["max"]}
