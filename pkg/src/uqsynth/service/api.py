"""Read-only query core over completed sweep directories.

Every method is a pure function of the on-disk artifacts: the service
never mutates a sweep, and identical queries return identical payloads.
The HTTP layer (server.py) maps ApiError.status onto response codes:
400 bad request, 404 unknown dataset/cell, 409 incomplete sweep.

PCP axis order is (MC-Un, MC-Err, MC-ErrStd, Ens-Un, Ens-Err, Ens-ErrStd),
overridable via ServiceConfig.pcp_axes. /select ranks by the sum of the
two methods' combined uncertainties (descending).
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..sweep.export import record_field
from ..sweep.runner import SweepManifest, load_manifest, load_records

PCP_AXES_DEFAULT = ["mc_unc", "mc_err", "mc_errstd", "ens_unc", "ens_err", "ens_errstd"]

_IMAGE_NAMES = ["gt", "mc_mean", "ens_mean"] + [
    f"{p}_{q}{suffix}"
    for p in ("mc", "ens")
    for q in ("unc", "err", "errstd")
    for suffix in ("", "_r", "_g", "_b")
]


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message

    def payload(self) -> dict:
        return {"error": {"status": self.status, "message": self.message}}


@dataclass
class ServiceConfig:
    sweep_dirs: dict[str, Path]
    demo_dir: Path | None = None
    static_dir: Path | None = None
    pcp_axes: list[str] = field(default_factory=lambda: list(PCP_AXES_DEFAULT))

    def __post_init__(self):
        self.sweep_dirs = {k: Path(v) for k, v in self.sweep_dirs.items()}
        for name, path in self.sweep_dirs.items():
            if not (path / "manifest.json").exists():
                raise ValueError(f"sweep directory for {name!r} has no manifest: {path}")


class QueryService:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self._manifests: dict[str, SweepManifest] = {}
        self._records: dict[str, dict[str, np.ndarray]] = {}

    # -- helpers -------------------------------------------------------

    def _manifest(self, dataset: str) -> SweepManifest:
        if dataset not in self.config.sweep_dirs:
            raise ApiError(404, f"unknown dataset {dataset!r}")
        if dataset not in self._manifests:
            self._manifests[dataset] = load_manifest(self.config.sweep_dirs[dataset])
        manifest = self._manifests[dataset]
        if not manifest.complete:
            raise ApiError(409, f"sweep for {dataset!r} is incomplete")
        return manifest

    def _dataset_records(self, dataset: str) -> dict[str, np.ndarray]:
        self._manifest(dataset)
        if dataset not in self._records:
            self._records[dataset] = load_records(self.config.sweep_dirs[dataset])
        return self._records[dataset]

    # -- endpoints ------------------------------------------------------

    def datasets(self) -> dict:
        out = []
        for name in sorted(self.config.sweep_dirs):
            manifest = self._manifest(name)
            out.append({
                "id": name,
                "grid": manifest.grid.to_jsonable(),
                "resolution": manifest.resolution,
                "methods": manifest.methods,
            })
        return {"datasets": out}

    def heatmap(self, dataset: str, method: str, quantity: str, channel: str) -> dict:
        records = self._dataset_records(dataset)
        manifest = self._manifest(dataset)
        try:
            fld = record_field(method, quantity, channel)
        except ValueError as e:
            raise ApiError(400, str(e)) from e
        values = records[fld]
        return {
            "dataset": dataset,
            "field": fld,
            "n_theta": manifest.grid.n_theta,
            "n_phi": manifest.grid.n_phi,
            "layout": "phi-major row-major: values[j*n_theta + i] is cell (i, j)",
            "values": [float(v) for v in values],
            "min": float(values.min()),
            "max": float(values.max()),
        }

    def view(self, dataset: str, i: int, j: int) -> dict:
        manifest = self._manifest(dataset)
        grid = manifest.grid
        if not (0 <= i < grid.n_theta and 0 <= j < grid.n_phi):
            raise ApiError(404, f"cell ({i}, {j}) outside grid "
                                f"{grid.n_theta}x{grid.n_phi}")
        cell_dir = self.config.sweep_dirs[dataset] / "img" / f"{i}_{j}"
        with open(cell_dir / "record.json") as f:
            cell = json.load(f)
        images = {name: f"/files/{dataset}/img/{i}_{j}/{name}.png"
                  for name in _IMAGE_NAMES}
        return {
            "dataset": dataset,
            "i": i,
            "j": j,
            "record": cell["record"],
            "map_ranges": cell["map_ranges"],
            "images": images,
        }

    def select(self, dataset: str, cells: list) -> dict:
        records = self._dataset_records(dataset)
        manifest = self._manifest(dataset)
        grid = manifest.grid
        rows = []
        for pair in cells:
            if len(pair) != 2:
                raise ApiError(400, f"cells must be (i, j) pairs, got {pair!r}")
            i, j = int(pair[0]), int(pair[1])
            if not (0 <= i < grid.n_theta and 0 <= j < grid.n_phi):
                raise ApiError(404, f"cell ({i}, {j}) outside grid")
            idx = grid.index(i, j)
            rec = {name: float(vec[idx]) for name, vec in records.items()}
            rec.update({"i": i, "j": j, "index": idx})
            rows.append(rec)
        rows.sort(key=lambda r: -(r["mc_unc"] + r["ens_unc"]))
        return {"dataset": dataset, "records": rows}

    def pcp(self, dataset: str) -> dict:
        records = self._dataset_records(dataset)
        axes = self.config.pcp_axes
        n = next(iter(records.values())).shape[0]
        rows = [[float(records[a][k]) for a in axes] for k in range(n)]
        return {"dataset": dataset, "axes": list(axes), "rows": rows}

    def sensitivity(self, dataset: str, method: str, stat: str) -> dict:
        if stat not in ("mean", "std"):
            raise ApiError(400, f"stat must be mean or std, got {stat!r}")
        quantity = "sensitivity" if stat == "mean" else "sensitivity_std"
        return self.heatmap(dataset, method, quantity, "combined")

    def demo1d(self) -> dict:
        if self.config.demo_dir is None:
            raise ApiError(404, "no demo1d directory configured")
        out = {}
        for method in ("mc_dropout", "ensemble"):
            path = Path(self.config.demo_dir) / f"demo1d_{method}.csv"
            if not path.exists():
                raise ApiError(404, f"demo1d output missing: {path.name}")
            xs, means, stds = [], [], []
            with open(path) as f:
                for row in csv.DictReader(f):
                    xs.append(float(row["x"]))
                    means.append(float(row["mean"]))
                    stds.append(float(row["std"]))
            out[method] = {"x": xs, "mean": means, "std": stds}
        return {"methods": out}
