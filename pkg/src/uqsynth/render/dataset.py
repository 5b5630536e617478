"""Datasets of (viewpoint, rendered image) pairs and their on-disk form.

A dataset directory holds manifest.json (views, seed, config) and
images.bin, a single little-endian f32 container with one (N, H, W, 3)
array in model space.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..autodiff.container import read_container, write_container
from ..autodiff.rng import STREAM_DATASET_SHUFFLE, STREAM_VIEWS, rng_stream
from ..images import RgbImage
from .raycast import render
from .transfer import TransferFunction
from .view import ViewPoint
from .volume import ScalarVolume


@dataclass
class Dataset:
    entries: list[tuple[ViewPoint, RgbImage]]
    seed: int
    volume_id: str
    tf_id: str
    resolution: int = field(default=0)

    def __post_init__(self):
        if self.entries:
            res = {img.height for _, img in self.entries} | {
                img.width for _, img in self.entries
            }
            if len(res) != 1:
                raise ValueError(f"dataset images must share one resolution, got {res}")
            self.resolution = res.pop()

    def __len__(self) -> int:
        return len(self.entries)


def sample_views(n: int, seed: int) -> list[ViewPoint]:
    """n viewpoints, theta ~ U[0, 360), phi ~ U[-90, 90], then seed-shuffled."""
    rng = rng_stream(seed, STREAM_VIEWS)
    thetas = rng.random(n) * 360.0
    phis = rng.random(n) * 180.0 - 90.0
    order = rng_stream(seed, STREAM_DATASET_SHUFFLE).permutation(n)
    return [ViewPoint(float(thetas[i]), float(phis[i])) for i in order]


def generate_dataset(volume: ScalarVolume, tf: TransferFunction, n: int,
                     resolution: int, seed: int, volume_id: str = "volume",
                     tf_id: str = "default") -> Dataset:
    """Render n uniformly sampled views into a reproducible dataset."""
    if n < 1:
        raise ValueError(f"dataset size must be >= 1, got {n}")
    views = sample_views(n, seed)
    entries = [(v, render(volume, tf, v, resolution)) for v in views]
    return Dataset(entries=entries, seed=seed, volume_id=volume_id, tf_id=tf_id)


def save_dataset(ds: Dataset, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stack = np.stack([img.data for _, img in ds.entries])
    write_container(out_dir / "images.bin", {"images": stack})
    manifest = {
        "kind": "uqsynth-dataset",
        "seed": ds.seed,
        "volume_id": ds.volume_id,
        "tf_id": ds.tf_id,
        "resolution": ds.resolution,
        "n": len(ds),
        "views": [[v.theta, v.phi] for v, _ in ds.entries],
        "blob": "images.bin",
        "layout": "images: (n, h, w, 3) float32 little-endian, model space [-1, 1]",
    }
    with open(out_dir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)


def load_dataset(path) -> Dataset:
    path = Path(path)
    with open(path / "manifest.json") as f:
        manifest = json.load(f)
    if manifest.get("kind") != "uqsynth-dataset":
        raise ValueError(f"{path} is not a dataset directory")
    _, arrays = read_container(path / manifest["blob"])
    stack = arrays["images"]
    entries = [
        (ViewPoint(theta, phi), RgbImage(stack[i]))
        for i, (theta, phi) in enumerate(manifest["views"])
    ]
    return Dataset(
        entries=entries,
        seed=manifest["seed"],
        volume_id=manifest["volume_id"],
        tf_id=manifest["tf_id"],
    )
