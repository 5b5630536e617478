"""Per-pixel uncertainty / error / error-variability maps from a stack.

Conventions (they change the numbers, so they are spelled out):

* Standard deviations are population (divide by m), not sample (m-1);
  a stack of identical samples then has exactly zero uncertainty.
* channel_error is the mean over samples of |sample - ground truth|,
  per channel; channel_error_std the population std of those absolute
  errors. Averaging over samples happens first, channels are summed after.
* combined maps are the float32 sum of the three stored channel maps,
  so combined == sum(channels) holds exactly.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..autodiff.container import read_container, write_container
from ..images import RgbImage
from .stacks import SampleStack


@dataclass
class PredictionBundle:
    mean_image: RgbImage
    channel_uncertainty: np.ndarray   # (3, H, W) f32, >= 0
    combined_uncertainty: np.ndarray  # (H, W) f32
    channel_error: np.ndarray | None = None
    combined_error: np.ndarray | None = None
    channel_error_std: np.ndarray | None = None
    combined_error_std: np.ndarray | None = None

    def aggregates(self) -> dict[str, float]:
        """Per-view scalars: pixel means, with combined = sum of the channel
        aggregates (in float64, so the channel-sum invariant holds exactly)."""
        out = {"uncertainty": sum(self.channel_aggregates("uncertainty"))}
        if self.channel_error is not None:
            out["error"] = sum(self.channel_aggregates("error"))
        if self.channel_error_std is not None:
            out["error_std"] = sum(self.channel_aggregates("error_std"))
        return out

    def channel_aggregates(self, field: str) -> list[float]:
        maps = getattr(self, f"channel_{field}")
        return [float(maps[c].mean(dtype=np.float64)) for c in range(3)]


def _mean_and_popstd(stack64: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = stack64.mean(axis=0)
    var = np.mean((stack64 - mean) ** 2, axis=0)
    return mean, np.sqrt(var)


def compute_bundle(stack: SampleStack, ground_truth: RgbImage) -> PredictionBundle:
    """Mean image plus uncertainty/error/error-std maps against ground truth."""
    if stack.m < 2:
        raise ValueError(f"bundle statistics need m >= 2 samples, got {stack.m}")
    gt = ground_truth.data
    if stack.samples.shape[1:] != gt.shape:
        raise ValueError(
            f"stack images {stack.samples.shape[1:]} do not match ground truth {gt.shape}"
        )
    s64 = stack.samples.astype(np.float64)
    mean, unc = _mean_and_popstd(s64)  # (H, W, 3)
    abs_err = np.abs(s64 - gt.astype(np.float64))
    err_mean, err_std = _mean_and_popstd(abs_err)

    ch_unc = np.ascontiguousarray(unc.transpose(2, 0, 1)).astype(np.float32)
    ch_err = np.ascontiguousarray(err_mean.transpose(2, 0, 1)).astype(np.float32)
    ch_err_std = np.ascontiguousarray(err_std.transpose(2, 0, 1)).astype(np.float32)
    return PredictionBundle(
        mean_image=RgbImage(np.clip(mean, -1.0, 1.0).astype(np.float32)),
        channel_uncertainty=ch_unc,
        combined_uncertainty=ch_unc[0] + ch_unc[1] + ch_unc[2],
        channel_error=ch_err,
        combined_error=ch_err[0] + ch_err[1] + ch_err[2],
        channel_error_std=ch_err_std,
        combined_error_std=ch_err_std[0] + ch_err_std[1] + ch_err_std[2],
    )


def uncertainty_only(stack: SampleStack) -> PredictionBundle:
    """Mean and uncertainty maps when no ground truth exists."""
    if stack.m < 2:
        raise ValueError(f"bundle statistics need m >= 2 samples, got {stack.m}")
    s64 = stack.samples.astype(np.float64)
    mean, unc = _mean_and_popstd(s64)
    ch_unc = np.ascontiguousarray(unc.transpose(2, 0, 1)).astype(np.float32)
    return PredictionBundle(
        mean_image=RgbImage(np.clip(mean, -1.0, 1.0).astype(np.float32)),
        channel_uncertainty=ch_unc,
        combined_uncertainty=ch_unc[0] + ch_unc[1] + ch_unc[2],
    )


_MAP_FIELDS = (
    "channel_uncertainty",
    "combined_uncertainty",
    "channel_error",
    "combined_error",
    "channel_error_std",
    "combined_error_std",
)


def save_bundle(bundle: PredictionBundle, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    arrays = {"mean_image": bundle.mean_image.data}
    present = []
    for name in _MAP_FIELDS:
        arr = getattr(bundle, name)
        if arr is not None:
            arrays[name] = arr
            present.append(name)
    write_container(out_dir / "maps.bin", arrays)
    with open(out_dir / "manifest.json", "w") as f:
        json.dump({"kind": "uqsynth-bundle", "maps": present}, f, indent=1)


def load_bundle(path) -> PredictionBundle:
    path = Path(path)
    with open(path / "manifest.json") as f:
        manifest = json.load(f)
    _, arrays = read_container(path / "maps.bin")
    kwargs = {name: arrays[name] for name in manifest["maps"]}
    return PredictionBundle(mean_image=RgbImage(arrays["mean_image"]), **kwargs)
