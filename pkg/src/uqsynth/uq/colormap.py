"""Scalar map -> color image via the embedded viridis table."""

import numpy as np

from ._viridis import VIRIDIS_256

_LUT = np.array(VIRIDIS_256, dtype=np.float32)


def apply_colormap(values: np.ndarray, vmin: float | None = None,
                   vmax: float | None = None) -> np.ndarray:
    """Map a 2-D array to (H, W, 3) uint8 using viridis.

    Normalization is (v - vmin) / (vmax - vmin) over the given or actual
    range; a constant map (vmax == vmin) renders as the low end.
    Returns colors by nearest table entry: index round(norm * 255).
    """
    v = np.asarray(values, dtype=np.float64)
    lo = float(v.min()) if vmin is None else float(vmin)
    hi = float(v.max()) if vmax is None else float(vmax)
    if hi > lo:
        norm = np.clip((v - lo) / (hi - lo), 0.0, 1.0)
    else:
        norm = np.zeros_like(v)
    idx = np.rint(norm * 255.0).astype(np.int32)
    rgb = _LUT[idx]
    return np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)


def save_map_png(values: np.ndarray, path, vmin: float | None = None,
                 vmax: float | None = None, scale: int = 1) -> None:
    """Write a color-mapped PNG; scale upsamples by pixel repetition."""
    from PIL import Image

    rgb = apply_colormap(values, vmin=vmin, vmax=vmax)
    if scale > 1:
        rgb = rgb.repeat(scale, axis=0).repeat(scale, axis=1)
    Image.fromarray(rgb, mode="RGB").save(path)
