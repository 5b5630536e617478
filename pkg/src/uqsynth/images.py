"""RGB images in model space [-1, 1]."""

from dataclasses import dataclass

import numpy as np


@dataclass
class RgbImage:
    """H x W x 3 float32 image with values in [-1, 1] (model space)."""

    data: np.ndarray  # (H, W, 3) f32

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise ValueError(f"RgbImage data must be (H, W, 3), got {self.data.shape}")
        lo, hi = float(self.data.min()), float(self.data.max())
        if lo < -1.0 or hi > 1.0:
            raise ValueError(f"RgbImage values must lie in [-1, 1], got [{lo}, {hi}]")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def to_display(self) -> np.ndarray:
        """Map model space [-1, 1] to display space [0, 1]."""
        return (self.data + np.float32(1.0)) * np.float32(0.5)

    @staticmethod
    def from_display(display: np.ndarray) -> "RgbImage":
        """Map display space [0, 1] to model space [-1, 1]."""
        d = np.asarray(display, dtype=np.float32)
        return RgbImage(d * np.float32(2.0) - np.float32(1.0))

    def to_chw(self) -> np.ndarray:
        """(3, H, W) network layout."""
        return np.ascontiguousarray(self.data.transpose(2, 0, 1))

    @staticmethod
    def from_chw(chw: np.ndarray) -> "RgbImage":
        return RgbImage(np.asarray(chw, dtype=np.float32).transpose(1, 2, 0))


def save_png(image: RgbImage, path) -> None:
    """Write the image as an 8-bit PNG (display space)."""
    from PIL import Image

    arr = np.clip(np.rint(image.to_display() * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(path)
