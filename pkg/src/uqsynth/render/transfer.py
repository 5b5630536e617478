"""Piecewise-linear transfer functions: normalized scalar -> RGBA."""

import numpy as np


class TransferFunction:
    """Sorted control points (value in [0,1], rgba in [0,1]^4), linearly
    interpolated. Endpoints must sit at 0 and 1."""

    def __init__(self, points: list[tuple[float, tuple[float, float, float, float]]]):
        if len(points) < 2:
            raise ValueError("transfer function needs at least 2 control points")
        values = [float(p[0]) for p in points]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("control point values must be strictly increasing")
        if values[0] != 0.0 or values[-1] != 1.0:
            raise ValueError("control points must span [0, 1] exactly")
        for _, rgba in points:
            if len(rgba) != 4 or any(not 0.0 <= c <= 1.0 for c in rgba):
                raise ValueError(f"rgba components must lie in [0, 1], got {rgba}")
        self.points = [(float(v), tuple(float(c) for c in rgba)) for v, rgba in points]

    def lut(self, n: int = 256) -> np.ndarray:
        """Sampled (n, 4) float32 table used by the ray-cast kernels."""
        xs = np.linspace(0.0, 1.0, n)
        vals = np.array([p[0] for p in self.points])
        out = np.empty((n, 4), dtype=np.float32)
        for c in range(4):
            ys = np.array([p[1][c] for p in self.points])
            out[:, c] = np.interp(xs, vals, ys).astype(np.float32)
        return out

    def scaled_alpha(self, factor: float) -> "TransferFunction":
        """Copy with every opacity multiplied by factor (clamped to 1)."""
        return TransferFunction(
            [(v, (r, g, b, min(1.0, a * factor))) for v, (r, g, b, a) in self.points]
        )

    def to_jsonable(self) -> list:
        return [[v, list(rgba)] for v, rgba in self.points]

    @staticmethod
    def from_jsonable(data) -> "TransferFunction":
        return TransferFunction([(v, tuple(rgba)) for v, rgba in data])


def default_transfer_function() -> TransferFunction:
    """Blue-to-warm ramp with low-value transparency; the package default."""
    return TransferFunction(
        [
            (0.0, (0.0, 0.0, 0.0, 0.0)),
            (0.25, (0.1, 0.1, 0.8, 0.01)),
            (0.55, (0.2, 0.7, 0.7, 0.12)),
            (0.8, (0.95, 0.65, 0.1, 0.45)),
            (1.0, (1.0, 1.0, 0.85, 0.9)),
        ]
    )
