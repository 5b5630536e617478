"""Scalar volumes: built-in analytic fields and raw-file ingestion."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..autodiff.rng import rng_stream

BUILTIN_KINDS = ("blobs", "shell", "turbulence")


@dataclass
class ScalarVolume:
    """dims = (nx, ny, nz); data flat f32, x-fastest; value_range = (min, max)."""

    dims: tuple[int, int, int]
    data: np.ndarray
    value_range: tuple[float, float]

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.data = np.ascontiguousarray(self.data, dtype=np.float32).ravel()
        nx, ny, nz = self.dims
        if self.data.size != nx * ny * nz:
            raise ValueError(
                f"volume data has {self.data.size} values, dims {self.dims} "
                f"need {nx * ny * nz}"
            )
        lo, hi = float(self.data.min()), float(self.data.max())
        if self.value_range[0] > lo or self.value_range[1] < hi:
            raise ValueError(
                f"value_range {self.value_range} does not bracket data range ({lo}, {hi})"
            )

    def grid(self) -> np.ndarray:
        """(nz, ny, nx) view; grid[z, y, x] with x fastest in memory."""
        nx, ny, nz = self.dims
        return self.data.reshape(nz, ny, nx)


def _coords(dims):
    nx, ny, nz = dims
    z, y, x = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    return x.astype(np.float64), y.astype(np.float64), z.astype(np.float64)


def builtin_volume(kind: str, dims=(64, 64, 64), seed: int = 0,
                   n_blobs: int = 6) -> ScalarVolume:
    """Seeded analytic volumes standing in for real simulation data.

    blobs:      sum of n_blobs Gaussians a_k * exp(-|p - c_k|^2 / (2 s_k^2)),
                centers in the middle 60% of the cube, s_k in [0.08, 0.2]*min(dims),
                amplitudes in [0.5, 1]
    shell:      exp(-(r - r0)^2 / (2 w^2)), r0 = 0.3*min(dims), w = 0.08*min(dims)
    turbulence: band-limited noise, sum over 3 octaves of 4 random-direction
                cosines with random phase, weights 1/octave

    Output is rescaled to [0, 1]; identical (kind, dims, seed) give
    identical volumes.
    """
    nx, ny, nz = (int(d) for d in dims)
    if min(nx, ny, nz) < 8:
        raise ValueError(f"builtin volume dims must be >= 8, got {dims}")
    if kind == "turbulence-like":
        kind = "turbulence"
    if kind not in BUILTIN_KINDS:
        raise ValueError(f"unknown builtin volume kind {kind!r}; choose from {BUILTIN_KINDS}")
    rng = rng_stream(seed, 0xB01)
    x, y, z = _coords((nx, ny, nz))
    cx, cy, cz = (nx - 1) / 2.0, (ny - 1) / 2.0, (nz - 1) / 2.0
    mind = min(nx, ny, nz)

    if kind == "blobs":
        field = np.zeros_like(x)
        for _ in range(n_blobs):
            c = np.array([cx, cy, cz]) + (rng.random(3) - 0.5) * 0.6 * np.array(
                [nx, ny, nz]
            )
            s = (0.08 + 0.12 * rng.random()) * mind
            a = 0.5 + 0.5 * rng.random()
            r2 = (x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2
            field += a * np.exp(-r2 / (2.0 * s * s))
    elif kind == "shell":
        r = np.sqrt((x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2)
        r0 = 0.3 * mind
        w = 0.08 * mind
        field = np.exp(-((r - r0) ** 2) / (2.0 * w * w))
    else:  # turbulence
        field = np.zeros_like(x)
        for octave in range(1, 4):
            for _ in range(4):
                k = rng.standard_normal(3)
                k *= 2.0 * np.pi * octave / (mind * max(np.linalg.norm(k), 1e-9))
                phase = rng.random() * 2.0 * np.pi
                field += (1.0 / octave) * np.cos(k[0] * x + k[1] * y + k[2] * z + phase)

    lo, hi = field.min(), field.max()
    field = (field - lo) / (hi - lo) if hi > lo else np.zeros_like(field)
    data = field.astype(np.float32).ravel()
    return ScalarVolume(dims=(nx, ny, nz), data=data,
                        value_range=(float(data.min()), float(data.max())))


def load_raw_volume(path, dims, dtype: str = "f32") -> ScalarVolume:
    """Read a little-endian raw volume file; u8 data rescales to [0, 1]."""
    nx, ny, nz = (int(d) for d in dims)
    n = nx * ny * nz
    if dtype not in ("f32", "u8"):
        raise ValueError(f"dtype must be f32 or u8, got {dtype!r}")
    itemsize = 4 if dtype == "f32" else 1
    path = Path(path)
    actual = path.stat().st_size
    expected = n * itemsize
    if actual != expected:
        raise ValueError(
            f"{path}: expected {expected} bytes for dims {dims} ({dtype}), found {actual}"
        )
    raw = path.read_bytes()
    if dtype == "f32":
        data = np.frombuffer(raw, dtype="<f4").astype(np.float32)
    else:
        data = np.frombuffer(raw, dtype=np.uint8).astype(np.float32) / np.float32(255.0)
    return ScalarVolume(dims=(nx, ny, nz), data=data,
                        value_range=(float(data.min()), float(data.max())))
