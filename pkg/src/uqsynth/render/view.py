"""Viewpoints on the sphere and the orthographic camera basis."""

import math
from dataclasses import dataclass

import numpy as np

POLE_EPS = 1e-6


@dataclass
class ViewPoint:
    """Azimuth theta in [0, 360) and elevation phi in [-90, 90], degrees.

    theta wraps modulo 360; an out-of-range phi is an error, not clamped.
    """

    theta: float
    phi: float

    def __post_init__(self):
        if not -90.0 <= self.phi <= 90.0:
            raise ValueError(f"elevation must be in [-90, 90], got {self.phi}")
        self.theta = float(self.theta) % 360.0
        self.phi = float(self.phi)


@dataclass
class CameraBasis:
    eye: np.ndarray      # (3,) f64
    forward: np.ndarray  # unit, points at the volume center
    up: np.ndarray       # unit
    right: np.ndarray    # unit


def view_direction(view: ViewPoint) -> np.ndarray:
    """Unit vector from the center towards the eye for (theta, phi)."""
    th = math.radians(view.theta)
    ph = math.radians(view.phi)
    return np.array(
        [math.cos(ph) * math.sin(th), math.sin(ph), math.cos(ph) * math.cos(th)],
        dtype=np.float64,
    )


def camera_from_view(view: ViewPoint, radius: float,
                     center: np.ndarray | None = None) -> CameraBasis:
    """Eye on the radius-sphere around the center, looking at the center.

    eye = center + radius*(cos(phi)sin(theta), sin(phi), cos(phi)cos(theta)).
    The world up is +y except within POLE_EPS degrees of the poles, where
    +z breaks the gimbal tie.
    """
    if radius <= 0:
        raise ValueError(f"camera radius must be positive, got {radius}")
    if center is None:
        center = np.zeros(3, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    d = view_direction(view)
    eye = center + radius * d
    forward = -d
    if abs(view.phi) >= 90.0 - POLE_EPS:
        world_up = np.array([0.0, 0.0, 1.0])
    else:
        world_up = np.array([0.0, 1.0, 0.0])
    right = np.cross(forward, world_up)
    right /= np.linalg.norm(right)
    up = np.cross(right, forward)
    up /= np.linalg.norm(up)
    return CameraBasis(eye=eye, forward=forward, up=up, right=right)
