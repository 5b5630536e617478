"""Regular view-space grids for dense sweeps."""

from dataclasses import dataclass

from ..render.view import ViewPoint


@dataclass
class GridSpec:
    """n_theta x n_phi cell-center grid.

    Cell (i, j) has theta_i = (i + 0.5) * 360 / n_theta (azimuth, spanning
    [0, 360)) and phi_j = -90 + (j + 0.5) * 180 / n_phi (elevation).
    Record order is phi-major, row-major: index = j * n_theta + i.
    """

    n_theta: int
    n_phi: int

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.n_theta}x{self.n_phi}")

    @property
    def n_cells(self) -> int:
        return self.n_theta * self.n_phi

    def theta(self, i: int) -> float:
        return (i + 0.5) * 360.0 / self.n_theta

    def phi(self, j: int) -> float:
        return -90.0 + (j + 0.5) * 180.0 / self.n_phi

    def view(self, i: int, j: int) -> ViewPoint:
        if not (0 <= i < self.n_theta and 0 <= j < self.n_phi):
            raise IndexError(f"cell ({i}, {j}) outside {self.n_theta}x{self.n_phi} grid")
        return ViewPoint(self.theta(i), self.phi(j))

    def index(self, i: int, j: int) -> int:
        if not (0 <= i < self.n_theta and 0 <= j < self.n_phi):
            raise IndexError(f"cell ({i}, {j}) outside {self.n_theta}x{self.n_phi} grid")
        return j * self.n_theta + i

    def cell(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.n_cells:
            raise IndexError(f"record index {index} outside grid of {self.n_cells}")
        return index % self.n_theta, index // self.n_theta

    def cells(self):
        """All (i, j) in record order."""
        for j in range(self.n_phi):
            for i in range(self.n_theta):
                yield i, j

    def to_jsonable(self) -> dict:
        return {"n_theta": self.n_theta, "n_phi": self.n_phi}

    @staticmethod
    def from_jsonable(data: dict) -> "GridSpec":
        return GridSpec(n_theta=data["n_theta"], n_phi=data["n_phi"])
