"""Adam optimizer with bias correction."""

import numpy as np

from .tensor import ShapeError, Tensor


class Adam:
    """Standard Adam over a list of parameter tensors.

    Defaults follow the training regimen used throughout the package:
    lr 1e-4, betas (0.9, 0.999), eps 1e-8.
    """

    def __init__(self, params: list[Tensor], lr: float = 1e-4,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if not lr > 0:
            raise ValueError(f"lr must be positive, got {lr}")
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise ValueError(f"betas must be in [0, 1), got {beta1}, {beta2}")
        if not eps > 0:
            raise ValueError(f"eps must be positive, got {eps}")
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.first_moment = [np.zeros_like(p.data) for p in self.params]
        self.second_moment = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        """Apply one update from the accumulated .grad buffers."""
        self.step_count += 1
        b1 = np.float32(self.beta1)
        b2 = np.float32(self.beta2)
        bc1 = np.float32(1.0 - self.beta1 ** self.step_count)
        bc2 = np.float32(1.0 - self.beta2 ** self.step_count)
        lr = np.float32(self.lr)
        eps = np.float32(self.eps)
        for p, m, v in zip(self.params, self.first_moment, self.second_moment):
            if p.grad is None:
                continue
            if p.grad.shape != p.data.shape:
                raise ShapeError(
                    f"grad shape {p.grad.shape} does not match param {p.data.shape}"
                )
            g = p.grad
            m += (np.float32(1.0) - b1) * (g - m)
            v += (np.float32(1.0) - b2) * (g * g - v)
            mhat = m / bc1
            vhat = v / bc2
            p.data -= lr * mhat / (np.sqrt(vhat) + eps)

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Moment buffers keyed by parameter index, for checkpointing."""
        out: dict[str, np.ndarray] = {}
        for i, (m, v) in enumerate(zip(self.first_moment, self.second_moment)):
            out[f"adam.m.{i}"] = m
            out[f"adam.v.{i}"] = v
        return out

    def load_state_arrays(self, arrays: dict[str, np.ndarray], step_count: int) -> None:
        for i in range(len(self.params)):
            self.first_moment[i][...] = arrays[f"adam.m.{i}"]
            self.second_moment[i][...] = arrays[f"adam.v.{i}"]
        self.step_count = step_count
