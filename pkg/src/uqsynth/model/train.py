"""Training loop for the synthesis network."""

from dataclasses import dataclass, field

import numpy as np

from .._threads import single_thread_blas
from ..autodiff import functional as F
from ..autodiff.adam import Adam
from ..autodiff.rng import STREAM_DROPOUT, STREAM_SHUFFLE, rng_stream
from ..autodiff.tensor import Graph, ShapeError, Tensor, backward
from ..images import RgbImage
from ..render.dataset import Dataset
from .network import SynthesisModel, normalize_view


def mse_loss(pred: RgbImage, target: RgbImage) -> float:
    """Mean over all 3*H*W elements of squared difference."""
    if pred.data.shape != target.data.shape:
        raise ShapeError(
            f"mse_loss: image shapes {pred.data.shape} and {target.data.shape} differ"
        )
    d = pred.data - target.data
    return float(np.mean(d * d, dtype=np.float32))


@dataclass
class TrainResult:
    model: SynthesisModel
    loss_history: list[float]
    metadata: dict = field(default_factory=dict)


def dataset_tensors(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """(M, 2) normalized views and (M, 3, H, W) targets."""
    views = np.stack([normalize_view(v) for v, _ in dataset.entries])
    targets = np.stack([img.to_chw() for _, img in dataset.entries])
    return views, targets


def train(model: SynthesisModel, dataset: Dataset, epochs: int, batch_size: int,
          lr: float = 1e-4, beta1: float = 0.9, beta2: float = 0.999,
          seed: int = 0, dropout_mode: str = "train") -> TrainResult:
    """MSE training with per-epoch seeded reshuffles; deterministic given seeds."""
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    if dataset.resolution != model.config.image_resolution:
        raise ShapeError(
            f"dataset resolution {dataset.resolution} does not match model "
            f"resolution {model.config.image_resolution}"
        )
    views, targets = dataset_tensors(dataset)
    m = views.shape[0]
    opt = Adam(model.parameters(), lr=lr, beta1=beta1, beta2=beta2)
    history: list[float] = []

    with single_thread_blas():
        for epoch in range(epochs):
            perm = rng_stream(seed, STREAM_SHUFFLE, epoch).permutation(m)
            drop_rng = rng_stream(seed, STREAM_DROPOUT, epoch)
            losses = []
            for start in range(0, m, batch_size):
                idx = perm[start : start + batch_size]
                g = Graph()
                x = Tensor(views[idx])
                y = Tensor(targets[idx])
                pred = model.forward(x, graph=g, dropout_mode=dropout_mode,
                                     bn_mode="train", rng=drop_rng)
                loss = F.mse(g, pred, y)
                opt.zero_grad()
                backward(g, loss)
                opt.step()
                losses.append(loss.data.item())
            history.append(float(np.mean(losses)))

    return TrainResult(
        model=model,
        loss_history=history,
        metadata={
            "epochs": epochs,
            "batch_size": batch_size,
            "lr": lr,
            "final_loss": history[-1] if history else None,
            "data_seed": dataset.seed,
            "train_seed": seed,
            "dropout_mode": dropout_mode,
        },
    )
