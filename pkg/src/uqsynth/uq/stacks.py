"""Sample stacks: repeated predictions for one view.

MC-Dropout stacks come from m stochastic passes with documented per-pass
streams rng_stream(seed, STREAM_MC_PASS, i); ensemble stacks hold one
deterministic prediction per member, in member order. Rows of a batched
MC pass are independent (eval-mode batch norm, per-row dropout masks).
"""

from dataclasses import dataclass

import numpy as np

from .._threads import single_thread_blas
from ..autodiff.rng import STREAM_MC_PASS, rng_stream
from ..autodiff.tensor import Tensor
from ..model.network import SynthesisModel, normalize_view
from ..render.view import ViewPoint


@dataclass
class SampleStack:
    """(m, H, W, 3) f32 samples plus provenance."""

    samples: np.ndarray
    source: dict

    def __post_init__(self):
        self.samples = np.ascontiguousarray(self.samples, dtype=np.float32)
        if self.samples.ndim != 4 or self.samples.shape[3] != 3:
            raise ValueError(f"stack must be (m, H, W, 3), got {self.samples.shape}")

    @property
    def m(self) -> int:
        return self.samples.shape[0]


@dataclass
class EnsembleSet:
    """Independently trained members sharing one architecture (no dropout)."""

    members: list[SynthesisModel]
    member_ids: list[int] | None = None

    def __post_init__(self):
        if self.member_ids is None:
            self.member_ids = list(range(len(self.members)))
        res = {m.config.image_resolution for m in self.members}
        if len(res) > 1:
            raise ValueError(f"ensemble members must share resolution, got {res}")

    @property
    def k(self) -> int:
        return len(self.members)


def mc_sample(model: SynthesisModel, view: ViewPoint, m: int = 100,
              seed: int = 0) -> SampleStack:
    """m stochastic forward passes; pass i draws its dropout masks from
    rng_stream(seed, STREAM_MC_PASS, i)."""
    if model.config.dropout_p <= 0.0:
        raise ValueError("MC-Dropout requires nonzero dropout probability")
    if m < 2:
        raise ValueError(f"MC sampling needs m >= 2, got {m}")
    rngs = [rng_stream(seed, STREAM_MC_PASS, i) for i in range(m)]
    x = Tensor(np.tile(normalize_view(view), (m, 1)))
    with single_thread_blas():
        out = model.forward(x, graph=None, dropout_mode="mc_eval",
                            bn_mode="eval", rngs=rngs)
    samples = out.data.transpose(0, 2, 3, 1)  # (m, H, W, 3)
    return SampleStack(
        samples=samples,
        source={"method": "mc_dropout", "m": m, "eta": model.config.dropout_p,
                "seed": seed},
    )


def ensemble_sample(ensemble: EnsembleSet, view: ViewPoint) -> SampleStack:
    """One deterministic (dropout-off) prediction per member, member order."""
    if ensemble.k < 2:
        raise ValueError(f"ensemble sampling needs K >= 2 members, got {ensemble.k}")
    x = Tensor(normalize_view(view).reshape(1, 2))
    outs = []
    with single_thread_blas():
        for member in ensemble.members:
            out = member.forward(x, graph=None, dropout_mode="off", bn_mode="eval")
            outs.append(out.data[0].transpose(1, 2, 0))
    return SampleStack(
        samples=np.stack(outs),
        source={"method": "ensemble", "k": ensemble.k,
                "member_ids": list(ensemble.member_ids)},
    )
