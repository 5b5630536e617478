"""View-space sensitivity: how sharply the image reacts to view changes.

Per repetition: forward to an image, s = sum of |pixel values| (model
space), backprop s to the normalized inputs, sensitivity = |ds/dtheta^| +
|ds/dphi^|. Gradients are taken w.r.t. the normalized network inputs;
values per raw degree are a constant rescale (1/180 for theta, 1/90 for
phi). The MC mode runs reps stochastic passes; the ensemble mode one
deterministic pass per member. Mean and population std aggregate the
per-rep values.
"""

from dataclasses import dataclass

import numpy as np

from .._threads import single_thread_blas
from ..autodiff import functional as F
from ..autodiff.rng import STREAM_MC_PASS, rng_stream
from ..autodiff.tensor import Graph, Tensor, backward
from ..model.network import SynthesisModel, normalize_view
from ..render.view import ViewPoint
from .stacks import EnsembleSet


@dataclass
class SensitivityResult:
    mean_sensitivity: float
    sensitivity_std: float
    reps: int
    values: list[float]
    single_rep: bool = False  # std reported as 0 because reps == 1


def _aggregate(values: np.ndarray) -> SensitivityResult:
    mean = float(values.mean())
    if values.size == 1:
        return SensitivityResult(mean, 0.0, 1, [float(values[0])], single_rep=True)
    std = float(np.sqrt(np.mean((values - values.mean()) ** 2)))
    return SensitivityResult(mean, std, int(values.size), [float(v) for v in values])


def _batched_sensitivity(model: SynthesisModel, view: ViewPoint, reps: int,
                         dropout_mode: str, rngs) -> np.ndarray:
    x = Tensor(np.tile(normalize_view(view), (reps, 1)), requires_grad=True)
    g = Graph()
    with single_thread_blas():
        out = model.forward(x, graph=g, dropout_mode=dropout_mode,
                            bn_mode="eval", rngs=rngs)
        total = F.sum_all(g, F.abs_(g, out))  # sum of per-rep L1 norms
        backward(g, total)
    grads = x.grad  # row r holds d(s_r)/d(theta^, phi^): rows are independent
    return np.abs(grads[:, 0]) + np.abs(grads[:, 1])


def sensitivity_mc(model: SynthesisModel, view: ViewPoint, reps: int,
                   seed: int) -> SensitivityResult:
    """reps stochastic passes of the MC-Dropout model."""
    if reps < 1:
        raise ValueError(f"sensitivity needs reps >= 1, got {reps}")
    if model.config.dropout_p <= 0.0:
        raise ValueError("MC-Dropout sensitivity requires nonzero dropout")
    rngs = [rng_stream(seed, STREAM_MC_PASS, i) for i in range(reps)]
    values = _batched_sensitivity(model, view, reps, "mc_eval", rngs)
    return _aggregate(values)


def sensitivity_deterministic(model: SynthesisModel, view: ViewPoint) -> SensitivityResult:
    """Single dropout-off pass (the reps == 1 degenerate case, flagged)."""
    values = _batched_sensitivity(model, view, 1, "off", None)
    return _aggregate(values)


def sensitivity_ensemble(ensemble: EnsembleSet, view: ViewPoint) -> SensitivityResult:
    """One deterministic pass per member, member order."""
    if ensemble.k < 1:
        raise ValueError("ensemble sensitivity needs at least one member")
    vals = [
        float(_batched_sensitivity(member, view, 1, "off", None)[0])
        for member in ensemble.members
    ]
    return _aggregate(np.array(vals))


def sensitivity(model_or_ensemble, view: ViewPoint, mode: str, reps: int = 100,
                seed: int = 0) -> SensitivityResult:
    """Dispatch: mode 'mc_dropout' (reps = m passes) or 'ensemble' (reps = K)."""
    if mode == "mc_dropout":
        return sensitivity_mc(model_or_ensemble, view, reps, seed)
    if mode == "ensemble":
        return sensitivity_ensemble(model_or_ensemble, view)
    raise ValueError(f"mode must be mc_dropout or ensemble, got {mode!r}")
