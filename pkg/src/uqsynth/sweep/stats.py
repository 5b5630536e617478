"""Correlation and image-quality statistics (computed in float64)."""

import math
from dataclasses import dataclass

import numpy as np

from .._threads import single_thread_blas
from ..autodiff.rng import mix_seed
from ..autodiff.tensor import Tensor
from ..images import RgbImage
from ..model.network import SynthesisModel, normalize_view
from ..render.dataset import Dataset
from ..uq.stacks import EnsembleSet, ensemble_sample, mc_sample


def pearson(xs, ys) -> float:
    """Pearson product-moment correlation, float64."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"pearson needs two equal-length vectors, got {x.shape}, {y.shape}")
    if x.size < 2:
        raise ValueError(f"pearson needs at least 2 points, got {x.size}")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = math.sqrt(float(xd @ xd))
    sy = math.sqrt(float(yd @ yd))
    if sx == 0.0 and sy == 0.0:
        raise ValueError("pearson undefined: both inputs are constant")
    if sx == 0.0:
        raise ValueError("pearson undefined: first input (xs) is constant")
    if sy == 0.0:
        raise ValueError("pearson undefined: second input (ys) is constant")
    return float((xd @ yd) / (sx * sy))


def psnr(pred: RgbImage, gt: RgbImage) -> dict:
    """Channel-wise and average PSNR/MSE in display space [0, 1], peak 1.

    Identical images yield the +inf sentinel.
    """
    if pred.data.shape != gt.data.shape:
        raise ValueError(f"psnr: shapes {pred.data.shape} and {gt.data.shape} differ")
    p = pred.to_display().astype(np.float64)
    g = gt.to_display().astype(np.float64)
    mse_c = [float(np.mean((p[:, :, c] - g[:, :, c]) ** 2)) for c in range(3)]
    psnr_c = [10.0 * math.log10(1.0 / m) if m > 0 else math.inf for m in mse_c]
    return {
        "psnr": psnr_c,
        "psnr_avg": float(np.mean(psnr_c)) if all(map(math.isfinite, psnr_c)) else math.inf,
        "mse": mse_c,
        "mse_avg": float(np.mean(mse_c)),
    }


def _psnr_from_mse(mse_c: list[float]) -> tuple[list[float], float]:
    psnr_c = [10.0 * math.log10(1.0 / m) if m > 0 else math.inf for m in mse_c]
    avg = float(np.mean(psnr_c)) if all(map(math.isfinite, psnr_c)) else math.inf
    return psnr_c, avg


def _accumulate_mse(pred: np.ndarray, gt: np.ndarray, acc: np.ndarray) -> None:
    d = (pred.astype(np.float64) - gt.astype(np.float64)) * 0.5  # model->display scale
    acc += [float(np.mean(d[:, :, c] ** 2)) for c in range(3)]


def evaluate_models(mc_model: SynthesisModel, ensemble: EnsembleSet,
                    dataset: Dataset, m: int, seed: int) -> dict:
    """Test-set prediction-quality table.

    Rows: no_dropout (the MC model with dropout off), mc_dropout (mean of
    m stochastic passes), ensemble (mean over members). Channel MSE is
    averaged over views first; PSNR comes from the aggregate MSE.
    """
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    acc = {"no_dropout": np.zeros(3), "mc_dropout": np.zeros(3), "ensemble": np.zeros(3)}
    with single_thread_blas():
        for idx, (view, gt) in enumerate(dataset.entries):
            x = Tensor(normalize_view(view).reshape(1, 2))
            plain = mc_model.forward(x, dropout_mode="off", bn_mode="eval")
            _accumulate_mse(plain.data[0].transpose(1, 2, 0), gt.data, acc["no_dropout"])
            stack = mc_sample(mc_model, view, m, mix_seed(seed, idx))
            _accumulate_mse(stack.samples.mean(axis=0), gt.data, acc["mc_dropout"])
            estack = ensemble_sample(ensemble, view)
            _accumulate_mse(estack.samples.mean(axis=0), gt.data, acc["ensemble"])
    n = len(dataset)
    table = {}
    for row, total in acc.items():
        mse_c = [t / n for t in total.tolist()]
        psnr_c, avg = _psnr_from_mse(mse_c)
        table[row] = {
            "psnr": psnr_c,
            "psnr_avg": avg,
            "mse": mse_c,
            "mse_avg": float(np.mean(mse_c)),
        }
    return table


_PAIR_KEYS = (
    ("mc_un_mc_err", "mc_unc", "mc_err"),
    ("ens_un_ens_err", "ens_unc", "ens_err"),
    ("mc_un_ens_un", "mc_unc", "ens_unc"),
    ("mc_err_ens_err", "mc_err", "ens_err"),
    ("mc_sen_ens_sen", "mc_sens", "ens_sens"),
)


@dataclass
class CorrelationReport:
    """Pearson r over all sweep records for the five standard pairs."""

    pairs: dict[str, float]

    def __getitem__(self, key: str) -> float:
        return self.pairs[key]


def correlation_report(records: dict[str, np.ndarray]) -> CorrelationReport:
    """records: field name -> per-view vector (see sweep.RECORD_FIELDS)."""
    pairs = {}
    for key, fa, fb in _PAIR_KEYS:
        pairs[key] = pearson(records[fa], records[fb])
    return CorrelationReport(pairs=pairs)
