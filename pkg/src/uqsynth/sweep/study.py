"""Parameter studies: MC sample count, ensemble size, dropout probability.

Each study evaluates the test set and reports (value, average uncertainty,
average PSNR), where average uncertainty is the mean over views of the
pixel-mean combined uncertainty and PSNR comes from channel MSE aggregated
over all views.

The mc_samples study draws max(values) passes per view once and reuses
prefixes: pass i always uses the stream (seed, view index, pass i), so the
m-sample stack is by construction the first m of the (m+1)-sample stack.
"""

import math

import numpy as np

from ..autodiff.rng import mix_seed
from ..model.network import SynthesisModel
from ..render.dataset import Dataset
from ..uq.bundle import uncertainty_only
from ..uq.stacks import EnsembleSet, SampleStack, ensemble_sample, mc_sample

AXES = ("mc_samples", "ensemble_size", "dropout_p")


def _check_values(values):
    values = list(values)
    if not values:
        raise ValueError("parameter study needs at least one value")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"study values must be sorted ascending, got {values}")
    return values


def _stack_stats(samples: np.ndarray, gt: np.ndarray) -> tuple[float, np.ndarray]:
    """(pixel-mean combined uncertainty, per-channel display MSE of the mean)."""
    bundle = uncertainty_only(SampleStack(samples=samples, source={"method": "study"}))
    unc = float(bundle.combined_uncertainty.mean(dtype=np.float64))
    d = (samples.mean(axis=0).astype(np.float64) - gt.astype(np.float64)) * 0.5
    mse = np.array([float(np.mean(d[:, :, c] ** 2)) for c in range(3)])
    return unc, mse


def _psnr_avg(mse_c: np.ndarray) -> float:
    vals = [10.0 * math.log10(1.0 / m) if m > 0 else math.inf for m in mse_c]
    return float(np.mean(vals)) if all(map(math.isfinite, vals)) else math.inf


def parameter_study(axis: str, values, dataset: Dataset,
                    mc_model: SynthesisModel | None = None,
                    ensemble: EnsembleSet | None = None,
                    models_by_p: dict[float, SynthesisModel] | None = None,
                    m: int = 50, seed: int = 0) -> list[dict]:
    """Run one study axis over the test set; returns one row per value."""
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    values = _check_values(values)
    n = len(dataset)
    if n == 0:
        raise ValueError("parameter study needs a non-empty dataset")

    rows = []
    if axis == "mc_samples":
        if mc_model is None:
            raise ValueError("mc_samples study needs the MC-Dropout model")
        m_max = int(values[-1])
        unc_acc = np.zeros(len(values))
        mse_acc = np.zeros((len(values), 3))
        for idx, (view, gt) in enumerate(dataset.entries):
            stack = mc_sample(mc_model, view, m_max, mix_seed(seed, idx))
            for vi, mval in enumerate(values):
                unc, mse = _stack_stats(stack.samples[: int(mval)], gt.data)
                unc_acc[vi] += unc
                mse_acc[vi] += mse
        for vi, mval in enumerate(values):
            rows.append({"value": int(mval),
                         "avg_uncertainty": unc_acc[vi] / n,
                         "psnr_avg": _psnr_avg(mse_acc[vi] / n)})

    elif axis == "ensemble_size":
        if ensemble is None:
            raise ValueError("ensemble_size study needs the ensemble")
        if int(values[-1]) > ensemble.k:
            raise ValueError(
                f"ensemble_size values reach {values[-1]} but only {ensemble.k} members exist"
            )
        unc_acc = np.zeros(len(values))
        mse_acc = np.zeros((len(values), 3))
        for view, gt in dataset.entries:
            stack = ensemble_sample(ensemble, view)
            for vi, kval in enumerate(values):
                k = int(kval)
                if k == 1:
                    # single member: zero uncertainty by definition
                    d = (stack.samples[0].astype(np.float64) - gt.data.astype(np.float64)) * 0.5
                    unc_acc[vi] += 0.0
                    mse_acc[vi] += [float(np.mean(d[:, :, c] ** 2)) for c in range(3)]
                else:
                    unc, mse = _stack_stats(stack.samples[:k], gt.data)
                    unc_acc[vi] += unc
                    mse_acc[vi] += mse
        for vi, kval in enumerate(values):
            rows.append({"value": int(kval),
                         "avg_uncertainty": unc_acc[vi] / n,
                         "psnr_avg": _psnr_avg(mse_acc[vi] / n)})

    else:  # dropout_p
        if not models_by_p:
            raise ValueError("dropout_p study needs models_by_p: {p: trained model}")
        for p in values:
            model = models_by_p[p]
            unc_total = 0.0
            mse_total = np.zeros(3)
            for idx, (view, gt) in enumerate(dataset.entries):
                stack = mc_sample(model, view, m, mix_seed(seed, idx))
                unc, mse = _stack_stats(stack.samples, gt.data)
                unc_total += unc
                mse_total += mse
            rows.append({"value": float(p),
                         "avg_uncertainty": unc_total / n,
                         "psnr_avg": _psnr_avg(mse_total / n)})
    return rows
