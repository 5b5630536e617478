"""1-D regression demonstration: x*sin(x) with MC-Dropout vs a deep ensemble.

A small MLP (1 -> 64 -> 64 -> 1, ReLU) learns y = x*sin(x) + eps with
eps ~ N(0, noise_sigma^2). The MC variant has feature dropout before the
final layer; the ensemble trains ensemble_size members with no dropout on
per-member reshuffled data. Both produce a mean prediction and an
uncertainty envelope (population std) on a noise-free test grid.

Training details that matter for reproducing the numbers: inputs and
targets are standardized with training-set statistics (envelopes are
reported in original units); an "iteration" is one full-batch Adam step;
first-layer biases are initialized to spread the ReLU kinks uniformly
over the standardized input range, which stabilizes small-MLP fits across
seeds; the per-member data reshuffle is order-only (inert under
full-batch steps), so ensemble variety comes from initialization.
Results are reproducible from the root seed; CSV outputs are byte-stable.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._threads import single_thread_blas
from .autodiff import functional as F
from .autodiff.adam import Adam
from .autodiff.rng import STREAM_INIT, STREAM_MEMBER, STREAM_NOISE, STREAM_SHUFFLE, rng_stream
from .autodiff.tensor import Graph, Tensor, backward

HIDDEN = 64


@dataclass
class Demo1DConfig:
    n_train: int = 100
    n_test: int = 200
    noise_sigma: float = 0.1
    domain: tuple[float, float] = (0.0, 10.0)
    iterations: int = 1000
    lr: float = 0.001
    m: int = 100
    ensemble_size: int = 50
    seed: int = 0
    dropout_p: float = 0.05

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.n_train < 2:
            raise ValueError(f"n_train must be >= 2, got {self.n_train}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")


@dataclass
class EnvelopeResult:
    xs: np.ndarray    # test grid
    mean: np.ndarray  # predictions, original units
    std: np.ndarray   # uncertainty envelope, >= 0


def target_fn(x: np.ndarray) -> np.ndarray:
    return x * np.sin(x)


def make_synthetic(config: Demo1DConfig):
    """(x_train, y_train, x_test, y_test_clean); the test targets are noise-free."""
    lo, hi = config.domain
    rng_x = rng_stream(config.seed, STREAM_NOISE, 0)
    rng_e = rng_stream(config.seed, STREAM_NOISE, 1)
    x_train = rng_x.random(config.n_train) * (hi - lo) + lo
    y_train = target_fn(x_train) + rng_e.standard_normal(config.n_train) * config.noise_sigma
    x_test = np.linspace(lo, hi, config.n_test)
    return (x_train.astype(np.float64), y_train.astype(np.float64),
            x_test.astype(np.float64), target_fn(x_test))


class _Mlp:
    """1 -> HIDDEN -> HIDDEN -> 1 with optional dropout before the last layer."""

    def __init__(self, seed_path: tuple, dropout_p: float):
        rng = rng_stream(*seed_path)

        def he(shape, fan_in):
            lim = math.sqrt(6.0 / fan_in)
            return rng.uniform(-lim, lim, size=shape).astype(np.float32)

        w1 = he((1, HIDDEN), 1)
        # b1 = -w1*u places each unit's ReLU kink at u ~ U(-sqrt3, sqrt3),
        # covering the standardized input range
        kinks = rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=HIDDEN)
        b1 = (-w1[0] * kinks).astype(np.float32)
        self.dropout_p = dropout_p
        self.params = {
            "w1": Tensor(w1, requires_grad=True),
            "b1": Tensor(b1, requires_grad=True),
            "w2": Tensor(he((HIDDEN, HIDDEN), HIDDEN), requires_grad=True),
            "b2": Tensor(np.zeros(HIDDEN, np.float32), requires_grad=True),
            "w3": Tensor(he((HIDDEN, 1), HIDDEN), requires_grad=True),
            "b3": Tensor(np.zeros(1, np.float32), requires_grad=True),
        }

    def forward(self, g, x: Tensor, dropout_mode: str, rng=None) -> Tensor:
        p = self.params
        h = F.relu(g, F.dense(g, x, p["w1"], p["b1"]))
        h = F.relu(g, F.dense(g, h, p["w2"], p["b2"]))
        h = F.dropout_channels(g, h, self.dropout_p, dropout_mode, rng=rng)
        return F.dense(g, h, p["w3"], p["b3"])


def _train_mlp(mlp: _Mlp, xs: np.ndarray, ys: np.ndarray, config: Demo1DConfig,
               member: int, dropout_mode: str) -> None:
    n = xs.shape[0]
    opt = Adam(list(mlp.params.values()), lr=config.lr)
    drop = rng_stream(config.seed, STREAM_MEMBER, member)
    # per-member reshuffle of the training set (order-only under full batch)
    order = rng_stream(config.seed, STREAM_SHUFFLE, member).permutation(n)
    x = Tensor(xs[order].reshape(-1, 1))
    y = Tensor(ys[order].reshape(-1, 1))
    for _ in range(config.iterations):
        g = Graph()
        pred = mlp.forward(g, x, dropout_mode, rng=drop)
        loss = F.mse(g, pred, y)
        opt.zero_grad()
        backward(g, loss)
        opt.step()


def _predict(mlp: _Mlp, xs: np.ndarray, dropout_mode: str, rng=None) -> np.ndarray:
    out = mlp.forward(None, Tensor(xs.reshape(-1, 1)), dropout_mode, rng=rng)
    return out.data[:, 0].astype(np.float64)


def run_demo(config: Demo1DConfig, out_dir=None) -> dict:
    """Train both variants, build envelopes, optionally write CSVs.

    Returns {"mc_dropout": EnvelopeResult, "ensemble": EnvelopeResult,
    "diagnostics": {...}}; CSVs demo1d_mc_dropout.csv / demo1d_ensemble.csv
    have columns x,mean,std,method.
    """
    x_train, y_train, x_test, y_clean = make_synthetic(config)
    x_mu, x_sd = float(x_train.mean()), float(x_train.std())
    y_mu, y_sd = float(y_train.mean()), float(y_train.std())
    x_sd = x_sd or 1.0
    y_sd = y_sd or 1.0
    xs_n = ((x_train - x_mu) / x_sd).astype(np.float32)
    ys_n = ((y_train - y_mu) / y_sd).astype(np.float32)
    xt_n = ((x_test - x_mu) / x_sd).astype(np.float32)

    with single_thread_blas():
        # MC-Dropout variant
        mc = _Mlp((config.seed, STREAM_INIT, 0), config.dropout_p)
        _train_mlp(mc, xs_n, ys_n, config, member=0, dropout_mode="train")
        passes = np.stack([
            _predict(mc, xt_n, "mc_eval", rng=rng_stream(config.seed, STREAM_MEMBER, 0, i))
            for i in range(config.m)
        ])
        mc_mean_n = passes.mean(axis=0)
        mc_std_n = np.sqrt(np.mean((passes - mc_mean_n) ** 2, axis=0))

        # ensemble of independently initialized members, reshuffled data
        member_preds = []
        for k in range(config.ensemble_size):
            member = _Mlp((config.seed, STREAM_INIT, 1 + k), dropout_p=0.0)
            _train_mlp(member, xs_n, ys_n, config, member=1 + k, dropout_mode="off")
            member_preds.append(_predict(member, xt_n, "off"))
        member_preds = np.stack(member_preds)
        ens_mean_n = member_preds.mean(axis=0)
        ens_std_n = np.sqrt(np.mean((member_preds - ens_mean_n) ** 2, axis=0))

    results = {
        "mc_dropout": EnvelopeResult(
            xs=x_test, mean=mc_mean_n * y_sd + y_mu, std=mc_std_n * y_sd),
        "ensemble": EnvelopeResult(
            xs=x_test, mean=ens_mean_n * y_sd + y_mu, std=ens_std_n * y_sd),
    }

    # reported diagnostic: does MC uncertainty track local curvature |f''|?
    curvature = np.abs(2.0 * np.cos(x_test) - x_test * np.sin(x_test))
    cvar = curvature - curvature.mean()
    svar = results["mc_dropout"].std - results["mc_dropout"].std.mean()
    denom = math.sqrt(float(cvar @ cvar) * float(svar @ svar))
    results["diagnostics"] = {
        "rmse_mc": float(np.sqrt(np.mean((results["mc_dropout"].mean - y_clean) ** 2))),
        "rmse_ensemble": float(np.sqrt(np.mean((results["ensemble"].mean - y_clean) ** 2))),
        "curvature_std_corr": float((cvar @ svar) / denom) if denom > 0 else 0.0,
    }

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for method in ("mc_dropout", "ensemble"):
            env = results[method]
            with open(out_dir / f"demo1d_{method}.csv", "w", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(["x", "mean", "std", "method"])
                for x, mu, sd in zip(env.xs, env.mean, env.std):
                    writer.writerow([repr(float(x)), repr(float(mu)), repr(float(sd)),
                                     method])
    return results
