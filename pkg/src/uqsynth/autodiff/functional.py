"""Layer ops. Each op takes the recording graph as its first argument.

Pass graph=None to run forward-only (no tape, no backward); this is the
inference fast path. All ops are float32 and deterministic given their
inputs and RNG state.

Conventions:
    dense      x: (N, in) @ w: (in, out) + b: (out,)
    conv2d     x: (N, C, H, W), w: (Cout, Cin, kh, kw), stride 1, zero
               padding to "same" spatial size (odd kernels only)
    batch_norm x: (N, C, H, W), per-channel affine, running stats in eval
    dropout_channels   drops whole channels per sample (2-D dropout); for
               (N, C) inputs this degenerates to feature dropout
"""

import numpy as np

from .. import backends
from .tensor import Graph, ShapeError, Tensor


def _record(g, op, inputs, out, backward_fn):
    if g is not None:
        g.record(op, inputs, out, backward_fn)
    return out


# ---------------------------------------------------------------------------
# elementwise and structural ops


def identity(g: Graph | None, x: Tensor) -> Tensor:
    out = Tensor(x.data.copy())
    return _record(g, "identity", [x], out, lambda go: [(x, go)])


def add(g, a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"add: shapes {a.data.shape} and {b.data.shape} differ")
    out = Tensor(a.data + b.data)
    return _record(g, "add", [a, b], out, lambda go: [(a, go), (b, go)])


def sub(g, a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"sub: shapes {a.data.shape} and {b.data.shape} differ")
    out = Tensor(a.data - b.data)
    return _record(g, "sub", [a, b], out, lambda go: [(a, go), (b, -go)])


def mul(g, a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"mul: shapes {a.data.shape} and {b.data.shape} differ")
    out = Tensor(a.data * b.data)
    return _record(g, "mul", [a, b], out, lambda go: [(a, go * b.data), (b, go * a.data)])


def scale(g, x: Tensor, c: float) -> Tensor:
    c = np.float32(c)
    out = Tensor(x.data * c)
    return _record(g, "scale", [x], out, lambda go: [(x, go * c)])


def add_const(g, x: Tensor, c: float) -> Tensor:
    out = Tensor(x.data + np.float32(c))
    return _record(g, "add_const", [x], out, lambda go: [(x, go)])


def square(g, x: Tensor) -> Tensor:
    out = Tensor(x.data * x.data)
    return _record(g, "square", [x], out, lambda go: [(x, go * (2.0 * x.data))])


def abs_(g, x: Tensor) -> Tensor:
    out = Tensor(np.abs(x.data))
    return _record(g, "abs", [x], out, lambda go: [(x, go * np.sign(x.data))])


def relu(g, x: Tensor) -> Tensor:
    out = Tensor(np.maximum(x.data, np.float32(0.0)))

    def bw(go):
        return [(x, go * (x.data > 0))]

    return _record(g, "relu", [x], out, bw)


def tanh(g, x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    out = Tensor(y)
    return _record(g, "tanh", [x], out, lambda go: [(x, go * (np.float32(1.0) - y * y))])


def reshape(g, x: Tensor, shape) -> Tensor:
    out = Tensor(x.data.reshape(shape))

    def bw(go):
        return [(x, go.reshape(x.data.shape))]

    return _record(g, "reshape", [x], out, bw)


def sum_all(g, x: Tensor) -> Tensor:
    out = Tensor(np.sum(x.data, dtype=np.float32))

    def bw(go):
        return [(x, np.broadcast_to(go.reshape(()), x.data.shape).astype(np.float32))]

    return _record(g, "sum_all", [x], out, bw)


def mean_all(g, x: Tensor) -> Tensor:
    n = x.data.size
    out = Tensor(np.sum(x.data, dtype=np.float32) / np.float32(n))

    def bw(go):
        gval = (go.reshape(()) / np.float32(n)).astype(np.float32)
        return [(x, np.broadcast_to(gval, x.data.shape).astype(np.float32))]

    return _record(g, "mean_all", [x], out, bw)


def mse(g, pred: Tensor, target: Tensor) -> Tensor:
    """Mean over all elements of squared difference."""
    if pred.data.shape != target.data.shape:
        raise ShapeError(f"mse: shapes {pred.data.shape} and {target.data.shape} differ")
    d = sub(g, pred, target)
    return mean_all(g, square(g, d))


# ---------------------------------------------------------------------------
# dense / conv / upsample / batch-norm / dropout


def dense(g, x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    if x.data.ndim != 2 or w.data.ndim != 2 or x.data.shape[1] != w.data.shape[0]:
        raise ShapeError(
            f"dense: x {x.data.shape} incompatible with w {w.data.shape}"
        )
    if b.data.shape != (w.data.shape[1],):
        raise ShapeError(f"dense: bias {b.data.shape} must be ({w.data.shape[1]},)")
    out = Tensor(x.data @ w.data + b.data)

    def bw(go):
        return [
            (x, go @ w.data.T),
            (w, x.data.T @ go),
            (b, go.sum(axis=0)),
        ]

    return _record(g, "dense", [x, w, b], out, bw)


def conv2d(g, x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """3x3/1x1-style convolution, stride 1, zero-padded to same spatial size."""
    if x.data.ndim != 4 or w.data.ndim != 4:
        raise ShapeError("conv2d: x must be NCHW and w must be (Cout, Cin, kh, kw)")
    n, c, h, wdt = x.data.shape
    cout, cin, kh, kw = w.data.shape
    if cin != c:
        raise ShapeError(f"conv2d: input has {c} channels but kernel expects {cin}")
    if kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError("conv2d: only odd kernel sizes supported (same padding)")
    if b.data.shape != (cout,):
        raise ShapeError(f"conv2d: bias {b.data.shape} must be ({cout},)")
    ph, pw = kh // 2, kw // 2
    if ph == 0 and pw == 0:
        xp = x.data
    else:
        xp = np.zeros((n, c, h + 2 * ph, wdt + 2 * pw), dtype=np.float32)
        xp[:, :, ph : ph + h, pw : pw + wdt] = x.data
    wm = w.data.reshape(cout, c * kh * kw)
    out_nchw = backends.conv_forward(xp, wm, kh, kw)
    out_nchw += b.data.reshape(1, cout, 1, 1)
    out = Tensor(out_nchw)

    def bw(go):
        dxp, dw, db = backends.conv_backward(xp, wm, np.ascontiguousarray(go), kh, kw)
        if ph or pw:
            dx = np.ascontiguousarray(dxp[:, :, ph : ph + h, pw : pw + wdt])
        else:
            dx = dxp
        return [(x, dx), (w, dw.reshape(w.data.shape)), (b, db)]

    return _record(g, "conv2d", [x, w, b], out, bw)


def upsample_nearest2(g, x: Tensor) -> Tensor:
    """Nearest-neighbour x2 upsampling of an NCHW tensor."""
    if x.data.ndim != 4:
        raise ShapeError("upsample_nearest2: input must be NCHW")
    out = Tensor(x.data.repeat(2, axis=2).repeat(2, axis=3))
    n, c, h, w = x.data.shape

    def bw(go):
        return [(x, go.reshape(n, c, h, 2, w, 2).sum(axis=(3, 5)))]

    return _record(g, "upsample_nearest2", [x], out, bw)


class BatchNormState:
    """Per-channel running statistics for batch_norm2d in eval mode."""

    def __init__(self, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        self.running_mean = np.zeros(channels, dtype=np.float32)
        self.running_var = np.ones(channels, dtype=np.float32)
        self.momentum = momentum
        self.eps = eps


def batch_norm2d(g, x: Tensor, gamma: Tensor, beta: Tensor, state: BatchNormState,
                 mode: str) -> Tensor:
    """Batch norm over (N, H, W) per channel.

    train mode normalizes with batch statistics (population variance) and
    updates the running stats; eval mode uses the running stats and is
    deterministic.
    """
    if x.data.ndim != 4:
        raise ShapeError("batch_norm2d: input must be NCHW")
    c = x.data.shape[1]
    if gamma.data.shape != (c,) or beta.data.shape != (c,):
        raise ShapeError(f"batch_norm2d: affine params must have shape ({c},)")
    if mode not in ("train", "eval"):
        raise ValueError(f"batch_norm2d: unknown mode {mode!r}")
    eps = np.float32(state.eps)

    if mode == "train":
        m = x.data.shape[0] * x.data.shape[2] * x.data.shape[3]
        mean = x.data.mean(axis=(0, 2, 3), dtype=np.float32)
        centered = x.data - mean.reshape(1, c, 1, 1)
        var = np.mean(centered * centered, axis=(0, 2, 3), dtype=np.float32)
        inv_std = np.float32(1.0) / np.sqrt(var + eps)
        xhat = centered * inv_std.reshape(1, c, 1, 1)
        mom = np.float32(state.momentum)
        state.running_mean += mom * (mean - state.running_mean)
        state.running_var += mom * (var - state.running_var)
        out = Tensor(xhat * gamma.data.reshape(1, c, 1, 1) + beta.data.reshape(1, c, 1, 1))

        def bw(go):
            dgamma = (go * xhat).sum(axis=(0, 2, 3))
            dbeta = go.sum(axis=(0, 2, 3))
            dxhat = go * gamma.data.reshape(1, c, 1, 1)
            # standard batch-norm backward, fused form
            sum_dxhat = dxhat.sum(axis=(0, 2, 3)).reshape(1, c, 1, 1)
            sum_dxhat_xhat = (dxhat * xhat).sum(axis=(0, 2, 3)).reshape(1, c, 1, 1)
            dx = (inv_std.reshape(1, c, 1, 1) / np.float32(m)) * (
                np.float32(m) * dxhat - sum_dxhat - xhat * sum_dxhat_xhat
            )
            return [(x, dx.astype(np.float32)), (gamma, dgamma), (beta, dbeta)]

        return _record(g, "batch_norm2d[train]", [x, gamma, beta], out, bw)

    inv_std = np.float32(1.0) / np.sqrt(state.running_var + eps)
    scale_c = (gamma.data * inv_std).reshape(1, c, 1, 1)
    shift_c = (beta.data - gamma.data * state.running_mean * inv_std).reshape(1, c, 1, 1)
    out = Tensor(x.data * scale_c + shift_c)

    def bw_eval(go):
        xhat = (x.data - state.running_mean.reshape(1, c, 1, 1)) * inv_std.reshape(1, c, 1, 1)
        return [
            (x, go * scale_c),
            (gamma, (go * xhat).sum(axis=(0, 2, 3))),
            (beta, go.sum(axis=(0, 2, 3))),
        ]

    return _record(g, "batch_norm2d[eval]", [x, gamma, beta], out, bw_eval)


def dropout_channels(g, x: Tensor, p: float, mode: str, rng=None, rngs=None) -> Tensor:
    """Inverted channel dropout.

    In "train" and "mc_eval" modes each channel of each sample is zeroed
    independently with probability p and survivors scale by 1/(1-p); "off"
    is the identity. mc_eval is the stochastic inference mode. For NCHW
    inputs whole 2-D channels drop; for (N, C) inputs single features drop.

    One generator draws a (N, C) mask; alternatively ``rngs`` supplies one
    generator per sample row (used for documented per-pass MC streams).
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    if mode not in ("train", "mc_eval", "off"):
        raise ValueError(f"dropout mode must be train|mc_eval|off, got {mode!r}")
    if mode == "off" or p == 0.0:
        return x
    n, c = x.data.shape[0], x.data.shape[1]
    if rngs is not None:
        if len(rngs) != n:
            raise ValueError(f"need {n} per-row generators, got {len(rngs)}")
        keep = np.stack([r.random(c) >= p for r in rngs])
    elif rng is not None:
        keep = rng.random((n, c)) >= p
    else:
        raise ValueError("dropout in stochastic mode requires rng or rngs")
    mask = keep.astype(np.float32) / np.float32(1.0 - p)
    mask = mask.reshape((n, c) + (1,) * (x.data.ndim - 2))
    out = Tensor(x.data * mask)
    return _record(g, "dropout_channels", [x], out, lambda go: [(x, go * mask)])
