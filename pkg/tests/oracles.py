"""Independent oracles used by the tests.

These intentionally avoid the library's own code paths: plain loops and
float64, so a bug in an op cannot hide in its own test.
"""

import numpy as np


def finite_difference_grads(f, params: list[np.ndarray], h: float = 1e-3):
    """Central finite differences of scalar f() w.r.t. every parameter entry.

    f re-evaluates the full forward pass (ideally a float64 replica of the
    op under test, so FD noise stays far below the 1e-3 gate); params are
    mutated in place and restored. The divisor is the actually realized
    step (f32 storage may round p +/- h), keeping the estimate unbiased.
    Returns one gradient array per parameter.
    """
    grads = []
    for p in params:
        g = np.zeros_like(p, dtype=np.float64)
        flat = p.reshape(-1)
        gf = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            hi = float(flat[i])
            fp = f()
            flat[i] = orig - h
            lo = float(flat[i])
            fm = f()
            flat[i] = orig
            gf[i] = (fp - fm) / (hi - lo)
        grads.append(g)
    return grads


def relative_errors(analytic: np.ndarray, numeric: np.ndarray,
                    floor: float = 1e-4) -> np.ndarray:
    """Elementwise |a-n| / max(|a|, |n|, floor)."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)


def conv2d_naive(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Nested-loop stride-1 same-padding convolution, float64."""
    n, c, h, wd = x.shape
    cout, cin, kh, kw = w.shape
    assert cin == c
    ph, pw = kh // 2, kw // 2
    out = np.zeros((n, cout, h, wd), dtype=np.float64)
    for ni in range(n):
        for oc in range(cout):
            for y in range(h):
                for xx in range(wd):
                    acc = float(b[oc])
                    for ic in range(c):
                        for ky in range(kh):
                            for kx in range(kw):
                                yy = y + ky - ph
                                xs = xx + kx - pw
                                if 0 <= yy < h and 0 <= xs < wd:
                                    acc += float(x[ni, ic, yy, xs]) * float(
                                        w[oc, ic, ky, kx]
                                    )
                    out[ni, oc, y, xx] = acc
    return out


def mlp_forward_naive(x: np.ndarray, layers: list[tuple[np.ndarray, np.ndarray]],
                      final_linear: bool = True) -> np.ndarray:
    """Plain-loop dense/ReLU stack: hidden layers ReLU, last layer linear."""
    h = x.astype(np.float64)
    for li, (w, b) in enumerate(layers):
        h = h @ w.astype(np.float64) + b.astype(np.float64)
        if li < len(layers) - 1 or not final_linear:
            h = np.maximum(h, 0.0)
    return h


def bundle_stats_naive(samples: np.ndarray, gt: np.ndarray | None = None) -> dict:
    """Flat-loop per-pixel mean / population std / abs-error stats, float64."""
    m, hh, ww, cc = samples.shape
    mean = np.zeros((hh, ww, cc))
    for s in samples:
        mean += s
    mean /= m
    var = np.zeros_like(mean)
    for s in samples:
        var += (s - mean) ** 2
    std = np.sqrt(var / m)
    out = {
        "mean": mean,
        "channel_uncertainty": np.stack([std[:, :, c] for c in range(cc)]),
    }
    out["combined_uncertainty"] = sum(out["channel_uncertainty"][c] for c in range(cc))
    if gt is not None:
        errs = np.abs(samples.astype(np.float64) - gt.astype(np.float64))
        emean = errs.mean(axis=0)
        estd = np.sqrt(((errs - emean) ** 2).mean(axis=0))
        out["channel_error"] = np.stack([emean[:, :, c] for c in range(cc)])
        out["combined_error"] = sum(out["channel_error"][c] for c in range(cc))
        out["channel_error_std"] = np.stack([estd[:, :, c] for c in range(cc)])
        out["combined_error_std"] = sum(out["channel_error_std"][c] for c in range(cc))
    return out


def batch_norm_train_naive(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray,
                           eps: float = 1e-5) -> np.ndarray:
    """float64 batch norm with batch statistics (population variance)."""
    x = x.astype(np.float64)
    mean = x.mean(axis=(0, 2, 3), keepdims=True)
    var = ((x - mean) ** 2).mean(axis=(0, 2, 3), keepdims=True)
    xhat = (x - mean) / np.sqrt(var + eps)
    c = x.shape[1]
    return xhat * gamma.astype(np.float64).reshape(1, c, 1, 1) + beta.astype(
        np.float64
    ).reshape(1, c, 1, 1)


def upsample2_naive(x: np.ndarray) -> np.ndarray:
    return x.astype(np.float64).repeat(2, axis=2).repeat(2, axis=3)


def pearson_naive(xs, ys) -> float:
    """Direct formula evaluation in float64."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    mx, my = x.mean(), y.mean()
    cov = ((x - mx) * (y - my)).sum()
    return float(cov / np.sqrt(((x - mx) ** 2).sum() * ((y - my) ** 2).sum()))


def _conv64_fast(x, w, b):
    """Vectorized same-pad conv in float64 (einsum over a strided view)."""
    n, c, h, wd = x.shape
    cout, cin, kh, kw = w.shape
    ph, pw = kh // 2, kw // 2
    xp = np.zeros((n, c, h + 2 * ph, wd + 2 * pw))
    xp[:, :, ph : ph + h, pw : pw + wd] = x
    sn, sc, sh, sw = xp.strides
    view = np.lib.stride_tricks.as_strided(
        xp, (n, c, kh, kw, h, wd), (sn, sc, sh, sw, sh, sw)
    )
    return np.einsum("ncklhw,ockl->nohw", view, w) + b.reshape(1, -1, 1, 1)


def synthesis_replica_f64(model, x64: np.ndarray,
                          collect_preacts: list | None = None,
                          bn_mode: str = "train") -> np.ndarray:
    """Independent float64 re-implementation of the synthesis forward pass
    (dropout off; batch norm from batch statistics or the stored running
    stats). Optionally collects every ReLU pre-activation so callers can
    check the activation pattern is stable."""
    cfg = model.config
    p = {k: t.data.astype(np.float64) for k, t in model.params.items()}

    def relu(a):
        if collect_preacts is not None:
            collect_preacts.append(a)
        return np.maximum(a, 0.0)

    def bn(a, gamma, beta, state, eps=1e-5):
        c = a.shape[1]
        if bn_mode == "train":
            mean = a.mean(axis=(0, 2, 3), keepdims=True)
            var = ((a - mean) ** 2).mean(axis=(0, 2, 3), keepdims=True)
        else:
            mean = state.running_mean.astype(np.float64).reshape(1, c, 1, 1)
            var = state.running_var.astype(np.float64).reshape(1, c, 1, 1)
        return (a - mean) / np.sqrt(var + eps) * gamma.reshape(1, c, 1, 1) + beta.reshape(
            1, c, 1, 1
        )

    h = x64
    for i in range(len(cfg.fc_widths) + 1):
        h = relu(h @ p[f"fc{i}.w"] + p[f"fc{i}.b"])
    h = h.reshape(h.shape[0], cfg.base_channels, 4, 4)
    for k in range(cfg.n_res_blocks):
        up = h.repeat(2, axis=2).repeat(2, axis=3)
        main = _conv64_fast(up, p[f"block{k}.conv1.w"], p[f"block{k}.conv1.b"])
        main = relu(bn(main, p[f"block{k}.bn1.gamma"], p[f"block{k}.bn1.beta"],
                       model.bn_states[f"block{k}.bn1"]))
        main = _conv64_fast(main, p[f"block{k}.conv2.w"], p[f"block{k}.conv2.b"])
        main = bn(main, p[f"block{k}.bn2.gamma"], p[f"block{k}.bn2.beta"],
                  model.bn_states[f"block{k}.bn2"])
        skip = _conv64_fast(up, p[f"block{k}.skip.w"], p[f"block{k}.skip.b"])
        h = relu(main + skip)
    return np.tanh(_conv64_fast(h, p["out.w"], p["out.b"]))
