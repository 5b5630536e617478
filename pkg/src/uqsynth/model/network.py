"""The view-conditioned synthesis network.

Normalized (theta, phi) pass through a fully connected stack, reshape to a
4x4 latent image, then residual upsampling blocks double the resolution
until the target size; a final 3x3 convolution plus tanh yields the RGB
image in [-1, 1].

Each residual block:
    main: x2 nearest upsample -> conv3x3 -> batch-norm -> ReLU ->
          channel dropout(eta) -> conv3x3 -> batch-norm
    skip: the same upsampled tensor -> conv1x1
    out:  ReLU(main + skip)
"""

import numpy as np

from ..autodiff import functional as F
from ..autodiff.rng import STREAM_INIT, rng_stream
from ..autodiff.tensor import Graph, Tensor
from ..images import RgbImage
from ..render.view import ViewPoint
from .config import ModelConfig

DROPOUT_MODES = ("train", "mc_eval", "off")


def normalize_view(view: ViewPoint) -> np.ndarray:
    """(theta, phi) -> (theta/180 - 1, phi/90), both in [-1, 1]."""
    return np.array([view.theta / 180.0 - 1.0, view.phi / 90.0], dtype=np.float32)


def _he_uniform(rng, shape, fan_in):
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(np.float32)


def _xavier_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(np.float32)


class SynthesisModel:
    """Parameter store plus the forward graph builder."""

    def __init__(self, config: ModelConfig, params: dict[str, Tensor],
                 bn_states: dict[str, F.BatchNormState]):
        self.config = config
        self.params = params
        self.bn_states = bn_states

    # -- construction -------------------------------------------------

    @staticmethod
    def build(config: ModelConfig) -> "SynthesisModel":
        rng = rng_stream(config.seed, STREAM_INIT)
        params: dict[str, Tensor] = {}
        bn_states: dict[str, F.BatchNormState] = {}

        def param(name, data):
            params[name] = Tensor(data, requires_grad=True, name=name)

        widths = (2,) + config.fc_widths + (config.base_channels * 16,)
        for i, (a, b) in enumerate(zip(widths, widths[1:])):
            param(f"fc{i}.w", _he_uniform(rng, (a, b), a))
            param(f"fc{i}.b", np.zeros(b, dtype=np.float32))

        chans = config.channel_schedule()
        for k, (cin, cout) in enumerate(zip(chans, chans[1:])):
            param(f"block{k}.conv1.w", _he_uniform(rng, (cout, cin, 3, 3), cin * 9))
            param(f"block{k}.conv1.b", np.zeros(cout, dtype=np.float32))
            param(f"block{k}.bn1.gamma", np.ones(cout, dtype=np.float32))
            param(f"block{k}.bn1.beta", np.zeros(cout, dtype=np.float32))
            param(f"block{k}.conv2.w", _he_uniform(rng, (cout, cout, 3, 3), cout * 9))
            param(f"block{k}.conv2.b", np.zeros(cout, dtype=np.float32))
            param(f"block{k}.bn2.gamma", np.ones(cout, dtype=np.float32))
            param(f"block{k}.bn2.beta", np.zeros(cout, dtype=np.float32))
            param(f"block{k}.skip.w", _he_uniform(rng, (cout, cin, 1, 1), cin))
            param(f"block{k}.skip.b", np.zeros(cout, dtype=np.float32))
            bn_states[f"block{k}.bn1"] = F.BatchNormState(cout)
            bn_states[f"block{k}.bn2"] = F.BatchNormState(cout)

        c_last = chans[-1]
        param("out.w", _xavier_uniform(rng, (3, c_last, 3, 3), c_last * 9, 3))
        param("out.b", np.zeros(3, dtype=np.float32))
        return SynthesisModel(config, params, bn_states)

    # -- forward ------------------------------------------------------

    def forward(self, views_norm: Tensor, graph: Graph | None = None,
                dropout_mode: str = "off", bn_mode: str = "eval",
                rng=None, rngs=None) -> Tensor:
        """(N, 2) normalized views -> (N, 3, R, R) image batch."""
        if dropout_mode not in DROPOUT_MODES:
            raise ValueError(f"dropout_mode must be one of {DROPOUT_MODES}")
        cfg = self.config
        p = self.params
        g = graph

        h = views_norm
        n_fc = len(cfg.fc_widths) + 1
        for i in range(n_fc):
            h = F.relu(g, F.dense(g, h, p[f"fc{i}.w"], p[f"fc{i}.b"]))
        n = h.data.shape[0]
        h = F.reshape(g, h, (n, cfg.base_channels, 4, 4))

        chans = cfg.channel_schedule()
        for k in range(cfg.n_res_blocks):
            up = F.upsample_nearest2(g, h)
            main = F.conv2d(g, up, p[f"block{k}.conv1.w"], p[f"block{k}.conv1.b"])
            main = F.batch_norm2d(g, main, p[f"block{k}.bn1.gamma"],
                                  p[f"block{k}.bn1.beta"],
                                  self.bn_states[f"block{k}.bn1"], bn_mode)
            main = F.relu(g, main)
            main = F.dropout_channels(g, main, cfg.dropout_p, dropout_mode,
                                      rng=rng, rngs=rngs)
            main = F.conv2d(g, main, p[f"block{k}.conv2.w"], p[f"block{k}.conv2.b"])
            main = F.batch_norm2d(g, main, p[f"block{k}.bn2.gamma"],
                                  p[f"block{k}.bn2.beta"],
                                  self.bn_states[f"block{k}.bn2"], bn_mode)
            skip = F.conv2d(g, up, p[f"block{k}.skip.w"], p[f"block{k}.skip.b"])
            h = F.relu(g, F.add(g, main, skip))

        out = F.conv2d(g, h, p["out.w"], p["out.b"])
        return F.tanh(g, out)

    def predict(self, view: ViewPoint, dropout_mode: str = "off", rng=None) -> RgbImage:
        """Single-view inference; batch-norm in eval mode.

        off mode is deterministic; mc_eval draws dropout masks from rng.
        """
        if dropout_mode == "mc_eval" and rng is None:
            raise ValueError("mc_eval prediction needs an rng")
        x = Tensor(normalize_view(view).reshape(1, 2))
        out = self.forward(x, graph=None, dropout_mode=dropout_mode,
                           bn_mode="eval", rng=rng)
        return RgbImage.from_chw(out.data[0])

    # -- parameter access ---------------------------------------------

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def state_arrays(self) -> dict[str, np.ndarray]:
        """All persistent arrays: parameters plus batch-norm buffers."""
        out = {name: t.data for name, t in self.params.items()}
        for name, st in self.bn_states.items():
            out[f"{name}.running_mean"] = st.running_mean
            out[f"{name}.running_var"] = st.running_var
        return out

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, t in self.params.items():
            t.data[...] = arrays[name]
        for name, st in self.bn_states.items():
            st.running_mean[...] = arrays[f"{name}.running_mean"]
            st.running_var[...] = arrays[f"{name}.running_var"]
