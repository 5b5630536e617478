"""Model checkpoints: config + parameters + batch-norm buffers (+ Adam state).

Built on the f32 container; save -> load -> predict is bit-exact.
"""

from ..autodiff.adam import Adam
from ..autodiff.container import ContainerError, read_container, write_container
from .config import ModelConfig
from .network import SynthesisModel


def save_checkpoint(model: SynthesisModel, path, metadata: dict | None = None,
                    optimizer: Adam | None = None) -> None:
    arrays = model.state_arrays()
    header = {
        "kind": "uqsynth-checkpoint",
        "config": model.config.to_jsonable(),
        "metadata": metadata or {},
    }
    if optimizer is not None:
        arrays.update(optimizer.state_arrays())
        header["optimizer"] = {
            "step_count": optimizer.step_count,
            "lr": optimizer.lr,
            "beta1": optimizer.beta1,
            "beta2": optimizer.beta2,
            "eps": optimizer.eps,
        }
    write_container(path, arrays, header)


def load_checkpoint(path) -> tuple[SynthesisModel, dict]:
    """Rebuild the model; returns (model, header). Raises ContainerError on
    corrupt files and ValueError if the parameter set does not match the
    config."""
    header, arrays = read_container(path)
    if header.get("kind") != "uqsynth-checkpoint":
        raise ContainerError(f"{path} is not a model checkpoint")
    config = ModelConfig.from_jsonable(header["config"])
    model = SynthesisModel.build(config)
    expected = set(model.state_arrays().keys())
    stored = {n for n in arrays if not n.startswith("adam.")}
    if expected != stored:
        missing = sorted(expected - stored)[:4]
        extra = sorted(stored - expected)[:4]
        raise ValueError(
            f"checkpoint parameters do not match config-derived set "
            f"(missing {missing}, unexpected {extra})"
        )
    model.load_state_arrays(arrays)
    return model, header


def load_optimizer(path, model: SynthesisModel) -> Adam | None:
    """Restore Adam state saved alongside the model, if any."""
    header, arrays = read_container(path)
    opt_info = header.get("optimizer")
    if opt_info is None:
        return None
    opt = Adam(model.parameters(), lr=opt_info["lr"], beta1=opt_info["beta1"],
               beta2=opt_info["beta2"], eps=opt_info["eps"])
    opt.load_state_arrays(arrays, opt_info["step_count"])
    return opt
