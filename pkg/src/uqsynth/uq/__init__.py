from .stacks import EnsembleSet, SampleStack, ensemble_sample, mc_sample
from .bundle import PredictionBundle, compute_bundle, load_bundle, save_bundle, uncertainty_only
from .sensitivity import SensitivityResult, sensitivity, sensitivity_ensemble, sensitivity_mc
from .colormap import apply_colormap, save_map_png

__all__ = [
    "SampleStack",
    "EnsembleSet",
    "mc_sample",
    "ensemble_sample",
    "PredictionBundle",
    "compute_bundle",
    "uncertainty_only",
    "save_bundle",
    "load_bundle",
    "SensitivityResult",
    "sensitivity",
    "sensitivity_mc",
    "sensitivity_ensemble",
    "apply_colormap",
    "save_map_png",
]
