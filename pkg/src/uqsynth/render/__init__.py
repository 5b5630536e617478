from .view import CameraBasis, ViewPoint, camera_from_view
from .transfer import TransferFunction, default_transfer_function
from .volume import ScalarVolume, builtin_volume, load_raw_volume
from .raycast import render
from .dataset import Dataset, generate_dataset, load_dataset, save_dataset

__all__ = [
    "ViewPoint",
    "CameraBasis",
    "camera_from_view",
    "TransferFunction",
    "default_transfer_function",
    "ScalarVolume",
    "builtin_volume",
    "load_raw_volume",
    "render",
    "Dataset",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
]
