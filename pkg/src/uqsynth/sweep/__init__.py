from .grid import GridSpec
from .stats import CorrelationReport, correlation_report, evaluate_models, pearson, psnr
from .runner import RECORD_FIELDS, SweepManifest, load_manifest, load_records, sweep
from .study import parameter_study
from .export import export_heatmaps, heatmap_grid

__all__ = [
    "GridSpec",
    "pearson",
    "psnr",
    "evaluate_models",
    "CorrelationReport",
    "correlation_report",
    "sweep",
    "SweepManifest",
    "load_manifest",
    "load_records",
    "RECORD_FIELDS",
    "parameter_study",
    "export_heatmaps",
    "heatmap_grid",
]
