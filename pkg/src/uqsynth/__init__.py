"""View-conditioned image synthesis with MC-Dropout and deep-ensemble uncertainty.

Subpackages:
    autodiff  - reverse-mode autodiff engine (f32) with the layer set the
                synthesis network needs, plus Adam
    backends  - compiled (Cython) vs pure-numpy hot kernels, chosen at import
    render    - volume ray caster producing ground-truth images and datasets
    model     - the view -> image synthesis network, training, checkpoints
    uq        - sample stacks, per-pixel uncertainty/error bundles, sensitivity
    sweep     - dense view-space sweeps, heatmaps, correlations, PSNR tables
    demo1d    - the 1-D x*sin(x) regression demonstration
    service   - CLI entry points and the read-only query API for the explorer
"""

__version__ = "0.1.0"
