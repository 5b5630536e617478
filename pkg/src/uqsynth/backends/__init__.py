"""Hot-kernel backends: compiled Cython if available, numpy otherwise.

The two backends implement identical float32 arithmetic (same expression
order, compiled without -ffast-math), so results match bit-for-bit; the
compiled path is just faster. Selection happens once at import:

    UQSYNTH_BACKEND=python   force the numpy fallback
    UQSYNTH_BACKEND=cython   require the compiled kernels (ImportError if absent)

otherwise the compiled kernels are used when importable.

Kernels:
    im2col(xp, kh, kw)            gather padded NCHW into a (N, C*kh*kw, H*W) matrix
    col2im(cols, N, C, Hp, Wp, kh, kw)   the adjoint scatter-add
    raycast(...)                  front-to-back compositing ray march
"""

import os

from . import numpy_impl

_requested = os.environ.get("UQSYNTH_BACKEND", "").strip().lower()
if _requested not in ("", "python", "cython"):
    raise RuntimeError(f"UQSYNTH_BACKEND must be 'python' or 'cython', got {_requested!r}")

_cy = None
if _requested in ("", "cython"):
    try:
        from . import _conv_cy, _render_cy  # noqa: F401

        _cy = (_conv_cy, _render_cy)
    except ImportError:
        if _requested == "cython":
            raise

if _cy is not None:
    BACKEND = "cython"
    im2col = _cy[0].im2col
    col2im = _cy[0].col2im
    conv_forward = _cy[0].conv_forward
    conv_backward = _cy[0].conv_backward
    raycast = _cy[1].raycast
else:
    BACKEND = "python"
    im2col = numpy_impl.im2col
    col2im = numpy_impl.col2im
    conv_forward = numpy_impl.conv_forward
    conv_backward = numpy_impl.conv_backward
    raycast = numpy_impl.raycast

__all__ = [
    "BACKEND",
    "im2col",
    "col2im",
    "conv_forward",
    "conv_backward",
    "raycast",
    "numpy_impl",
]
