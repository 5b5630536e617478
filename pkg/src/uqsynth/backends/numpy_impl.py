"""Pure-numpy implementations of the hot kernels.

Kept in lockstep with the Cython versions: same loop structure and the
same float32 expression order, so outputs are bit-identical across
backends (verified by tests/test_backends.py).
"""

import numpy as np

_F32_1 = np.float32(1.0)
_T_MIN = np.float32(1e-3)  # early ray termination at accumulated alpha 0.999


def im2col(xp: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """Gather sliding kh x kw windows of a padded (N,C,Hp,Wp) f32 array.

    Folded layout (C*kh*kw, N*H*W) with H = Hp-kh+1, W = Wp-kw+1, so that
    cols[(c*kh+ky)*kw+kx, n*(H*W)+h*W+w] == xp[n, c, h+ky, w+kx]; the
    convolution is then one large GEMM.
    """
    n, c, hp, wp = xp.shape
    h = hp - kh + 1
    w = wp - kw + 1
    sn, sc, sh, sw = xp.strides
    view = np.lib.stride_tricks.as_strided(
        xp, (c, kh, kw, n, h, w), (sc, sh, sw, sn, sh, sw)
    )
    return view.reshape(c * kh * kw, n * h * w)


def col2im(cols: np.ndarray, n: int, c: int, hp: int, wp: int, kh: int, kw: int) -> np.ndarray:
    """Adjoint of im2col: scatter-add folded columns back into the padded image."""
    h = hp - kh + 1
    w = wp - kw + 1
    out = np.zeros((n, c, hp, wp), dtype=np.float32)
    cols6 = cols.reshape(c, kh, kw, n, h, w)
    # (ky, kx) outer order matches the compiled kernel so per-element
    # accumulation order (and hence f32 rounding) is identical
    for ky in range(kh):
        for kx in range(kw):
            out[:, :, ky : ky + h, kx : kx + w] += cols6[:, ky, kx].transpose(1, 0, 2, 3)
    return out


def conv_forward(xp: np.ndarray, wm: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """Padded (N,C,Hp,Wp) x kernel matrix (Cout, C*kh*kw) -> (N,Cout,H,W).

    One folded GEMM; the compiled twin fuses im2col per sample instead
    (same math, different f32 summation grouping inside BLAS).
    """
    n, c, hp, wp = xp.shape
    h = hp - kh + 1
    w = wp - kw + 1
    cols = im2col(xp, kh, kw)
    out = wm @ cols
    return np.ascontiguousarray(
        out.reshape(wm.shape[0], n, h, w).transpose(1, 0, 2, 3)
    )


def conv_backward(xp: np.ndarray, wm: np.ndarray, go: np.ndarray,
                  kh: int, kw: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of conv_forward: (dxp, dw, db)."""
    n, c, hp, wp = xp.shape
    h = hp - kh + 1
    w = wp - kw + 1
    cout = wm.shape[0]
    cols = im2col(xp, kh, kw)
    go_folded = np.ascontiguousarray(go.transpose(1, 0, 2, 3).reshape(cout, n * h * w))
    dw = go_folded @ cols.T
    db = go_folded.sum(axis=1)
    dcols = wm.T @ go_folded
    dxp = col2im(np.ascontiguousarray(dcols), n, c, hp, wp, kh, kw)
    return dxp, dw, db


def raycast(
    grid: np.ndarray,       # (nz, ny, nx) f32 scalar field
    origins: np.ndarray,    # (P, 3) f32 ray origins, columns x,y,z (voxel units)
    direction: np.ndarray,  # (3,) f32 shared ray direction (orthographic)
    t0: np.ndarray,         # (P,) f32 entry parameter per ray
    nsteps: np.ndarray,     # (P,) int32 sample count per ray
    step: float,
    lut: np.ndarray,        # (L, 4) f32 rgba transfer-function table
    vmin: float,
    vscale: float,
) -> np.ndarray:
    """Front-to-back alpha compositing over black; returns (P, 3) f32 in [0,1]."""
    nz, ny, nx = grid.shape
    p = origins.shape[0]
    lutn = lut.shape[0]
    color = np.zeros((p, 3), dtype=np.float32)
    trans = np.ones(p, dtype=np.float32)
    alive = np.ones(p, dtype=bool)
    step = np.float32(step)
    vmin = np.float32(vmin)
    vscale = np.float32(vscale)
    dx, dy, dz = (np.float32(direction[0]), np.float32(direction[1]), np.float32(direction[2]))
    max_steps = int(nsteps.max()) if p else 0
    all_ids = np.arange(p)

    for k in range(max_steps):
        mask = alive & (k < nsteps)
        if not mask.any():
            break
        ids = all_ids[mask]
        t = t0[ids] + np.float32(k) * step
        x = origins[ids, 0] + t * dx
        y = origins[ids, 1] + t * dy
        z = origins[ids, 2] + t * dz

        ix = np.clip(np.floor(x).astype(np.int32), 0, nx - 2)
        iy = np.clip(np.floor(y).astype(np.int32), 0, ny - 2)
        iz = np.clip(np.floor(z).astype(np.int32), 0, nz - 2)
        fx = x - ix.astype(np.float32)
        fy = y - iy.astype(np.float32)
        fz = z - iz.astype(np.float32)

        c000 = grid[iz, iy, ix]
        c100 = grid[iz, iy, ix + 1]
        c010 = grid[iz, iy + 1, ix]
        c110 = grid[iz, iy + 1, ix + 1]
        c001 = grid[iz + 1, iy, ix]
        c101 = grid[iz + 1, iy, ix + 1]
        c011 = grid[iz + 1, iy + 1, ix]
        c111 = grid[iz + 1, iy + 1, ix + 1]
        c00 = c000 + fx * (c100 - c000)
        c10 = c010 + fx * (c110 - c010)
        c01 = c001 + fx * (c101 - c001)
        c11 = c011 + fx * (c111 - c011)
        c0 = c00 + fy * (c10 - c00)
        c1 = c01 + fy * (c11 - c01)
        val = c0 + fz * (c1 - c0)

        u = np.clip((val - vmin) * vscale, np.float32(0.0), _F32_1)
        s = u * np.float32(lutn - 1)
        i0 = np.clip(np.floor(s).astype(np.int32), 0, lutn - 2)
        wgt = s - i0.astype(np.float32)
        l0 = lut[i0]
        l1 = lut[i0 + 1]
        r = l0[:, 0] + wgt * (l1[:, 0] - l0[:, 0])
        g = l0[:, 1] + wgt * (l1[:, 1] - l0[:, 1])
        b = l0[:, 2] + wgt * (l1[:, 2] - l0[:, 2])
        a = l0[:, 3] + wgt * (l1[:, 3] - l0[:, 3])

        contrib = trans[ids] * a
        color[ids, 0] += contrib * r
        color[ids, 1] += contrib * g
        color[ids, 2] += contrib * b
        trans[ids] = trans[ids] * (_F32_1 - a)
        alive[ids] = trans[ids] > _T_MIN

    return color
