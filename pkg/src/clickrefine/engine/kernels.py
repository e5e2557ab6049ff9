"""Dense NCHW kernels: convolution family, attention, normalization, resampling.

All convolutions are cross-correlations (no kernel flip) over row-major
NCHW tensors.  im2col/col2im pairs share one cached index map per
geometry so the forward gather and the backward scatter are exact
adjoints of each other.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..errors import ShapeError
from . import core
from .core import Tensor, as_tensor, _make


def conv_out_size(size: int, k: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - k) // stride + 1


@lru_cache(maxsize=256)
def _im2col_indices(C: int, H: int, W: int, k: int, stride: int, padding: int):
    """Flat gather indices into the zero-padded (C, H+2p, W+2p) plane.

    Returns (indices with shape (C*k*k, Ho*Wo), padded H, padded W).
    """
    Ho = conv_out_size(H, k, stride, padding)
    Wo = conv_out_size(W, k, stride, padding)
    if Ho <= 0 or Wo <= 0:
        raise ShapeError(f"kernel {k}x{k} does not fit input {H}x{W} with padding {padding}")
    Hp, Wp = H + 2 * padding, W + 2 * padding
    c = np.repeat(np.arange(C), k * k)                      # (C*k*k,)
    ky = np.tile(np.repeat(np.arange(k), k), C)
    kx = np.tile(np.tile(np.arange(k), k), C)
    oy = stride * np.repeat(np.arange(Ho), Wo)              # (Ho*Wo,)
    ox = stride * np.tile(np.arange(Wo), Ho)
    rows = ky[:, None] + oy[None, :]
    cols = kx[:, None] + ox[None, :]
    flat = c[:, None] * (Hp * Wp) + rows * Wp + cols
    return flat.astype(np.int64), Hp, Wp


def _pad_nchw(x: np.ndarray, padding: int) -> np.ndarray:
    if padding == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))


def im2col(x: np.ndarray, k: int, stride: int, padding: int) -> np.ndarray:
    """(B,C,H,W) -> (B, C*k*k, Ho*Wo) patch matrix.

    Returned packed (C-contiguous) so downstream matmuls hit the same
    BLAS path regardless of how the patches were produced; the fractional
    sampling path relies on this for its zero-offset equality with conv2d.
    """
    B, C, H, W = x.shape
    flat, Hp, Wp = _im2col_indices(C, H, W, k, stride, padding)
    xp = _pad_nchw(x, padding).reshape(B, C * Hp * Wp)
    return np.ascontiguousarray(xp[:, flat])


def col2im(cols: np.ndarray, C: int, H: int, W: int, k: int, stride: int, padding: int) -> np.ndarray:
    """Adjoint of im2col: scatter-add patches back to (B,C,H,W)."""
    B = cols.shape[0]
    flat, Hp, Wp = _im2col_indices(C, H, W, k, stride, padding)
    buf = np.zeros((B, C * Hp * Wp), dtype=cols.dtype)
    np.add.at(buf, (slice(None), flat.ravel()), cols.reshape(B, -1))
    buf = buf.reshape(B, C, Hp, Wp)
    if padding:
        buf = buf[:, :, padding:-padding, padding:-padding]
    return np.ascontiguousarray(buf)


def conv2d(x, kernel, bias=None, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation of (B,C,H,W) with kernel (O,C,k,k) plus bias (O,)."""
    x, kernel = as_tensor(x), as_tensor(kernel)
    bias = as_tensor(bias) if bias is not None else None
    B, C, H, W = x.shape
    O, Ck, kh, kw = kernel.shape
    if kh != kw:
        raise ShapeError("only square kernels are supported")
    if Ck != C:
        raise ShapeError(f"kernel expects {Ck} input channels, got {C}")
    k = kh
    Ho = conv_out_size(H, k, stride, padding)
    Wo = conv_out_size(W, k, stride, padding)
    cols = im2col(x.data, k, stride, padding)               # (B, C*k*k, P)
    kmat = kernel.data.reshape(O, C * k * k)
    out = np.matmul(kmat, cols)                             # (B, O, P)
    if bias is not None:
        out = out + bias.data.reshape(1, O, 1)
    out = out.reshape(B, O, Ho, Wo)

    def backward(g):
        gflat = g.reshape(B, O, Ho * Wo)
        if kernel.requires_grad:
            gk = np.einsum("bop,bkp->ok", gflat, cols)
            kernel._accumulate(gk.reshape(kernel.shape))
        if bias is not None and bias.requires_grad:
            bias._accumulate(gflat.sum(axis=(0, 2)))
        if x.requires_grad:
            gcols = np.matmul(kmat.T, gflat)                # (B, C*k*k, P)
            x._accumulate(col2im(gcols, C, H, W, k, stride, padding))

    parents = (x, kernel) if bias is None else (x, kernel, bias)
    return _make(out, parents, backward, "conv2d")


def transposed_conv2d(x, kernel, stride: int = 1, padding: int = 0) -> Tensor:
    """Adjoint of ``conv2d`` with the same kernel/stride/padding.

    Maps (B,O,Ho,Wo) back to (B,C,H,W) with H = (Ho-1)*stride + k - 2*padding.
    """
    x, kernel = as_tensor(x), as_tensor(kernel)
    B, O, Ho, Wo = x.shape
    Ok, C, kh, kw = kernel.shape
    if Ok != O:
        raise ShapeError(f"kernel expects {Ok} input channels, got {O}")
    k = kh
    H = (Ho - 1) * stride + k - 2 * padding
    W = (Wo - 1) * stride + k - 2 * padding
    if H <= 0 or W <= 0:
        raise ShapeError("transposed conv output would be empty")
    kmat = kernel.data.reshape(O, C * k * k)
    xflat = x.data.reshape(B, O, Ho * Wo)
    cols = np.matmul(kmat.T, xflat)                         # (B, C*k*k, P)
    out = col2im(cols, C, H, W, k, stride, padding)

    def backward(g):
        gcols = im2col(g, k, stride, padding)               # (B, C*k*k, P)
        if x.requires_grad:
            gx = np.matmul(kmat, gcols)
            x._accumulate(gx.reshape(x.shape))
        if kernel.requires_grad:
            gk = np.einsum("bop,bkp->ok", xflat, gcols)
            kernel._accumulate(gk.reshape(kernel.shape))

    return _make(out, (x, kernel), backward, "transposed_conv2d")


def deformable_conv2d(x, kernel, offsets, bias=None, stride: int = 1,
                      padding: int | None = None) -> Tensor:
    """Cross-correlation whose taps sample at learned fractional positions.

    ``offsets`` carries 2 channels per tap in row-major tap order:
    channel 2t is the x (column) shift and 2t+1 the y (row) shift of tap t.
    Samples are read with bilinear interpolation; anything outside the
    unpadded image reads exactly zero.  With all-zero offsets the gathered
    patch matrix equals im2col's, so the result is bitwise equal to
    ``conv2d``.
    """
    x, kernel, offsets = as_tensor(x), as_tensor(kernel), as_tensor(offsets)
    bias = as_tensor(bias) if bias is not None else None
    B, C, H, W = x.shape
    O, Ck, k, k2 = kernel.shape
    if Ck != C:
        raise ShapeError(f"kernel expects {Ck} input channels, got {C}")
    if padding is None:
        padding = k // 2
    T = k * k
    if offsets.shape[1] != 2 * T:
        raise ShapeError(f"offsets must have {2 * T} channels, got {offsets.shape[1]}")
    Ho = conv_out_size(H, k, stride, padding)
    Wo = conv_out_size(W, k, stride, padding)
    if offsets.shape[2:] != (Ho, Wo):
        raise ShapeError(f"offsets spatial dims {offsets.shape[2:]} != output {(Ho, Wo)}")
    P = Ho * Wo

    # Base sampling grid per tap, in unpadded image coordinates.
    oy = (stride * np.repeat(np.arange(Ho), Wo) - padding).astype(x.dtype)
    ox = (stride * np.tile(np.arange(Wo), Ho) - padding).astype(x.dtype)
    ky = np.repeat(np.arange(k), k).astype(x.dtype)
    kx = np.tile(np.arange(k), k).astype(x.dtype)
    off = offsets.data.reshape(B, T, 2, P)
    py = (ky[None, :, None] + oy[None, None, :]) + off[:, :, 1, :]   # (B,T,P)
    px = (kx[None, :, None] + ox[None, None, :]) + off[:, :, 0, :]

    y0 = np.floor(py)
    x0 = np.floor(px)
    wy = py - y0
    wx = px - x0
    y0i = y0.astype(np.int64)
    x0i = x0.astype(np.int64)

    xflat = x.data.reshape(B, C, H * W)
    corner_vals = []
    corner_meta = []
    for dy, dx in ((0, 0), (0, 1), (1, 0), (1, 1)):
        yy = y0i + dy
        xx = x0i + dx
        valid = ((yy >= 0) & (yy < H) & (xx >= 0) & (xx < W)).astype(x.dtype)
        idx = np.clip(yy, 0, H - 1) * W + np.clip(xx, 0, W - 1)     # (B,T,P)
        gathered = np.take_along_axis(
            xflat, np.broadcast_to(idx.reshape(B, 1, T * P), (B, C, T * P)), axis=2
        ).reshape(B, C, T, P)
        corner_vals.append(gathered * valid[:, None, :, :])
        corner_meta.append((idx, valid))

    v00, v01, v10, v11 = corner_vals
    w00 = (1 - wy) * (1 - wx)
    w01 = (1 - wy) * wx
    w10 = wy * (1 - wx)
    w11 = wy * wx
    cols = (v00 * w00[:, None] + v01 * w01[:, None]
            + v10 * w10[:, None] + v11 * w11[:, None])              # (B,C,T,P)
    kmat = kernel.data.reshape(O, C * T)
    out = np.matmul(kmat, cols.reshape(B, C * T, P))
    if bias is not None:
        out = out + bias.data.reshape(1, O, 1)
    out = out.reshape(B, O, Ho, Wo)

    def backward(g):
        gflat = g.reshape(B, O, P)
        if kernel.requires_grad:
            gk = np.einsum("bop,bkp->ok", gflat, cols.reshape(B, C * T, P))
            kernel._accumulate(gk.reshape(kernel.shape))
        if bias is not None and bias.requires_grad:
            bias._accumulate(gflat.sum(axis=(0, 2)))
        need_x = x.requires_grad
        need_off = offsets.requires_grad
        if not (need_x or need_off):
            return
        gcols = np.matmul(kmat.T, gflat).reshape(B, C, T, P)
        weights = (w00, w01, w10, w11)
        if need_x:
            gx = np.zeros((B, C, H * W), dtype=x.data.dtype)
            bidx = np.arange(B)[:, None, None]
            cidx = np.arange(C)[None, :, None]
            for (idx, valid), w in zip(corner_meta, weights):
                contrib = gcols * (w * valid)[:, None, :, :]
                flat_idx = np.broadcast_to(idx[:, None, :, :], (B, C, T, P)).reshape(B, C, T * P)
                np.add.at(gx, (bidx, cidx, flat_idx), contrib.reshape(B, C, T * P))
            x._accumulate(gx.reshape(x.shape))
        if need_off:
            dv_dwx = ((v01 - v00) * (1 - wy)[:, None] + (v11 - v10) * wy[:, None])
            dv_dwy = ((v10 - v00) * (1 - wx)[:, None] + (v11 - v01) * wx[:, None])
            gpx = np.einsum("bctp,bctp->btp", gcols, dv_dwx)
            gpy = np.einsum("bctp,bctp->btp", gcols, dv_dwy)
            goff = np.stack([gpx, gpy], axis=2)                     # (B,T,2,P)
            offsets._accumulate(goff.reshape(offsets.shape))

    parents = (x, kernel, offsets) if bias is None else (x, kernel, offsets, bias)
    return _make(out, parents, backward, "deformable_conv2d")


def depthwise_conv2d(x, kernel, bias=None, stride: int = 1, padding: int = 0) -> Tensor:
    """Per-channel cross-correlation: kernel (C, k, k) filters channel c of
    (B, C, H, W) with its own k x k tap set.  The pointwise half of a
    separable block is just conv2d with a 1x1 kernel."""
    x, kernel = as_tensor(x), as_tensor(kernel)
    bias = as_tensor(bias) if bias is not None else None
    B, C, H, W = x.shape
    Ck, kh, kw = kernel.shape
    if Ck != C:
        raise ShapeError(f"kernel expects {Ck} channels, got {C}")
    if kh != kw:
        raise ShapeError("only square kernels are supported")
    k = kh
    Ho = conv_out_size(H, k, stride, padding)
    Wo = conv_out_size(W, k, stride, padding)
    cols = im2col(x.data, k, stride, padding).reshape(B, C, k * k, Ho * Wo)
    kmat = kernel.data.reshape(C, k * k)
    out = np.einsum("bckp,ck->bcp", cols, kmat)
    if bias is not None:
        out = out + bias.data.reshape(1, C, 1)
    out = out.reshape(B, C, Ho, Wo)

    def backward(g):
        gflat = g.reshape(B, C, Ho * Wo)
        if kernel.requires_grad:
            gk = np.einsum("bcp,bckp->ck", gflat, cols)
            kernel._accumulate(gk.reshape(kernel.shape))
        if bias is not None and bias.requires_grad:
            bias._accumulate(gflat.sum(axis=(0, 2)))
        if x.requires_grad:
            gcols = gflat[:, :, None, :] * kmat[None, :, :, None]
            x._accumulate(col2im(gcols.reshape(B, C * k * k, Ho * Wo),
                                 C, H, W, k, stride, padding))

    parents = (x, kernel) if bias is None else (x, kernel, bias)
    return _make(out, parents, backward, "depthwise_conv2d")


LAYER_NORM_EPS = 1e-6


def layer_norm(x, gain, shift, axis: int = -1) -> Tensor:
    """Zero-mean unit-variance over ``axis`` followed by the affine map.

    Fused into one tape node: the whole normalization is a handful of
    reductions, so building it from primitive ops costs more in node
    bookkeeping than in arithmetic.
    """
    x = as_tensor(x)
    gain, shift = as_tensor(gain), as_tensor(shift)
    ax = axis if axis >= 0 else x.ndim + axis
    xd = x.data
    mu = xd.mean(axis=ax, keepdims=True)
    xc = xd - mu
    var = (xc * xc).mean(axis=ax, keepdims=True)
    inv = np.power(var + LAYER_NORM_EPS, -0.5)
    xhat = xc * inv
    pshape = [1] * xd.ndim
    pshape[ax] = gain.data.shape[0]
    out = xhat * gain.data.reshape(pshape) + shift.data.reshape(pshape)
    reduce_axes = tuple(i for i in range(xd.ndim) if i != ax)

    def backward(g):
        if gain.requires_grad:
            gain._accumulate((g * xhat).sum(axis=reduce_axes))
        if shift.requires_grad:
            shift._accumulate(g.sum(axis=reduce_axes))
        if x.requires_grad:
            dxhat = g * gain.data.reshape(pshape)
            mean_d = dxhat.mean(axis=ax, keepdims=True)
            mean_dx = (dxhat * xhat).mean(axis=ax, keepdims=True)
            x._accumulate(inv * (dxhat - mean_d - xhat * mean_dx))

    return _make(out, (x, gain, shift), backward, "layer_norm")


def avg_pool2d(x, size: int = 2) -> Tensor:
    """Non-overlapping mean pooling; spatial dims must divide ``size``."""
    x = as_tensor(x)
    B, C, H, W = x.shape
    if H % size or W % size:
        raise ShapeError(f"pool size {size} does not divide {H}x{W}")
    Ho, Wo = H // size, W // size
    view = x.data.reshape(B, C, Ho, size, Wo, size)
    out = view.mean(axis=(3, 5))

    def backward(g):
        if x.requires_grad:
            gx = np.broadcast_to(
                g[:, :, :, None, :, None] / (size * size), (B, C, Ho, size, Wo, size)
            )
            x._accumulate(gx.reshape(x.shape))

    return _make(out, (x,), backward, "avg_pool2d")


def global_avg_pool(x) -> Tensor:
    """(B,C,H,W) -> (B,C) spatial mean; the squeeze step of SE gating."""
    return core.mean(x, axis=(2, 3))


@lru_cache(maxsize=64)
def _linear_resize_matrix(n_in: int, n_out: int) -> np.ndarray:
    """Interpolation matrix mapping n_in samples to n_out (edges aligned)."""
    m = np.zeros((n_out, n_in), dtype=np.float64)
    if n_in == 1:
        m[:, 0] = 1.0
        return m
    pos = np.linspace(0.0, n_in - 1.0, n_out)
    lo = np.floor(pos).astype(int)
    lo = np.minimum(lo, n_in - 2)
    frac = pos - lo
    m[np.arange(n_out), lo] = 1.0 - frac
    m[np.arange(n_out), lo + 1] = frac
    return m


def resize_bilinear(x, out_h: int, out_w: int) -> Tensor:
    """Separable linear resampling of (B,C,H,W) feature maps."""
    x = as_tensor(x)
    B, C, H, W = x.shape
    wh = _linear_resize_matrix(H, out_h).astype(x.dtype)
    ww = _linear_resize_matrix(W, out_w).astype(x.dtype)
    out = np.matmul(np.matmul(wh, x.data), ww.T)

    def backward(g):
        if x.requires_grad:
            x._accumulate(np.matmul(np.matmul(wh.T, g), ww))

    return _make(out, (x,), backward, "resize_bilinear")


def upsample_nearest(x, factor: int) -> Tensor:
    x = as_tensor(x)
    B, C, H, W = x.shape
    out = np.repeat(np.repeat(x.data, factor, axis=2), factor, axis=3)

    def backward(g):
        if x.requires_grad:
            gx = g.reshape(B, C, H, factor, W, factor).sum(axis=(3, 5))
            x._accumulate(gx)

    return _make(out, (x,), backward, "upsample_nearest")


def multi_head_attention(q, k, v, heads: int, params, prefix: str = "attn") -> Tensor:
    """Projected scaled-dot-product attention over (B,T,D) sequences.

    Reads ``{prefix}.wq/.bq/.wk/.bk/.wv/.bv/.wo/.bo`` from ``params``.
    2-D (T,D) inputs are treated as a batch of one.
    """
    from ..errors import ConfigError

    q, k, v = as_tensor(q), as_tensor(k), as_tensor(v)
    squeeze = q.ndim == 2
    if squeeze:
        q, k, v = (core.reshape(t, (1,) + t.shape) for t in (q, k, v))
    B, Tq, D = q.shape
    Tk = k.shape[1]
    if D % heads:
        raise ConfigError(f"model dim {D} not divisible by {heads} heads")
    dh = D // heads

    def proj(t, name):
        return core.matmul(t, params[f"{prefix}.w{name}"]) + params[f"{prefix}.b{name}"]

    def split_heads(t, T):
        t = core.reshape(t, (B, T, heads, dh))
        return core.transpose(t, (0, 2, 1, 3))              # (B,h,T,dh)

    qp = split_heads(proj(q, "q"), Tq)
    kp = split_heads(proj(k, "k"), Tk)
    vp = split_heads(proj(v, "v"), Tk)
    scores = core.matmul(qp, core.transpose(kp, (0, 1, 3, 2))) * (1.0 / np.sqrt(dh))
    attn = core.softmax(scores, axis=-1)
    ctx = core.matmul(attn, vp)                             # (B,h,Tq,dh)
    merged = core.reshape(core.transpose(ctx, (0, 2, 1, 3)), (B, Tq, D))
    out = core.matmul(merged, params[f"{prefix}.wo"]) + params[f"{prefix}.bo"]
    if squeeze:
        out = core.reshape(out, (Tq, D))
    return out


def linear(x, params, prefix: str) -> Tensor:
    """x @ W + b with parameters ``{prefix}.w`` and ``{prefix}.b``."""
    return core.matmul(as_tensor(x), params[f"{prefix}.w"]) + params[f"{prefix}.b"]
