"""Array engine: autodiff tensors, NCHW kernels, parameter registry."""

from . import core
from .core import (
    DEFAULT_DTYPE,
    Tensor,
    add,
    as_tensor,
    clip_probs,
    concat,
    exp,
    gelu,
    getitem,
    log,
    matmul,
    mean,
    mul,
    power,
    reshape,
    sigmoid,
    softmax,
    softplus,
    sum_,
    transpose,
)
from .gradcheck import grad_check
from .kernels import (
    LAYER_NORM_EPS,
    avg_pool2d,
    col2im,
    conv2d,
    conv_out_size,
    deformable_conv2d,
    depthwise_conv2d,
    global_avg_pool,
    im2col,
    layer_norm,
    linear,
    multi_head_attention,
    resize_bilinear,
    transposed_conv2d,
    upsample_nearest,
)
from .params import ParamSet

__all__ = [
    "DEFAULT_DTYPE",
    "LAYER_NORM_EPS",
    "ParamSet",
    "Tensor",
    "add",
    "as_tensor",
    "avg_pool2d",
    "clip_probs",
    "col2im",
    "concat",
    "conv2d",
    "conv_out_size",
    "core",
    "deformable_conv2d",
    "depthwise_conv2d",
    "exp",
    "gelu",
    "getitem",
    "global_avg_pool",
    "grad_check",
    "im2col",
    "layer_norm",
    "linear",
    "log",
    "matmul",
    "mean",
    "mul",
    "multi_head_attention",
    "power",
    "reshape",
    "resize_bilinear",
    "sigmoid",
    "softmax",
    "softplus",
    "sum_",
    "transpose",
    "transposed_conv2d",
    "upsample_nearest",
]
