"""Click-conditioned probability-map modulation.

Each click reshapes the probability map inside a circular window around
it: the window radius shrinks to half the distance to the nearest
opposite-polarity click, irrelevant pixels are sieved out by comparing
against window statistics, and the survivors are pushed toward the
click's target probability by a gamma curve whose strength decays
linearly with distance from the click.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError, ShapeError, ValidationError
from .interaction import NEGATIVE, Click

# Gamma targets: a fully weighted negative click drives its pixel to
# NEGATIVE_TARGET, a positive one to POSITIVE_TARGET.
NEGATIVE_TARGET = 0.01
POSITIVE_TARGET = 0.99


@dataclass(frozen=True)
class ModulationParams:
    """Radius bounds and the click-probability clamp range."""

    r_max: float = 100.0
    r_min: float = 5.0
    p_clamp_low: float = 0.01
    p_clamp_high: float = 0.99

    def __post_init__(self):
        if not (0 < self.r_min <= self.r_max):
            raise ConfigError(f"need 0 < r_min <= r_max, got {self.r_min}, {self.r_max}")
        if not (0 < self.p_clamp_low < self.p_clamp_high < 1):
            raise ConfigError("need 0 < p_clamp_low < p_clamp_high < 1")


@dataclass
class ModulationWindow:
    """Retained pixels of one click's circular window.

    ``ys``/``xs``/``distances`` are parallel arrays over the pixels that
    survived the statistics sieve; distances are center-to-center
    Euclidean, in pixels.
    """

    center: Click
    radius: float
    ys: np.ndarray
    xs: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return self.ys.size


def check_prob_map(prob: np.ndarray) -> np.ndarray:
    prob = np.asarray(prob)
    if prob.ndim != 2:
        raise ShapeError(f"probability map must be 2-D, got {prob.shape}")
    if not np.all(np.isfinite(prob)):
        raise ValidationError("probability map contains non-finite values")
    if prob.size and (prob.min() < 0.0 or prob.max() > 1.0):
        raise ValidationError("probability map values must lie in [0, 1]")
    return prob


def modulation_radius(u: Click, all_clicks: list[Click], params: ModulationParams) -> float:
    """Window radius for the latest click ``u``.

    Half the distance to the nearest opposite-polarity click keeps the
    windows of opposing clicks from overlapping; without any opposition
    the radius opens up to ``r_max``.  Never below ``r_min``.
    """
    opposite = [c for c in all_clicks if c.kind != u.kind]
    if opposite:
        radius = 0.5 * min(math.hypot(c.x - u.x, c.y - u.y) for c in opposite)
    else:
        radius = params.r_max
    return max(radius, params.r_min)


def _lower_median(values: np.ndarray) -> float:
    ordered = np.sort(values, kind="stable")
    return float(ordered[(ordered.size - 1) // 2])


def _libm_pow(values: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """Elementwise pow through the scalar C library function.

    numpy's vectorized power takes a SIMD path that rounds differently
    from libm on a few percent of inputs; results here are pinned to the
    scalar rounding so any straightforward per-pixel reimplementation
    reproduces them bit-for-bit.  Windows are at most a few tens of
    thousands of pixels, so the Python loop stays in the millisecond
    range.
    """
    return np.fromiter(
        (math.pow(v, g) for v, g in zip(values.tolist(), exponents.tolist())),
        dtype=np.float64,
        count=values.size,
    )


def _circular_window(shape: tuple[int, int], u: Click, radius: float):
    h, w = shape
    y0 = max(0, int(math.floor(u.y - radius)))
    y1 = min(h - 1, int(math.ceil(u.y + radius)))
    x0 = max(0, int(math.floor(u.x - radius)))
    x1 = min(w - 1, int(math.ceil(u.x + radius)))
    ys, xs = np.mgrid[y0:y1 + 1, x0:x1 + 1]
    d2 = (ys - u.y) ** 2 + (xs - u.x) ** 2
    inside = d2 <= radius * radius
    return ys[inside], xs[inside], np.sqrt(d2[inside].astype(np.float64))


def filter_window(prob: np.ndarray, u: Click, radius: float,
                  sieve: bool = True) -> ModulationWindow:
    """Circular window around ``u`` reduced to the pixels worth adjusting.

    Statistics (mean and lower median) are taken over the whole circular
    window, click pixel included.  A negative click keeps pixels with
    p <= max(p_u, mean, median); a positive click keeps pixels with
    p >= min(p_u, mean, median).  ``sieve=False`` keeps the whole window,
    which is the plain circular-modulation baseline.
    """
    prob = check_prob_map(prob)
    h, w = prob.shape
    if not (0 <= u.x < w and 0 <= u.y < h):
        raise ValidationError(f"click ({u.x}, {u.y}) outside {w}x{h} map")
    if radius <= 0:
        raise ValidationError(f"window radius must be positive, got {radius}")
    ys, xs, dist = _circular_window((h, w), u, radius)
    values = prob[ys, xs].astype(np.float64)
    if sieve:
        p_u = float(prob[u.y, u.x])
        mean = float(values.mean())
        median = _lower_median(values)
        if u.kind == NEGATIVE:
            keep = values <= max(p_u, mean, median)
        else:
            keep = values >= min(p_u, mean, median)
        ys, xs, dist = ys[keep], xs[keep], dist[keep]
    return ModulationWindow(center=u, radius=float(radius), ys=ys, xs=xs, distances=dist)


def modulate(prob: np.ndarray, u: Click, all_clicks: list[Click],
             params: ModulationParams | None = None,
             sieve: bool = True) -> np.ndarray:
    """Push probabilities around the latest click toward its target.

    The click probability p_u is clamped into the configured range first;
    at the clamp boundary the exponent degenerates to 1 and the map is
    untouched, which is exactly the regime where an unclamped p_u would
    flip the adjustment's direction.  The exponent interpolates linearly
    from full strength at the click to 1 at the window rim, so the
    adjustment fades with distance.  Pixels outside the retained window
    are returned bit-identical.
    """
    params = params or ModulationParams()
    prob = check_prob_map(prob)
    radius = modulation_radius(u, all_clicks, params)
    window = filter_window(prob, u, radius, sieve=sieve)
    out = prob.copy()
    if len(window) == 0:
        return out

    p_u = float(np.clip(prob[u.y, u.x], params.p_clamp_low, params.p_clamp_high))
    values = prob[window.ys, window.xs].astype(np.float64)
    frac = window.distances / radius
    if u.kind == NEGATIVE:
        gamma_max = math.log(NEGATIVE_TARGET) / math.log(p_u)
        gamma = gamma_max * (1.0 - frac) + frac
        adjusted = _libm_pow(values, gamma)
    else:
        gamma_max = math.log(p_u) / math.log(POSITIVE_TARGET)
        gamma = gamma_max * (1.0 - frac) + frac
        adjusted = _libm_pow(values, 1.0 / gamma)
    if not np.all(np.isfinite(adjusted)):
        raise NumericError("modulation produced non-finite probabilities")
    out[window.ys, window.xs] = adjusted.astype(out.dtype)
    return out
