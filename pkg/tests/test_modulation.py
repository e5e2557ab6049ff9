"""Modulation against an independent scalar reimplementation.

The oracle below recomputes radius selection, window statistics, the
retention sieve, and the gamma curve with plain Python loops and the
math module; the vectorized implementation must match it exactly in
float64.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from clickrefine.errors import ConfigError, ValidationError
from clickrefine.interaction import NEGATIVE, POSITIVE, Click
from clickrefine.modulation import (
    ModulationParams,
    filter_window,
    modulate,
    modulation_radius,
)

# -- oracle -------------------------------------------------------------------


def modulate_loops(prob, u, all_clicks, params, sieve=True):
    h, w = prob.shape
    opposite = [c for c in all_clicks if c.kind != u.kind]
    if opposite:
        radius = 0.5 * min(math.hypot(c.x - u.x, c.y - u.y) for c in opposite)
    else:
        radius = params.r_max
    radius = max(radius, params.r_min)

    members = []
    for y in range(h):
        for x in range(w):
            d2 = (y - u.y) ** 2 + (x - u.x) ** 2
            if d2 <= radius * radius:
                members.append((y, x, math.sqrt(float(d2))))
    values = sorted(float(prob[y, x]) for y, x, _ in members)
    mean = sum(values) / len(values)
    median = values[(len(values) - 1) // 2]
    p_u_raw = float(prob[u.y, u.x])

    retained = []
    for y, x, d in members:
        p = float(prob[y, x])
        if not sieve:
            retained.append((y, x, d))
        elif u.kind == NEGATIVE:
            if p <= max(p_u_raw, mean, median):
                retained.append((y, x, d))
        else:
            if p >= min(p_u_raw, mean, median):
                retained.append((y, x, d))

    p_u = min(max(p_u_raw, params.p_clamp_low), params.p_clamp_high)
    out = prob.copy()
    for y, x, d in retained:
        p = float(prob[y, x])
        frac = d / radius
        if u.kind == NEGATIVE:
            gamma_max = math.log(0.01) / math.log(p_u)
            gamma = gamma_max * (1.0 - frac) + frac
            out[y, x] = p**gamma
        else:
            gamma_max = math.log(p_u) / math.log(0.99)
            gamma = gamma_max * (1.0 - frac) + frac
            out[y, x] = p ** (1.0 / gamma)
    return out, radius, {(y, x) for y, x, _ in retained}


# -- radius -------------------------------------------------------------------


class TestModulationRadius:
    def test_lone_click_opens_to_r_max(self):
        u = Click(50, 50, POSITIVE, 1)
        assert modulation_radius(u, [u], ModulationParams()) == 100.0

    def test_half_distance_to_nearest_opposite(self):
        u = Click(10, 10, POSITIVE, 2)
        other = Click(70, 10, NEGATIVE, 1)
        assert modulation_radius(u, [u, other], ModulationParams()) == 30.0

    def test_floor_at_r_min(self):
        u = Click(10, 10, POSITIVE, 2)
        other = Click(14, 10, NEGATIVE, 1)
        assert modulation_radius(u, [u, other], ModulationParams()) == 5.0

    def test_same_kind_clicks_ignored(self):
        u = Click(10, 10, POSITIVE, 3)
        crowd = [u, Click(11, 10, POSITIVE, 1), Click(12, 10, POSITIVE, 2)]
        assert modulation_radius(u, crowd, ModulationParams()) == 100.0

    def test_window_pair_never_overlaps(self):
        params = ModulationParams()
        rng = np.random.default_rng(0)
        for _ in range(50):
            pos = Click(int(rng.integers(0, 200)), int(rng.integers(0, 200)), POSITIVE, 1)
            neg = Click(int(rng.integers(0, 200)), int(rng.integers(0, 200)), NEGATIVE, 2)
            gap = math.hypot(pos.x - neg.x, pos.y - neg.y)
            if gap < 2 * params.r_min:
                continue                      # the floor may force overlap there
            r_pos = modulation_radius(pos, [pos, neg], params)
            r_neg = modulation_radius(neg, [pos, neg], params)
            assert r_pos + r_neg <= gap + 1e-9

    def test_bad_params_rejected(self):
        with pytest.raises(ConfigError):
            ModulationParams(r_max=3.0, r_min=5.0)
        with pytest.raises(ConfigError):
            ModulationParams(p_clamp_low=0.5, p_clamp_high=0.2)


# -- retention sieve ----------------------------------------------------------


class TestFilterWindow:
    def test_uniform_map_keeps_everything(self):
        prob = np.full((21, 21), 0.5)
        for kind in (POSITIVE, NEGATIVE):
            u = Click(10, 10, kind, 1)
            win = filter_window(prob, u, 6.0)
            ys, xs = np.mgrid[0:21, 0:21]
            inside = (ys - 10) ** 2 + (xs - 10) ** 2 <= 36.0
            assert len(win) == int(inside.sum())

    @pytest.mark.parametrize("kind", [POSITIVE, NEGATIVE])
    def test_matches_per_pixel_scan(self, kind):
        rng = np.random.default_rng(3 + kind)
        prob = rng.random((32, 32))
        u = Click(15, 14, kind, 1)
        radius = 7.5
        win = filter_window(prob, u, radius)
        got = set(zip(win.ys.tolist(), win.xs.tolist()))

        members = [(y, x) for y in range(32) for x in range(32)
                   if (y - u.y) ** 2 + (x - u.x) ** 2 <= radius * radius]
        values = sorted(float(prob[y, x]) for y, x in members)
        mean = sum(values) / len(values)
        median = values[(len(values) - 1) // 2]
        p_u = float(prob[u.y, u.x])
        if kind == NEGATIVE:
            want = {(y, x) for y, x in members if prob[y, x] <= max(p_u, mean, median)}
        else:
            want = {(y, x) for y, x in members if prob[y, x] >= min(p_u, mean, median)}
        assert got == want

    def test_center_always_survives(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            prob = rng.random((16, 16))
            u = Click(8, 8, POSITIVE if rng.random() < 0.5 else NEGATIVE, 1)
            win = filter_window(prob, u, 5.0)
            assert (8, 8) in set(zip(win.ys.tolist(), win.xs.tolist()))

    def test_distances_are_euclidean(self):
        prob = np.full((11, 11), 0.5)
        win = filter_window(prob, Click(5, 5, POSITIVE, 1), 4.0)
        for y, x, d in zip(win.ys, win.xs, win.distances):
            assert d == pytest.approx(math.hypot(x - 5, y - 5))

    def test_out_of_bounds_click_rejected(self):
        with pytest.raises(ValidationError):
            filter_window(np.full((8, 8), 0.5), Click(9, 0, POSITIVE, 1), 3.0)

    def test_invalid_prob_values_rejected(self):
        bad = np.full((8, 8), 1.5)
        with pytest.raises(ValidationError):
            filter_window(bad, Click(4, 4, POSITIVE, 1), 3.0)


# -- gamma adjustment ---------------------------------------------------------


def _uniform_case(kind, value=0.5, side=25):
    prob = np.full((side, side), value, dtype=np.float64)
    u = Click(side // 2, side // 2, kind, 1)
    return prob, u


class TestModulate:
    def test_negative_center_hits_floor_target(self):
        prob, u = _uniform_case(NEGATIVE)
        out = modulate(prob, u, [u], ModulationParams(r_max=10.0))
        assert out[u.y, u.x] == pytest.approx(0.01, abs=1e-12)

    def test_positive_center_hits_ceiling_target(self):
        prob, u = _uniform_case(POSITIVE)
        out = modulate(prob, u, [u], ModulationParams(r_max=10.0))
        assert out[u.y, u.x] == pytest.approx(0.99, abs=1e-12)

    def test_value_five_pixels_from_negative_click(self):
        # Closed form at p=0.5, R=10, d=5: gamma interpolates halfway
        # between log_0.5(0.01) and 1, and 0.5^gamma lands near 0.0707.
        prob, u = _uniform_case(NEGATIVE)
        out = modulate(prob, u, [u], ModulationParams(r_max=10.0))
        gamma_max = math.log(0.01) / math.log(0.5)
        gamma = gamma_max * 0.5 + 0.5
        assert out[u.y, u.x + 5] == pytest.approx(0.5**gamma, abs=1e-15)
        assert out[u.y, u.x + 5] == pytest.approx(0.0707, abs=5e-5)

    def test_rim_pixel_unchanged(self):
        prob, u = _uniform_case(NEGATIVE, side=41)
        out = modulate(prob, u, [u], ModulationParams(r_max=10.0))
        rim = out[u.y, u.x + 10]                 # exactly d == R
        assert rim == pytest.approx(0.5, abs=1e-6)

    def test_locality_outside_window_bitwise(self):
        rng = np.random.default_rng(7)
        prob = rng.random((64, 64))
        u = Click(20, 22, NEGATIVE, 1)
        out = modulate(prob, u, [u], ModulationParams(r_max=8.0))
        ys, xs = np.mgrid[0:64, 0:64]
        outside = (ys - u.y) ** 2 + (xs - u.x) ** 2 > 64.0
        assert np.array_equal(out[outside], prob[outside])

    def test_monotone_attenuation_with_distance(self):
        # Same starting probability everywhere: pixels closer to the click
        # must end up at least as far toward the target.
        prob, u = _uniform_case(NEGATIVE, side=41)
        out = modulate(prob, u, [u], ModulationParams(r_max=15.0))
        row = out[u.y, u.x : u.x + 16]           # distances 0..15 along the row
        assert np.all(np.diff(row) >= -1e-15)    # rises back toward 0.5
        prob, u = _uniform_case(POSITIVE, side=41)
        out = modulate(prob, u, [u], ModulationParams(r_max=15.0))
        row = out[u.y, u.x : u.x + 16]
        assert np.all(np.diff(row) <= 1e-15)     # falls back toward 0.5

    def test_clamped_click_probability_is_noop_at_boundary(self):
        # p_u below the clamp forces gamma_max = 1: the whole window is a
        # fixed point instead of moving the wrong way.
        prob = np.full((21, 21), 0.005, dtype=np.float64)
        u = Click(10, 10, NEGATIVE, 1)
        out = modulate(prob, u, [u], ModulationParams(r_max=6.0))
        np.testing.assert_allclose(out, prob, atol=1e-12)

    def test_sieve_off_modulates_whole_window(self):
        # One high pixel beside a negative click: the sieve protects it,
        # the plain circular baseline does not.
        prob = np.full((21, 21), 0.3, dtype=np.float64)
        prob[10, 12] = 0.95
        u = Click(10, 10, NEGATIVE, 1)
        sieved = modulate(prob, u, [u], ModulationParams(r_max=6.0), sieve=True)
        plain = modulate(prob, u, [u], ModulationParams(r_max=6.0), sieve=False)
        assert sieved[10, 12] == prob[10, 12]
        assert plain[10, 12] < prob[10, 12]

    def test_matches_scalar_oracle_float64(self):
        rng = np.random.default_rng(11)
        params = ModulationParams(r_max=12.0, r_min=3.0)
        for trial in range(8):
            prob = rng.random((64, 64))
            clicks = []
            for i in range(int(rng.integers(1, 5))):
                clicks.append(Click(int(rng.integers(0, 64)), int(rng.integers(0, 64)),
                                    POSITIVE if rng.random() < 0.5 else NEGATIVE, i + 1))
            u = clicks[-1]
            sieve = trial % 2 == 0
            got = modulate(prob, u, clicks, params, sieve=sieve)
            want, _, _ = modulate_loops(prob, u, clicks, params, sieve=sieve)
            np.testing.assert_array_equal(got, want)

    def test_matches_scalar_oracle_float32(self):
        rng = np.random.default_rng(13)
        params = ModulationParams(r_max=9.0)
        prob = rng.random((48, 48)).astype(np.float32)
        u = Click(24, 20, POSITIVE, 1)
        got = modulate(prob, u, [u], params)
        want, _, _ = modulate_loops(prob, u, [u], params)
        assert got.dtype == np.float32
        np.testing.assert_allclose(got, want, atol=1e-5)

    @settings(max_examples=30, deadline=None)
    @given(
        prob=arrays(np.float64, (16, 16), elements=st.floats(0.0, 1.0)),
        cx=st.integers(0, 15),
        cy=st.integers(0, 15),
        kind=st.sampled_from([POSITIVE, NEGATIVE]),
    )
    def test_range_and_direction_properties(self, prob, cx, cy, kind):
        u = Click(cx, cy, kind, 1)
        out = modulate(prob, u, [u], ModulationParams(r_max=6.0))
        assert np.all(out >= 0.0) and np.all(out <= 1.0)
        if kind == POSITIVE:
            assert np.all(out >= prob - 1e-12)
        else:
            assert np.all(out <= prob + 1e-12)

    def test_nonfinite_input_rejected(self):
        prob = np.full((8, 8), 0.5)
        prob[3, 3] = np.nan
        with pytest.raises(ValidationError):
            modulate(prob, Click(4, 4, POSITIVE, 1), [], ModulationParams())
