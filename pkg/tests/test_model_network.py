"""End-to-end network behavior: inference, checkpoints, gradients."""

from __future__ import annotations

import numpy as np
import pytest

from clickrefine import engine as E
from clickrefine import model as M
from clickrefine.errors import ValidationError
from clickrefine.state import new_session

MICRO = M.ModelConfig(patch=8, embed_dim=8, depth=2, heads=2,
                      early_block_indices=(0, 1), fpn_dims=(4, 4, 8, 8),
                      hq_out_dim=4, decoder_layers=1, input_resolution=32)


@pytest.fixture(scope="module")
def micro_params():
    return M.build_params(MICRO, seed=0)


def _rand_inputs(cfg, seed=0, dtype=np.float32):
    rng = np.random.default_rng(seed)
    r = cfg.input_resolution
    img = E.Tensor(rng.random((1, 3, r, r)).astype(dtype))
    aux = E.Tensor(rng.random((1, 4, r, r)).astype(dtype))
    return img, aux


class TestBuild:
    def test_same_seed_is_bit_identical(self):
        a = M.build_params(MICRO, seed=7)
        b = M.build_params(MICRO, seed=7)
        assert a.checksum() == b.checksum()

    def test_different_seed_differs(self):
        a = M.build_params(MICRO, seed=7)
        b = M.build_params(MICRO, seed=8)
        assert a.checksum() != b.checksum()

    def test_head_keeps_first_round_near_half(self, micro_params):
        img, aux = _rand_inputs(MICRO, seed=20)
        logits = M.forward_logits(img, aux, micro_params, MICRO)
        probs = 1.0 / (1.0 + np.exp(-logits.data))
        assert np.all(np.abs(probs - 0.5) < 0.2)


class TestForwardLogits:
    def test_frozen_checksum_survives_forwards(self, micro_params):
        img, aux = _rand_inputs(MICRO, seed=21)
        before_frozen = micro_params.checksum(trainable=False)
        before_all = micro_params.checksum()
        for _ in range(2):
            M.forward_logits(img, aux, micro_params, MICRO)
        assert micro_params.checksum(trainable=False) == before_frozen
        assert micro_params.checksum() == before_all

    def test_switches_change_output(self, micro_params):
        img, aux = _rand_inputs(MICRO, seed=22)
        base = M.forward_logits(img, aux, micro_params, MICRO).data
        no_vit = M.forward_logits(img, aux, micro_params, MICRO,
                                  use_backbone_tokens=False).data
        no_hq = M.forward_logits(img, aux, micro_params, MICRO,
                                 use_fine_features=False).data
        assert np.abs(base - no_vit).max() > 0
        assert np.abs(base - no_hq).max() > 0
        assert np.abs(no_vit - no_hq).max() > 0

    def test_high_res_switch_isolates_its_path(self):
        # The final 2x lift feeds only the high-res plane, so with that
        # term disabled the logits must ignore the perturbation; with it
        # enabled they must react.
        ps = M.build_params(MICRO, seed=4)
        img, aux = _rand_inputs(MICRO, seed=23)
        off = M.forward_logits(img, aux, ps, MICRO, use_fine_features=False).data
        on = M.forward_logits(img, aux, ps, MICRO).data
        ps.set_data("fuse.up2.w", ps["fuse.up2.w"].data * 2.0)
        off2 = M.forward_logits(img, aux, ps, MICRO, use_fine_features=False).data
        on2 = M.forward_logits(img, aux, ps, MICRO).data
        assert np.array_equal(off, off2)
        assert np.abs(on - on2).max() > 0

    def test_gradients_ignore_disabled_paths(self):
        # With the high-res term cut, nothing upstream of it (the fusion
        # upsampler) can receive gradient.
        ps = M.build_params(MICRO, seed=5).astype(np.float64)
        img, aux = _rand_inputs(MICRO, seed=24, dtype=np.float64)
        ps.zero_grads()
        out = M.forward_logits(img, aux, ps, MICRO, use_fine_features=False)
        out.sum().backward()
        g = ps["fuse.up2.w"].grad
        assert g is None or np.all(g == 0)
        assert ps["dfc.conv1.w"].grad is not None
        assert np.abs(ps["dfc.conv1.w"].grad).max() > 0


class TestPredict:
    @pytest.mark.parametrize("resolution", [32, 64, 96])
    def test_shapes_across_working_resolutions(self, resolution):
        cfg = M.ModelConfig(patch=8, embed_dim=8, depth=2, heads=2,
                            early_block_indices=(0, 1), fpn_dims=(4, 4, 8, 8),
                            hq_out_dim=4, decoder_layers=1,
                            input_resolution=resolution)
        ps = M.build_params(cfg, seed=0)
        rng = np.random.default_rng(resolution)
        session = new_session("s", rng.random((3, 41, 57), dtype=np.float32))
        probs = M.predict(session, ps, cfg)
        assert probs.shape == (41, 57)
        assert probs.dtype == np.float32
        assert np.all(probs >= 0.0) and np.all(probs <= 1.0)

    def test_inference_is_pure(self, micro_params):
        rng = np.random.default_rng(25)
        session = new_session("s", rng.random((3, 30, 30), dtype=np.float32))
        a = M.predict(session, micro_params, MICRO)
        b = M.predict(session, micro_params, MICRO)
        assert np.array_equal(a, b)

    def test_first_round_runs_on_zero_masks(self, micro_params):
        rng = np.random.default_rng(26)
        session = new_session("s", rng.random((3, 32, 32), dtype=np.float32))
        assert np.all(session.m_prev == 0) and np.all(session.m_mod == 0)
        assert session.clicks == []
        probs = M.predict(session, micro_params, MICRO)
        assert probs.shape == (32, 32)


class TestCheckpoint:
    def test_round_trip_is_bit_exact(self, micro_params, tmp_path):
        path = tmp_path / "ckpt"
        M.save_checkpoint(str(path), micro_params, MICRO)
        loaded, cfg = M.load_checkpoint(str(path))
        assert cfg == MICRO
        assert loaded.checksum() == micro_params.checksum()
        for name in micro_params.names():
            assert loaded.is_trainable(name) == micro_params.is_trainable(name)

    def test_mismatched_config_rejected(self, micro_params, tmp_path):
        path = tmp_path / "ckpt"
        M.save_checkpoint(str(path), micro_params, MICRO)
        other = M.ModelConfig(patch=8, embed_dim=8, depth=3, heads=2,
                              early_block_indices=(0, 1), fpn_dims=(4, 4, 8, 8),
                              hq_out_dim=4, decoder_layers=1,
                              input_resolution=32)
        other.save(str(path / "config.json"))
        with pytest.raises(ValidationError):
            M.load_checkpoint(str(path))

    def test_wrong_shape_rejected(self, micro_params, tmp_path):
        # Same entry names, different geometry: resolution changes the
        # positional-embedding shape but no names.
        path = tmp_path / "ckpt"
        M.save_checkpoint(str(path), micro_params, MICRO)
        other = M.ModelConfig(patch=8, embed_dim=8, depth=2, heads=2,
                              early_block_indices=(0, 1), fpn_dims=(4, 4, 8, 8),
                              hq_out_dim=4, decoder_layers=1,
                              input_resolution=64)
        other.save(str(path / "config.json"))
        with pytest.raises(ValidationError):
            M.load_checkpoint(str(path))


def _weighted_logit_loss(cfg, seed):
    rng = np.random.default_rng(seed)
    r = cfg.input_resolution
    img = E.Tensor(rng.random((1, 3, r, r)))
    aux = E.Tensor(rng.random((1, 4, r, r)))
    w = E.Tensor(rng.standard_normal((1, 1, r, r)))

    def loss(ps):
        return (M.forward_logits(img, aux, ps, cfg) * w).sum()

    return loss


class TestGradients:
    # Step 1e-4: attention projections start near-uniform, so their
    # gradients are ~1e-6 while the loss is O(10); at step 1e-5 central
    # differences bottom out on float64 roundoff (~1e-10 absolute) right
    # at the tolerance.  The larger step trades far below both floors.
    def test_fusion_scale_gradient(self):
        ps = M.build_params(MICRO, seed=0).astype(np.float64)
        err = E.grad_check(_weighted_logit_loss(MICRO, 30), ps, step=1e-4,
                           names=["fuse.theta"])
        assert err < 1e-4

    def test_full_trainable_sweep(self):
        ps = M.build_params(MICRO, seed=0).astype(np.float64)
        err = E.grad_check(_weighted_logit_loss(MICRO, 31), ps, step=1e-4,
                           max_entries_per_param=4, rng_seed=0)
        assert err < 1e-4

    def test_backward_leaves_frozen_untouched(self):
        ps = M.build_params(MICRO, seed=0).astype(np.float64)
        frozen = ps.checksum(trainable=False)
        loss = _weighted_logit_loss(MICRO, 32)(ps)
        loss.backward()
        assert ps.checksum(trainable=False) == frozen
        for name, t in ps.frozen_items():
            assert not t.requires_grad
