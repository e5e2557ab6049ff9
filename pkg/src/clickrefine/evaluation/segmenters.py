"""Segmentation backends for the benchmark harness.

Every segmenter answers one round of the refinement session: given the
image, the previous probability map, the click-adjusted map, and the
click history, produce a fresh probability map.  The reference
segmenters (oracle / zero / degraded oracle) exist to pin down harness
arithmetic independently of any learned model.
"""

from __future__ import annotations

from typing import Callable, Protocol

import numpy as np

from ..errors import ConfigError, ShapeError
from ..interaction import Click, distance_transform
from ..model import ModelConfig, load_checkpoint, predict
from ..seeding import seed_key
from ..state import SessionState
from .records import InstanceRecord


class Segmenter(Protocol):
    def predict(self, image: np.ndarray, m_prev: np.ndarray,
                m_mod: np.ndarray, clicks: list[Click]) -> np.ndarray: ...


class OracleSegmenter:
    """Returns the ground truth as hard probabilities; converges in one click."""

    def __init__(self, gt: np.ndarray):
        self._probs = (np.asarray(gt) != 0).astype(np.float32)

    def predict(self, image, m_prev, m_mod, clicks) -> np.ndarray:
        return self._probs.copy()


class ZeroSegmenter:
    """Never segments anything; exercises the failure cap."""

    def predict(self, image, m_prev, m_mod, clicks) -> np.ndarray:
        return np.zeros(np.asarray(image).shape[1:], dtype=np.float32)


class DegradedOracleSegmenter:
    """Ground truth corrupted by boundary flip noise.

    Pixels within ``band_radius`` of the object boundary (either side)
    flip with probability ``flip_p``, independently on every call, so
    the expected IoU stays flat in clicks while degrading in ``flip_p``.
    """

    def __init__(self, gt: np.ndarray, flip_p: float, seed, band_radius: int = 3):
        if not 0.0 <= flip_p <= 1.0:
            raise ConfigError(f"flip_p must be in [0, 1], got {flip_p}")
        gt = np.asarray(gt) != 0
        inside = distance_transform(gt) <= band_radius
        outside = distance_transform(~gt) <= band_radius
        self._gt = gt
        self._band = (gt & inside) | (~gt & outside)
        self._flip_p = float(flip_p)
        self._rng = np.random.default_rng(seed_key(seed))

    def predict(self, image, m_prev, m_mod, clicks) -> np.ndarray:
        flips = self._band & (self._rng.random(self._gt.shape) < self._flip_p)
        probs = self._gt.astype(np.float32)
        probs[flips] = 1.0 - probs[flips]
        return probs


class ModelSegmenter:
    """Wraps a trained refinement model behind the session contract.

    ``predict`` is read-only with respect to the parameters, so one
    instance can serve many benchmark instances concurrently.  The
    feature switches select the evaluation-time variant.
    """

    def __init__(self, params, config: ModelConfig,
                 use_backbone_tokens: bool = True,
                 use_fine_features: bool = True):
        self._params = params
        self._config = config
        self._use_backbone_tokens = bool(use_backbone_tokens)
        self._use_fine_features = bool(use_fine_features)

    @classmethod
    def from_checkpoint(cls, path: str, **switches) -> "ModelSegmenter":
        params, config = load_checkpoint(path)
        return cls(params, config, **switches)

    def params_checksum(self) -> str:
        return self._params.checksum()

    def predict(self, image, m_prev, m_mod, clicks) -> np.ndarray:
        image = np.asarray(image, dtype=np.float32)
        if image.ndim != 3 or image.shape[0] != 3:
            raise ShapeError(f"image must be (3, H, W), got {image.shape}")
        session = SessionState(session_id="bench",
                               image=image,
                               m_prev=np.asarray(m_prev, dtype=np.float32),
                               m_mod=np.asarray(m_mod, dtype=np.float32),
                               clicks=list(clicks))
        return predict(session, self._params, self._config,
                       use_backbone_tokens=self._use_backbone_tokens,
                       use_fine_features=self._use_fine_features)


SegmenterFactory = Callable[[InstanceRecord, np.ndarray, np.ndarray], Segmenter]


def _parse_switches(text: str) -> dict:
    switches = {}
    names = {"tokens": "use_backbone_tokens", "fine": "use_fine_features"}
    for part in filter(None, text.split("&")):
        key, sep, value = part.partition("=")
        if key not in names or not sep or value not in ("on", "off"):
            raise ConfigError(f"bad segmenter switch {part!r}; expected "
                              "tokens=on|off or fine=on|off")
        switches[names[key]] = value == "on"
    return switches


def make_segmenter_factory(spec: str, seed) -> tuple[SegmenterFactory, Callable[[], str] | None]:
    """Segmenter id string -> (per-instance factory, checksum probe).

    Supported ids: ``oracle``, ``zero``, ``degraded:<flip_p>``, and
    ``model:<checkpoint-dir>`` with optional ``?tokens=off`` /
    ``?fine=off`` switches.  The checksum probe is non-None only for
    model segmenters and re-reads the parameter checksum on demand.
    """
    kind, _, rest = spec.partition(":")
    if kind == "oracle" and not rest:
        return (lambda record, image, gt: OracleSegmenter(gt)), None
    if kind == "zero" and not rest:
        zero = ZeroSegmenter()
        return (lambda record, image, gt: zero), None
    if kind == "degraded":
        try:
            flip_p = float(rest)
        except ValueError:
            raise ConfigError(f"degraded segmenter needs a flip probability, got {rest!r}")
        if not 0.0 <= flip_p <= 1.0:
            raise ConfigError(f"flip_p must be in [0, 1], got {flip_p}")

        def factory(record, image, gt):
            return DegradedOracleSegmenter(
                gt, flip_p, seed_key(seed, "degraded", record.instance_id))
        return factory, None
    if kind == "model":
        path, _, query = rest.partition("?")
        if not path:
            raise ConfigError("model segmenter needs a checkpoint path")
        shared = ModelSegmenter.from_checkpoint(path, **_parse_switches(query))
        return (lambda record, image, gt: shared), shared.params_checksum
    raise ConfigError(f"unknown segmenter id {spec!r}")
