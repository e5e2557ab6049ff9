"""Training configuration, sample synthesis, and the epoch loop."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from ..engine import ParamSet, Tensor, concat, resize_bilinear
from ..errors import ConfigError, NumericError
from ..interaction import MAX_CLICKS, Click, sample_training_clicks
from ..model import ModelConfig, forward_logits, predict, session_inputs
from ..modulation import modulate
from ..seeding import seed_key
from ..state import SessionState
from .loss import normalized_focal_loss
from .optim import Adam
from .synth import augment, synthetic_dataset


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    samples_per_epoch: int = 200
    lr: float = 5e-5
    lr_drop_epochs: tuple[int, ...] = (4, 17)
    betas: tuple[float, float] = (0.9, 0.999)
    batch: int = 4
    max_clicks: int = 24
    crop: int = 64
    modulate_during_training: bool = True
    seed: int = 0
    round_count_range: tuple[int, int] = (1, 3)
    gamma: float = 2.0

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if not 1 <= self.max_clicks <= MAX_CLICKS:
            raise ConfigError(f"max_clicks must be in 1..{MAX_CLICKS}")
        if self.epochs < 1 or self.samples_per_epoch < 1 or self.batch < 1:
            raise ConfigError("epochs, samples_per_epoch, batch must be >= 1")
        if self.crop < 8:
            raise ConfigError("crop too small")
        if self.gamma < 0:
            raise ConfigError("gamma must be non-negative")
        lo, hi = self.round_count_range
        if not 1 <= lo <= hi:
            raise ConfigError("round_count_range must satisfy 1 <= lo <= hi")
        object.__setattr__(self, "lr_drop_epochs", tuple(self.lr_drop_epochs))
        object.__setattr__(self, "betas", tuple(self.betas))
        object.__setattr__(self, "round_count_range",
                           tuple(self.round_count_range))

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "TrainConfig":
        raw = json.loads(text)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown training fields: {sorted(unknown)}")
        return cls(**raw)

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path: str) -> "TrainConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())


# 60 epochs x 30000 samples at 448-pixel crops, batch 16, lr 5e-5 dropped
# 10x at epochs 10 and 50.  Documented for completeness; running it needs
# accelerator-scale compute, and desk runs use the defaults above.
FULL_SCALE = TrainConfig(epochs=60, samples_per_epoch=30000, lr=5e-5,
                         lr_drop_epochs=(10, 50), batch=16, crop=448)


def learning_rate_at(epoch: int, config: TrainConfig) -> float:
    """Effective lr for a 1-based epoch: each passed drop multiplies by 0.1."""
    lr = config.lr
    for drop in sorted(config.lr_drop_epochs):
        if epoch >= drop:
            lr = lr * 0.1
    return lr


@dataclass
class TrainSample:
    image: np.ndarray          # (3, S, S) float32
    m_prev: np.ndarray         # (S, S) float32
    m_mod: np.ndarray          # (S, S) float32
    clicks: list[Click]
    gt: np.ndarray             # (S, S) bool


def synthesize_sample(image: np.ndarray, gt: np.ndarray, params: ParamSet,
                      model_config: ModelConfig, config: TrainConfig,
                      seed, round_count: int = 1) -> TrainSample:
    """Play ``round_count`` interaction rounds against the current model.

    Round 1 draws random clicks and leaves both carried maps at zero.
    Each later round predicts, stores the raw map, optionally modulates it
    around the newest click, and samples one corrective click — exactly the
    state a user-facing round would hand to the next prediction.  No
    gradients are kept; only arrays cross back into the supervised step.
    """
    gt = np.asarray(gt, bool)
    h, w = gt.shape
    clicks = sample_training_clicks(gt, rng_seed=(seed, "round", 1),
                                    max_clicks=config.max_clicks)
    m_prev = np.zeros((h, w), np.float32)
    m_mod = np.zeros((h, w), np.float32)
    for r in range(2, round_count + 1):
        session = SessionState(session_id="synth", image=image, m_prev=m_prev,
                               m_mod=m_mod, clicks=list(clicks))
        probs = predict(session, params, model_config)
        m_prev = probs
        newest = clicks[-1]
        m_mod = (modulate(probs, newest, clicks)
                 if config.modulate_during_training else probs.copy())
        clicks = sample_training_clicks(gt, current_pred=probs, round=r,
                                        rng_seed=(seed, "round", r),
                                        prior_clicks=clicks,
                                        max_clicks=config.max_clicks)
    return TrainSample(image=image, m_prev=m_prev, m_mod=m_mod,
                       clicks=clicks, gt=gt)


def _batch_inputs(samples: list[TrainSample], model_config: ModelConfig
                  ) -> tuple[Tensor, Tensor]:
    images, auxes = [], []
    for s in samples:
        session = SessionState(session_id="batch", image=s.image,
                               m_prev=s.m_prev, m_mod=s.m_mod,
                               clicks=list(s.clicks))
        img, aux = session_inputs(session, model_config)
        images.append(img)
        auxes.append(aux)
    return concat(images, axis=0), concat(auxes, axis=0)


def train_step(samples: list[TrainSample], params: ParamSet, opt: Adam,
               model_config: ModelConfig, lr: float,
               gamma: float = 2.0) -> float:
    """One supervised update on a synthesized batch; returns the loss."""
    if not samples:
        raise ConfigError("empty batch")
    image, aux = _batch_inputs(samples, model_config)
    logits = forward_logits(image, aux, params, model_config)
    h, w = samples[0].gt.shape
    if logits.shape[2:] != (h, w):
        logits = resize_bilinear(logits, h, w)
    gt = np.stack([s.gt for s in samples])[:, None]
    loss = normalized_focal_loss(logits, gt, gamma=gamma)
    value = float(loss.data)
    if not np.isfinite(value):
        raise NumericError("training loss is non-finite")
    params.zero_grads()
    loss.backward()
    opt.step(params, lr)
    return value


def train(params: ParamSet, model_config: ModelConfig, config: TrainConfig,
          dataset=None, log_path: str | None = None) -> list[dict]:
    """Seeded epoch loop over a (possibly synthetic) dataset.

    Returns one log record per step ({"epoch", "step", "loss", "lr"});
    the same records go to ``log_path`` as JSON lines when given.
    """
    if dataset is None:
        dataset = synthetic_dataset(config.samples_per_epoch, config.crop,
                                    config.seed)
    opt = Adam(params, betas=config.betas)
    history: list[dict] = []
    log_fh = open(log_path, "w") if log_path else None
    try:
        for epoch in range(1, config.epochs + 1):
            lr = learning_rate_at(epoch, config)
            order_rng = np.random.default_rng(
                seed_key(config.seed, "order", epoch))
            order = order_rng.permutation(len(dataset))
            steps = max(1, config.samples_per_epoch // config.batch)
            for step in range(steps):
                batch = []
                for j in range(config.batch):
                    idx = int(order[(step * config.batch + j) % len(order)])
                    image, gt = dataset[idx]
                    image, gt = augment(image, gt,
                                        (config.seed, "aug", epoch, step, j))
                    draw = np.random.default_rng(
                        seed_key(config.seed, "rounds", epoch, step, j))
                    lo, hi = config.round_count_range
                    rounds = int(draw.integers(lo, hi + 1))
                    batch.append(synthesize_sample(
                        image, gt, params, model_config, config,
                        (config.seed, "sample", epoch, step, j), rounds))
                loss = train_step(batch, params, opt, model_config, lr,
                                  gamma=config.gamma)
                record = {"epoch": epoch, "step": step, "loss": loss, "lr": lr}
                history.append(record)
                if log_fh:
                    log_fh.write(json.dumps(record) + "\n")
    finally:
        if log_fh:
            log_fh.close()
    return history
