"""The click-by-click benchmark: session simulation, aggregation, reports.

Each instance runs its own simulated session: the corrector clicks the
worst error region, the segmenter re-predicts, and the IoU after every
click forms the instance's curve.  Aggregates are the mean number of
clicks to reach each IoU threshold (capped at the click budget) and the
mean IoU per click index.  Instances are independent, so evaluation
parallelizes per instance; results merge in manifest order so a run is
reproducible byte for byte.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ..errors import ConfigError, ShapeError, ValidationError
from ..interaction import MAX_CLICKS, Click, next_click
from ..modulation import modulate
from .metrics import clicks_to_reach, iou, miou_curve, noc
from .records import InstanceRecord, load_manifest
from .segmenters import Segmenter, SegmenterFactory, make_segmenter_factory

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class EvalConfig:
    """Benchmark protocol knobs."""

    max_clicks: int = 20
    iou_thresholds: tuple = (0.80, 0.85, 0.90)
    segmenter: str = "oracle"
    modulation: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.max_clicks <= MAX_CLICKS:
            raise ConfigError(f"max_clicks must be in [1, {MAX_CLICKS}], "
                              f"got {self.max_clicks}")
        thresholds = tuple(float(t) for t in self.iou_thresholds)
        if not thresholds:
            raise ConfigError("need at least one IoU threshold")
        if any(not 0.0 < t <= 1.0 for t in thresholds):
            raise ConfigError(f"thresholds must lie in (0, 1], got {thresholds}")
        if not self.segmenter or not isinstance(self.segmenter, str):
            raise ConfigError("segmenter id must be a non-empty string")
        object.__setattr__(self, "iou_thresholds", thresholds)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "EvalConfig":
        raw = json.loads(text)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown evaluation fields: {sorted(unknown)}")
        return cls(**raw)

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path: str) -> "EvalConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())


def run_session(segmenter: Segmenter, image: np.ndarray, gt: np.ndarray,
                config: EvalConfig, trace: list | None = None) -> list[float]:
    """Simulate one correction session; IoU after each click.

    The session stops clicking once the top threshold is reached (or the
    prediction matches the target exactly) and carries the final IoU
    forward, so curves always have length ``max_clicks``.  When ``trace``
    is given, each placed click is appended to it as (Click, IoU).
    """
    gt = np.asarray(gt) != 0
    if gt.ndim != 2:
        raise ShapeError(f"gt must be 2-D, got {gt.shape}")
    h, w = gt.shape
    m_prev = np.zeros((h, w), dtype=np.float32)
    m_mod = np.zeros((h, w), dtype=np.float32)
    clicks: list[Click] = []
    pred = np.zeros((h, w), dtype=bool)
    top = max(config.iou_thresholds)
    curve: list[float] = []
    last = 0.0
    for _ in range(config.max_clicks):
        click = next_click(pred, gt, clicks)
        if click is None:                       # exact match: nothing to correct
            break
        clicks.append(click)
        probs = np.asarray(segmenter.predict(image, m_prev, m_mod, clicks))
        if probs.shape != (h, w):
            raise ShapeError(f"segmenter returned {probs.shape}, expected {(h, w)}")
        pred = probs >= 0.5
        last = iou(pred, gt)
        curve.append(last)
        if trace is not None:
            trace.append((click, last))
        if last >= top:
            break
        m_prev = probs.astype(np.float32)
        if config.modulation:
            m_mod = modulate(probs, click, clicks).astype(np.float32)
        else:
            m_mod = m_prev.copy()
    curve.extend([last] * (config.max_clicks - len(curve)))
    return curve


def evaluate_instance(segmenter: Segmenter, record: InstanceRecord,
                      config: EvalConfig) -> list[float]:
    """Load one record and run its session."""
    image = record.load_image()
    gt = record.load_mask()
    if image.shape[1:] != gt.shape:
        raise ShapeError(f"image {image.shape[1:]} vs mask {gt.shape} "
                         f"for {record.instance_id}")
    return run_session(segmenter, image, gt, config)


@dataclasses.dataclass
class EvalResult:
    config: EvalConfig
    per_instance: list[dict]
    noc: dict[str, float]
    miou_curve: list[float]
    failures: list[dict]

    @property
    def curves(self) -> list[list[float]]:
        return [entry["curve"] for entry in self.per_instance]

    @property
    def failure_fraction(self) -> float:
        total = len(self.per_instance) + len(self.failures)
        return len(self.failures) / total if total else 0.0

    def to_report_dict(self) -> dict:
        return {"config": dataclasses.asdict(self.config),
                "per_instance": self.per_instance,
                "noc": self.noc,
                "miou_curve": self.miou_curve,
                "failures": self.failures}


def _threshold_key(threshold: float) -> str:
    return f"{threshold:.2f}"


def _evaluate_one(record: InstanceRecord, factory: SegmenterFactory,
                  config: EvalConfig) -> tuple[str, object]:
    try:
        image = record.load_image()
        gt = record.load_mask()
        if image.shape[1:] != gt.shape:
            raise ShapeError(f"image {image.shape[1:]} vs mask {gt.shape}")
        segmenter = factory(record, image, gt)
        return "ok", run_session(segmenter, image, gt, config)
    except Exception as exc:                    # noqa: BLE001 — isolate per instance
        return "fail", f"{type(exc).__name__}: {exc}"


def write_report_files(result: EvalResult, json_path: str | Path,
                       csv_path: str | Path, miou_path: str | Path) -> None:
    """Emit the three report artifacts; byte-stable for identical results."""
    report = json.dumps(result.to_report_dict(), indent=1, sort_keys=True)
    Path(json_path).write_text(report + "\n")

    keys = [_threshold_key(t) for t in result.config.iou_thresholds]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["instance_id"] + [f"noc_{k}" for k in keys]
                        + [f"iou_{i + 1:02d}" for i in range(result.config.max_clicks)])
        for entry in result.per_instance:
            writer.writerow([entry["instance_id"]]
                            + [entry["noc"][k] for k in keys]
                            + [repr(v) for v in entry["curve"]])

    with open(miou_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["clicks", "miou"])
        for i, value in enumerate(result.miou_curve, start=1):
            writer.writerow([i, repr(value)])


def _write_reports(result: EvalResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report_files(result, out_dir / "report.json",
                       out_dir / "report.csv", out_dir / "miou.csv")


def run_benchmark(manifest, config: EvalConfig, out_dir: str | Path | None = None,
                  jobs: int = 1, segmenter_factory: SegmenterFactory | None = None,
                  checksum_probe=None) -> EvalResult:
    """Evaluate every manifest instance and aggregate the curves.

    ``manifest`` is a manifest path or a list of records.  Per-instance
    failures are excluded from the aggregates and reported; parameters
    of a model segmenter are checksummed before and after the sweep to
    prove evaluation never trains.  When ``out_dir`` is given, writes
    ``report.json``, ``report.csv`` (one row per instance), and
    ``miou.csv`` (the mean-IoU-per-click table).
    """
    records = manifest if isinstance(manifest, list) else load_manifest(manifest)
    if segmenter_factory is None:
        segmenter_factory, checksum_probe = make_segmenter_factory(
            config.segmenter, config.seed)
    checksum_before = checksum_probe() if checksum_probe is not None else None

    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1 or len(records) <= 1:
        outcomes = [_evaluate_one(r, segmenter_factory, config) for r in records]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(
                lambda r: _evaluate_one(r, segmenter_factory, config), records))

    per_instance: list[dict] = []
    failures: list[dict] = []
    for record, (status, payload) in zip(records, outcomes):
        if status == "ok":
            per_instance.append({
                "instance_id": record.instance_id,
                "curve": payload,
                "noc": {_threshold_key(t): clicks_to_reach(payload, t, config.max_clicks)
                        for t in config.iou_thresholds},
            })
        else:
            failures.append({"instance_id": record.instance_id, "error": payload})
            log.warning("instance %s failed: %s", record.instance_id, payload)
    if failures:
        log.warning("%d of %d instance(s) failed and were excluded",
                    len(failures), len(records))

    if checksum_probe is not None and checksum_probe() != checksum_before:
        raise ValidationError("model parameters changed during evaluation")

    curves = [entry["curve"] for entry in per_instance]
    result = EvalResult(
        config=config,
        per_instance=per_instance,
        noc={_threshold_key(t): noc(curves, t, config.max_clicks)
             for t in config.iou_thresholds} if curves else {},
        miou_curve=miou_curve(curves) if curves else [],
        failures=failures)
    if out_dir is not None:
        _write_reports(result, Path(out_dir))
    return result
