"""Command-line front door: benchmark, trainer, service, and map debugging.

Every subcommand prints its resolved effective configuration as one JSON
line before doing any work, is deterministic given its flags and seed,
and exits 0 on success, 1 on runtime failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .errors import ClickRefineError, ValidationError
from .evaluation import (EvalConfig, InstanceRecord, make_segmenter_factory,
                         run_benchmark, run_session, write_report_files)
from .imageio import (load_image_rgb, load_mask_png, load_prob_png,
                      save_prob_png)
from .interaction import POSITIVE, Click, click_from_json
from .model import ModelConfig, build_params, save_checkpoint
from .modulation import ModulationParams, modulate
from .training import TrainConfig, train


def _announce(command: str, settings: dict) -> None:
    print(json.dumps({"command": command, **settings}, sort_keys=True))


def _parse_thresholds(text: str) -> tuple:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bad threshold list {text!r}; expected e.g. '0.8,0.85,0.9'")


def _resolve_segmenter(spec: str, checkpoint: str | None) -> str:
    if spec == "toy":
        if not checkpoint:
            raise ValidationError("--segmenter toy needs --checkpoint")
        return f"model:{checkpoint}"
    return spec


def cmd_eval(args) -> int:
    segmenter = _resolve_segmenter(args.segmenter, args.checkpoint)
    config = EvalConfig(max_clicks=args.max_clicks,
                        iou_thresholds=args.thresholds,
                        segmenter=segmenter,
                        modulation=not args.no_modulation,
                        seed=args.seed if args.seed is not None else 0)
    _announce("eval", {**dataclasses.asdict(config),
                       "manifest": args.manifest, "jobs": args.jobs,
                       "out": args.out})
    result = run_benchmark(args.manifest, config, jobs=args.jobs)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_report_files(result, out, out.with_suffix(".csv"),
                       out.with_suffix(".miou.csv"))
    print(json.dumps({"noc": result.noc,
                      "instances": len(result.per_instance),
                      "failures": len(result.failures)}, sort_keys=True))
    if result.failure_fraction > 0.01:
        print(f"error: {len(result.failures)} of "
              f"{len(result.per_instance) + len(result.failures)} instances "
              "failed", file=sys.stderr)
        return 1
    return 0


def cmd_train(args) -> int:
    config = TrainConfig.load(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    model_config = (ModelConfig.load(args.model_config)
                    if args.model_config else ModelConfig())
    _announce("train", {**dataclasses.asdict(config),
                        "model": dataclasses.asdict(model_config),
                        "out": args.out})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = build_params(model_config, seed=config.seed)
    history = train(params, model_config, config,
                    log_path=args.log or str(out / "train_log.jsonl"))
    save_checkpoint(str(out), params, model_config)
    print(json.dumps({"checkpoint": str(out), "steps": len(history),
                      "final_loss": history[-1]["loss"]}, sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, app_from_checkpoint

    service_config = ServiceConfig(max_image_dim=args.max_image_dim,
                                   ttl_seconds=args.ttl_seconds)
    _announce("serve", {"checkpoint": args.checkpoint, "host": args.host,
                        "port": args.port, "static": args.static,
                        **dataclasses.asdict(service_config)})
    app = app_from_checkpoint(args.checkpoint, service_config=service_config,
                              static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _load_clicks(path: str) -> list[Click]:
    try:
        entries = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read clicks file {path}: {exc}")
    if not isinstance(entries, list) or not entries:
        raise ValidationError("clicks file must be a non-empty JSON array")
    clicks = []
    for i, entry in enumerate(entries):
        entry = dict(entry)
        entry.setdefault("ordinal", i + 1)
        clicks.append(click_from_json(entry))
    return clicks


def cmd_modulate(args) -> int:
    clicks = _load_clicks(args.clicks)
    params = ModulationParams(r_max=args.rmax, r_min=args.rmin)
    _announce("modulate", {"prob": args.prob, "clicks": args.clicks,
                           "out": args.out, "click_count": len(clicks),
                           **dataclasses.asdict(params)})
    prob = load_prob_png(args.prob)
    adjusted = modulate(prob, clicks[-1], clicks, params=params)
    save_prob_png(adjusted, args.out)
    changed = int((adjusted != prob).sum())
    print(json.dumps({"out": args.out, "changed_pixels": changed}))
    return 0


def cmd_simulate(args) -> int:
    segmenter_id = _resolve_segmenter(args.segmenter, args.checkpoint)
    seed = args.seed if args.seed is not None else 0
    config = EvalConfig(max_clicks=args.max_clicks, segmenter=segmenter_id,
                        modulation=not args.no_modulation, seed=seed)
    _announce("simulate", {**dataclasses.asdict(config),
                           "image": args.image, "gt": args.gt})
    image = load_image_rgb(args.image)
    gt = load_mask_png(args.gt)
    if not gt.any():
        raise ValidationError(f"gt mask {args.gt} is empty")
    record = InstanceRecord(args.image, args.gt, Path(args.image).stem)
    factory, _ = make_segmenter_factory(segmenter_id, seed)
    trace: list = []
    curve = run_session(factory(record, image, gt), image, gt, config,
                        trace=trace)
    for click, value in trace:
        print(json.dumps({"ordinal": click.ordinal, "x": click.x,
                          "y": click.y,
                          "kind": "pos" if click.kind == POSITIVE else "neg",
                          "iou": value}))
    print(json.dumps({"clicks": len(trace), "final_iou": curve[-1]}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clickrefine",
        description="Click-guided segmentation: benchmark, train, serve, debug.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (default: 0, or the config's)")

    p = sub.add_parser("eval", parents=[common],
                       help="run the click-by-click benchmark")
    p.add_argument("--manifest", required=True)
    p.add_argument("--segmenter", default="toy",
                   help="toy | oracle | zero | degraded:<p> | model:<dir>")
    p.add_argument("--checkpoint", default=None,
                   help="checkpoint directory backing --segmenter toy")
    p.add_argument("--max-clicks", type=int, default=20)
    p.add_argument("--thresholds", type=_parse_thresholds,
                   default=(0.8, 0.85, 0.9), metavar="T1,T2,...")
    p.add_argument("--no-modulation", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("train", parents=[common],
                       help="train from a config file, save a checkpoint")
    p.add_argument("--config", required=True)
    p.add_argument("--model-config", default=None)
    p.add_argument("--log", default=None, help="JSONL step log path")
    p.add_argument("--out", required=True, help="checkpoint directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("serve", parents=[common],
                       help="start the annotation session service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", default=None,
                   help="directory of UI assets to serve at /")
    p.add_argument("--ttl-seconds", type=float, default=1800.0)
    p.add_argument("--max-image-dim", type=int, default=2048)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("modulate", parents=[common],
                       help="apply the click adjustment to a probability map")
    p.add_argument("--prob", required=True, help="16-bit grayscale PNG in")
    p.add_argument("--clicks", required=True, help="JSON array of clicks")
    p.add_argument("--rmax", type=float, default=100.0)
    p.add_argument("--rmin", type=float, default=5.0)
    p.add_argument("--out", required=True, help="16-bit grayscale PNG out")
    p.set_defaults(func=cmd_modulate)

    p = sub.add_parser("simulate", parents=[common],
                       help="print the simulated click sequence for one image")
    p.add_argument("--image", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--segmenter", default="toy")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--max-clicks", type=int, default=20)
    p.add_argument("--no-modulation", action="store_true")
    p.set_defaults(func=cmd_simulate)
    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ClickRefineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())
