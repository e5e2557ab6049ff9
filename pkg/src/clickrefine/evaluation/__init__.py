"""Benchmarking: manifests, reference segmenters, the NoC/mIoU protocol."""

from .bench import (EvalConfig, EvalResult, evaluate_instance, run_benchmark,
                    run_session, write_report_files)
from .coco import (decode_rle_counts, decode_rle_string, import_coco,
                   polygons_to_mask, segmentation_to_mask)
from .metrics import clicks_to_reach, iou, miou_curve, noc
from .records import (InstanceRecord, load_manifest, write_manifest,
                      write_synthetic_manifest)
from .segmenters import (DegradedOracleSegmenter, ModelSegmenter,
                         OracleSegmenter, Segmenter, SegmenterFactory,
                         ZeroSegmenter, make_segmenter_factory)

__all__ = [
    "DegradedOracleSegmenter", "EvalConfig", "EvalResult", "InstanceRecord",
    "ModelSegmenter", "OracleSegmenter", "Segmenter", "SegmenterFactory",
    "ZeroSegmenter", "clicks_to_reach", "decode_rle_counts",
    "decode_rle_string", "evaluate_instance", "import_coco", "iou",
    "load_manifest", "make_segmenter_factory", "miou_curve", "noc",
    "polygons_to_mask", "run_benchmark", "run_session",
    "segmentation_to_mask", "write_manifest", "write_report_files",
    "write_synthetic_manifest",
]
