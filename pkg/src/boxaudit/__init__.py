"""boxaudit: find suspicious bounding-box annotations in object-detection
datasets by reducing ground-truth and out-of-sample predicted boxes to a
multi-label classification problem and applying confident learning."""

from boxaudit.clustering import Cluster, cluster_dataset, cluster_image
from boxaudit.confident_learning import (
    BoxVerdict,
    ClassThresholds,
    RowAssessment,
    compute_thresholds,
    detect_issues,
    map_to_boxes,
)
from boxaudit.dataset_io import (
    AnnotatedBox,
    BoxSource,
    Category,
    Dataset,
    ImageInfo,
    PredictionSet,
    load_ground_truth,
    load_ledger,
    load_predictions,
    save_dataset,
    save_ledger,
    save_report,
)
from boxaudit.evaluation import RocCurve, RocPoint, auroc, confusion_at, roc_curve
from boxaudit.geometry import BBox, box_distance, iou
from boxaudit.noise_injection import (
    LedgerEntry,
    NoiseKind,
    NoiseLedger,
    NoiseSpec,
    inject,
    replay,
)
from boxaudit.pipeline import PipelineConfig, run_detection
from boxaudit.reduction import ReducedMatrices, reduce_cluster, reduce_dataset

__version__ = "0.1.0"

__all__ = [
    "AnnotatedBox",
    "BBox",
    "BoxSource",
    "BoxVerdict",
    "Category",
    "ClassThresholds",
    "Cluster",
    "Dataset",
    "ImageInfo",
    "LedgerEntry",
    "NoiseKind",
    "NoiseLedger",
    "NoiseSpec",
    "PipelineConfig",
    "PredictionSet",
    "ReducedMatrices",
    "RocCurve",
    "RocPoint",
    "RowAssessment",
    "auroc",
    "box_distance",
    "cluster_dataset",
    "cluster_image",
    "compute_thresholds",
    "confusion_at",
    "detect_issues",
    "inject",
    "iou",
    "load_ground_truth",
    "load_ledger",
    "load_predictions",
    "map_to_boxes",
    "reduce_cluster",
    "reduce_dataset",
    "replay",
    "roc_curve",
    "run_detection",
    "save_dataset",
    "save_ledger",
    "save_report",
    "__version__",
]
