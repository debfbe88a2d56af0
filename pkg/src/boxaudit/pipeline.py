"""End-to-end orchestration: inject -> cluster -> reduce -> detect -> map ->
report/evaluate, with file-based handoff between stages."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, replace
from pathlib import Path

from boxaudit import confident_learning as cl
from boxaudit import dataset_io
from boxaudit.clustering import Cluster, cluster_dataset
from boxaudit.confident_learning import BoxVerdict, ClassThresholds, RowAssessment
from boxaudit.errors import InvalidInputError, InvalidSpecError
from boxaudit.evaluation import (
    DEFAULT_MATCH_IOU,
    RocCurve,
    dense_thresholds,
    roc_curve,
)
from boxaudit.noise_injection import NoiseSpec, inject
from boxaudit.reduction import ReducedMatrices, reduce_dataset

__all__ = ["PipelineConfig", "DetectionResult", "run_detection", "cmd_inject", "cmd_detect", "cmd_eval", "cmd_roc"]


@dataclass
class PipelineConfig:
    """Everything a pipeline stage needs; built by the CLI from flags."""

    ground_truth_path: str | None = None
    predictions_path: str | None = None
    iou_threshold: float = 0.5
    cl_mode: str = cl.MODE_CONFIDENT_JOINT
    tau: float | None = None
    noise: NoiseSpec | None = None
    ledger_path: str | None = None
    report_path: str | None = None
    output_dir: Path = Path(".")
    runs: int = 1
    seed: int = 0
    sweep: str = "grid"
    match_iou: float = DEFAULT_MATCH_IOU

    def __post_init__(self):
        if not 0.0 < self.iou_threshold < 1.0:
            raise InvalidInputError(
                f"iou threshold must lie in (0, 1), got {self.iou_threshold}"
            )
        if self.runs < 1:
            raise InvalidInputError(f"runs must be >= 1, got {self.runs}")
        self.output_dir = Path(self.output_dir)


@dataclass
class DetectionResult:
    clusters: list[Cluster]
    matrices: ReducedMatrices
    thresholds: ClassThresholds
    rows: list[RowAssessment]
    verdicts: list[BoxVerdict]


def run_detection(
    ds: dataset_io.Dataset,
    preds: dataset_io.PredictionSet,
    iou_threshold: float = 0.5,
    *,
    mode: str = cl.MODE_CONFIDENT_JOINT,
    tau: float | None = None,
) -> DetectionResult:
    """Cluster, reduce, and run confident learning over a dataset with its
    predictions; the one code path behind detect/eval."""
    clusters = cluster_dataset(ds, preds, iou_threshold)
    matrices = reduce_dataset(clusters, ds.num_categories)
    thresholds = cl.compute_thresholds(matrices)
    rows = cl.detect_issues(matrices, thresholds)
    verdicts = cl.map_to_boxes(matrices, rows, mode=mode, tau=tau)
    return DetectionResult(
        clusters=clusters,
        matrices=matrices,
        thresholds=thresholds,
        rows=rows,
        verdicts=verdicts,
    )


def cmd_inject(config: PipelineConfig) -> tuple[Path, Path]:
    """Corrupt a dataset per the noise spec; writes noisy.json + ledger.json."""
    if config.noise is None:
        raise InvalidSpecError("inject requires a noise specification")
    ds = dataset_io.load_ground_truth(config.ground_truth_path)
    noisy, ledger = inject(ds, config.noise)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    noisy_path = config.output_dir / "noisy.json"
    ledger_path = config.output_dir / "ledger.json"
    dataset_io.save_dataset(noisy, noisy_path)
    dataset_io.save_ledger(ledger, ledger_path, noisy.categories)
    print(f"noisy dataset: {noisy_path} ({len(noisy.annotations)} annotations)")
    print(f"ledger: {ledger_path} ({len(ledger)} entries)")
    return noisy_path, ledger_path


def cmd_detect(config: PipelineConfig) -> Path:
    """Find suspicious annotations; writes report.csv + report.json."""
    ds = dataset_io.load_ground_truth(config.ground_truth_path)
    preds = dataset_io.load_predictions(config.predictions_path, ds)
    result = run_detection(
        ds, preds, config.iou_threshold, mode=config.cl_mode, tau=config.tau
    )
    config.output_dir.mkdir(parents=True, exist_ok=True)
    report_path = config.output_dir / "report.csv"
    report = dataset_io.DetectionReport(
        verdicts=result.verdicts, clusters=result.clusters, categories=ds.categories
    )
    dataset_io.save_report(report, report_path)
    flagged_rows = sum(1 for r in result.rows if _row_flagged(r, config))
    flagged_annotations = sum(
        1 for v in result.verdicts if v.flagged and v.annotation_id is not None
    )
    missing_regions = sum(
        1 for v in result.verdicts if v.flagged and v.annotation_id is None
    )
    print(f"clusters: {len(result.clusters)}")
    print(f"flagged rows: {flagged_rows}")
    print(f"flagged annotations: {flagged_annotations}")
    print(f"missing regions: {missing_regions}")
    print(f"report written to {report_path}")
    return report_path


def _row_flagged(row: RowAssessment, config: PipelineConfig) -> bool:
    if config.cl_mode == cl.MODE_SCORE_THRESHOLD:
        return row.quality_score <= (config.tau if config.tau is not None else 1.0)
    return row.flagged


def _sweep_thresholds(verdicts: list[BoxVerdict], sweep: str) -> list[float] | None:
    return dense_thresholds(verdicts) if sweep == "dense" else None


def cmd_eval(config: PipelineConfig) -> Path:
    """ROC/AUROC evaluation; writes roc.csv + roc.json.

    With a noise spec: inject (per run, seeds seed..seed+runs-1), detect, and
    sweep; several runs are aggregated by their median AUROC. Without one:
    evaluate the given (already noisy) dataset against its ledger file.
    """
    ds = dataset_io.load_ground_truth(config.ground_truth_path)
    preds = dataset_io.load_predictions(config.predictions_path, ds)
    config.output_dir.mkdir(parents=True, exist_ok=True)

    curves: list[tuple[int, RocCurve]] = []
    if config.noise is not None:
        for run in range(config.runs):
            spec = replace(config.noise, seed=config.noise.seed + run)
            noisy, ledger = inject(ds, spec)
            result = run_detection(
                noisy,
                preds,
                config.iou_threshold,
                mode=cl.MODE_SCORE_THRESHOLD,
                tau=1.0,
            )
            thresholds = _sweep_thresholds(result.verdicts, config.sweep)
            curve = roc_curve(
                result.verdicts, ledger, thresholds, match_iou=config.match_iou
            )
            curves.append((spec.seed, curve))
    else:
        if config.ledger_path is None:
            raise InvalidSpecError(
                "eval needs either a noise spec (--noise-kind ...) or an "
                "existing ledger (--ledger)"
            )
        ledger = dataset_io.load_ledger(config.ledger_path, ds)
        result = run_detection(
            ds, preds, config.iou_threshold, mode=cl.MODE_SCORE_THRESHOLD, tau=1.0
        )
        thresholds = _sweep_thresholds(result.verdicts, config.sweep)
        curve = roc_curve(
            result.verdicts, ledger, thresholds, match_iou=config.match_iou
        )
        curves.append((config.seed, curve))

    roc_path = config.output_dir / "roc.csv"
    run_aurocs = [(seed, curve.auroc) for seed, curve in curves]
    dataset_io.save_roc(
        curves[0][1], roc_path, run_aurocs=run_aurocs if len(curves) > 1 else None
    )
    for seed, curve in curves:
        print(f"run seed={seed}: auroc={curve.auroc:.6f}")
    median = statistics.median(a for _, a in run_aurocs)
    print(f"median auroc = {median:.6f}")
    print(f"roc written to {roc_path}")
    return roc_path


def cmd_roc(config: PipelineConfig) -> Path:
    """Re-sweep an existing report (its JSON mirror) against a ledger file."""
    if config.report_path is None or config.ledger_path is None:
        raise InvalidSpecError("roc requires --report and --ledger")
    ds = dataset_io.load_ground_truth(config.ground_truth_path)
    verdicts = dataset_io.load_report(config.report_path)
    ledger = dataset_io.load_ledger(config.ledger_path, ds)
    thresholds = _sweep_thresholds(verdicts, config.sweep)
    curve = roc_curve(verdicts, ledger, thresholds, match_iou=config.match_iou)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    roc_path = config.output_dir / "roc.csv"
    dataset_io.save_roc(curve, roc_path)
    print(f"auroc = {curve.auroc:.6f}")
    print(f"roc written to {roc_path}")
    return roc_path
