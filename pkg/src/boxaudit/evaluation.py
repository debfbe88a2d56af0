"""Score detector verdicts against a noise ledger: confusion counts over a
quality-score cutoff, the ROC sweep, and trapezoidal AUROC.

An annotation counts as predicted-positive when its quality score is at or
below the cutoff, and as actual-positive when the ledger perturbed it.
Removed (missing-noise) annotations are credited through missing_region
verdicts: flagged regions are greedily matched one-to-one to removed records
of the same image by descending IoU; a matched record is a true positive, an
unmatched record a false negative, and an unmatched flagged region a false
positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from boxaudit.confident_learning import BoxVerdict
from boxaudit.errors import EmptyLedgerError, InvalidInputError
from boxaudit.geometry import iou
from boxaudit.noise_injection import NoiseKind, NoiseLedger

__all__ = [
    "RocPoint",
    "RocCurve",
    "Confusion",
    "DEFAULT_THRESHOLDS",
    "confusion_at",
    "roc_curve",
    "auroc",
    "dense_thresholds",
]

DEFAULT_THRESHOLDS = [i / 10 for i in range(11)]

DEFAULT_MATCH_IOU = 0.5


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    fpr: float
    tpr: float


@dataclass
class RocCurve:
    points: list[RocPoint]
    auroc: float


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def fpr(self) -> float:
        total = self.fp + self.tn
        return self.fp / total if total else 0.0

    @property
    def tpr(self) -> float:
        total = self.tp + self.fn
        return self.tp / total if total else 0.0


class _Prepared:
    """Verdicts and ledger cross-indexed once so each sweep threshold is a
    cheap pass."""

    def __init__(self, verdicts: list[BoxVerdict], ledger: NoiseLedger, match_iou: float):
        removed = [e for e in ledger.entries if e.kind == NoiseKind.MISSING]
        positive_ids = {
            e.annotation_id for e in ledger.entries if e.kind != NoiseKind.MISSING
        }

        ann = [v for v in verdicts if v.annotation_id is not None]
        regions = [v for v in verdicts if v.annotation_id is None]
        known_ids = {v.annotation_id for v in ann}
        stray = positive_ids - known_ids
        if stray:
            raise InvalidInputError(
                f"ledger references annotations absent from the verdicts "
                f"(e.g. {sorted(stray)[:3]}); verdicts and ledger must come "
                f"from the same dataset"
            )

        self.ann_scores = np.array([v.quality_score for v in ann], dtype=np.float64)
        self.ann_positive = np.array(
            [v.annotation_id in positive_ids for v in ann], dtype=bool
        )
        self.region_scores = np.array([v.quality_score for v in regions], dtype=np.float64)
        self.n_removed = len(removed)

        pairs = []
        for ri, rv in enumerate(regions):
            if rv.region is None:
                continue
            for mi, entry in enumerate(removed):
                if entry.original is None or entry.original.image_id != rv.image_id:
                    continue
                overlap = iou(rv.region, entry.original.bbox)
                if overlap >= match_iou:
                    pairs.append((overlap, ri, mi))
        # descending IoU, deterministic tie-break by verdict then record order
        self.pairs = sorted(pairs, key=lambda t: (-t[0], t[1], t[2]))

    def confusion(self, tau: float) -> Confusion:
        flagged = self.ann_scores <= tau
        tp = int(np.count_nonzero(flagged & self.ann_positive))
        fp = int(np.count_nonzero(flagged & ~self.ann_positive))
        tn = int(np.count_nonzero(~flagged & ~self.ann_positive))
        fn = int(np.count_nonzero(~flagged & self.ann_positive))

        flagged_regions = self.region_scores <= tau
        used_regions: set[int] = set()
        used_removed: set[int] = set()
        for _, ri, mi in self.pairs:
            if flagged_regions[ri] and ri not in used_regions and mi not in used_removed:
                used_regions.add(ri)
                used_removed.add(mi)
        matched = len(used_removed)
        tp += matched
        fn += self.n_removed - matched
        fp += int(np.count_nonzero(flagged_regions)) - len(used_regions)
        return Confusion(tp=tp, fp=fp, tn=tn, fn=fn)


def confusion_at(
    verdicts: list[BoxVerdict],
    ledger: NoiseLedger,
    tau: float,
    *,
    match_iou: float = DEFAULT_MATCH_IOU,
) -> Confusion:
    """Confusion counts of the noisy-box classifier at cutoff ``tau``."""
    return _Prepared(verdicts, ledger, match_iou).confusion(tau)


def roc_curve(
    verdicts: list[BoxVerdict],
    ledger: NoiseLedger,
    thresholds: list[float] | None = None,
    *,
    match_iou: float = DEFAULT_MATCH_IOU,
) -> RocCurve:
    """Sweep the cutoff over ``thresholds`` (default 0.0, 0.1, ..., 1.0) and
    integrate the resulting (FPR, TPR) points into an AUROC."""
    if len(ledger) == 0:
        raise EmptyLedgerError(
            "the ledger holds no perturbations; evaluation requires injected noise"
        )
    if thresholds is None:
        thresholds = DEFAULT_THRESHOLDS
    if sorted(thresholds) != list(thresholds):
        raise InvalidInputError("thresholds must be sorted ascending")
    if not thresholds or thresholds[0] != 0.0 or thresholds[-1] != 1.0:
        raise InvalidInputError("thresholds must contain the endpoints 0 and 1")

    prepared = _Prepared(verdicts, ledger, match_iou)
    points = []
    for tau in thresholds:
        c = prepared.confusion(tau)
        points.append(RocPoint(threshold=tau, fpr=c.fpr, tpr=c.tpr))
    return RocCurve(points=points, auroc=auroc([(p.fpr, p.tpr) for p in points]))


def auroc(points: list[tuple[float, float]]) -> float:
    """Trapezoidal area under (fpr, tpr) points, sorted by fpr and anchored
    at (0, 0) and (1, 1)."""
    if len(points) < 2:
        raise InvalidInputError("auroc needs at least 2 points")
    pts = sorted(list(points) + [(0.0, 0.0), (1.0, 1.0)])
    area = 0.0
    for (x1, y1), (x2, y2) in zip(pts, pts[1:]):
        area += (x2 - x1) * (y1 + y2) / 2.0
    return area


def dense_thresholds(verdicts: list[BoxVerdict]) -> list[float]:
    """Every distinct quality score plus the 0/1 endpoints: the exact sweep."""
    scores = {0.0, 1.0}
    scores.update(v.quality_score for v in verdicts)
    return sorted(scores)
