"""Reduce box clusters to one-row label/probability pairs.

Each cluster becomes one row of a binary label matrix and one row of a
predicted-probability matrix, both with M+1 columns: the M real classes plus
a synthetic background class in the last column. A cluster with no original
boxes is labeled background; a cluster with no predicted scores gets
background probability 1. This turns the detection audit into a multi-label
classification problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from boxaudit.clustering import Cluster
from boxaudit.errors import InvalidInputError

__all__ = ["ReducedMatrices", "reduce_cluster", "reduce_dataset"]


@dataclass
class ReducedMatrices:
    """Row k of ``labels``/``probs`` describes cluster ``row_clusters[k]``.

    Column m-1 holds class m (dense ids 1..M); column M is background.
    """

    labels: np.ndarray  # (N, M+1) uint8
    probs: np.ndarray  # (N, M+1) float64
    row_clusters: list[Cluster]
    num_classes: int

    @property
    def background_column(self) -> int:
        return self.num_classes


def reduce_cluster(cluster: Cluster, num_classes: int) -> tuple[np.ndarray, np.ndarray]:
    """Compute one (label row, probability row) pair for a cluster.

    The label row marks every class that occurs among the cluster's original
    boxes, or background if there are none. Each real-class probability is
    the maximum score of the cluster's predicted boxes with that label (0 if
    none); the background probability is 1 exactly when all real-class
    probabilities are 0.
    """
    y = np.zeros(num_classes + 1, dtype=np.uint8)
    p = np.zeros(num_classes + 1, dtype=np.float64)

    for box in cluster.original_members:
        if not 1 <= box.category_id <= num_classes:
            raise InvalidInputError(
                f"annotation {box.id}: label {box.category_id} outside 1..{num_classes}"
            )
        y[box.category_id - 1] = 1
    if not y.any():
        y[num_classes] = 1

    for box in cluster.predicted_members:
        if not 1 <= box.category_id <= num_classes:
            raise InvalidInputError(
                f"prediction {box.id}: label {box.category_id} outside 1..{num_classes}"
            )
        col = box.category_id - 1
        p[col] = max(p[col], box.score)
    if p[:num_classes].sum() == 0:
        p[num_classes] = 1.0

    return y, p


def reduce_dataset(clusters: list[Cluster], num_classes: int) -> ReducedMatrices:
    """Stack per-cluster rows in cluster order into the reduced matrices."""
    labels = np.zeros((len(clusters), num_classes + 1), dtype=np.uint8)
    probs = np.zeros((len(clusters), num_classes + 1), dtype=np.float64)
    for k, cluster in enumerate(clusters):
        labels[k], probs[k] = reduce_cluster(cluster, num_classes)
    return ReducedMatrices(
        labels=labels, probs=probs, row_clusters=list(clusters), num_classes=num_classes
    )


def dump_matrices(matrices: ReducedMatrices) -> str:
    """Tabular text dump of the reduced matrices for inspection (one line
    per cluster, keyed by cluster id)."""
    lines = ["cluster_id\tlabels\tprobs"]
    for k, cluster in enumerate(matrices.row_clusters):
        y = ",".join(str(int(v)) for v in matrices.labels[k])
        p = ",".join(f"{v:.4f}" for v in matrices.probs[k])
        lines.append(f"{cluster.id}\t{y}\t{p}")
    return "\n".join(lines) + "\n"
