"""Per-image single-linkage clustering of original and predicted boxes.

Two boxes on the same image join a cluster when their IoU reaches the
threshold; clusters are the connected components of that graph, which is
exactly a single-linkage dendrogram cut at distance ``1 - iou_threshold``.
Boxes on different images never share a cluster.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from boxaudit.dataset_io import AnnotatedBox, BoxSource, Dataset, PredictionSet
from boxaudit.errors import InvalidInputError
from boxaudit.geometry import iou_matrix

__all__ = ["Cluster", "cluster_image", "cluster_dataset"]


@dataclass
class Cluster:
    id: int
    image_id: int
    original_members: list[AnnotatedBox] = field(default_factory=list)
    predicted_members: list[AnnotatedBox] = field(default_factory=list)

    @property
    def members(self) -> list[AnnotatedBox]:
        return self.original_members + self.predicted_members

    @property
    def is_background(self) -> bool:
        return not self.original_members


class _UnionFind:
    """Disjoint sets over 0..n-1 with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


def _sort_key(cluster: Cluster) -> tuple:
    if cluster.original_members:
        return (cluster.image_id, min(b.id for b in cluster.original_members), 0)
    return (cluster.image_id, min(b.id for b in cluster.predicted_members), 1)


def cluster_image(boxes: list[AnnotatedBox], iou_threshold: float) -> list[Cluster]:
    """Cluster the boxes of a single image; merges on ties (iou == threshold).

    Returned clusters have ids 0..k-1 ordered by smallest member annotation
    id (original members first). Raises if the boxes span several images.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise InvalidInputError(f"iou_threshold must lie in (0, 1), got {iou_threshold}")
    if not boxes:
        return []
    image_ids = {b.image_id for b in boxes}
    if len(image_ids) > 1:
        raise InvalidInputError(f"boxes span several images: {sorted(image_ids)}")
    image_id = boxes[0].image_id

    coords = np.array([b.bbox.as_list() for b in boxes])
    ious = iou_matrix(coords)
    uf = _UnionFind(len(boxes))
    rows, cols = np.nonzero(np.triu(ious >= iou_threshold, k=1))
    for i, j in zip(rows.tolist(), cols.tolist()):
        uf.union(i, j)

    groups: dict[int, Cluster] = {}
    for idx, box in enumerate(boxes):
        root = uf.find(idx)
        cluster = groups.get(root)
        if cluster is None:
            cluster = groups[root] = Cluster(id=-1, image_id=image_id)
        if box.source == BoxSource.ORIGINAL:
            cluster.original_members.append(box)
        else:
            cluster.predicted_members.append(box)

    clusters = sorted(groups.values(), key=_sort_key)
    for i, c in enumerate(clusters):
        c.id = i
    return clusters


def cluster_dataset(
    ds: Dataset, preds: PredictionSet, iou_threshold: float = 0.5
) -> list[Cluster]:
    """Cluster every image of the dataset together with its predictions.

    Per-image clusterings are concatenated in ascending image-id order and
    cluster ids renumbered globally, so the result is deterministic and forms
    a partition of all input boxes.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise InvalidInputError(f"iou_threshold must lie in (0, 1), got {iou_threshold}")
    by_image: dict[int, list[AnnotatedBox]] = defaultdict(list)
    for box in ds.annotations:
        by_image[box.image_id].append(box)
    for box in preds.boxes:
        by_image[box.image_id].append(box)

    clusters: list[Cluster] = []
    for image_id in sorted(by_image):
        for c in cluster_image(by_image[image_id], iou_threshold):
            c.id = len(clusters)
            clusters.append(c)
    return clusters
