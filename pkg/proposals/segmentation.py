"""
Movable-point extraction and over-segmentation into part proposals.
이동 점 추출 및 과분할 기반 부분 제안 생성

- extract_movable: P⁰ points farther than tau from P¹
- point_features: z-scored (normal, curvature) descriptors from local PCA
- oversegment: FPS seeds, points grown to the seed of least blended cost
- merge_overlapping: transitive union of proposals sharing most of their points
- baseline_segmentation: hierarchical clustering into a known part count
"""
from dataclasses import dataclass
from typing import List, Optional, Union
import logging

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import cdist

from geometry import KNNIndex, PointCloud, as_points, farthest_point_sample, median_spacing


logger = logging.getLogger(__name__)

FALLBACK_SPACING = 1e-3
FEATURE_TOLERANCE = 1e-8


# ============================================================================
# MOVABLE POINTS
# ============================================================================

def default_tau(p0: Union[PointCloud, np.ndarray], factor: float = 2.0) -> float:
    """Movable threshold: ``factor`` × median nearest-neighbor spacing of P⁰."""
    spacing = median_spacing(p0)
    return factor * (spacing if spacing > 0 else FALLBACK_SPACING)


def extract_movable(
    p0: Union[PointCloud, np.ndarray],
    p1: Union[PointCloud, np.ndarray, KNNIndex],
    tau: float,
) -> np.ndarray:
    """
    Indices of P⁰ points whose nearest P¹ neighbor is farther than ``tau``.
    상태 1에 대응점이 없는 이동 점 추출

    Returns:
        Sorted int64 indices (possibly empty)

    Raises:
        ValueError: Empty cloud or tau ≤ 0
    """
    points = as_points(p0)
    index = p1 if isinstance(p1, KNNIndex) else KNNIndex(p1)
    if len(points) == 0 or len(index) == 0:
        raise ValueError("extract_movable needs two nonempty clouds")
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    _, d2 = index.nearest(points)
    return np.flatnonzero(d2 > tau * tau).astype(np.int64)


# ============================================================================
# FEATURES
# ============================================================================

def point_features(points: Union[PointCloud, np.ndarray], k: int = 16) -> np.ndarray:
    """
    Local-geometry descriptor per point.
    지역 PCA 기반 기하 특징 (법선 + 곡률)

    The normal is the least-variance direction of the k-NN neighborhood
    (sign chosen so its components sum to ≥ 0), curvature is
    λ_min / Σλ. Columns are z-scored.

    Returns:
        (N, 4) features
    """
    pts = as_points(points)
    n = len(pts)
    if n == 0:
        return np.zeros((0, 4))
    k_eff = max(1, min(k, n))
    idx, _ = KNNIndex(pts).query(pts, k_eff)
    neighborhoods = pts[idx]
    centered = neighborhoods - neighborhoods.mean(axis=1, keepdims=True)
    covariance = np.einsum('nki,nkj->nij', centered, centered) / k_eff
    eigvals, eigvecs = np.linalg.eigh(covariance)

    normals = eigvecs[:, :, 0]
    flip = normals.sum(axis=1) < 0
    normals[flip] *= -1.0
    total = eigvals.sum(axis=1)
    curvature = np.divide(eigvals[:, 0], total, out=np.zeros(n), where=total > 0)

    features = np.column_stack([normals, curvature])
    std = features.std(axis=0)
    std[std < FEATURE_TOLERANCE] = 1.0
    return (features - features.mean(axis=0)) / std


# ============================================================================
# SEGMENTATION
# ============================================================================

@dataclass
class Segmentation:
    """
    Over-segmentation of the movable points.

    Attributes:
        labels: (N,) proposal id of every movable point (best seed)
        seeds: (M,) movable-point index of each proposal's seed
        members: per proposal, the sorted point indices it covers; points
            whose best and second-best costs are nearly equal belong to both
        count: M
    """
    labels: np.ndarray
    seeds: np.ndarray
    members: List[np.ndarray]
    count: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.seeds = np.asarray(self.seeds, dtype=np.int64)
        self.members = [np.unique(np.asarray(m, dtype=np.int64)) for m in self.members]
        if self.count < 1 or len(self.members) != self.count:
            raise ValueError("Segmentation needs at least one proposal and one member set each")

    @classmethod
    def from_labels(cls, labels: np.ndarray, seeds: Optional[np.ndarray] = None) -> 'Segmentation':
        """Plain partition: every proposal's members are its labeled points."""
        labels = np.asarray(labels, dtype=np.int64)
        count = int(labels.max()) + 1 if len(labels) else 0
        members = [np.flatnonzero(labels == m) for m in range(count)]
        if seeds is None:
            seeds = np.array([m[0] for m in members], dtype=np.int64)
        return cls(labels, seeds, members, count)

    def sizes(self) -> np.ndarray:
        return np.array([len(m) for m in self.members], dtype=np.int64)

    def to_dict(self) -> dict:
        return {
            'count': self.count,
            'seeds': self.seeds.tolist(),
            'labels': self.labels.tolist(),
            'members': [m.tolist() for m in self.members],
        }


def oversegment(
    movable: Union[PointCloud, np.ndarray],
    n: int,
    seed: int = 0,
    feature_knn: int = 16,
    beta_factor: float = 0.5,
    shared_margin: float = 0.05,
) -> Segmentation:
    """
    Grow ``n`` proposals around farthest-point seeds.
    FPS 시드 주변으로 과분할 영역 성장

    cost(x, seed) = ‖x − seed‖ + β · (1 − cos(f_x, f_seed)), β =
    beta_factor × cloud diagonal. Each seed keeps its own label so no
    proposal ends empty. A point is shared with its second-best seed when
    the two costs differ by less than ``shared_margin`` of the larger one.

    Raises:
        ValueError: n < 1 or n > |movable|
    """
    points = as_points(movable)
    total = len(points)
    if n < 1 or n > total:
        raise ValueError(f"seed count {n} must be in [1, {total}]")

    seeds = farthest_point_sample(points, n, seed=seed)
    features = point_features(points, feature_knn)
    norms = np.linalg.norm(features, axis=1, keepdims=True)
    unit = np.divide(features, norms, out=np.zeros_like(features), where=norms > FEATURE_TOLERANCE)

    diagonal = float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))
    beta = beta_factor * diagonal
    cost = cdist(points, points[seeds]) + beta * (1.0 - unit @ unit[seeds].T)

    labels = np.argmin(cost, axis=1)
    labels[seeds] = np.arange(n)

    members = [np.flatnonzero(labels == m) for m in range(n)]
    if n > 1:
        order = np.argsort(cost, axis=1, kind='stable')
        second = order[:, 1]
        best_cost = cost[np.arange(total), labels]
        second = np.where(second == labels, order[:, 0], second)
        second_cost = cost[np.arange(total), second]
        shared = (second_cost - best_cost) < shared_margin * second_cost
        shared[seeds] = False
        for m in range(n):
            extra = np.flatnonzero(shared & (second == m))
            if len(extra):
                members[m] = np.union1d(members[m], extra)
        logger.debug("Over-segmentation: %d seeds, %d shared points", n, int(shared.sum()))

    return Segmentation(labels, seeds, members, n)


def _find(parent: List[int], i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def overlap_ratio(a: np.ndarray, b: np.ndarray) -> float:
    """|A ∩ B| / min(|A|, |B|) (0 when either set is empty)."""
    smaller = min(len(a), len(b))
    if smaller == 0:
        return 0.0
    return len(np.intersect1d(a, b, assume_unique=True)) / smaller


def merge_overlapping(seg: Segmentation, threshold: float = 0.8) -> Segmentation:
    """
    Union proposals whose overlap ratio exceeds ``threshold``.
    중첩 비율이 임계값을 넘는 제안 병합

    Merging repeats on the merged member sets until no pair exceeds the
    threshold, so the result is a fixpoint. Groups are numbered by their
    smallest original id; a group keeps that proposal's seed.

    Raises:
        ValueError: threshold outside (0, 1]
    """
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")

    groups = [[m] for m in range(seg.count)]
    members = list(seg.members)
    while True:
        parent = list(range(len(members)))
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                if overlap_ratio(members[a], members[b]) > threshold:
                    ra, rb = _find(parent, a), _find(parent, b)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
        roots = sorted({_find(parent, i) for i in range(len(members))})
        if len(roots) == len(members):
            break
        new_groups, new_members = [], []
        for root in roots:
            owned = [i for i in range(len(members)) if _find(parent, i) == root]
            new_groups.append(sorted(g for i in owned for g in groups[i]))
            new_members.append(np.unique(np.concatenate([members[i] for i in owned])))
        groups, members = new_groups, new_members

    if len(groups) == seg.count:
        return seg

    relabel = np.empty(seg.count, dtype=np.int64)
    for new_id, group in enumerate(groups):
        relabel[group] = new_id
    logger.info("Overlap merge: %d → %d proposals", seg.count, len(groups))
    return Segmentation(
        labels=relabel[seg.labels],
        seeds=np.array([seg.seeds[group[0]] for group in groups], dtype=np.int64),
        members=members,
        count=len(groups),
    )


def baseline_segmentation(movable: Union[PointCloud, np.ndarray], parts: int) -> Segmentation:
    """
    Split the movable points into at most ``parts`` spatial clusters.
    군집화 기반 기준 분할 (부분 개수 주어짐)

    Single-linkage hierarchical clustering cut at ``parts`` clusters; the
    seed of a cluster is its point closest to the cluster centroid.

    Raises:
        ValueError: parts < 1 or empty input
    """
    points = as_points(movable)
    if parts < 1 or len(points) == 0:
        raise ValueError("baseline_segmentation needs parts ≥ 1 and a nonempty cloud")
    if len(points) == 1 or parts == 1:
        labels = np.zeros(len(points), dtype=np.int64)
    else:
        tree = linkage(points, method='single')
        raw = fcluster(tree, t=parts, criterion='maxclust')
        # Number clusters by first appearance.
        _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first))
        labels = order[inverse].astype(np.int64)

    count = int(labels.max()) + 1
    seeds = []
    for m in range(count):
        idx = np.flatnonzero(labels == m)
        centroid = points[idx].mean(axis=0)
        seeds.append(idx[np.argmin(np.sum((points[idx] - centroid) ** 2, axis=1))])
    return Segmentation.from_labels(labels, np.array(seeds, dtype=np.int64))
