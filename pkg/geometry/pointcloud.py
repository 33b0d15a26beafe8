"""
Point sets and neighborhood queries.
점군 및 근접 이웃 탐색

- PointCloud: immutable point set with optional normals / part labels
- KNNIndex: exact k-nearest-neighbor index (kd-tree backed)
- farthest point sampling, one-sided Chamfer distance, spacing statistics
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree


ArrayLike = Union[np.ndarray, Sequence]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class PointCloud:
    """
    Immutable point set.

    Attributes:
        points: (N, 3) float64 coordinates (scene units)
        normals: optional (N, 3) unit normals
        labels: optional (N,) integer part labels (0 = static)
    """
    points: np.ndarray
    normals: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.all(np.isfinite(points)):
            raise ValueError("PointCloud coordinates must be finite")
        object.__setattr__(self, 'points', _frozen(points))

        if self.normals is not None:
            normals = np.array(self.normals, dtype=np.float64).reshape(-1, 3)
            if normals.shape != points.shape:
                raise ValueError("normals must match points in shape")
            lengths = np.linalg.norm(normals, axis=1)
            if np.any(np.abs(lengths - 1.0) > 1e-6):
                raise ValueError("normals must have unit length")
            object.__setattr__(self, 'normals', _frozen(normals))

        if self.labels is not None:
            labels = np.array(self.labels, dtype=np.int64).reshape(-1)
            if labels.shape[0] != points.shape[0]:
                raise ValueError("labels must match points in length")
            object.__setattr__(self, 'labels', _frozen(labels))

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def subset(self, indices: ArrayLike) -> 'PointCloud':
        """Return the cloud restricted to ``indices`` (normals/labels follow)."""
        idx = np.asarray(indices, dtype=np.int64)
        return PointCloud(
            self.points[idx],
            None if self.normals is None else self.normals[idx],
            None if self.labels is None else self.labels[idx],
        )

    def with_points(self, points: np.ndarray) -> 'PointCloud':
        """Same labels, new coordinates (normals dropped)."""
        return PointCloud(points, None, self.labels)

    def with_labels(self, labels: ArrayLike) -> 'PointCloud':
        return PointCloud(self.points, self.normals, labels)

    def label_mask(self, label: int) -> np.ndarray:
        if self.labels is None:
            raise ValueError("PointCloud has no labels")
        return self.labels == label

    def diagonal(self) -> float:
        """Length of the axis-aligned bounding box diagonal."""
        if self.is_empty:
            return 0.0
        return float(np.linalg.norm(self.points.max(axis=0) - self.points.min(axis=0)))


def as_points(data: Union[PointCloud, ArrayLike]) -> np.ndarray:
    """Coordinates of a PointCloud or array-like as an (N, 3) float64 array."""
    if isinstance(data, PointCloud):
        return data.points
    return np.asarray(data, dtype=np.float64).reshape(-1, 3)


class KNNIndex:
    """
    Exact k-nearest-neighbor index over a fixed reference set.

    Built once, read-only afterwards. Results are sorted by ascending
    squared distance with ties broken by lower reference index.
    """

    def __init__(self, reference: Union[PointCloud, ArrayLike]):
        self._points = np.array(as_points(reference))
        self._tree = cKDTree(self._points) if len(self._points) else None

    def __len__(self) -> int:
        return self._points.shape[0]

    @property
    def points(self) -> np.ndarray:
        return self._points

    def query(
        self,
        query: Union[PointCloud, ArrayLike],
        k: int,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Find the k nearest reference points of every query point.

        Args:
            query: (Q, 3) query points
            k: Neighbor count (k ≤ |reference|)

        Returns:
            (indices (Q, k) int64, squared distances (Q, k) float64)

        Raises:
            ValueError: k > |reference| or k < 0
        """
        q = as_points(query)
        n = len(self)
        if k < 0 or k > n:
            raise ValueError(f"k={k} must be in [0, {n}]")
        if k == 0 or len(q) == 0:
            return (np.zeros((len(q), k), dtype=np.int64),
                    np.zeros((len(q), k), dtype=np.float64))

        kk = min(k + 1, n)
        dist, idx = self._tree.query(q, k=kk)
        idx = np.asarray(idx, dtype=np.int64).reshape(len(q), kk)
        dist = np.asarray(dist, dtype=np.float64).reshape(len(q), kk)

        if kk > k:
            # Boundary tie means the k-set is not unique from the tree alone.
            tied = dist[:, k] <= dist[:, k - 1]
            idx = idx[:, :k]
        else:
            tied = np.zeros(len(q), dtype=bool)

        d2 = np.sum((self._points[idx] - q[:, None, :]) ** 2, axis=2)
        order = np.lexsort((idx, d2), axis=-1)
        idx = np.take_along_axis(idx, order, axis=1)
        d2 = np.take_along_axis(d2, order, axis=1)

        for row in np.flatnonzero(tied):
            idx[row], d2[row] = self._resolve_ties(q[row], dist[row, k - 1], k)
        return idx, d2

    def _resolve_ties(self, point: np.ndarray, radius: float, k: int):
        candidates = np.asarray(
            self._tree.query_ball_point(point, r=radius * (1.0 + 1e-9) + 1e-12),
            dtype=np.int64,
        )
        d2 = np.sum((self._points[candidates] - point) ** 2, axis=1)
        order = np.lexsort((candidates, d2))[:k]
        return candidates[order], d2[order]

    def nearest(self, query: Union[PointCloud, ArrayLike]) -> Tuple[np.ndarray, np.ndarray]:
        """Nearest reference index and squared distance per query point."""
        idx, d2 = self.query(query, 1)
        return idx[:, 0], d2[:, 0]


def knn(
    query: Union[PointCloud, ArrayLike],
    reference: Union[PointCloud, ArrayLike],
    k: int,
) -> np.ndarray:
    """
    Exact k-nearest neighbors of each query point in ``reference``.

    Returns:
        (Q, k) index array, rows sorted by ascending distance
    """
    return KNNIndex(reference).query(query, k)[0]


def farthest_point_sample(
    pc: Union[PointCloud, ArrayLike],
    n: int,
    seed: int = 0,
    start_index: Optional[int] = None,
) -> np.ndarray:
    """
    Farthest point sampling.
    최원점 샘플링

    Args:
        pc: Input points
        n: Number of indices to return
        seed: Seeds the first pick when ``start_index`` is not given
        start_index: Explicit first index

    Returns:
        (n,) distinct indices; each pick maximizes the min-distance to the
        chosen set (ties → lowest index)

    Raises:
        ValueError: Empty cloud or n > |pc|
    """
    points = as_points(pc)
    total = len(points)
    if total == 0:
        raise ValueError("farthest_point_sample on an empty cloud")
    if n < 0 or n > total:
        raise ValueError(f"n={n} must be in [0, {total}]")
    if n == 0:
        return np.zeros(0, dtype=np.int64)

    if start_index is None:
        start_index = int(np.random.default_rng(seed).integers(total))

    chosen = np.empty(n, dtype=np.int64)
    min_d2 = np.full(total, np.inf)
    current = int(start_index)
    for i in range(n):
        chosen[i] = current
        d2 = np.sum((points - points[current]) ** 2, axis=1)
        np.minimum(min_d2, d2, out=min_d2)
        min_d2[chosen[:i + 1]] = -1.0
        current = int(np.argmax(min_d2))
    return chosen


def nearest_squared(
    src: Union[PointCloud, ArrayLike],
    dst: Union[PointCloud, ArrayLike, KNNIndex],
) -> Tuple[np.ndarray, np.ndarray]:
    """Nearest ``dst`` index and squared distance for every ``src`` point."""
    index = dst if isinstance(dst, KNNIndex) else KNNIndex(dst)
    return index.nearest(src)


def chamfer_one_sided(
    src: Union[PointCloud, ArrayLike],
    dst: Union[PointCloud, ArrayLike, KNNIndex],
) -> float:
    """
    One-sided Chamfer distance src → dst (squared convention).

    Returns:
        Mean over src of the squared distance to the nearest dst point

    Raises:
        ValueError: Either side empty
    """
    src_points = as_points(src)
    dst_size = len(dst) if isinstance(dst, KNNIndex) else len(as_points(dst))
    if len(src_points) == 0 or dst_size == 0:
        raise ValueError("chamfer_one_sided needs nonempty inputs")
    _, d2 = nearest_squared(src_points, dst)
    return float(np.mean(d2))


def chamfer_symmetric(
    a: Union[PointCloud, ArrayLike],
    b: Union[PointCloud, ArrayLike],
) -> float:
    """Mean of both one-sided Chamfer distances."""
    return 0.5 * (chamfer_one_sided(a, b) + chamfer_one_sided(b, a))


def median_spacing(pc: Union[PointCloud, ArrayLike]) -> float:
    """Median nearest-neighbor distance (0 for fewer than two points)."""
    points = as_points(pc)
    if len(points) < 2:
        return 0.0
    _, d2 = KNNIndex(points).query(points, 2)
    return float(np.median(np.sqrt(d2[:, 1])))
