"""Distance-to-measure scores, their k-center approximation, and pruning.

``dtm`` averages over the q nearest sample points, which makes it robust to
individual outliers.  ``kpdtm_fit`` approximates the same field with k
centers carrying a (mean, variance) pair each, fitted by alternating
minimisation of the summed score.  Pruning then removes the points with the
*smallest* scores: dense clusters that bury topological structure go first,
and the sparse structure-carrying points survive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .cloud import PointCloud


@dataclass(frozen=True)
class MassParams:
    """Neighbour mass count q, number of centers k, iteration cap and seed."""

    n_neighbors: int = 10
    n_centers: int = 350
    max_iter: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.n_neighbors < 1 or self.n_centers < 1:
            raise ValueError("n_neighbors and n_centers must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def validate_for(self, n_points: int) -> None:
        if self.n_neighbors > n_points:
            raise ValueError(f"n_neighbors={self.n_neighbors} exceeds cloud size {n_points}")
        if self.n_centers > n_points:
            raise ValueError(f"n_centers={self.n_centers} exceeds cloud size {n_points}")

    def capped(self, n_points: int) -> "MassParams":
        """Copy with n_centers (and n_neighbors) clipped to the cloud size."""
        return MassParams(
            n_neighbors=min(self.n_neighbors, n_points),
            n_centers=min(self.n_centers, n_points),
            max_iter=self.max_iter,
            seed=self.seed,
        )


@dataclass
class CenterSet:
    """k centers, each a (mean vector, scalar variance) pair."""

    means: np.ndarray      # (k, d)
    variances: np.ndarray  # (k,)

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=float)
        self.variances = np.asarray(self.variances, dtype=float)
        if self.means.ndim != 2 or self.variances.shape != (len(self.means),):
            raise ValueError("means must be (k, d) with one variance per center")
        if np.any(self.variances < 0):
            raise ValueError("variances must be nonnegative")

    def __len__(self) -> int:
        return len(self.means)


def _as_points(cloud) -> np.ndarray:
    pts = getattr(cloud, "points", cloud)
    pts = np.asarray(pts, dtype=float)
    return pts.reshape(len(pts), -1)


def _nearest_mass_stats(queries: np.ndarray, cloud: np.ndarray, q: int, fast: bool = False):
    """Per query: centroid of its q nearest cloud points and their mean squared spread.

    Ties at the q-th neighbour break toward the lower point index; ``fast``
    swaps the stable sort for argpartition (selection only, same result
    away from exact distance ties).
    """
    d2 = cdist(queries, cloud, metric="sqeuclidean")
    if fast and q < d2.shape[1]:
        idx = np.argpartition(d2, q - 1, axis=1)[:, :q]
    else:
        idx = np.argsort(d2, axis=1, kind="stable")[:, :q]
    neigh = cloud[idx]                       # (nq, q, d)
    means = neigh.mean(axis=1)               # (nq, d)
    spread = ((neigh - means[:, None, :]) ** 2).sum(axis=2).mean(axis=1)
    return means, spread


def dtm(cloud, query, q: int) -> float:
    """Squared-distance-like score of a query against the empirical measure.

    Equal to ||query - m||^2 + v with m the centroid of the q nearest cloud
    points and v their mean squared deviation from m.  With q = 1 this is
    the squared nearest-neighbour distance.
    """
    pts = _as_points(cloud)
    if len(pts) == 0:
        raise ValueError("empty cloud")
    if q > len(pts):
        raise ValueError("q exceeds cloud size")
    qv = np.asarray(query, dtype=float).reshape(1, -1)
    m, v = _nearest_mass_stats(qv, pts, q)
    return float(np.sum((qv[0] - m[0]) ** 2) + v[0])


def dtm_profile(cloud, queries, q: int) -> np.ndarray:
    """Vectorised ``dtm`` over many queries."""
    pts = _as_points(cloud)
    if q > len(pts):
        raise ValueError("q exceeds cloud size")
    qs = _as_points(queries)
    m, v = _nearest_mass_stats(qs, pts, q)
    return ((qs - m) ** 2).sum(axis=1) + v


def kpdtm_objective(centers: CenterSet, cloud) -> float:
    """Summed min-over-centers score of every cloud point."""
    return float(np.sum(kpdtm_eval(centers, _as_points(cloud))))


def kpdtm_fit(cloud, params: MassParams, history: list | None = None) -> CenterSet:
    """Alternating minimisation of the k-center score field.

    Points are assigned to their best center, each center is refreshed from
    the q nearest cloud points of its assignment centroid, and the loop
    stops when assignments repeat or the iteration cap is hit.  The summed
    objective never increases from one iteration to the next; pass a list
    as ``history`` to record it.  Initial centers are k distinct cloud
    points drawn with the seeded generator.
    """
    pts = _as_points(cloud)
    n = len(pts)
    params.validate_for(n)
    q, k = params.n_neighbors, params.n_centers
    rng = np.random.default_rng(params.seed)
    init = rng.choice(n, size=k, replace=False)
    means, variances = _nearest_mass_stats(pts[init], pts, q, fast=True)

    prev_assign = None
    prev_obj = None
    for _ in range(params.max_iter):
        score = cdist(pts, means, metric="sqeuclidean") + variances[None, :]
        assign = np.argmin(score, axis=1)
        obj = float(score[np.arange(n), assign].sum())
        if history is not None:
            history.append(obj)
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            break
        if prev_obj is not None and obj == prev_obj:
            break  # assignment 2-cycle at constant objective
        prev_assign = assign
        prev_obj = obj
        counts = np.bincount(assign, minlength=k)
        occupied = np.nonzero(counts > 0)[0]
        sums = np.column_stack([
            np.bincount(assign, weights=pts[:, dim], minlength=k) for dim in range(pts.shape[1])
        ])
        centroids = sums[occupied] / counts[occupied, None]
        new_means, new_vars = _nearest_mass_stats(centroids, pts, q, fast=True)
        means = means.copy()
        variances = variances.copy()
        means[occupied] = new_means
        variances[occupied] = new_vars
    return CenterSet(means, variances)


def kpdtm_eval(centers: CenterSet, query) -> np.ndarray | float:
    """min over centers of ||query - mean_i||^2 + variance_i."""
    if len(centers) == 0:
        raise ValueError("empty center set")
    qv = np.asarray(query, dtype=float)
    single = qv.ndim == 1
    qs = qv.reshape(-1, centers.means.shape[1])
    vals = cdist(qs, centers.means, metric="sqeuclidean") + centers.variances[None, :]
    out = vals.min(axis=1)
    return float(out[0]) if single else out


def _keep_largest(scores: np.ndarray, keep_n: int) -> np.ndarray:
    """Positions of the keep_n largest scores, returned in original order.

    Ties at the cut prefer earlier positions.
    """
    n = len(scores)
    order = np.lexsort((np.arange(n), -scores))  # descending score, then index
    kept = np.sort(order[:keep_n])
    return kept


def prune_cloud(cloud: PointCloud, params: MassParams, keep_n: int) -> PointCloud:
    """Drop the lowest-scoring (densest) points, keep the keep_n highest.

    Output preserves the original point order, and with it any time index.
    """
    pts = _as_points(cloud)
    if keep_n <= 0:
        raise ValueError("keep_n must be positive")
    if keep_n > len(pts):
        raise ValueError(f"keep_n={keep_n} exceeds cloud size {len(pts)}")
    centers = kpdtm_fit(cloud, params)
    scores = np.asarray(kpdtm_eval(centers, pts))
    kept = _keep_largest(scores, keep_n)
    if isinstance(cloud, PointCloud):
        return cloud.take(kept)
    return PointCloud(pts[kept])


def remap_multichannel(per_channel_clouds: list[PointCloud], keep_n: int,
                       params: MassParams) -> PointCloud:
    """Fuse per-channel clouds into one joint cloud of keep_n points.

    All clouds must share the same time index.  Each time index is scored
    by the mean of the per-channel center-field values at that channel's
    point; the keep_n best-scoring indices survive, and the joint point is
    the concatenation of every channel's coordinates there.
    """
    if not per_channel_clouds:
        raise ValueError("need at least one channel cloud")
    ref = per_channel_clouds[0]
    if ref.time_index is None:
        raise ValueError("channel clouds must carry a time index")
    for c in per_channel_clouds[1:]:
        if c.time_index is None or not np.array_equal(c.time_index, ref.time_index):
            raise ValueError("mismatched time_index across channel clouds")
    if keep_n > len(ref):
        raise ValueError(f"keep_n={keep_n} exceeds cloud size {len(ref)}")

    scores = np.zeros(len(ref), dtype=float)
    for c in per_channel_clouds:
        centers = kpdtm_fit(c, params)
        scores += np.asarray(kpdtm_eval(centers, c.points))
    scores /= len(per_channel_clouds)

    kept = _keep_largest(scores, keep_n)
    joint = np.hstack([c.points[kept] for c in per_channel_clouds])
    return PointCloud(joint, time_index=ref.time_index[kept])
