"""Spectral embedding, gap detection, k-means, and cluster transition counts.

The clustering recipe: evaluate the dominant eigen- or right singular
functions at the trajectory points, treat each point's function values as a
coordinate vector, and run k-means with as many clusters as there are spectral
values before the largest gap.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.cluster import KMeans

from .errors import EmptyClusterError

GAP_RATIO_WARN = 0.8


@dataclass
class GapResult:
    """Detected spectral gap position and its quality."""

    n_clusters: int
    ratio: float
    warned: bool
    values: np.ndarray = field(repr=False)


def detect_gap(values, r_max=None):
    """Locate the largest drop in a non-increasing spectral value sequence.

    Returns the index ``r`` maximizing ``values[r-1] - values[r]`` (ties go to
    the smaller ``r``) along with the ratio ``values[r] / values[r-1]``.  A
    ratio above 0.8 signals that there is no clear gap, hence no clearly
    separated clusters; a warning is attached and emitted.
    """
    values = np.asarray(values)
    if np.iscomplexobj(values):
        values = values.real
    values = np.sort(values.astype(float))[::-1]
    if values.size < 2:
        raise ValueError("gap detection needs at least two spectral values")
    limit = values.size if r_max is None else min(r_max, values.size)
    if limit < 2:
        raise ValueError("r_max leaves no candidate gap position")
    diffs = values[: limit - 1] - values[1:limit]
    r = int(np.argmax(diffs)) + 1
    ratio = float(values[r] / values[r - 1]) if values[r - 1] != 0 else 1.0
    warned = ratio > GAP_RATIO_WARN
    if warned:
        warnings.warn(
            f"no clear spectral gap (ratio {ratio:.3f} at r={r}); "
            "clusters may not be well separated",
            stacklevel=2,
        )
    return GapResult(n_clusters=r, ratio=ratio, warned=warned, values=values)


@dataclass
class Embedding:
    """Spectral coordinates of trajectory points."""

    matrix: np.ndarray
    positions: np.ndarray
    model: object
    n_components: int


def embed(model, points, n_components):
    """Evaluate the leading spectral functions at the given points.

    Row ``i`` of the result holds the values of the first ``n_components``
    eigen- (or right singular) functions at ``points[i]``.
    """
    if n_components < 1 or n_components > model.n_components:
        raise ValueError(
            f"n_components must be in [1, {model.n_components}], got {n_components}"
        )
    points = np.asarray(points, dtype=float)
    values = model.evaluate(points, n_components=n_components)
    if np.iscomplexobj(values):
        scale = np.max(np.abs(values)) + 1e-300
        if np.max(np.abs(values.imag)) > 1e-8 * scale:
            raise ValueError(
                "embedding requires (numerically) real spectral functions; "
                "use the forward-backward pipeline for non-reversible data"
            )
        values = values.real
    return Embedding(
        matrix=values, positions=points, model=model, n_components=n_components
    )


@dataclass
class ClusterModel:
    """k-means partition of the spectral embedding.

    Labels are canonicalized so cluster indices increase with the mean
    trajectory coordinate of their members, making 1-D reports reproducible.
    ``boundaries`` holds the cut points between clusters when every cluster is
    an interval (an arc, for periodic data); otherwise it is ``None``.
    """

    labels: np.ndarray
    centers: np.ndarray
    boundaries: Optional[np.ndarray]
    inertia: float
    n_clusters: int
    periodic: bool
    model: object = None
    n_components: int = 0

    def assign(self, points):
        """Nearest-center labels for new points (in canonical label order)."""
        emb = embed(self.model, np.asarray(points, dtype=float), self.n_components)
        d2 = ((emb.matrix[:, None, :] - self.centers[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(d2, axis=1)


def _blocks_along_line(sorted_labels):
    """Run-length blocks of a label sequence."""
    change = np.flatnonzero(np.diff(sorted_labels)) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change, [len(sorted_labels)]])
    return [(int(sorted_labels[s]), s, e) for s, e in zip(starts, ends)]


def _interval_boundaries(positions, labels, n_clusters, periodic):
    """Midpoint cuts between adjacent cluster extents, if clusters are intervals."""
    order = np.argsort(positions, kind="stable")
    pos = positions[order]
    lab = labels[order]
    blocks = _blocks_along_line(lab)
    if periodic and len(blocks) > 1 and blocks[0][0] == blocks[-1][0]:
        # the first and last runs belong to one cluster wrapping the seam
        first = blocks.pop(0)
        last = blocks.pop()
        blocks.append((last[0], last[1], first[2]))
    if len(blocks) != n_clusters:
        warnings.warn(
            "clusters are not contiguous on [0, 1]; omitting interval boundaries",
            stacklevel=3,
        )
        return None
    cuts = []
    n_blocks = len(blocks)
    for i in range(n_blocks - 1 + (1 if periodic else 0)):
        _, _, end_i = blocks[i]
        _, start_next, _ = blocks[(i + 1) % n_blocks]
        left_edge = pos[end_i - 1]
        right_edge = pos[start_next]
        if periodic and i == n_blocks - 1:
            # cyclic link from the last block back to the first; the cut may
            # cross the 0/1 seam
            gap = (right_edge - left_edge) % 1.0
            cuts.append((left_edge + gap / 2.0) % 1.0)
        else:
            cuts.append(0.5 * (left_edge + right_edge))
    return np.sort(np.asarray(cuts))


def kmeans(embedding, n_clusters, seed=0, restarts=10, periodic=False):
    """Cluster embedded points with restarted k-means.

    Uses ``k-means++`` initialization, the given number of independent
    restarts (best inertia kept), and at most 100 Lloyd iterations per
    restart.  Deterministic for a fixed seed.  With ``periodic=True`` the
    interval boundaries are computed on the circle.
    """
    mat = embedding.matrix
    if len(mat) < n_clusters:
        raise EmptyClusterError(
            f"cannot form {n_clusters} clusters from {len(mat)} points"
        )
    km = KMeans(
        n_clusters=n_clusters,
        init="k-means++",
        n_init=restarts,
        max_iter=100,
        tol=0.0,
        random_state=seed,
        algorithm="lloyd",
    )
    raw = km.fit_predict(mat)
    counts = np.bincount(raw, minlength=n_clusters)
    if np.any(counts == 0):
        raise EmptyClusterError(
            f"{int((counts == 0).sum())} empty cluster(s) after {restarts} restarts; "
            "reduce the cluster count or reseed"
        )
    means = np.array(
        [embedding.positions[raw == j].mean() for j in range(n_clusters)]
    )
    order = np.argsort(means, kind="stable")
    relabel = np.empty(n_clusters, dtype=int)
    relabel[order] = np.arange(n_clusters)
    labels = relabel[raw]
    centers = km.cluster_centers_[order]
    boundaries = _interval_boundaries(
        embedding.positions, labels, n_clusters, periodic
    )
    return ClusterModel(
        labels=labels,
        centers=centers,
        boundaries=boundaries,
        inertia=float(km.inertia_),
        n_clusters=n_clusters,
        periodic=periodic,
        model=embedding.model,
        n_components=embedding.n_components,
    )


def cluster_transitions(cluster_model, pair_data):
    """Row-stochastic matrix of empirical transitions between clusters.

    Entry ``(i, j)`` is the fraction of pairs starting in cluster ``i`` that
    end in cluster ``j``.
    """
    lx = cluster_model.assign(pair_data.x)
    ly = cluster_model.assign(pair_data.y)
    r = cluster_model.n_clusters
    counts = np.zeros((r, r))
    np.add.at(counts, (lx, ly), 1.0)
    row_sums = counts.sum(axis=1)
    if np.any(row_sums == 0):
        empty = np.flatnonzero(row_sums == 0)
        raise EmptyClusterError(f"clusters {empty.tolist()} have no outgoing pairs")
    return counts / row_sums[:, None]
