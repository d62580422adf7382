"""Unsupervised scoring of distance matrices.

The pipeline a distance matrix goes through is deliberately generic: extract
k nonnegative components with NMF, cluster the component rows with k-means
and compare against reference labels with normalized mutual information.
Everything is seeded and deterministic; no external clustering libraries so
the restart and normalization conventions stay pinned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NMFResult",
    "KMeansResult",
    "nmf",
    "kmeans",
    "nmi",
    "cluster_distances",
]

EPS = 1e-12


@dataclass
class NMFResult:
    W: np.ndarray
    H: np.ndarray
    errors: list


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float


def nmf(M, k, iters=500, seed=0):
    """Multiplicative-update factorization M ~= W H, Frobenius objective.

    Returns the left factor (m x k) together with H and the per-iteration
    reconstruction errors.  The classical update rules keep the objective
    non-increasing; divisions are guarded by a small epsilon.
    """
    M = np.asarray(M, dtype=np.float64)
    if np.any(M < 0):
        raise ValueError("NMF input must be entrywise nonnegative")
    if k < 1:
        raise ValueError("k must be >= 1")
    m, p = M.shape
    rng = np.random.default_rng(seed)
    scale = np.sqrt(max(M.mean(), EPS) / k)
    W = scale * rng.random((m, k))
    H = scale * rng.random((k, p))
    errors = []
    for _ in range(iters):
        H *= (W.T @ M) / (W.T @ W @ H + EPS)
        W *= (M @ H.T) / (W @ H @ H.T + EPS)
        errors.append(float(np.linalg.norm(M - W @ H)))
    return NMFResult(W=W, H=H, errors=errors)


def _kmeans_pp_init(X, k, rng):
    m = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(m)]
    closest = np.sum((X - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = rng.integers(m)
        else:
            idx = rng.choice(m, p=closest / total)
        centers[c] = X[idx]
        closest = np.minimum(closest, np.sum((X - centers[c]) ** 2, axis=1))
    return centers


def _lloyd(X, centers, max_iter):
    labels = None
    for _ in range(max_iter):
        d2 = (np.sum(X ** 2, axis=1)[:, None] - 2.0 * X @ centers.T
              + np.sum(centers ** 2, axis=1))
        new_labels = np.argmin(d2, axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(len(centers)):
            members = X[labels == c]
            if len(members):
                centers[c] = members.mean(axis=0)
    d2 = (np.sum(X ** 2, axis=1)[:, None] - 2.0 * X @ centers.T
          + np.sum(centers ** 2, axis=1))
    labels = np.argmin(d2, axis=1)
    inertia = float(np.take_along_axis(d2, labels[:, None], axis=1).sum())
    return labels, centers, inertia


def kmeans(X, k, seed=0, restarts=10, max_iter=300):
    """k-means++ seeding plus Lloyd iterations, best of ``restarts`` runs."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("points must be a 2-d array")
    if X.shape[0] < k:
        raise ValueError(f"need at least k={k} points, got {X.shape[0]}")
    ss = seed if isinstance(seed, np.random.SeedSequence) \
        else np.random.SeedSequence(seed)
    best = None
    for child in ss.spawn(restarts):
        rng = np.random.default_rng(child)
        centers = _kmeans_pp_init(X, k, rng)
        labels, centers, inertia = _lloyd(X, centers.copy(), max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(labels=labels, centers=centers, inertia=inertia)
    return best


def nmi(a, b):
    """Normalized mutual information of two labelings.

    Normalization is by the arithmetic mean of the two entropies, with
    natural logarithms.  Two constant labelings are identical up to
    renaming, so that degenerate case scores 1.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("labelings must be 1-d and of equal length")
    m = len(a)
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    ka, kb = ai.max() + 1, bi.max() + 1
    counts = np.zeros((ka, kb))
    np.add.at(counts, (ai, bi), 1.0)
    pa = counts.sum(axis=1) / m
    pb = counts.sum(axis=0) / m
    ha = -np.sum(pa * np.log(pa, where=pa > 0, out=np.zeros_like(pa)))
    hb = -np.sum(pb * np.log(pb, where=pb > 0, out=np.zeros_like(pb)))
    if ha == 0.0 and hb == 0.0:
        return 1.0
    # Identical partitions up to renaming: one nonzero cell per row and
    # column.  Short-circuit so rounding cannot pull the score below 1.
    if ka == kb and (np.count_nonzero(counts, axis=1) == 1).all() \
            and (np.count_nonzero(counts, axis=0) == 1).all():
        return 1.0
    pj = counts / m
    outer = pa[:, None] * pb
    nz = pj > 0
    mi = float(np.sum(pj[nz] * np.log(pj[nz] / outer[nz])))
    return float(min(1.0, max(0.0, mi / (0.5 * (ha + hb)))))


def cluster_distances(D, k, seed=0, nmf_iters=500):
    """Cluster the objects behind a distance matrix, blind to its origin.

    NMF extracts k nonnegative components from the matrix, then k-means on
    the component rows gives the labels.
    """
    D = np.asarray(getattr(D, "values", D), dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("distance matrix must be square")
    seed_nmf, seed_km = np.random.SeedSequence(seed).spawn(2)
    W = nmf(D, k, iters=nmf_iters, seed=seed_nmf).W
    return kmeans(W, k, seed=seed_km).labels
