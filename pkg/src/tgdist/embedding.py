"""Node embeddings from the time-respecting walk operator.

Rows of the embedding X live on the unit sphere in R^d and are fitted so
that the softmax similarity Q_ij = exp(x_i . x_j) / Z_i matches the walk
transition probabilities P_ij.  The objective is the sum over nodes of the
cross entropy between P_i. and Q_i., plus a repulsion term (sum_ij
x_i . x_j) / n that discourages a collapsed cloud.  Because P is
row-stochastic the objective simplifies to

    loss(X) = -<X, P X> + sum_i log Z_i + ||sum_i x_i||^2 / n

which is what both code paths evaluate.  The partition functions
Z_i = sum_j exp(x_i . x_j) are computed exactly at moderate n and through a
per-group Gaussian moment estimate at scale:

    Z_i ~= sum_a pi_a exp(x_i . mu_a + x_i' Omega_a x_i / 2)

with pi_a, mu_a, Omega_a the size, mean and covariance of group a of the
rows.  One group (q=1) is already accurate for near-isotropic clouds; q=n
recovers the exact sum.

Optimization is full-batch projected gradient descent: step along the
negative gradient projected onto the tangent space of each row, renormalize,
halve the step until the loss decreases.  In mixture mode the group moments
are frozen for the duration of an epoch, so the gradient used is the exact
gradient of the frozen-moments objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from tgdist.transition import GlobalTransitionOperator, build_operator

__all__ = [
    "EmbedConfig",
    "MixtureSummary",
    "EmbedResult",
    "exact_z",
    "estimate_z",
    "mixture_summary",
    "loss_exact",
    "loss_mixture",
    "gradient",
    "embed",
    "save_embedding",
    "load_embedding",
]

# Exact partition functions cost O(n^2); switch to the mixture estimate above
# this row count when z_mode is "auto".
EXACT_Z_MAX_N = 2000


@dataclass(frozen=True)
class EmbedConfig:
    d: int = 32
    q: int = 1
    epochs: int = 30
    step: float = 0.5
    seed: int = 0
    z_mode: str = "auto"  # auto | exact | mixture
    tol: float = 1e-5
    max_backtracks: int = 30

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.z_mode not in ("auto", "exact", "mixture"):
            raise ValueError(f"unknown z_mode {self.z_mode!r}")


@dataclass(frozen=True)
class MixtureSummary:
    """Group sizes, means and covariances of the embedding rows.

    ``pi`` holds group sizes (summing to n, zero for an empty group), ``mu``
    the group means as rows, ``omega`` the per-group covariance matrices.
    """

    pi: np.ndarray
    mu: np.ndarray
    omega: np.ndarray
    labels: np.ndarray


@dataclass
class EmbedResult:
    X: np.ndarray
    losses: list = field(default_factory=list)
    converged: bool = False
    z_mode: str = "exact"


def _check_rows(op, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != op.n:
        raise ValueError(f"embedding must be ({op.n}, d), got {X.shape}")
    return X


def exact_z(X):
    """Exact partition functions Z_i = sum_j exp(x_i . x_j).  O(n^2 d)."""
    X = np.asarray(X, dtype=np.float64)
    return np.exp(X @ X.T).sum(axis=1)


def mixture_summary(X, q, seed=0, labels=None):
    """Partition the rows into q groups and take first and second moments.

    q=1 pools everything, q=n puts each row in its own group, anything in
    between clusters the rows with k-means.  An explicit ``labels`` array
    (values in 0..q-1) overrides the partitioning.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if q < 1:
        raise ValueError("q must be >= 1")
    if q > n:
        raise ValueError(f"q={q} exceeds the number of nodes {n}")
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (n,) or labels.min() < 0 or labels.max() >= q:
            raise ValueError("labels must map each row to a group in 0..q-1")
    elif q == 1:
        labels = np.zeros(n, dtype=np.int64)
    elif q == n:
        labels = np.arange(n, dtype=np.int64)
    else:
        from tgdist.evaluation import kmeans
        labels = kmeans(X, q, seed=seed, restarts=1).labels
    pi = np.zeros(q)
    mu = np.zeros((q, d))
    omega = np.zeros((q, d, d))
    for a in range(q):
        members = X[labels == a]
        if len(members) == 0:
            continue
        pi[a] = len(members)
        mu[a] = members.mean(axis=0)
        centered = members - mu[a]
        omega[a] = centered.T @ centered / len(members)
    return MixtureSummary(pi=pi, mu=mu, omega=omega, labels=labels)


def _z_terms(X, summary):
    """Per-node, per-group unnormalized weights pi_a exp(h_ia) and their sum."""
    q = len(summary.pi)
    h = X @ summary.mu.T
    for a in range(q):
        if summary.pi[a] == 0:
            continue
        h[:, a] += 0.5 * np.einsum("ij,jk,ik->i", X, summary.omega[a], X)
    terms = summary.pi * np.exp(h)
    return terms, terms.sum(axis=1)


def estimate_z(X, q, seed=0):
    """Gaussian-moment estimate of all partition functions.  O(n q d^2)."""
    X = np.asarray(X, dtype=np.float64)
    _, z = _z_terms(X, mixture_summary(X, q, seed=seed))
    return z


def _loss_terms(op, X, log_z):
    walk_term = -float(np.sum(X * op.apply(X)))
    s = X.sum(axis=0)
    return walk_term + float(log_z.sum()) + float(s @ s) / X.shape[0]


def loss_exact(op, X):
    """Cross-entropy objective with exact partition functions."""
    X = _check_rows(op, X)
    return _loss_terms(op, X, np.log(exact_z(X)))


def loss_mixture(op, X, summary):
    """Objective evaluated with the partition functions of a frozen summary."""
    X = _check_rows(op, X)
    _, z = _z_terms(X, summary)
    return _loss_terms(op, X, np.log(z))


def gradient(op, X, z_mode="exact", summary=None):
    """Gradient of the objective with respect to the rows of X.

    The walk term contributes -(P + P') X through one apply and one
    apply_transpose.  In exact mode the partition-function term contributes
    Q X + Q' X with Q the softmax matrix.  In mixture mode the summary is
    treated as constant, so the term is sum_a w_ia (mu_a + Omega_a x_i) with
    softmax group responsibilities w_ia; this is the exact gradient of
    :func:`loss_mixture` at the given summary.
    """
    X = _check_rows(op, X)
    n = X.shape[0]
    G = -(op.apply(X) + op.apply_transpose(X))
    if z_mode == "exact":
        E = np.exp(X @ X.T)
        Q = E / E.sum(axis=1, keepdims=True)
        G += Q @ X + Q.T @ X
    elif z_mode == "mixture":
        if summary is None:
            raise ValueError("mixture gradient needs a summary")
        terms, z = _z_terms(X, summary)
        w = terms / z[:, None]
        G += w @ summary.mu
        for a in range(len(summary.pi)):
            if summary.pi[a] == 0:
                continue
            G += w[:, a, None] * (X @ summary.omega[a])
    else:
        raise ValueError(f"unknown z_mode {z_mode!r}")
    G += (2.0 / n) * X.sum(axis=0)
    return G


def _normalize_rows(X):
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return X / norms


def embed(g, cfg=None):
    """Fit a unit-row embedding of a temporal graph (or prebuilt operator).

    Projected gradient descent with a cosine-decayed base step and
    backtracking halving; stops early when the relative loss change drops
    below ``cfg.tol`` or no halving achieves a decrease.  Deterministic for
    a fixed config.
    """
    if cfg is None:
        cfg = EmbedConfig()
    op = g if isinstance(g, GlobalTransitionOperator) else build_operator(g)
    n = op.n
    z_mode = cfg.z_mode
    if z_mode == "auto":
        z_mode = "exact" if n <= EXACT_Z_MAX_N else "mixture"
    rng = np.random.default_rng(cfg.seed)
    X = _normalize_rows(rng.standard_normal((n, cfg.d)))

    if z_mode == "exact":
        def loss_at(Y, _):
            return loss_exact(op, Y)
    else:
        def loss_at(Y, summary):
            return loss_mixture(op, Y, summary)

    result = EmbedResult(X=X, z_mode=z_mode)
    summary = None
    loss_cur = None
    for epoch in range(cfg.epochs):
        if z_mode == "mixture":
            summary = mixture_summary(X, cfg.q,
                                      seed=int(rng.integers(2**31)))
            loss_cur = loss_at(X, summary)
        elif loss_cur is None:
            # Exact mode: the accepted loss carries over between epochs.
            loss_cur = loss_at(X, summary)
        if not result.losses:
            result.losses.append(loss_cur)
        G = gradient(op, X, z_mode=z_mode, summary=summary)
        # Tangent part of the gradient: sphere projection per row.
        G -= np.sum(G * X, axis=1, keepdims=True) * X
        eta = 0.5 * cfg.step * (1.0 + math.cos(math.pi * epoch / cfg.epochs))
        accepted = False
        for _ in range(cfg.max_backtracks + 1):
            X_new = _normalize_rows(X - eta * G)
            loss_new = loss_at(X_new, summary)
            if loss_new < loss_cur:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            break
        X = X_new
        result.losses.append(loss_new)
        if abs(loss_cur - loss_new) <= cfg.tol * max(1.0, abs(loss_cur)):
            result.converged = True
            break
        loss_cur = loss_new
    result.X = X
    return result


def save_embedding(X, path):
    """Write an embedding as CSV with header ``node,x0,...,x{d-1}``."""
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    header = "node," + ",".join(f"x{k}" for k in range(d))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i, row in enumerate(X):
            fh.write(str(i) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def load_embedding(path):
    """Read an embedding written by :func:`save_embedding`."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("node,"):
            raise ValueError(f"{path}: not an embedding file")
        rows = []
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) < 2:
                continue
            rows.append((int(parts[0]), [float(v) for v in parts[1:]]))
    rows.sort(key=lambda r: r[0])
    return np.array([coords for _, coords in rows])
