"""Distances between embedded graphs.

Two regimes.  When the two graphs share a node set and the rows of their
embeddings are aligned, the matched distance compares the Gram matrices
X1 X1' and X2 X2' in Frobenius norm; expanding the square lets it be
evaluated from d x d products only:

    d_m(X1, X2) = sqrt(||X1'X1||_F^2 + ||X2'X2||_F^2 - 2 ||X1'X2||_F^2)

When the graphs have different sizes or unrelated node identities, each
embedding is summarized by the descending eigenvalue vector of X'X/n and
the unmatched distance is the Euclidean distance between those vectors.
It is invariant under node permutation and under right-rotation of the
embedding, and inherits the triangle inequality from the Euclidean norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "matched_distance",
    "lambda_vector",
    "unmatched_distance",
    "pairwise_distances",
    "DistanceMatrix",
    "save_distance_matrix",
    "save_lambda_vectors",
]


def _as_embedding(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("embedding must be a 2-d array")
    return X


def matched_distance(X1, X2):
    """Frobenius distance between the Gram matrices of two aligned embeddings.

    Row i of X1 and row i of X2 must describe the same node; the function
    cannot detect a silently permuted input.  The three-term radicand can
    cancel catastrophically when the distance is tiny, so small negative
    values are clamped to zero; a negative beyond the round-off budget
    raises.
    """
    X1 = _as_embedding(X1)
    X2 = _as_embedding(X2)
    if X1.shape[0] != X2.shape[0]:
        raise ValueError(f"node counts differ: {X1.shape[0]} vs {X2.shape[0]}")
    if X1.shape[1] != X2.shape[1]:
        raise ValueError(f"dimensions differ: {X1.shape[1]} vs {X2.shape[1]}")
    t11 = float(np.sum((X1.T @ X1) ** 2))
    t22 = float(np.sum((X2.T @ X2) ** 2))
    t12 = float(np.sum((X1.T @ X2) ** 2))
    radicand = t11 + t22 - 2.0 * t12
    if radicand < 0:
        if radicand < -max(1e-9, 1e-12 * (t11 + t22)):
            raise ArithmeticError(
                f"matched distance radicand {radicand} below round-off budget")
        radicand = 0.0
    return float(np.sqrt(radicand))


def lambda_vector(X):
    """Descending eigenvalues of X'X/n, clamped to be nonnegative.

    For unit-norm rows the entries sum to 1.  Only the d x d normalized
    Gram matrix is ever decomposed.  Rows are put in a canonical order
    before the product so the result is bitwise independent of node
    ordering, not just equal up to round-off.
    """
    X = _as_embedding(X)
    X = X[np.lexsort(X.T[::-1])]
    vals = np.linalg.eigvalsh(X.T @ X / X.shape[0])
    return np.maximum(vals[::-1], 0.0)


def unmatched_distance(X1, X2):
    """Euclidean distance between the eigenvalue summaries of two embeddings.

    The node counts may differ; the embedding dimensions must match.
    """
    X1 = _as_embedding(X1)
    X2 = _as_embedding(X2)
    if X1.shape[1] != X2.shape[1]:
        raise ValueError(f"dimensions differ: {X1.shape[1]} vs {X2.shape[1]}")
    return float(np.linalg.norm(lambda_vector(X1) - lambda_vector(X2)))


@dataclass
class DistanceMatrix:
    """Pairwise distances between a collection of embedded graphs."""

    values: np.ndarray
    kind: str
    ids: list


def pairwise_distances(embeddings, kind, ids=None):
    """Assemble the symmetric pairwise distance matrix for one kind.

    ``kind`` is ``"matched"`` (requires equal node counts throughout) or
    ``"unmatched"`` (eigenvalue summaries are computed once per embedding).
    """
    if kind not in ("matched", "unmatched"):
        raise ValueError(f"unknown distance kind {kind!r}")
    embeddings = [_as_embedding(X) for X in embeddings]
    if not embeddings:
        raise ValueError("need at least one embedding")
    m = len(embeddings)
    if ids is None:
        ids = [f"g{k}" for k in range(m)]
    elif len(ids) != m:
        raise ValueError("ids length must match the number of embeddings")
    D = np.zeros((m, m))
    if kind == "unmatched":
        lams = [lambda_vector(X) for X in embeddings]
        if len({lam.shape for lam in lams}) > 1:
            raise ValueError("embedding dimensions differ")
        for a in range(m):
            for b in range(a + 1, m):
                D[a, b] = D[b, a] = float(np.linalg.norm(lams[a] - lams[b]))
    else:
        for a in range(m):
            for b in range(a + 1, m):
                D[a, b] = D[b, a] = matched_distance(embeddings[a], embeddings[b])
    return DistanceMatrix(values=D, kind=kind, ids=[str(v) for v in ids])


def save_distance_matrix(dm, path):
    """CSV export: graph ids as header row and leading column."""
    with open(path, "w") as fh:
        fh.write("id," + ",".join(dm.ids) + "\n")
        for gid, row in zip(dm.ids, dm.values):
            fh.write(gid + "," + ",".join(repr(float(v)) for v in row) + "\n")


def save_lambda_vectors(lambdas, ids, path):
    """CSV export of eigenvalue summaries, one graph per row."""
    lambdas = [np.asarray(lam, dtype=np.float64) for lam in lambdas]
    if len(lambdas) != len(ids):
        raise ValueError("ids length must match the number of vectors")
    d = lambdas[0].shape[0]
    with open(path, "w") as fh:
        fh.write("graph_id," + ",".join(f"lambda{k + 1}" for k in range(d)) + "\n")
        for gid, lam in zip(ids, lambdas):
            fh.write(str(gid) + "," + ",".join(repr(float(v)) for v in lam) + "\n")
