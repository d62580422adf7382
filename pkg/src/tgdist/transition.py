"""Lazy-walk transition matrices and the global time-respecting operator.

Each snapshot W yields a lazy transition matrix (D + I)^(-1) (W + I): a
walker on node i either stays put or moves to a neighbor, with probabilities
proportional to the self-loop of weight one and the incident edge weights.
The global operator averages, over a uniformly random walk length l in
{1..T}, the product of the last l snapshot transitions in time order: a walk
of length l starts at time T - l + 1 and ends at time T.  Rows of the
resulting matrix P are probability distributions over end nodes.

P is never formed explicitly in lazy mode; products act on n x d matrices
from the right so the cost stays O(d E + n d T) per application.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = [
    "snapshot_transition",
    "GlobalTransitionOperator",
    "build_operator",
]

# Below this node count sparse overhead dominates; use dense snapshots.
DENSE_FALLBACK_N = 64

# Materializing P allocates an n x n dense matrix; refuse above this size.
DEFAULT_MATERIALIZE_CAP = 5000


def snapshot_transition(W):
    """Lazy-walk transition matrix (D + I)^(-1) (W + I) of one snapshot.

    W must be symmetric with zero diagonal and nonnegative weights.  Rows
    sum to one exactly; an isolated node keeps a row equal to its own
    indicator (the walker stays in place with probability one).  Dense input
    gives a dense result, sparse input a CSR result.
    """
    if sp.issparse(W):
        A = sp.csr_array(W, dtype=np.float64)
        if np.any(A.data < 0):
            raise ValueError("snapshot has negative weights")
        n = A.shape[0]
        scale = 1.0 / (np.asarray(A.sum(axis=1)).ravel() + 1.0)
        L = A + sp.eye_array(n, format="csr")
        L = sp.csr_array(L)
        L.data *= np.repeat(scale, np.diff(L.indptr))
        return L
    A = np.asarray(W, dtype=np.float64)
    if np.any(A < 0):
        raise ValueError("snapshot has negative weights")
    n = A.shape[0]
    scale = 1.0 / (A.sum(axis=1) + 1.0)
    return (A + np.eye(n)) * scale[:, None]


class GlobalTransitionOperator:
    """Action of the time-respecting walk matrix P on n x d matrices.

    In lazy mode only the per-snapshot transitions are stored and products
    are accumulated on the fly; in materialized mode P itself is kept as a
    dense array.  Both modes implement the same linear map.  Instances are
    immutable and safe to share.
    """

    def __init__(self, transitions, mode="lazy",
                 materialize_cap=DEFAULT_MATERIALIZE_CAP):
        transitions = list(transitions)
        if not transitions:
            raise ValueError("need at least one snapshot transition")
        self._L = transitions
        self._LT = None
        self.n = transitions[0].shape[0]
        self.T = len(transitions)
        self.materialize_cap = materialize_cap
        self._P = None
        if mode == "materialized":
            self._P = self._compute_dense()
        elif mode != "lazy":
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode

    def _check(self, M):
        M = np.asarray(M, dtype=np.float64)
        if M.shape[0] != self.n:
            raise ValueError(f"operand has {M.shape[0]} rows, expected {self.n}")
        return M

    def apply(self, M):
        """Return P @ M.

        Lazy mode walks the snapshots backwards, maintaining the suffix
        product acting on M and summing every partial product: after
        processing snapshot t the running product equals the end segment of
        a walk started at time t.  Dividing by T averages over the uniform
        walk length.
        """
        M = self._check(M)
        if self._P is not None:
            return self._P @ M
        Y = M
        acc = np.zeros_like(M)
        for t in range(self.T - 1, -1, -1):
            Y = self._L[t] @ Y
            acc += Y
        return acc / self.T

    def apply_transpose(self, M):
        """Return P^T @ M, via prefix products in forward time order."""
        M = self._check(M)
        if self._P is not None:
            return self._P.T @ M
        if self._LT is None:
            self._LT = [L.T if isinstance(L, np.ndarray) else sp.csr_array(L.T)
                        for L in self._L]
        B = np.zeros_like(M)
        for t in range(self.T):
            B = self._LT[t] @ (B + M)
        return B / self.T

    def _compute_dense(self):
        if self.n > self.materialize_cap:
            raise ValueError(
                f"materializing P for n={self.n} exceeds the cap "
                f"{self.materialize_cap}; use lazy mode")
        Y = np.eye(self.n)
        acc = np.zeros((self.n, self.n))
        for t in range(self.T - 1, -1, -1):
            Y = self._L[t] @ Y
            acc += Y
        return acc / self.T

    def materialize(self):
        """P as a dense (n, n) array.  Guarded by ``materialize_cap``."""
        if self._P is None:
            self._P = self._compute_dense()
        return self._P


def build_operator(g, mode="auto"):
    """Construct the global operator for a temporal graph.

    ``mode`` is ``"lazy"``, ``"materialized"`` or ``"auto"``.  Auto picks
    materialized when n^2 does not exceed the total temporal edge count: at
    that density one application of the explicit P is no more work than a
    lazy pass over the snapshots, and P is reused across applications.
    """
    if mode not in ("auto", "lazy", "materialized"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "auto":
        E = g.num_temporal_edges()
        mode = "materialized" if g.n * g.n <= E else "lazy"
    snaps = g.snapshots
    if g.n < DENSE_FALLBACK_N:
        snaps = [W.toarray() for W in snaps]
    return GlobalTransitionOperator([snapshot_transition(W) for W in snaps],
                                    mode=mode)
