"""Shared test fixtures and independent oracle implementations.

Oracles here are deliberately naive (dense, double-loop, simulation-based)
so they cannot share bugs with the optimized library code they check.
"""

import numpy as np

from tgdist.graph import TemporalGraph
from tgdist.transition import snapshot_transition


def random_temporal_graph(rng, n, T, p=0.2, weighted=True):
    """Random symmetric snapshots with integer weights."""
    snaps = []
    for _ in range(T):
        mask = np.triu(rng.random((n, n)) < p, k=1)
        W = mask * (rng.integers(1, 4, size=(n, n)) if weighted else 1)
        snaps.append((W + W.T).astype(float))
    return TemporalGraph(snaps, t_res=20.0)


def dense_transitions(g):
    return [snapshot_transition(W.toarray()) for W in g.snapshots]


def dense_global_matrix(g):
    """P computed term by term: one forward product per walk length."""
    Ls = dense_transitions(g)
    T = len(Ls)
    P = np.zeros((g.n, g.n))
    for start in range(T):
        prod = np.eye(g.n)
        for t in range(start, T):
            prod = prod @ Ls[t]
        P += prod
    return P / T


def mc_global_matrix(g, walks_per_node, seed):
    """Estimate P by simulating time-respecting lazy walks.

    Each walk picks a length l uniformly from {1..T}, starts at time
    T - l + 1 and steps through the remaining snapshot transitions.
    Returns the matrix of empirical start-to-end frequencies.
    """
    rng = np.random.default_rng(seed)
    Ls = dense_transitions(g)
    cums = [np.cumsum(L, axis=1) for L in Ls]
    n, T = g.n, len(Ls)
    P_hat = np.zeros((n, n))
    for start in range(n):
        length = rng.integers(1, T + 1, size=walks_per_node)
        t_start = T - length + 1
        current = np.full(walks_per_node, start, dtype=np.int64)
        for t in range(1, T + 1):
            active = t_start <= t
            if not np.any(active):
                continue
            u = rng.random(int(active.sum()))
            rows = cums[t - 1][current[active]]
            nxt = (rows < u[:, None]).sum(axis=1)
            current[active] = np.minimum(nxt, n - 1)
        P_hat[start] = np.bincount(current, minlength=n) / walks_per_node
    return P_hat


def mc_tolerance(P, walks_per_node, n_se=3.0):
    """Elementwise n_se-standard-error band for the MC estimate."""
    return n_se * np.sqrt(P * (1.0 - P) / walks_per_node)
