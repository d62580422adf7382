"""Seeded null models: six randomizations with exact conservation laws.

Each kind destroys some structure of a temporal graph while preserving a
declared set of quantities exactly.  All of them act on unit-weight
temporal edge instances (i, j, t): a snapshot edge of weight w counts as w
instances, and duplicate instances produced by resampling merge back into
weights.  Weights must therefore be integers.

Kind              preserved exactly
----------------  ------------------------------------------------------
random            number of edge instances
random_delta      number of activity instances + duration histogram
active_snapshot   per-snapshot edge count, weight multiset, active nodes
time              aggregated weighted adjacency
sequence          multiset of snapshots
weighted_degree   per-node total incident weight
"""

from __future__ import annotations

import logging
from enum import Enum

import numpy as np

from tgdist.graph import (
    ContactEvent,
    TemporalGraph,
    _build_snapshots,
    from_contacts,
    to_contacts,
)

logger = logging.getLogger(__name__)

__all__ = ["RandomizationKind", "randomize", "generate_replicas"]


class RandomizationKind(Enum):
    RANDOM = "random"
    RANDOM_DELTA = "random_delta"
    ACTIVE_SNAPSHOT = "active_snapshot"
    TIME = "time"
    SEQUENCE = "sequence"
    WEIGHTED_DEGREE = "weighted_degree"


def _instances(g):
    """Expand the graph into parallel (t, i, j) instance arrays."""
    t, i, j, w = g.edge_list()
    reps = np.rint(w).astype(np.int64)
    if np.max(np.abs(w - reps), initial=0) > 1e-9:
        raise ValueError("randomization needs integer edge weights")
    return np.repeat(t, reps), np.repeat(i, reps), np.repeat(j, reps)


def _rebuild(g, t, i, j):
    snaps = _build_snapshots(g.n, g.T, t, i, j, np.ones(len(t)))
    return TemporalGraph(snaps, t_res=g.t_res, node_names=g.node_names,
                         validate=False)


def _random_pairs(rng, n, count):
    """``count`` uniform ordered pairs with distinct endpoints."""
    i = rng.integers(0, n, size=count)
    shift = rng.integers(1, n, size=count)
    return i, (i + shift) % n


def _random(g, rng):
    t, i, j = _instances(g)
    count = len(t)
    i, j = _random_pairs(rng, g.n, count)
    t = rng.integers(1, g.T + 1, size=count)
    return _rebuild(g, t, i, j)


def _random_delta(g, rng):
    # Longest events first, and no event may touch or overlap another one
    # of the same pair: a merged or stacked run would change the duration
    # histogram recomputed from the output snapshots.
    events = sorted(to_contacts(g), key=lambda e: -e.tau)
    occupied = set()
    budget = 200 * max(1, len(events))
    draws = 0
    resampled = []
    for e in events:
        # Start snapshot uniform in 1..T-tau; a full-length event can only
        # start at 1.
        hi = max(1, g.T - e.tau)
        while True:
            draws += 1
            if draws > budget:
                raise ArithmeticError(
                    f"random_delta could not place all events without "
                    f"collisions within {budget} draws; the graph is too "
                    f"dense for this null model")
            ii, jj = _random_pairs(rng, g.n, 1)
            a, b = int(min(ii[0], jj[0])), int(max(ii[0], jj[0]))
            t = int(rng.integers(1, hi + 1))
            if all((a, b, s) not in occupied
                   for s in range(t - 1, t + e.tau + 1)):
                break
        occupied.update((a, b, s) for s in range(t, t + e.tau))
        resampled.append(ContactEvent(a, b, t, e.tau))
    h = from_contacts(resampled, g.n, g.T, t_res=g.t_res)
    return TemporalGraph(h.snapshots, t_res=g.t_res, node_names=g.node_names,
                         validate=False)


def _decode_pair(idx, a):
    """Map flat indices to (row, col) pairs of the strict upper triangle."""
    # Row r owns indices [r*a - r(r+1)/2, ...) of length a-1-r; invert with
    # the quadratic formula, then fix any off-by-one from the sqrt rounding.
    idx = np.asarray(idx, dtype=np.int64)
    r = np.floor((2 * a - 1 - np.sqrt((2 * a - 1) ** 2 - 8 * idx)) / 2)
    r = r.astype(np.int64)
    first = r * a - r * (r + 1) // 2
    r -= idx < first
    r += idx >= (r + 1) * a - (r + 1) * (r + 2) // 2
    first = r * a - r * (r + 1) // 2
    c = (idx - first) + r + 1
    return r, c


def _sample_covering_pairs(rng, active, m, budget=10):
    """m distinct pairs of ``active`` nodes, every node covered.

    Rejection sampling first; if no draw within the budget covers every
    active node, fall back to pairing a shuffled copy of the nodes (always
    feasible, since the input snapshot itself covers them with m edges) and
    topping up with uniform unused pairs.
    """
    a = len(active)
    total = a * (a - 1) // 2
    for _ in range(budget):
        idx = rng.choice(total, size=m, replace=False)
        r, c = _decode_pair(idx, a)
        if len(np.unique(np.concatenate([r, c]))) == a:
            return active[r], active[c], False
    order = rng.permutation(a)
    pairs = set()
    for k in range(a // 2):
        u, v = int(order[2 * k]), int(order[2 * k + 1])
        pairs.add((min(u, v), max(u, v)))
    if a % 2:
        u = int(order[-1])
        v = int(order[rng.integers(a - 1)])
        pairs.add((min(u, v), max(u, v)))
    while len(pairs) < m:
        idx = rng.integers(total)
        r, c = _decode_pair(np.array([idx]), a)
        pairs.add((int(r[0]), int(c[0])))
    r = np.array([p[0] for p in pairs], dtype=np.int64)
    c = np.array([p[1] for p in pairs], dtype=np.int64)
    return active[r], active[c], True


def _active_snapshot(g, rng):
    t_out, i_out, j_out, w_out = [], [], [], []
    n_fallback = 0
    for k, W in enumerate(g.snapshots):
        m = W.nnz // 2
        if m == 0:
            continue
        deg = np.asarray(W.sum(axis=1)).ravel()
        active = np.flatnonzero(deg > 0)
        if len(active) < 2:
            logger.warning("snapshot %d has %d active nodes; left unchanged",
                           k + 1, len(active))
            continue
        i, j, fell_back = _sample_covering_pairs(rng, active, m)
        n_fallback += fell_back
        coo = W.tocoo()
        weights = coo.data[coo.row < coo.col]
        t_out.append(np.full(m, k + 1))
        i_out.append(i)
        j_out.append(j)
        w_out.append(rng.permutation(weights))
    if n_fallback:
        logger.info("active-snapshot rejection budget exhausted on %d of %d "
                    "snapshots; used constructive pairing there",
                    n_fallback, g.T)
    if not t_out:
        return _rebuild(g, [], [], [])
    snaps = _build_snapshots(g.n, g.T, np.concatenate(t_out),
                             np.concatenate(i_out), np.concatenate(j_out),
                             np.concatenate(w_out))
    # Snapshots skipped above (empty or degenerate) keep their original form.
    for k, W in enumerate(g.snapshots):
        if snaps[k].nnz == 0 and W.nnz > 0:
            snaps[k] = W.copy()
    return TemporalGraph(snaps, t_res=g.t_res, node_names=g.node_names,
                         validate=False)


def _time(g, rng):
    t, i, j = _instances(g)
    t = rng.integers(1, g.T + 1, size=len(t))
    return _rebuild(g, t, i, j)


def _sequence(g, rng):
    order = rng.permutation(g.T)
    snaps = [g.snapshots[k] for k in order]
    return TemporalGraph(snaps, t_res=g.t_res, node_names=g.node_names,
                         validate=False)


def _weighted_degree(g, rng, max_repair_passes=100, max_reshuffles=20, seed=None):
    t, i, j = _instances(g)
    count = len(t)
    if count == 0:
        return _rebuild(g, [], [], [])
    stubs_base = np.concatenate([i, j])
    for _ in range(max_reshuffles):
        stubs = rng.permutation(stubs_base)
        left, right = stubs[0::2], stubs[1::2]
        ok = False
        for _ in range(max_repair_passes):
            bad = np.flatnonzero(left == right)
            if len(bad) == 0:
                ok = True
                break
            # Swap each self-pair's right stub with a random position.
            for b in bad:
                pos = int(rng.integers(count))
                right[b], right[pos] = right[pos], right[b]
        if ok:
            break
    else:
        raise ArithmeticError(
            f"could not pair stubs without self-loops (seed={seed})")
    times = rng.integers(1, g.T + 1, size=count)
    return _rebuild(g, times, left, right)


_DISPATCH = {
    RandomizationKind.RANDOM: _random,
    RandomizationKind.RANDOM_DELTA: _random_delta,
    RandomizationKind.ACTIVE_SNAPSHOT: _active_snapshot,
    RandomizationKind.TIME: _time,
    RandomizationKind.SEQUENCE: _sequence,
    RandomizationKind.WEIGHTED_DEGREE: _weighted_degree,
}


def randomize(g, kind, seed=0):
    """Return a randomized copy of the graph.

    ``kind`` is a :class:`RandomizationKind` or its string value.  Node
    count, snapshot count, resolution and node names are always preserved;
    the rest depends on the kind (see the module docstring).  Deterministic
    for a fixed seed.
    """
    kind = RandomizationKind(kind)
    rng = np.random.default_rng(seed)
    if kind is RandomizationKind.WEIGHTED_DEGREE:
        return _weighted_degree(g, rng, seed=seed)
    return _DISPATCH[kind](g, rng)


def generate_replicas(g, kind, seed, reps):
    """``reps`` independent randomized copies with seeds derived from one."""
    children = np.random.SeedSequence(seed).spawn(reps)
    out = []
    for child in children:
        rng = np.random.default_rng(child)
        kind_e = RandomizationKind(kind)
        if kind_e is RandomizationKind.WEIGHTED_DEGREE:
            out.append(_weighted_degree(g, rng, seed=seed))
        else:
            out.append(_DISPATCH[kind_e](g, rng))
    return out
