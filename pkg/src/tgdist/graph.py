"""Temporal graph data model, contact-list ingestion and basic manipulation.

A temporal graph is a fixed node set observed over ``T`` consecutive time
windows ("snapshots").  Each snapshot is a symmetric, zero-diagonal, weighted
adjacency matrix; weights count the raw contact records that fell into the
window.  Snapshot indices are 1-based in all public interfaces (events, time
ranges); the ``snapshots`` list itself is a plain Python list, so
``snapshots[k]`` holds snapshot ``k + 1``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

__all__ = [
    "DataFormatError",
    "RawContactRecord",
    "ContactEvent",
    "TemporalGraph",
    "load_contact_list",
    "aggregate",
    "to_contacts",
    "from_contacts",
    "subgraph",
    "permute_nodes",
    "drop_empty_snapshots",
    "graphs_equal",
    "save_graph",
    "load_graph",
]


class DataFormatError(ValueError):
    """An input file or record does not match the expected format."""


@dataclass(frozen=True)
class RawContactRecord:
    """One line of a raw contact list: two ids interacting at a timestamp."""

    timestamp: int
    i: str
    j: str


@dataclass(frozen=True)
class ContactEvent:
    """Maximal run of consecutive snapshots in which one edge is active.

    ``t`` is 1-based; the event covers snapshots ``t .. t + tau - 1``.
    """

    i: int
    j: int
    t: int
    tau: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError(f"self-edge event on node {self.i}")
        if self.t < 1 or self.tau < 1:
            raise ValueError(f"invalid event timing t={self.t}, tau={self.tau}")


def _canonical_snapshot(W, n=None):
    """Return ``W`` as a canonical float64 CSR array, validating invariants."""
    if sp.issparse(W):
        A = sp.csr_array(W, dtype=np.float64)
    else:
        A = sp.csr_array(np.asarray(W, dtype=np.float64))
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"snapshot must be square, got shape {A.shape}")
    if n is not None and A.shape[0] != n:
        raise ValueError(f"snapshot has {A.shape[0]} nodes, expected {n}")
    A.eliminate_zeros()
    A.sum_duplicates()
    A.sort_indices()
    if A.nnz:
        if A.diagonal().any():
            raise ValueError("snapshot has nonzero diagonal entries")
        if np.any(A.data < 0):
            raise ValueError("snapshot has negative weights")
        if not np.all(np.isfinite(A.data)):
            raise ValueError("snapshot has non-finite weights")
        if (A - A.T).nnz != 0:
            raise ValueError("snapshot is not symmetric")
    return A


class TemporalGraph:
    """Sequence of symmetric weighted snapshots over a common node set.

    Parameters
    ----------
    snapshots : sequence of (n, n) array-like or sparse matrices
        One weighted adjacency matrix per time window.  Each must be
        symmetric with zero diagonal and strictly positive stored weights.
    t_res : float
        Temporal resolution in seconds per snapshot (metadata only).
    node_names : sequence of str, optional
        Original node identifiers; position ``k`` names node ``k``.

    Instances are immutable after construction and safe to share.
    """

    def __init__(self, snapshots, t_res=1.0, node_names=None, validate=True):
        snapshots = list(snapshots)
        if not snapshots:
            raise ValueError("a temporal graph needs at least one snapshot")
        if t_res <= 0:
            raise ValueError("t_res must be positive")
        if validate:
            n = None
            snaps = []
            for W in snapshots:
                A = _canonical_snapshot(W, n)
                n = A.shape[0]
                snaps.append(A)
            snapshots = snaps
        self.snapshots = snapshots
        self.n = snapshots[0].shape[0]
        self.T = len(snapshots)
        self.t_res = float(t_res)
        if node_names is not None:
            node_names = [str(v) for v in node_names]
            if len(node_names) != self.n:
                raise ValueError("node_names length must equal n")
        self.node_names = node_names

    def __repr__(self):
        return f"TemporalGraph(n={self.n}, T={self.T}, t_res={self.t_res})"

    def num_temporal_edges(self):
        """Total number of temporal edges, counting each (i, j, t) once."""
        return sum(W.nnz for W in self.snapshots) // 2

    def total_weight(self):
        """Sum of all edge weights over all snapshots (each pair counted once)."""
        return sum(W.data.sum() for W in self.snapshots) / 2.0

    def weighted_degrees(self):
        """Per-node sum of incident edge weights over the whole time span."""
        deg = np.zeros(self.n)
        for W in self.snapshots:
            deg += np.asarray(W.sum(axis=1)).ravel()
        return deg

    def aggregated_adjacency(self):
        """Entrywise sum of all snapshots, as a CSR array."""
        agg = self.snapshots[0].copy()
        for W in self.snapshots[1:]:
            agg = agg + W
        return sp.csr_array(agg)

    def edge_list(self):
        """All temporal edges as integer arrays ``(t, i, j, w)`` with ``i < j``.

        ``t`` is 1-based; rows are sorted by (t, i, j).
        """
        ts, is_, js, ws = [], [], [], []
        for k, W in enumerate(self.snapshots):
            coo = sp.coo_array(W)
            mask = coo.row < coo.col
            ts.append(np.full(int(mask.sum()), k + 1, dtype=np.int64))
            is_.append(coo.row[mask].astype(np.int64))
            js.append(coo.col[mask].astype(np.int64))
            ws.append(coo.data[mask])
        t = np.concatenate(ts) if ts else np.zeros(0, dtype=np.int64)
        i = np.concatenate(is_) if is_ else np.zeros(0, dtype=np.int64)
        j = np.concatenate(js) if js else np.zeros(0, dtype=np.int64)
        w = np.concatenate(ws) if ws else np.zeros(0)
        order = np.lexsort((j, i, t))
        return t[order], i[order], j[order], w[order]


def _build_snapshots(n, T, t, i, j, w):
    """Assemble per-snapshot CSR matrices from parallel edge arrays (t 1-based)."""
    snapshots = []
    t = np.asarray(t, dtype=np.int64)
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    order = np.argsort(t, kind="stable")
    t, i, j, w = t[order], i[order], j[order], w[order]
    bounds = np.searchsorted(t, np.arange(1, T + 2))
    for k in range(T):
        lo, hi = bounds[k], bounds[k + 1]
        ii, jj, ww = i[lo:hi], j[lo:hi], w[lo:hi]
        A = sp.coo_array((np.concatenate([ww, ww]),
                          (np.concatenate([ii, jj]), np.concatenate([jj, ii]))),
                         shape=(n, n))
        snapshots.append(sp.csr_array(A))
    return snapshots


def load_contact_list(path, t_res):
    """Load a whitespace-separated contact list into a temporal graph.

    Each non-comment line is ``timestamp i j`` (extra columns ignored),
    timestamps in integer seconds, ids arbitrary tokens.  Timestamps are
    binned into windows of width ``t_res`` seconds; the weight of an edge in
    a snapshot is the number of raw records for that pair in the window.
    Node ids are remapped to ``0..n-1`` (sorted numerically when every id is
    an integer token, lexicographically otherwise) and the original ids are
    kept in ``node_names``.  Self-edge records are skipped with a logged
    warning count.

    Raises
    ------
    DataFormatError
        On a malformed line (reported with its line number) or if the file
        contains no usable contact records.
    """
    if t_res <= 0:
        raise ValueError("t_res must be positive")
    records = []
    n_self = 0
    path = Path(path)
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 3:
                raise DataFormatError(
                    f"{path}:{lineno}: expected at least 3 columns, got {len(parts)}")
            try:
                ts = int(parts[0])
            except ValueError as exc:
                raise DataFormatError(
                    f"{path}:{lineno}: bad timestamp {parts[0]!r}") from exc
            if parts[1] == parts[2]:
                n_self += 1
                continue
            records.append(RawContactRecord(ts, parts[1], parts[2]))
    if n_self:
        logger.warning("%s: skipped %d self-edge records", path, n_self)
    if not records:
        raise DataFormatError(f"{path}: no contact records found")

    tokens = set()
    for r in records:
        tokens.add(r.i)
        tokens.add(r.j)
    try:
        names = sorted(tokens, key=int)
    except ValueError:
        names = sorted(tokens)
    index = {name: k for k, name in enumerate(names)}

    ts = np.array([r.timestamp for r in records], dtype=np.int64)
    t0 = ts.min()
    T = int((ts.max() - t0) // t_res) + 1
    t = ((ts - t0) // t_res).astype(np.int64) + 1
    i = np.array([index[r.i] for r in records], dtype=np.int64)
    j = np.array([index[r.j] for r in records], dtype=np.int64)
    lo = np.minimum(i, j)
    hi = np.maximum(i, j)
    snapshots = _build_snapshots(len(names), T, t, lo, hi, np.ones(len(records)))
    return TemporalGraph(snapshots, t_res=t_res, node_names=names)


def aggregate(g, factor):
    """Sum consecutive groups of ``factor`` snapshots entrywise.

    The new snapshot count is ``ceil(T / factor)``; a ragged tail group is
    kept as-is.  Total weight is conserved.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    factor = int(factor)
    if factor == 1:
        return TemporalGraph(list(g.snapshots), t_res=g.t_res,
                             node_names=g.node_names, validate=False)
    snaps = []
    for lo in range(0, g.T, factor):
        block = g.snapshots[lo:lo + factor]
        acc = block[0].copy()
        for W in block[1:]:
            acc = acc + W
        snaps.append(sp.csr_array(acc))
    return TemporalGraph(snaps, t_res=g.t_res * factor, node_names=g.node_names)


def to_contacts(g):
    """Decompose a graph into contact events, one per maximal activity run.

    For every node pair, maximal runs of consecutive snapshots in which the
    edge is active become one :class:`ContactEvent` with ``tau`` equal to
    the run length.  Weights are discarded: each active snapshot counts
    once.  Events are sorted by (i, j, t).
    """
    active = {}
    for k, W in enumerate(g.snapshots):
        coo = sp.coo_array(W)
        mask = coo.row < coo.col
        for a, b in zip(coo.row[mask], coo.col[mask]):
            active.setdefault((int(a), int(b)), []).append(k + 1)
    events = []
    for (a, b), times in sorted(active.items()):
        run_start = times[0]
        prev = times[0]
        for t in times[1:]:
            if t != prev + 1:
                events.append(ContactEvent(a, b, run_start, prev - run_start + 1))
                run_start = t
            prev = t
        events.append(ContactEvent(a, b, run_start, prev - run_start + 1))
    events.sort(key=lambda e: (e.i, e.j, e.t))
    return events


def from_contacts(events, n, T, t_res=1.0):
    """Rebuild a unit-weight temporal graph from contact events.

    Overlapping events for the same pair accumulate weight.
    """
    t, i, j = [], [], []
    for e in events:
        if e.t + e.tau - 1 > T:
            raise ValueError(f"event {e} exceeds T={T}")
        for delta in range(e.tau):
            t.append(e.t + delta)
            i.append(min(e.i, e.j))
            j.append(max(e.i, e.j))
    snapshots = _build_snapshots(n, T, t, i, j, np.ones(len(t)))
    return TemporalGraph(snapshots, t_res=t_res)


def subgraph(g, nodes, t_from=1, t_to=None):
    """Restrict a graph to a node subset and a 1-based time range.

    Nodes are reindexed contiguously in sorted order; requested nodes with
    no internal edges are retained as isolated nodes.
    """
    nodes = sorted(set(int(v) for v in nodes))
    if not nodes:
        raise ValueError("node subset must be non-empty")
    if any(v < 0 or v >= g.n for v in nodes):
        raise ValueError("node subset contains out-of-range ids")
    if t_to is None:
        t_to = g.T
    if not (1 <= t_from <= t_to <= g.T):
        raise ValueError(f"invalid time range [{t_from}, {t_to}] for T={g.T}")
    idx = np.asarray(nodes, dtype=np.int64)
    snaps = [sp.csr_array(W[np.ix_(idx, idx)])
             for W in g.snapshots[t_from - 1:t_to]]
    names = [g.node_names[v] for v in nodes] if g.node_names is not None else None
    return TemporalGraph(snaps, t_res=g.t_res, node_names=names)


def permute_nodes(g, perm):
    """Relabel nodes: node ``v`` of the input becomes node ``perm[v]``."""
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (g.n,) or not np.array_equal(np.sort(perm), np.arange(g.n)):
        raise ValueError("perm must be a permutation of 0..n-1")
    inv = np.empty_like(perm)
    inv[perm] = np.arange(g.n)
    snaps = [sp.csr_array(W[np.ix_(inv, inv)]) for W in g.snapshots]
    names = None
    if g.node_names is not None:
        names = [""] * g.n
        for v, name in enumerate(g.node_names):
            names[perm[v]] = name
    return TemporalGraph(snaps, t_res=g.t_res, node_names=names, validate=False)


def drop_empty_snapshots(g):
    """Remove snapshots with no edges at all (shrinks T; keeps at least one)."""
    snaps = [W for W in g.snapshots if W.nnz > 0]
    if not snaps:
        snaps = [g.snapshots[0]]
    return TemporalGraph(snaps, t_res=g.t_res, node_names=g.node_names,
                         validate=False)


def graphs_equal(g1, g2):
    """Exact equality of node count, snapshot count and all weights."""
    if g1.n != g2.n or g1.T != g2.T:
        return False
    return all((A - B).nnz == 0 for A, B in zip(g1.snapshots, g2.snapshots))


def save_graph(g, path):
    """Write the canonical dump: ``<path>`` edge lines, ``<path>.json`` descriptor.

    The edge dump has one ``t i j w`` line per temporal edge (``t`` 1-based,
    ``i < j``), preceded by header comments carrying n, T and t_res so the
    dump alone round-trips.
    """
    path = Path(path)
    t, i, j, w = g.edge_list()
    with open(path, "w") as fh:
        fh.write("# temporal graph edge dump: t i j w\n")
        fh.write(f"# n={g.n} T={g.T} t_res={g.t_res!r}\n")
        for tt, ii, jj, ww in zip(t, i, j, w):
            fh.write(f"{tt} {ii} {jj} {float(ww)!r}\n")
    descriptor = {"n": g.n, "T": g.T, "t_res": g.t_res, "node_names": g.node_names}
    with open(path.with_name(path.name + ".json"), "w") as fh:
        json.dump(descriptor, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_graph(path):
    """Load a graph written by :func:`save_graph`.

    The JSON descriptor is preferred when present; otherwise the header
    comments of the edge dump are parsed.
    """
    path = Path(path)
    meta = None
    json_path = path.with_name(path.name + ".json")
    if json_path.exists():
        with open(json_path) as fh:
            meta = json.load(fh)
    t, i, j, w = [], [], [], []
    header = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for part in line[1:].split():
                    if "=" in part:
                        key, _, val = part.partition("=")
                        header[key] = val
                continue
            parts = line.split()
            if len(parts) != 4:
                raise DataFormatError(f"{path}:{lineno}: expected 4 columns")
            try:
                t.append(int(parts[0]))
                i.append(int(parts[1]))
                j.append(int(parts[2]))
                w.append(float(parts[3]))
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: bad edge line") from exc
    if meta is None:
        try:
            meta = {"n": int(header["n"]), "T": int(header["T"]),
                    "t_res": float(header["t_res"]), "node_names": None}
        except KeyError as exc:
            raise DataFormatError(f"{path}: missing descriptor and header") from exc
    snapshots = _build_snapshots(meta["n"], meta["T"], t, i, j, w)
    return TemporalGraph(snapshots, t_res=meta["t_res"],
                         node_names=meta.get("node_names"))
