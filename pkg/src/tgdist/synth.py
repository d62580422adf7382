"""Synthetic graph generators and temporalization.

Static topologies come from a degree-corrected stochastic block model
(edge probability min(1, theta_i theta_j C_{l_i l_j} / n)) or from a random
geometric model on the unit disk with kernel exp(-beta ||x_i - x_j||).
Four named presets (er, sbm, cm, gm) cover the interesting corners of that
family; every preset is rescaled by bisection so the expected mean degree
hits a common target, which keeps degree a non-discriminating feature
between models.

A static graph becomes a temporal one by giving every static edge the
activity time series of a randomly chosen edge of a source temporal graph.
When no empirical source is at hand, ``synthetic_activity`` builds a bank
of on/off series with power-law durations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from tgdist.graph import TemporalGraph, _build_snapshots

__all__ = [
    "StaticGraph",
    "DCSBMParams",
    "GeometricParams",
    "dcsbm",
    "geometric",
    "preset",
    "temporalize",
    "synthetic_activity",
    "PRESET_MODELS",
]

PRESET_MODELS = ("er", "sbm", "cm", "gm")

# Affinity matrix of the five-community preset: strong diagonal, weak rest.
SBM_COMMUNITIES = 5
SBM_IN, SBM_OUT = 20.0, 1.0

GM_BETA = 20.0

DEFAULT_MEAN_DEGREE = 4.8

# Bisection gives up once the kernel scale exceeds this; at that point every
# pair is saturated and the target degree is simply not reachable.
MAX_SCALE = 1e12


@dataclass
class StaticGraph:
    """Simple undirected graph held as a 0/1 sparse adjacency matrix."""

    A: sp.csr_array

    def __post_init__(self):
        A = sp.csr_array(self.A, dtype=np.float64)
        A.eliminate_zeros()
        if A.shape[0] != A.shape[1]:
            raise ValueError("adjacency must be square")
        if A.nnz:
            if not np.all(A.data == 1.0):
                raise ValueError("adjacency entries must be 0 or 1")
            if A.diagonal().any():
                raise ValueError("adjacency has self-loops")
            if (A - A.T).nnz != 0:
                raise ValueError("adjacency is not symmetric")
        self.A = A

    @property
    def n(self):
        return self.A.shape[0]

    def num_edges(self):
        return self.A.nnz // 2

    def mean_degree(self):
        return self.A.nnz / self.n

    def edges(self):
        """Edge endpoints as two arrays with i < j."""
        coo = self.A.tocoo()
        mask = coo.row < coo.col
        return coo.row[mask].astype(np.int64), coo.col[mask].astype(np.int64)


@dataclass
class DCSBMParams:
    """n nodes, community labels in 1..k, affinity C, degree propensities."""

    n: int
    labels: np.ndarray
    C: np.ndarray
    theta: np.ndarray = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.C = np.asarray(self.C, dtype=np.float64)
        if self.theta is None:
            self.theta = np.ones(self.n)
        self.theta = np.asarray(self.theta, dtype=np.float64)
        k = self.C.shape[0]
        if self.C.shape != (k, k) or not np.allclose(self.C, self.C.T):
            raise ValueError("C must be square and symmetric")
        if np.any(self.C < 0):
            raise ValueError("C must be nonnegative")
        if self.labels.shape != (self.n,) or self.labels.min() < 1 \
                or self.labels.max() > k:
            raise ValueError(f"labels must lie in 1..{k}")
        if self.theta.shape != (self.n,) or np.any(self.theta < 0):
            raise ValueError("theta must be nonnegative of length n")
        if abs(self.theta.sum() - self.n) > 1e-6 * self.n:
            raise ValueError("theta must sum to n")


@dataclass
class GeometricParams:
    """Kernel decay rate and (optional) latent positions in the unit disk."""

    n: int
    beta: float = GM_BETA
    positions: np.ndarray = None

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.positions is not None:
            self.positions = np.asarray(self.positions, dtype=np.float64)
            if self.positions.shape != (self.n, 2):
                raise ValueError("positions must be (n, 2)")
            if np.any(np.linalg.norm(self.positions, axis=1) > 1 + 1e-12):
                raise ValueError("positions must lie in the unit disk")


def _sample_edges(n, pair_probs, rng):
    """Bernoulli edge draw over the strict upper triangle."""
    iu, ju = np.triu_indices(n, k=1)
    hit = rng.random(len(pair_probs)) < pair_probs
    i, j = iu[hit], ju[hit]
    A = sp.coo_array((np.ones(2 * len(i)),
                      (np.concatenate([i, j]), np.concatenate([j, i]))),
                     shape=(n, n))
    return StaticGraph(sp.csr_array(A))


def _pair_probs_dcsbm(params):
    iu, ju = np.triu_indices(params.n, k=1)
    block = params.C[params.labels[iu] - 1, params.labels[ju] - 1]
    return params.theta[iu] * params.theta[ju] * block / params.n


def dcsbm(params, seed=0):
    """Draw one degree-corrected block-model graph."""
    rng = np.random.default_rng(seed)
    probs = np.minimum(1.0, _pair_probs_dcsbm(params))
    return _sample_edges(params.n, probs, rng)


def _disk_positions(n, rng):
    radius = np.sqrt(rng.random(n))
    angle = rng.random(n) * 2 * np.pi
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])


def _pair_probs_geometric(params, positions):
    iu, ju = np.triu_indices(params.n, k=1)
    dist = np.linalg.norm(positions[iu] - positions[ju], axis=1)
    return np.exp(-params.beta * dist)


def geometric(params, seed=0, scale=1.0):
    """Draw one random geometric graph; positions are sampled when absent."""
    rng = np.random.default_rng(seed)
    positions = params.positions
    if positions is None:
        positions = _disk_positions(params.n, rng)
    probs = np.minimum(1.0, scale * _pair_probs_geometric(params, positions))
    return _sample_edges(params.n, probs, rng)


def _calibrate_scale(pair_probs, n, target):
    """Bisection for the scale making the expected mean degree hit target."""

    def mean_degree(s):
        return 2.0 * np.minimum(1.0, s * pair_probs).sum() / n

    hi = 1.0
    while mean_degree(hi) < target:
        hi *= 2.0
        if hi > MAX_SCALE:
            raise ValueError(
                f"target mean degree {target} not reachable (saturated at "
                f"{mean_degree(MAX_SCALE):.3g})")
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mean_degree(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def preset(model, n, target_mean_degree=DEFAULT_MEAN_DEGREE, seed=0):
    """One of the four named generators, calibrated to a mean degree.

    er: homogeneous random graph.  sbm: five equal communities with a
    20-to-1 affinity contrast.  cm: heavy-tailed degree propensities,
    uniform(3, 10) raised to the fourth power and rescaled.  gm: geometric
    kernel on the unit disk with beta = 20.
    """
    model = model.lower()
    if model not in PRESET_MODELS:
        raise ValueError(f"unknown preset {model!r}; pick from {PRESET_MODELS}")
    if n < 10:
        raise ValueError("presets need n >= 10")
    rng = np.random.default_rng(seed)
    edge_seed = int(rng.integers(2**63))
    if model == "gm":
        params = GeometricParams(n=n, beta=GM_BETA,
                                 positions=_disk_positions(n, rng))
        scale = _calibrate_scale(_pair_probs_geometric(params, params.positions),
                                 n, target_mean_degree)
        return geometric(params, seed=edge_seed, scale=scale)
    if model == "er":
        labels = np.ones(n, dtype=np.int64)
        C = np.array([[1.0]])
        theta = None
    elif model == "sbm":
        sizes = np.full(SBM_COMMUNITIES, n // SBM_COMMUNITIES)
        sizes[:n % SBM_COMMUNITIES] += 1
        labels = np.repeat(np.arange(1, SBM_COMMUNITIES + 1), sizes)
        C = np.full((SBM_COMMUNITIES, SBM_COMMUNITIES), SBM_OUT)
        np.fill_diagonal(C, SBM_IN)
        theta = None
    else:  # cm
        labels = np.ones(n, dtype=np.int64)
        C = np.array([[1.0]])
        theta = rng.uniform(3.0, 10.0, size=n) ** 4
        theta *= n / theta.sum()
    params = DCSBMParams(n=n, labels=labels, C=C, theta=theta)
    scale = _calibrate_scale(_pair_probs_dcsbm(params), n, target_mean_degree)
    params = DCSBMParams(n=n, labels=labels, C=scale * C, theta=params.theta)
    return dcsbm(params, seed=edge_seed)


def _source_series(source):
    """Distinct edges of a temporal graph with their activity series."""
    series = {}
    for k, W in enumerate(source.snapshots):
        coo = W.tocoo()
        mask = coo.row < coo.col
        for a, b, w in zip(coo.row[mask], coo.col[mask], coo.data[mask]):
            series.setdefault((int(a), int(b)), []).append((k + 1, float(w)))
    return [np.array(v, dtype=np.float64) for _, v in sorted(series.items())]


def temporalize(sg, source, seed=0, circular_shift=False):
    """Give each static edge the activity series of a random source edge.

    The aggregated output has exactly the static topology; the time axis
    (length, resolution) comes from the source.  ``circular_shift`` rotates
    each copied series by an independent uniform offset.
    """
    bank = _source_series(source)
    if not bank:
        raise ValueError("activity source has no edges")
    rng = np.random.default_rng(seed)
    ei, ej = sg.edges()
    ts, is_, js, ws = [], [], [], []
    for a, b in zip(ei, ej):
        pick = bank[rng.integers(len(bank))]
        t = pick[:, 0].astype(np.int64)
        if circular_shift:
            t = (t - 1 + int(rng.integers(source.T))) % source.T + 1
        ts.append(t)
        ws.append(pick[:, 1])
        is_.append(np.full(len(t), a))
        js.append(np.full(len(t), b))
    if ts:
        snaps = _build_snapshots(sg.n, source.T, np.concatenate(ts),
                                 np.concatenate(is_), np.concatenate(js),
                                 np.concatenate(ws))
    else:
        snaps = _build_snapshots(sg.n, source.T, [], [], [], [])
    return TemporalGraph(snaps, t_res=source.t_res, validate=False)


def synthetic_activity(T, n_series=100, exponent=2.5, seed=0):
    """Bank of independent on/off edge activity series, one edge each.

    Series alternate on and off runs with power-law distributed durations
    (P(tau) ~ tau^-exponent on 1..T), a convenient stand-in for empirical
    bursty contact sequences.  Edge k connects nodes 2k and 2k+1; weights
    are 1 while on.  Every series is forced to be nonempty.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    rng = np.random.default_rng(seed)
    pmf = np.arange(1, T + 1, dtype=np.float64) ** (-exponent)
    cdf = np.cumsum(pmf / pmf.sum())
    ts, is_, js = [], [], []
    for k in range(n_series):
        active = []
        while not active:
            # Runs have length >= 1, so T draws always cover the horizon.
            # The min guards the top cdf entry rounding below 1.
            runs = 1 + np.minimum(
                np.searchsorted(cdf, rng.random(T), side="right"), T - 1)
            on = bool(rng.integers(2))
            t = 1
            for run in runs:
                if t > T:
                    break
                if on:
                    active.extend(range(t, min(t + int(run), T + 1)))
                t += int(run)
                on = not on
        ts.append(np.array(active, dtype=np.int64))
        is_.append(np.full(len(active), 2 * k, dtype=np.int64))
        js.append(np.full(len(active), 2 * k + 1, dtype=np.int64))
    snaps = _build_snapshots(2 * n_series, T, np.concatenate(ts),
                             np.concatenate(is_), np.concatenate(js),
                             np.ones(sum(len(t) for t in ts)))
    return TemporalGraph(snaps, t_res=1.0, validate=False)
