import numpy as np
import pytest
import scipy.sparse as sp

from tgdist.graph import TemporalGraph
from tgdist.transition import (
    GlobalTransitionOperator,
    build_operator,
    snapshot_transition,
)

from helpers import (
    dense_global_matrix,
    mc_global_matrix,
    mc_tolerance,
    random_temporal_graph,
)


def snap(n, edges):
    W = np.zeros((n, n))
    for i, j, w in edges:
        W[i, j] = W[j, i] = w
    return W


class TestSnapshotTransition:
    def test_empty_snapshot_is_identity(self):
        assert np.array_equal(snapshot_transition(np.zeros((4, 4))), np.eye(4))

    def test_single_unit_edge(self):
        L = snapshot_transition(snap(2, [(0, 1, 1.0)]))
        assert np.allclose(L, 0.5 * np.ones((2, 2)))

    def test_star_center_row(self):
        L = snapshot_transition(snap(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]))
        assert np.allclose(L[0], [0.25, 0.25, 0.25, 0.25])
        # Leaves have degree 1: half stay, half move to the center.
        assert np.allclose(L[1], [0.5, 0.5, 0.0, 0.0])

    def test_isolated_node_stays_put(self):
        L = snapshot_transition(snap(3, [(0, 1, 1.0)]))
        assert np.allclose(L[2], [0.0, 0.0, 1.0])

    def test_weighted_rows(self):
        L = snapshot_transition(snap(3, [(0, 1, 2.0), (0, 2, 1.0)]))
        assert np.allclose(L[0], [0.25, 0.5, 0.25])

    def test_row_sums_and_range(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            g = random_temporal_graph(rng, 30, 1)
            L = snapshot_transition(g.snapshots[0])
            rows = np.asarray(L.sum(axis=1)).ravel()
            assert np.max(np.abs(rows - 1.0)) < 1e-12
            dense = L.toarray()
            assert np.all(dense >= 0) and np.all(dense <= 1)
            assert np.all(np.diag(dense) > 0)

    def test_sparse_dense_agree(self):
        rng = np.random.default_rng(1)
        W = random_temporal_graph(rng, 20, 1).snapshots[0]
        assert np.allclose(snapshot_transition(W).toarray(),
                           snapshot_transition(W.toarray()))

    def test_negative_weight_rejected(self):
        W = np.zeros((2, 2))
        W[0, 1] = W[1, 0] = -1.0
        with pytest.raises(ValueError):
            snapshot_transition(W)
        with pytest.raises(ValueError):
            snapshot_transition(sp.csr_array(W))


# Hand computation for the 3-node toy: edge (0,1) in snapshot 1, edge (1,2)
# in snapshot 2.  P = (L1 @ L2 + L2) / 2.
TOY = TemporalGraph([snap(3, [(0, 1, 1.0)]), snap(3, [(1, 2, 1.0)])])
TOY_P = np.array([[0.75, 0.125, 0.125],
                  [0.25, 0.375, 0.375],
                  [0.0, 0.5, 0.5]])


class TestBuildOperator:
    def test_single_snapshot_is_lazy_walk(self):
        g = TemporalGraph([snap(3, [(0, 1, 2.0), (1, 2, 1.0)])])
        L = snapshot_transition(g.snapshots[0].toarray())
        for mode in ("lazy", "materialized"):
            op = build_operator(g, mode=mode)
            assert np.allclose(op.apply(np.eye(3)), L, atol=1e-12)

    def test_all_empty_gives_identity(self):
        g = TemporalGraph([snap(3, [])] * 4)
        for mode in ("lazy", "materialized"):
            op = build_operator(g, mode=mode)
            assert np.allclose(op.materialize(), np.eye(3), atol=1e-14)
            M = np.arange(6.0).reshape(3, 2)
            assert np.allclose(op.apply(M), M)
            assert np.allclose(op.apply_transpose(M), M)

    def test_toy_hand_computation(self):
        for mode in ("lazy", "materialized"):
            op = build_operator(TOY, mode=mode)
            assert np.allclose(op.materialize(), TOY_P, atol=1e-14)
            assert np.allclose(op.apply(np.eye(3)), TOY_P, atol=1e-14)

    def test_auto_mode_rule(self):
        rng = np.random.default_rng(2)
        sparse_g = random_temporal_graph(rng, 80, 2, p=0.02)
        assert build_operator(sparse_g, mode="auto").mode == "lazy"
        dense_g = random_temporal_graph(rng, 10, 30, p=0.8)
        # 100 <= E here, so auto picks the explicit matrix.
        assert dense_g.num_temporal_edges() >= 100
        assert build_operator(dense_g, mode="auto").mode == "materialized"

    def test_bad_mode_rejected(self):
        with pytest.raises(ValueError):
            build_operator(TOY, mode="eager")


class TestApply:
    def test_matches_term_by_term_oracle(self):
        rng = np.random.default_rng(3)
        for n, T in [(12, 1), (12, 5), (30, 8), (70, 3)]:
            g = random_temporal_graph(rng, n, T)
            P = dense_global_matrix(g)
            op = build_operator(g, mode="lazy")
            assert np.max(np.abs(op.apply(np.eye(n)) - P)) < 1e-10
            M = rng.standard_normal((n, 4))
            assert np.max(np.abs(op.apply(M) - P @ M)) < 1e-10
            assert np.max(np.abs(op.apply_transpose(M) - P.T @ M)) < 1e-10

    def test_row_stochastic_large(self):
        rng = np.random.default_rng(4)
        g = random_temporal_graph(rng, 500, 6, p=0.01)
        op = build_operator(g, mode="lazy")
        ones = np.ones(500)
        assert np.max(np.abs(op.apply(ones) - 1.0)) < 1e-10

    def test_mode_equivalence(self):
        rng = np.random.default_rng(5)
        for n, T in [(50, 6), (200, 4)]:
            g = random_temporal_graph(rng, n, T, p=0.05)
            lazy = build_operator(g, mode="lazy")
            mat = build_operator(g, mode="materialized")
            M = rng.standard_normal((n, 5))
            assert np.max(np.abs(lazy.apply(M) - mat.apply(M))) < 1e-10
            assert np.max(np.abs(lazy.apply_transpose(M)
                                 - mat.apply_transpose(M))) < 1e-10

    def test_transpose_equals_apply_for_regular_symmetric(self):
        # A cycle has constant degree 2, so the lazy walk matrix (W + I) / 3
        # is symmetric and apply and apply_transpose coincide.
        n = 6
        W = snap(n, [(i, (i + 1) % n, 1.0) for i in range(n)])
        op = build_operator(TemporalGraph([W]), mode="lazy")
        M = np.random.default_rng(6).standard_normal((n, 3))
        assert np.allclose(op.apply(M), op.apply_transpose(M), atol=1e-12)

    def test_dimension_mismatch(self):
        op = build_operator(TOY)
        with pytest.raises(ValueError):
            op.apply(np.ones((4, 2)))
        with pytest.raises(ValueError):
            op.apply_transpose(np.ones((2, 2)))

    def test_vector_operand(self):
        op = build_operator(TOY)
        v = np.array([1.0, 2.0, 3.0])
        assert np.allclose(op.apply(v), TOY_P @ v)


class TestMaterialize:
    def test_cap_guard(self):
        rng = np.random.default_rng(7)
        g = random_temporal_graph(rng, 30, 2)
        op = GlobalTransitionOperator(
            [snapshot_transition(W) for W in g.snapshots], materialize_cap=10)
        with pytest.raises(ValueError, match="lazy"):
            op.materialize()

    def test_row_sums(self):
        rng = np.random.default_rng(8)
        g = random_temporal_graph(rng, 120, 5, p=0.05)
        P = build_operator(g, mode="lazy").materialize()
        assert np.max(np.abs(P.sum(axis=1) - 1.0)) < 1e-10
        assert np.all(P >= 0)


class TestWalkSemantics:
    def test_time_order_sensitivity(self):
        # Edge (0,1) then (1,2): a walker from 0 can reach 2.  With the
        # snapshots swapped it cannot, so P depends on snapshot order.
        forward = build_operator(TOY).materialize()
        g_rev = TemporalGraph(list(reversed(TOY.snapshots)))
        backward = build_operator(g_rev).materialize()
        assert forward[0, 2] > 0.1
        assert backward[0, 2] == 0.0
        assert not np.allclose(forward, backward)

    def test_monte_carlo_consistency_quick(self):
        rng = np.random.default_rng(9)
        g = random_temporal_graph(rng, 5, 4, p=0.5, weighted=True)
        P = dense_global_matrix(g)
        walks = 50_000
        P_hat = mc_global_matrix(g, walks, seed=10)
        tol = mc_tolerance(P, walks, n_se=4.0)
        assert np.all(np.abs(P_hat - P) <= tol + 1e-12)
