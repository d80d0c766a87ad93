import numpy as np
import pytest

import spantree.compare as compare_mod
from spantree import (
    DegenerateStatistic,
    DimensionMismatch,
    PointSet,
    build_mst_kruskal,
    connection_lengths,
    connection_ratios,
    preset_spec,
    generate,
)


def tree_of(coords, weights=None):
    return build_mst_kruskal(PointSet(coords, weights=weights))


class TestConnectionLengths:
    def test_identical_trees_zero(self):
        rng = np.random.default_rng(1)
        t = tree_of(rng.random((50, 2)))
        res = connection_lengths(t, t)
        np.testing.assert_array_equal(res.connection_length, np.zeros(50))

    def test_single_point_trees(self):
        a = tree_of([[0.0, 0.0]])
        b = tree_of([[3.0, 4.0]])
        assert connection_lengths(a, b).connection_length[0] == 5.0
        assert connection_lengths(b, a).connection_length[0] == 5.0

    def test_directional_asymmetry_dense_sparse(self):
        dense = build_mst_kruskal(generate(preset_spec("dense-grid", 3)))
        sparse = build_mst_kruskal(generate(preset_spec("sparse-grid", 4)))
        c_dense = connection_lengths(dense, sparse).connection_length
        c_sparse = connection_lengths(sparse, dense).connection_length
        # the dense grid sits inside the sparse one, so its vertices are
        # always near a sparse vertex; the converse has a long tail
        assert c_dense.mean() < c_sparse.mean()
        assert c_sparse.max() > 5.0 * c_dense.max()

    def test_weights_carried_from_subject(self):
        subject = tree_of([[0.0, 0.0], [1.0, 0.0]], weights=[0.5, 2.0])
        res = connection_lengths(subject, tree_of([[5.0, 5.0]]))
        np.testing.assert_array_equal(res.weights, [0.5, 2.0])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            connection_lengths(tree_of([[0.0, 0.0]]), tree_of([0.0, 1.0]))

    def test_rigid_motion_invariance(self):
        rng = np.random.default_rng(2)
        a_pts = rng.random((30, 2))
        b_pts = rng.random((40, 2)) + 0.5
        base = connection_lengths(tree_of(a_pts), tree_of(b_pts)).connection_length
        theta = 0.7
        rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        shift = np.array([3.0, -2.0])
        moved = connection_lengths(
            tree_of(a_pts @ rot.T + shift), tree_of(b_pts @ rot.T + shift)
        ).connection_length
        np.testing.assert_allclose(moved, base, rtol=1e-9)

    def test_matches_exhaustive_when_accelerated(self, monkeypatch):
        rng = np.random.default_rng(3)
        subject = tree_of(rng.random((1000, 2)))
        reference = tree_of(rng.random((1000, 2)))
        exhaustive = connection_lengths(subject, reference).connection_length
        monkeypatch.setattr(compare_mod, "_EXHAUSTIVE_LIMIT", 0)
        accelerated = connection_lengths(subject, reference).connection_length
        np.testing.assert_array_equal(exhaustive, accelerated)

    def test_ratio_matches_exhaustive_when_accelerated(self, monkeypatch):
        rng = np.random.default_rng(8)
        subject = tree_of(rng.random((400, 2)))
        reference = tree_of(rng.random((400, 2)))
        exhaustive = connection_ratios(subject, reference, k=5).connection_ratio
        monkeypatch.setattr(compare_mod, "_EXHAUSTIVE_LIMIT", 0)
        accelerated = connection_ratios(subject, reference, k=5).connection_ratio
        np.testing.assert_array_equal(exhaustive, accelerated)


class TestConnectionRatios:
    def test_identical_trees_zero(self):
        rng = np.random.default_rng(4)
        t = tree_of(rng.random((40, 2)))
        for k in (1, 3, 5):
            res = connection_ratios(t, t, k=k)
            np.testing.assert_array_equal(res.connection_ratio, np.zeros(40))

    def test_hand_built_chain(self):
        # subject vertex 10 above a unit chain: local mean of the 2 nearest
        # edges is 1, so the ratio equals the connection length
        reference = tree_of([[float(i), 0.0] for i in range(6)])
        subject = tree_of([[2.0, 10.0]])
        res = connection_ratios(subject, reference, k=2)
        assert res.connection_length[0] == pytest.approx(10.0, rel=1e-12)
        assert res.connection_ratio[0] == pytest.approx(10.0, rel=1e-12)

    def test_k_larger_than_pool_uses_all(self):
        reference = tree_of([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])  # lengths 1 and 2
        subject = tree_of([[0.0, 6.0]])
        res = connection_ratios(subject, reference, k=100)
        assert res.connection_ratio[0] == pytest.approx(6.0 / 1.5, rel=1e-12)

    def test_c_independent_of_k(self):
        rng = np.random.default_rng(5)
        subject = tree_of(rng.random((30, 2)))
        reference = tree_of(rng.random((30, 2)))
        r1 = connection_ratios(subject, reference, k=1)
        r5 = connection_ratios(subject, reference, k=5)
        np.testing.assert_array_equal(r1.connection_length, r5.connection_length)
        assert not np.array_equal(r1.connection_ratio, r5.connection_ratio)

    def test_scaling_both_trees(self):
        rng = np.random.default_rng(6)
        a = rng.random((25, 2))
        b = rng.random((35, 2)) + 0.2
        base = connection_ratios(tree_of(a), tree_of(b), k=4)
        s = 11.0
        scaled = connection_ratios(tree_of(a * s), tree_of(b * s), k=4)
        np.testing.assert_allclose(scaled.connection_length, base.connection_length * s, rtol=1e-9)
        np.testing.assert_allclose(scaled.connection_ratio, base.connection_ratio, rtol=1e-9)

    def test_edge_pool_selection(self):
        rng = np.random.default_rng(7)
        subject = tree_of(rng.random((20, 2)))
        reference = tree_of(rng.random((20, 2)) * 10)
        ref_pool = connection_ratios(subject, reference, k=3, edge_pool="reference")
        sub_pool = connection_ratios(subject, reference, k=3, edge_pool="subject")
        assert ref_pool.edge_pool == "reference" and sub_pool.edge_pool == "subject"
        assert not np.array_equal(ref_pool.connection_ratio, sub_pool.connection_ratio)

    def test_empty_pool_raises(self):
        single = tree_of([[0.0, 0.0]])
        other = tree_of([[1.0, 0.0], [2.0, 0.0]])
        with pytest.raises(DegenerateStatistic):
            connection_ratios(other, single, k=2, edge_pool="reference")
        with pytest.raises(DegenerateStatistic):
            connection_ratios(single, other, k=2, edge_pool="subject")

    def test_zero_local_mean_gives_inf_sentinel(self):
        reference = tree_of([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]])  # degenerate, zero lengths
        subject = tree_of([[4.0, 5.0]])
        res = connection_ratios(subject, reference, k=2)
        assert np.isinf(res.connection_ratio[0])
        assert res.infinite_ratio_count == 1

    def test_invalid_arguments(self):
        t = tree_of([[0.0, 0.0], [1.0, 0.0]])
        with pytest.raises(ValueError):
            connection_ratios(t, t, k=0)
        with pytest.raises(ValueError):
            connection_ratios(t, t, edge_pool="nearest")

    def test_sparse_subject_has_heavier_ratio_tail(self):
        dense = build_mst_kruskal(generate(preset_spec("dense-grid", 8)))
        sparse = build_mst_kruskal(generate(preset_spec("sparse-grid", 9)))
        r_sparse = connection_ratios(sparse, dense).connection_ratio
        r_dense = connection_ratios(dense, sparse).connection_ratio
        assert np.percentile(r_sparse, 95) > np.percentile(r_dense, 95)
