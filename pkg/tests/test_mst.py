import numpy as np
import pytest

from spantree import (
    PointSet,
    build_mst_kruskal,
    build_mst_prim,
    euclidean_distance,
    tree_total_length,
)

from bruteforce import min_spanning_total_bruteforce

BUILDERS = (build_mst_kruskal, build_mst_prim)


@pytest.mark.parametrize("build", BUILDERS)
class TestBothBuilders:
    def test_collinear_chain(self, build):
        tree = build(PointSet([0.0, 1.0, 3.0]))
        assert [(e.u, e.v, e.length) for e in tree.edges] == [(0, 1, 1.0), (1, 2, 2.0)]
        assert tree_total_length(tree) == 3.0

    def test_single_point(self, build):
        tree = build(PointSet([[5.0, 5.0]]))
        assert tree.edge_count == 0
        assert tree_total_length(tree) == 0.0

    def test_structure_random(self, build):
        rng = np.random.default_rng(11)
        for m in (2, 3, 10, 57):
            tree = build(PointSet(rng.random((m, 2))))
            assert tree.edge_count == m - 1
            tree.validate()

    def test_small_inputs_match_bruteforce(self, build):
        rng = np.random.default_rng(5)
        for _ in range(20):
            m = int(rng.integers(3, 8))
            coords = rng.random((m, 2)) * 5
            total = tree_total_length(build(PointSet(coords)))
            oracle = min_spanning_total_bruteforce(coords)
            assert total == pytest.approx(oracle, rel=1e-9)

    def test_edges_canonical_and_sorted(self, build):
        rng = np.random.default_rng(13)
        tree = build(PointSet(rng.random((60, 3))))
        assert np.all(tree.edge_u < tree.edge_v)
        assert np.all(np.diff(tree.lengths) >= 0)

    def test_edge_lengths_match_distance(self, build):
        rng = np.random.default_rng(17)
        ps = PointSet(rng.random((40, 2)))
        tree = build(ps)
        for e in tree.edges:
            d = euclidean_distance(ps.point(e.u), ps.point(e.v))
            assert e.length == pytest.approx(d, rel=1e-12)

    def test_edge_weight_is_vertex_product(self, build):
        rng = np.random.default_rng(19)
        weights = rng.random(25)
        ps = PointSet(rng.random((25, 2)), weights=weights)
        tree = build(ps)
        for e in tree.edges:
            assert e.weight == pytest.approx(weights[e.u] * weights[e.v], rel=1e-12)

    def test_sorted_1d_is_consecutive_chain(self, build):
        rng = np.random.default_rng(23)
        x = np.sort(rng.random(200) * 12)
        tree = build(PointSet(x))
        expected = {(i, i + 1) for i in range(199)}
        assert tree.edge_set() == expected
        assert tree_total_length(tree) == pytest.approx(x[-1] - x[0], rel=1e-12)


class TestKruskalDeterminism:
    def test_degenerate_grid_ties_reproducible(self):
        # unperturbed lattice: many equal lengths, canonical pair order decides
        xs, ys = np.meshgrid(np.arange(4.0), np.arange(4.0))
        ps = PointSet(np.column_stack([xs.ravel(), ys.ravel()]))
        t1 = build_mst_kruskal(ps)
        t2 = build_mst_kruskal(ps)
        assert t1.edge_set() == t2.edge_set()
        t1.validate()
        np.testing.assert_array_equal(t1.lengths, np.ones(15))

    def test_square_picks_canonical_unit_edges(self):
        ps = PointSet([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        tree = build_mst_kruskal(ps)
        assert tree.edge_set() == {(0, 1), (0, 2), (1, 3)}

    def test_prefix_growth_path(self):
        # two distant clusters force the bridge edge deep into the sorted
        # order, past the initial candidate prefix
        rng = np.random.default_rng(31)
        a = rng.random((150, 2))
        b = rng.random((150, 2)) + 500.0
        ps = PointSet(np.vstack([a, b]))
        tree = build_mst_kruskal(ps)
        tree.validate()
        assert tree.edge_set() == build_mst_prim(ps).edge_set()


class TestAlgorithmAgreement:
    def test_identical_edge_sets_on_continuous_input(self):
        rng = np.random.default_rng(37)
        for dim in (1, 2, 3):
            ps = PointSet(rng.random((500, dim)) * 10)
            assert build_mst_kruskal(ps).edge_set() == build_mst_prim(ps).edge_set()

    def test_totals_match_bruteforce_for_seven_points(self):
        rng = np.random.default_rng(41)
        coords = rng.random((7, 2)) * 3
        oracle = min_spanning_total_bruteforce(coords)
        ps = PointSet(coords)
        assert tree_total_length(build_mst_kruskal(ps)) == pytest.approx(oracle, rel=1e-9)
        assert tree_total_length(build_mst_prim(ps)) == pytest.approx(oracle, rel=1e-9)


class TestTreeValidation:
    def test_rejects_non_canonical_edges(self):
        from spantree import Tree

        ps = PointSet([[0.0], [1.0]])
        with pytest.raises(ValueError):
            Tree(ps, [1], [0], [1.0], [1.0])

    def test_validate_catches_cycle(self):
        from spantree import Tree

        ps = PointSet([[0.0], [1.0], [2.0]])
        bad = Tree(ps, [0, 1, 0], [1, 2, 2], [1.0, 1.0, 2.0], [1.0, 1.0, 1.0])
        with pytest.raises(AssertionError):
            bad.validate()
