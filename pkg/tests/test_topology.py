import math

import numpy as np
import pytest
from scipy.sparse import coo_array
from scipy.sparse.csgraph import connected_components

from sashimi.errors import InvalidFiltration, NoLandmarks, NoWitnesses
from sashimi.topology import (
    FilteredComplex,
    PersistenceDiagram,
    build_witness_complex,
    farthest_point_sample,
    persistence_summaries,
    persistent_homology,
    witness_persistence,
)

import oracles


def diagram_rows(diagram):
    return sorted(diagram.rows())


def octagon(radius=1.0):
    angles = np.arange(8) * (2.0 * np.pi / 8.0)
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])


class TestFarthestPointSample:
    def test_small_input_returned_whole_and_lex_sorted(self):
        pts = np.array([[0.5, 0.1], [0.2, 0.9], [0.2, 0.3]])
        out = farthest_point_sample(pts, cap=10)
        np.testing.assert_array_equal(out, [[0.2, 0.3], [0.2, 0.9], [0.5, 0.1]])

    def test_cap_respected(self, rng):
        pts = rng.uniform(0, 1, size=(500, 2))
        out = farthest_point_sample(pts, cap=64)
        assert out.shape == (64, 2)

    def test_order_invariant(self, rng):
        pts = rng.uniform(0, 1, size=(300, 2))
        a = farthest_point_sample(pts, cap=40)
        b = farthest_point_sample(pts[rng.permutation(300)], cap=40)
        assert np.array_equal(a, b)

    def test_covers_spread_before_density(self):
        # a tight blob plus two far outliers: the outliers must be picked
        blob = np.random.default_rng(5).normal(0.5, 0.01, size=(50, 2))
        far = np.array([[10.0, 10.0], [-10.0, -10.0]])
        pts = np.vstack([blob, far])
        out = farthest_point_sample(pts, cap=3)
        assert any(np.array_equal(row, far[0]) for row in out)
        assert any(np.array_equal(row, far[1]) for row in out)

    def test_scaling_selects_same_points(self, rng):
        pts = rng.uniform(0, 1, size=(200, 2))
        a = farthest_point_sample(pts, cap=30)
        b = farthest_point_sample(2.0 * pts, cap=30)
        assert np.array_equal(2.0 * a, b)


class TestBuildWitnessComplex:
    def test_single_landmark_hand_value(self):
        fc = build_witness_complex(np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]]))
        assert fc.n_simplices == 1
        assert fc.values[0] == 1.0
        assert fc.dims[0] == 0

    def test_two_landmarks_shared_witness(self):
        fc = build_witness_complex(
            np.array([[0.0, 0.0], [2.0, 0.0]]), np.array([[1.0, 0.0]])
        )
        # default cap is half the landmark spread = 1, kept inclusively
        assert fc.max_eps == 1.0
        assert fc.n_simplices == 3
        np.testing.assert_array_equal(fc.values, [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(sorted(fc.dims), [0, 0, 1])

    def test_cap_excludes_expensive_simplices(self):
        fc = build_witness_complex(
            np.array([[0.0, 0.0], [2.0, 0.0]]),
            np.array([[1.0, 0.0]]),
            max_eps=0.5,
        )
        assert fc.n_simplices == 0

    def test_empty_inputs(self):
        with pytest.raises(NoLandmarks):
            build_witness_complex(np.empty((0, 2)), np.array([[0.0, 0.0]]))
        with pytest.raises(NoWitnesses):
            build_witness_complex(np.array([[0.0, 0.0]]), np.empty((0, 2)))

    def test_bad_max_dim(self):
        with pytest.raises(ValueError):
            build_witness_complex(
                np.array([[0.0, 0.0]]), np.array([[0.0, 0.0]]), max_dim=3
            )

    def test_canonical_order(self, rng):
        fc = build_witness_complex(
            rng.uniform(0, 1, size=(10, 2)), rng.uniform(0, 1, size=(30, 2))
        )
        assert (np.diff(fc.values) >= 0).all()

    def test_values_match_brute_force(self, rng):
        landmarks = rng.uniform(0, 1, size=(9, 2))
        witnesses = rng.uniform(0, 1, size=(35, 2))
        fc = build_witness_complex(landmarks, witnesses)
        got = sorted(
            (tuple(int(v) for v in vs if v >= 0), int(d), float(val))
            for vs, d, val in zip(fc.verts, fc.dims, fc.values)
        )
        want = sorted(oracles.naive_witness_complex(landmarks, witnesses, fc.max_eps))
        assert got == want

    def test_face_monotone(self, rng):
        fc = build_witness_complex(
            rng.uniform(0, 1, size=(12, 2)), rng.uniform(0, 1, size=(40, 2))
        )
        value_of = {
            tuple(int(v) for v in vs if v >= 0): val
            for vs, val in zip(fc.verts, fc.values)
        }
        for vs, d, val in zip(fc.verts, fc.dims, fc.values):
            simplex = tuple(int(v) for v in vs if v >= 0)
            if d == 0:
                continue
            for drop in range(len(simplex)):
                face = simplex[:drop] + simplex[drop + 1 :]
                assert value_of[face] <= val

    def test_max_dim_one_has_no_triangles(self, rng):
        fc = build_witness_complex(
            rng.uniform(0, 1, size=(8, 2)),
            rng.uniform(0, 1, size=(20, 2)),
            max_dim=1,
        )
        assert fc.count_of_dim(2) == 0
        assert fc.count_of_dim(1) > 0


class TestPersistentHomology:
    def test_single_vertex_capped(self):
        fc = build_witness_complex(np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]]))
        dg = persistent_homology(fc)
        assert diagram_rows(dg) == [(0, 1.0, 1.0, True)]

    def test_two_separated_landmarks(self):
        pts = np.array([[0.0, 0.0], [10.0, 0.0]])
        fc = build_witness_complex(pts, pts, max_eps=12.0)
        dg = persistent_homology(fc)
        rows = diagram_rows(dg)
        assert len(rows) == 2
        assert rows[0] == (0, 0.0, 10.0, False)
        assert rows[1] == (0, 0.0, 12.0, True)

    def test_two_clusters_two_capped_components(self, rng):
        cluster_a = rng.uniform(0, 0.1, size=(4, 2))
        cluster_b = rng.uniform(0, 0.1, size=(4, 2)) + np.array([10.0, 0.0])
        pts = np.vstack([cluster_a, cluster_b])
        dg = persistent_homology(build_witness_complex(pts, pts))
        births, deaths, capped = dg.for_dim(0)
        assert capped.sum() == 2
        finite = deaths[~capped]
        assert (finite <= 0.15).all()

    def test_octagon_has_long_loop(self):
        pts = octagon()
        dg = persistent_homology(build_witness_complex(pts, pts))
        births, deaths, _ = dg.for_dim(1)
        assert len(births) >= 1
        assert (deaths - births).max() > 0.5

    def test_capped_component_count_matches_graph(self, rng):
        landmarks = rng.uniform(0, 1, size=(20, 2))
        witnesses = rng.uniform(0, 1, size=(60, 2))
        fc = build_witness_complex(landmarks, witnesses, max_eps=0.18)
        dg = persistent_homology(fc)
        _, _, capped = dg.for_dim(0)
        e_mask = fc.dims == 1
        v_ids = fc.verts[fc.dims == 0, 0]
        remap = {int(v): i for i, v in enumerate(v_ids)}
        src = [remap[int(u)] for u in fc.verts[e_mask, 0]]
        dst = [remap[int(v)] for v in fc.verts[e_mask, 1]]
        n = len(v_ids)
        graph = coo_array((np.ones(len(src)), (src, dst)), shape=(n, n))
        n_comp, _ = connected_components(graph, directed=False)
        assert capped.sum() == n_comp

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_dense_reduction(self, seed):
        rng = np.random.default_rng(seed)
        landmarks = rng.uniform(0, 1, size=(rng.integers(3, 10), 2))
        witnesses = rng.uniform(0, 1, size=(rng.integers(5, 25), 2))
        fc = build_witness_complex(landmarks, witnesses)
        got = diagram_rows(persistent_homology(fc))
        want = oracles.naive_persistence(fc.verts, fc.values, fc.dims, fc.max_eps)
        assert got == want

    def test_input_order_invariance(self, rng):
        landmarks = rng.uniform(0, 1, size=(40, 2))
        witnesses = rng.uniform(0, 1, size=(80, 2))
        a = witness_persistence(landmarks, witnesses, landmark_cap=20)
        b = witness_persistence(
            landmarks[rng.permutation(40)],
            witnesses[rng.permutation(80)],
            landmark_cap=20,
        )
        assert diagram_rows(a) == diagram_rows(b)

    def test_doubling_scales_diagram_exactly(self, rng):
        landmarks = rng.uniform(0, 1, size=(15, 2))
        witnesses = rng.uniform(0, 1, size=(45, 2))
        base = witness_persistence(landmarks, witnesses)
        doubled = witness_persistence(2.0 * landmarks, 2.0 * witnesses)
        assert np.array_equal(doubled.births, 2.0 * base.births)
        assert np.array_equal(doubled.deaths, 2.0 * base.deaths)
        assert np.array_equal(doubled.dims, base.dims)
        assert np.array_equal(doubled.capped, base.capped)

    def test_connected_complex_single_capped_class(self, rng):
        pts = rng.uniform(0, 1, size=(15, 2))
        dg = persistent_homology(build_witness_complex(pts, pts))
        _, _, capped = dg.for_dim(0)
        assert capped.sum() == 1


class TestInvalidFiltrations:
    def make(self, verts, values, dims, max_eps=10.0):
        return FilteredComplex(
            np.array(verts, dtype=np.int32),
            np.array(values, dtype=np.float64),
            np.array(dims, dtype=np.int8),
            2,
            max_eps,
        )

    def test_edge_before_endpoint(self):
        fc = self.make(
            [[0, -1, -1], [1, -1, -1], [0, 1, -1]], [0.0, 2.0, 1.0], [0, 0, 1]
        )
        with pytest.raises(InvalidFiltration):
            persistent_homology(fc)

    def test_edge_with_missing_vertex(self):
        fc = self.make([[0, -1, -1], [0, 1, -1]], [0.0, 1.0], [0, 1])
        with pytest.raises(InvalidFiltration):
            persistent_homology(fc)

    def test_triangle_with_missing_edge(self):
        fc = self.make(
            [
                [0, -1, -1],
                [1, -1, -1],
                [2, -1, -1],
                [0, 1, -1],
                [0, 2, -1],
                [0, 1, 2],
            ],
            [0.0, 0.0, 0.0, 1.0, 1.0, 2.0],
            [0, 0, 0, 1, 1, 2],
        )
        with pytest.raises(InvalidFiltration):
            persistent_homology(fc)

    def test_triangle_before_edge(self):
        fc = self.make(
            [
                [0, -1, -1],
                [1, -1, -1],
                [2, -1, -1],
                [0, 1, -1],
                [0, 2, -1],
                [1, 2, -1],
                [0, 1, 2],
            ],
            [0.0, 0.0, 0.0, 1.0, 1.0, 3.0, 2.0],
            [0, 0, 0, 1, 1, 1, 2],
        )
        with pytest.raises(InvalidFiltration):
            persistent_homology(fc)

    def test_duplicate_simplex(self):
        fc = self.make([[0, -1, -1], [0, -1, -1]], [0.0, 0.0], [0, 0])
        with pytest.raises(InvalidFiltration):
            persistent_homology(fc)

    def test_value_beyond_cap(self):
        fc = self.make([[0, -1, -1]], [5.0], [0], max_eps=1.0)
        with pytest.raises(InvalidFiltration):
            persistent_homology(fc)

    def test_negative_value(self):
        fc = self.make([[0, -1, -1]], [-1.0], [0])
        with pytest.raises(InvalidFiltration):
            persistent_homology(fc)


class TestPersistenceSummaries:
    def diagram(self, rows, max_eps=5.0):
        dims = np.array([r[0] for r in rows], dtype=np.int8)
        births = np.array([r[1] for r in rows])
        deaths = np.array([r[2] for r in rows])
        capped = np.array([r[3] for r in rows], dtype=bool)
        return PersistenceDiagram(dims, births, deaths, capped, max_eps)

    def test_two_interval_hand_values(self):
        dg = self.diagram([(0, 0.0, 1.0, False), (0, 0.0, 3.0, False)])
        s = persistence_summaries(dg, 0, "pair")
        feats = s.features()
        assert feats["pair_h0_lifetime_mean"] == 2.0
        assert feats["pair_h0_lifetime_std"] == 1.0
        assert feats["pair_h0_n_features"] == 2.0
        assert feats["pair_h0_birth_min"] == 0.0
        assert feats["pair_h0_death_max"] == 3.0

    def test_empty_dimension(self):
        dg = self.diagram([(0, 0.0, 1.0, False)])
        s = persistence_summaries(dg, 1, "pair")
        feats = s.features()
        assert feats["pair_h1_n_features"] == 0.0
        for key, value in feats.items():
            if not key.endswith("n_features"):
                assert math.isnan(value)

    def test_singleton(self):
        dg = self.diagram([(1, 0.2, 0.7, False)])
        s = persistence_summaries(dg, 1, "x")
        feats = s.features()
        assert feats["x_h1_birth_min"] == feats["x_h1_birth_max"] == 0.2
        assert feats["x_h1_death_mean"] == 0.7
        assert feats["x_h1_lifetime_std"] == 0.0
        assert feats["x_h1_lifetime_mean"] == pytest.approx(0.5)

    def test_capped_deaths_enter_at_cap(self):
        dg = self.diagram([(0, 0.0, 5.0, True)], max_eps=5.0)
        s = persistence_summaries(dg, 0, "c")
        assert s.features()["c_h0_death_max"] == 5.0

    def test_feature_name_set(self):
        dg = self.diagram([(0, 0.0, 1.0, False)])
        feats = persistence_summaries(dg, 0, "witness_tumor_immune").features()
        assert len(feats) == 13
        assert "witness_tumor_immune_h0_lifetime_max" in feats
        assert "witness_tumor_immune_h0_n_features" in feats

    def test_bad_dim(self):
        dg = self.diagram([(0, 0.0, 1.0, False)])
        with pytest.raises(ValueError):
            persistence_summaries(dg, 2, "x")
