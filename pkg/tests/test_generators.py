import numpy as np
import pytest
from scipy import stats
from scipy.spatial import cKDTree

from sashimi.core import DistanceGrid, MarkedPointPattern, ObservationWindow
from sashimi.errors import BadIntensity, BadNSim, TooFewPoints
from sashimi.generators import csr_envelope, matern_ii, poisson_csr, thomas_cluster

UNIT = ObservationWindow(0.0, 1.0, 0.0, 1.0)


def as_pattern(points, window=UNIT):
    marks = np.array(["cell"] * len(points))
    return MarkedPointPattern(points, marks, window)


class TestPoissonCsr:
    def test_bitwise_reproducible(self):
        a = poisson_csr(200.0, UNIT, seed=42)
        b = poisson_csr(200.0, UNIT, seed=42)
        assert np.array_equal(a, b)

    def test_distinct_seeds_differ(self):
        a = poisson_csr(200.0, UNIT, seed=1)
        b = poisson_csr(200.0, UNIT, seed=2)
        assert len(a) != len(b) or not np.array_equal(a, b)

    def test_points_inside_window(self):
        w = ObservationWindow(2.0, 5.0, -1.0, 3.0)
        pts = poisson_csr(30.0, w, seed=7)
        assert (pts[:, 0] >= 2.0).all() and (pts[:, 0] <= 5.0).all()
        assert (pts[:, 1] >= -1.0).all() and (pts[:, 1] <= 3.0).all()

    def test_mean_count_within_three_sigma(self):
        lam, area = 120.0, 1.0
        counts = [len(poisson_csr(lam, UNIT, seed=s)) for s in range(200)]
        expected = lam * area
        se = np.sqrt(expected / 200)
        assert abs(np.mean(counts) - expected) < 3 * se

    def test_coordinates_uniform(self):
        xs = np.concatenate(
            [poisson_csr(100.0, UNIT, seed=s)[:, 0] for s in range(60)]
        )
        _, p = stats.kstest(xs, "uniform")
        assert p > 0.001

    @pytest.mark.parametrize("lam", [-1.0, np.nan, np.inf])
    def test_bad_intensity(self, lam):
        with pytest.raises(BadIntensity):
            poisson_csr(lam, UNIT, seed=0)

    def test_zero_intensity_gives_empty(self):
        pts = poisson_csr(0.0, UNIT, seed=0)
        assert pts.shape == (0, 2)


class TestThomasCluster:
    def test_bitwise_reproducible(self):
        a = thomas_cluster(10.0, 8.0, 0.03, UNIT, seed=5)
        b = thomas_cluster(10.0, 8.0, 0.03, UNIT, seed=5)
        assert np.array_equal(a, b)

    def test_mean_count_tracks_parent_times_offspring(self):
        counts = [
            len(thomas_cluster(10.0, 8.0, 0.02, UNIT, seed=s)) for s in range(150)
        ]
        # offspring fall outside the window occasionally, so allow slack below
        expected = 10.0 * 8.0
        assert 0.75 * expected < np.mean(counts) < 1.05 * expected

    def test_more_clustered_than_csr(self):
        # nearest-neighbor distances shrink under clustering at fixed intensity
        nn_thomas, nn_csr = [], []
        for s in range(25):
            t = thomas_cluster(12.0, 10.0, 0.015, UNIT, seed=s)
            c = poisson_csr(120.0, UNIT, seed=s + 500)
            if len(t) > 1:
                d, _ = cKDTree(t).query(t, k=2)
                nn_thomas.append(d[:, 1].mean())
            if len(c) > 1:
                d, _ = cKDTree(c).query(c, k=2)
                nn_csr.append(d[:, 1].mean())
        assert np.mean(nn_thomas) < 0.6 * np.mean(nn_csr)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(parent_intensity=-1.0, mean_offspring=5.0, sigma=0.1),
            dict(parent_intensity=5.0, mean_offspring=-1.0, sigma=0.1),
            dict(parent_intensity=np.nan, mean_offspring=5.0, sigma=0.1),
        ],
    )
    def test_bad_parameters(self, kwargs):
        with pytest.raises(BadIntensity):
            thomas_cluster(window=UNIT, seed=0, **kwargs)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            thomas_cluster(5.0, 5.0, -0.1, UNIT, seed=0)


class TestMaternIi:
    def test_hard_core_is_exact(self):
        r = 0.04
        for seed in range(10):
            pts = matern_ii(800.0, r, UNIT, seed=seed)
            if len(pts) < 2:
                continue
            d, _ = cKDTree(pts).query(pts, k=2)
            assert d[:, 1].min() >= r

    def test_zero_radius_bitwise_matches_csr(self):
        a = matern_ii(300.0, 0.0, UNIT, seed=11)
        b = poisson_csr(300.0, UNIT, seed=11)
        assert np.array_equal(a, b)

    def test_bitwise_reproducible(self):
        a = matern_ii(400.0, 0.03, UNIT, seed=3)
        b = matern_ii(400.0, 0.03, UNIT, seed=3)
        assert np.array_equal(a, b)

    def test_thinning_only_removes(self):
        proposals = matern_ii(500.0, 0.0, UNIT, seed=9)
        survivors = matern_ii(500.0, 0.05, UNIT, seed=9)
        rows = {tuple(p) for p in proposals}
        assert all(tuple(p) in rows for p in survivors)
        assert len(survivors) < len(proposals)

    def test_bad_intensity(self):
        with pytest.raises(BadIntensity):
            matern_ii(-5.0, 0.1, UNIT, seed=0)


class TestEnvelope:
    def grid(self):
        return DistanceGrid(np.linspace(0.0, 0.2, 12))

    def test_bounds_ordered_and_reproducible(self):
        pat = as_pattern(poisson_csr(150.0, UNIT, seed=21))
        e1 = csr_envelope(pat, "K", n_sim=19, seed=77, rgrid=self.grid())
        e2 = csr_envelope(pat, "K", n_sim=19, seed=77, rgrid=self.grid())
        ok = ~(np.isnan(e1.lo) | np.isnan(e1.hi))
        assert (e1.lo[ok] <= e1.hi[ok]).all()
        assert np.array_equal(e1.lo, e2.lo, equal_nan=True)
        assert np.array_equal(e1.hi, e2.hi, equal_nan=True)
        assert e1.n_sim == 19 and e1.rank == 1

    def test_bounds_come_from_simulated_set(self):
        # with rank 1 the bounds are elementwise extremes of the sims,
        # so every lo must be <= every simulated curve pointwise minimum
        pat = as_pattern(poisson_csr(100.0, UNIT, seed=4))
        env = csr_envelope(pat, "L", n_sim=9, seed=13, rgrid=self.grid())
        assert np.isfinite(env.observed).any()
        ok = ~(np.isnan(env.lo) | np.isnan(env.hi))
        assert (env.lo[ok] <= env.hi[ok]).all()

    @pytest.mark.parametrize("n_sim", [0, -3])
    def test_bad_n_sim(self, n_sim):
        pat = as_pattern(poisson_csr(100.0, UNIT, seed=4))
        with pytest.raises(BadNSim):
            csr_envelope(pat, "K", n_sim=n_sim, seed=1)

    @pytest.mark.parametrize("rank", [0, 6])
    def test_rank_out_of_range(self, rank):
        # with 9 sims the largest admissible rank is 5 (2*5 <= 9+1)
        pat = as_pattern(poisson_csr(100.0, UNIT, seed=4))
        with pytest.raises(BadNSim):
            csr_envelope(pat, "K", n_sim=9, seed=1, rank=rank, rgrid=self.grid())

    def test_too_small_pattern(self):
        pat = as_pattern(np.array([[0.5, 0.5]]))
        with pytest.raises(TooFewPoints):
            csr_envelope(pat, "K", n_sim=5, seed=1, rgrid=self.grid())

    def test_statistic_dispatch(self):
        pat = as_pattern(poisson_csr(120.0, UNIT, seed=8))
        for stat in ("K", "L", "G", "F", "J", "PCF"):
            env = csr_envelope(pat, stat, n_sim=5, seed=3, rgrid=self.grid())
            assert env.statistic_id == stat
            assert len(env.lo) == 12

    def test_unknown_statistic(self):
        pat = as_pattern(poisson_csr(120.0, UNIT, seed=8))
        with pytest.raises(ValueError):
            csr_envelope(pat, "XYZ", n_sim=5, seed=3, rgrid=self.grid())

    def test_csr_coverage_self_consistency(self):
        # a CSR pattern tested against its own null should sit inside a
        # rank-1 envelope of 99 sims at roughly the nominal rate; checking
        # "most points inside for most trials" keeps the test cheap and stable
        g = DistanceGrid(np.linspace(0.0, 0.15, 10))
        inside_frac = []
        for trial in range(40):
            pat = as_pattern(poisson_csr(80.0, UNIT, seed=50_000 + trial))
            env = csr_envelope(pat, "K", n_sim=39, seed=90_000 + trial, rgrid=g)
            ok = ~np.isnan(env.observed)
            inside = (
                (env.observed[ok] >= env.lo[ok]) & (env.observed[ok] <= env.hi[ok])
            )
            inside_frac.append(inside.mean())
        # nominal pointwise coverage is 1 - 2/(39+1) = 0.95
        assert np.mean(inside_frac) > 0.85
