import numpy as np
import pytest
from scipy.stats import chi2

from oracles import kmeanspp_pair_distribution
from screenclust.clustering import (Clustering, SseCurve, elbow_scan,
                                    kmeanspp_seed, lloyd, pick_k_at_break,
                                    sse, total_within_ss)


class TestKmeansppSeed:
    def test_saturation(self):
        pts = np.array([[0.0], [1.0], [10.0], [11.0]])
        cents = kmeanspp_seed(pts, 4, rng_seed=0)
        assert {tuple(c) for c in cents} == {(0.0,), (1.0,), (10.0,), (11.0,)}

    def test_determinism(self):
        rng = np.random.default_rng(0)
        pts = rng.standard_normal((50, 3))
        a = kmeanspp_seed(pts, 5, rng_seed=7)
        b = kmeanspp_seed(pts, 5, rng_seed=7)
        assert np.array_equal(a, b)

    def test_never_both_centroids_in_one_pair(self):
        # {0,1,10,11}: D^2 sampling nearly never picks both seeds in one tight pair
        pts = np.array([[0.0], [1.0], [10.0], [11.0]])
        split = 0
        trials = 1000
        for seed in range(trials):
            cents = sorted(c[0] for c in kmeanspp_seed(pts, 2, rng_seed=seed))
            if cents[0] <= 1.0 and cents[1] >= 10.0:
                split += 1
        assert split / trials >= 0.98

    def test_exact_d2_distribution_chi_square(self):
        pts = np.array([[0.0], [1.0], [10.0], [11.0]])
        exact = kmeanspp_pair_distribution(pts)
        trials = 10_000
        counts = {pair: 0 for pair in exact}
        for seed in range(trials):
            cents = kmeanspp_seed(pts, 2, rng_seed=seed)
            first = int(np.where((pts == cents[0]).all(axis=1))[0][0])
            second = int(np.where((pts == cents[1]).all(axis=1))[0][0])
            counts[(first, second)] += 1
        stat = sum((counts[p] - trials * q) ** 2 / (trials * q)
                   for p, q in exact.items())
        assert stat < chi2.ppf(0.99, df=len(exact) - 1)

    def test_k_exceeding_distinct_points(self):
        pts = np.array([[1.0], [1.0], [2.0]])
        with pytest.raises(ValueError):
            kmeanspp_seed(pts, 3)


class TestLloyd:
    def test_hand_iterated_1d(self):
        pts = np.array([[0.0], [1.0], [10.0], [11.0]])
        result = lloyd(pts, np.array([[0.4], [10.2]]))
        assert np.allclose(sorted(result.centroids.ravel()), [0.5, 10.5])
        assert list(result.assignments) == [0, 0, 1, 1]
        assert list(result.sizes) == [2, 2]

    def test_objective_non_increasing(self):
        rng = np.random.default_rng(1)
        for trial in range(20):
            pts = rng.standard_normal((40, 2))
            centroids = kmeanspp_seed(pts, 4, rng_seed=trial)
            objectives = []
            labels = None
            for _ in range(25):
                result = lloyd(pts, centroids, max_iter=1)
                objectives.append(total_within_ss(pts, result.centroids,
                                                  result.assignments))
                centroids = result.centroids
            assert all(b <= a + 1e-9 for a, b in zip(objectives, objectives[1:]))

    def test_fixed_point(self):
        pts = np.array([[0.0, 0.0], [5.0, 5.0], [9.0, 0.0]])
        result = lloyd(pts, pts.copy())
        assert sse(result, pts) == 0.0

    def test_k1_equals_total_variance(self):
        rng = np.random.default_rng(2)
        pts = rng.standard_normal((30, 3))
        result = lloyd(pts, pts.mean(axis=0, keepdims=True))
        expected = pts.var(axis=0, ddof=0).sum() * len(pts)
        assert sse(result, pts) == pytest.approx(expected, abs=1e-9)

    def test_local_optimality_fixed_centroids(self):
        rng = np.random.default_rng(3)
        for trial in range(10):
            pts = rng.standard_normal((50, 2))
            result = lloyd(pts, kmeanspp_seed(pts, 4, rng_seed=trial))
            base = total_within_ss(pts, result.centroids, result.assignments)
            for i in range(len(pts)):
                for c in range(result.k):
                    moved = result.assignments.copy()
                    moved[i] = c
                    alt = total_within_ss(pts, result.centroids, moved)
                    assert alt >= base - 1e-9

    def test_empty_cluster_repaired(self):
        pts = np.array([[0.0], [0.1], [10.0], [10.1]])
        # second init centroid far away from everything -> first assignment empties it
        result = lloyd(pts, np.array([[5.0], [1000.0]]))
        assert result.sizes.min() >= 1
        assert result.k == 2


class TestSse:
    def test_hand_computation(self):
        pts = np.array([[0.0], [1.0], [10.0], [11.0]])
        c = Clustering(centroids=np.array([[0.5], [10.5]]),
                       assignments=np.array([0, 0, 1, 1]),
                       sizes=np.array([2, 2]))
        assert sse(c, pts) == pytest.approx(0.5)

    def test_singletons_zero(self):
        pts = np.array([[1.0], [5.0]])
        c = Clustering(centroids=pts.copy(), assignments=np.array([0, 1]),
                       sizes=np.array([1, 1]))
        assert sse(c, pts) == 0.0

    def test_scaling_homogeneity(self):
        pts = np.array([[0.0], [1.0], [10.0], [11.0]])
        result = lloyd(pts, np.array([[0.4], [10.2]]))
        scaled = lloyd(pts * 3.0, np.array([[1.2], [30.6]]))
        assert sse(scaled, pts * 3.0) == pytest.approx(9.0 * sse(result, pts))


class TestElbow:
    def _blobs(self, seed=0):
        rng = np.random.default_rng(seed)
        centers = np.array([[0, 0], [10, 0], [0, 10], [10, 10]], dtype=float)
        return np.vstack([c + 0.5 * rng.standard_normal((30, 2)) for c in centers])

    def test_grid_arithmetic(self):
        pts = self._blobs()
        curve = elbow_scan(pts, k_min=10, k_max=100, step=10, seeds=(0,))
        assert curve.ks == list(range(10, 101, 10))
        assert len(curve.sse) == 10

    def test_single_k_grid(self):
        curve = elbow_scan(self._blobs(), k_min=5, k_max=5, step=10, seeds=(0,))
        assert curve.ks == [5]

    def test_weakly_decreasing_on_separable_data(self):
        pts = self._blobs(1)
        curve = elbow_scan(pts, k_min=2, k_max=6, step=2, seeds=(0, 1, 2))
        assert all(b <= a + 1e-9 for a, b in zip(curve.sse, curve.sse[1:]))

    def test_k_max_clamped(self):
        pts = np.array([[0.0], [1.0], [2.0]])
        with pytest.warns(UserWarning, match="clamped"):
            curve = elbow_scan(pts, k_min=1, k_max=10, step=1, seeds=(0,))
        assert curve.ks[-1] == 3

    def test_csv_round_trip(self, tmp_path):
        curve = SseCurve(ks=[2, 4], sse=[10.0, 3.0])
        path = tmp_path / "sse.csv"
        curve.save_csv(path)
        loaded = SseCurve.load_csv(path)
        assert loaded.ks == curve.ks
        assert loaded.sse == curve.sse
        assert path.read_text().splitlines()[0] == "k,sse"


class TestPickKAtBreak:
    def test_stated_curve(self):
        curve = SseCurve(ks=[10, 20, 30, 40, 50], sse=[100, 40, 25, 21, 20])
        assert pick_k_at_break(curve, 0.8) == 30

    def test_two_point_curve(self):
        assert pick_k_at_break(SseCurve(ks=[10, 20], sse=[100.0, 0.0])) == 20

    def test_flat_curve_error(self):
        with pytest.raises(ValueError, match="elbow"):
            pick_k_at_break(SseCurve(ks=[10, 20], sse=[5.0, 5.0]))

    def test_short_curve_error(self):
        with pytest.raises(ValueError):
            pick_k_at_break(SseCurve(ks=[10], sse=[5.0]))
