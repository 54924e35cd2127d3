import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lakesim.benchmark import generate_ground_truth, shekel_eval
from lakesim.worldmap import GridMap, load_bundled_map


@pytest.fixture(scope="module")
def lake():
    return load_bundled_map()


def small_pond(n=10):
    return GridMap(np.ones((n, n), dtype=np.int8))


class TestShekelEval:
    def test_single_peak_unit_distance(self):
        # 1 / (0.1 + 1^2)
        v = shekel_eval([[5.0, 5.0]], [0.1], (5.0, 6.0))
        assert v == pytest.approx(1.0 / 1.1, abs=1e-12)

    def test_value_at_peak_is_inverse_weight(self):
        assert shekel_eval([[3.0, 4.0]], [0.2], (3.0, 4.0)) == pytest.approx(5.0)

    def test_two_peaks_hand_sum(self):
        # independent double-loop oracle
        A = [[1.0, 2.0], [4.0, 0.0]]
        C = [0.05, 0.25]
        x = (2.0, 2.0)
        expected = 0.0
        for a, c in zip(A, C):
            d2 = (x[0] - a[0]) ** 2 + (x[1] - a[1]) ** 2
            expected += 1.0 / (c + d2)
        assert shekel_eval(A, C, x) == pytest.approx(expected, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(
        c=st.floats(0.05, 0.25),
        near=st.floats(0.0, 3.0),
        extra=st.floats(0.5, 5.0),
    )
    def test_single_peak_decays_with_distance(self, c, near, extra):
        peak = [[10.0, 10.0]]
        v_near = shekel_eval(peak, [c], (10.0 + near, 10.0))
        v_far = shekel_eval(peak, [c], (10.0 + near + extra, 10.0))
        assert v_near > v_far > 0.0


class TestGenerateGroundTruth:
    def test_normalized_to_unit_range(self, lake):
        for seed in range(6):
            gt = generate_ground_truth(lake, 4, seed)
            water_vals = gt.field[lake.water_mask]
            assert water_vals.min() == 0.0
            assert water_vals.max() == 1.0
            assert ((water_vals >= 0.0) & (water_vals <= 1.0)).all()

    def test_land_sentinel(self, lake):
        gt = generate_ground_truth(lake, 4, 3)
        assert (gt.field[~lake.water_mask] == -1.0).all()

    def test_peak_count_in_fleet_range(self, lake):
        for seed in range(20):
            for n in (2, 4, 8):
                gt = generate_ground_truth(lake, n, seed)
                assert 2 <= len(gt.peaks_A) <= n
                assert len(gt.weights_C) == len(gt.peaks_A)

    def test_two_vehicles_always_two_peaks(self, lake):
        for seed in range(10):
            gt = generate_ground_truth(lake, 2, seed)
            assert len(gt.peaks_A) == 2

    def test_peaks_on_water_cell_centers(self, lake):
        gt = generate_ground_truth(lake, 6, 11)
        for a in gt.peaks_A:
            r, c = int(a[0]), int(a[1])
            assert lake.grid[r, c] == 1
            assert a[0] == r + 0.5 and a[1] == c + 0.5

    def test_weights_in_declared_range(self, lake):
        for seed in range(10):
            gt = generate_ground_truth(lake, 4, seed)
            assert ((gt.weights_C >= 0.05) & (gt.weights_C <= 0.25)).all()

    def test_deterministic_per_seed(self, lake):
        a = generate_ground_truth(lake, 4, 42)
        b = generate_ground_truth(lake, 4, 42)
        assert np.array_equal(a.field, b.field)
        assert np.array_equal(a.peaks_A, b.peaks_A)
        c = generate_ground_truth(lake, 4, 43)
        assert not np.array_equal(a.field, c.field)

    def test_rejects_single_vehicle(self, lake):
        with pytest.raises(ValueError):
            generate_ground_truth(lake, 1, 0)

    def test_peak_count_distribution_near_uniform(self):
        # frequency of each M in {2,3,4} over many seeds, expected 1/3 each
        pond = small_pond()
        counts = {2: 0, 3: 0, 4: 0}
        n_seeds = 1000
        for seed in range(n_seeds):
            gt = generate_ground_truth(pond, 4, seed)
            counts[len(gt.peaks_A)] += 1
        for m, cnt in counts.items():
            assert abs(cnt / n_seeds - 1.0 / 3.0) < 0.05, (m, cnt)

    def test_field_matches_pointwise_shekel(self, lake):
        # the gridded field must equal shekel_eval at scaled coordinates
        gt = generate_ground_truth(lake, 4, 7, unit_cells=10.0)
        raw = np.array(
            [
                shekel_eval(gt.peaks_A / 10.0, gt.weights_C, xy / 10.0)
                for xy in lake.water_centers
            ]
        )
        expected = (raw - raw.min()) / (raw.max() - raw.min())
        assert np.allclose(gt.field[lake.water_mask], expected, atol=1e-12)

    def test_argmax_is_a_peak_cell(self, lake):
        # the normalized maximum sits in the cell of one generating peak
        for seed in range(8):
            gt = generate_ground_truth(lake, 4, seed)
            flat = np.argmax(gt.field[lake.water_mask])
            top = lake.water_centers[flat]
            d = np.linalg.norm(gt.peaks_A - top, axis=1)
            assert d.min() <= 1.5
