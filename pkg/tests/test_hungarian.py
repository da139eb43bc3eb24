import math

import numpy as np
import pytest

from flowmatch import Matching, brute_min_cost_assignment, hungarian_match
from flowmatch.errors import DimensionError, InvalidMatchingError, MalformedInputError

from conftest import rand_cost


class TestMatching:
    def test_from_pairs_sorts_and_totals(self):
        m = Matching.from_pairs([(2, 0, 1.5), (0, 1, 2.5)])
        assert m.pairs == ((0, 1), (2, 0))
        assert m.pair_costs == (2.5, 1.5)
        assert m.total_cost == 4.0

    def test_duplicate_prediction_rejected(self):
        with pytest.raises(InvalidMatchingError):
            Matching.from_pairs([(0, 0, 1.0), (0, 1, 1.0)])

    def test_duplicate_target_rejected(self):
        with pytest.raises(InvalidMatchingError):
            Matching.from_pairs([(0, 0, 1.0), (1, 0, 1.0)])

    def test_negative_index_rejected(self):
        with pytest.raises(InvalidMatchingError):
            Matching.from_pairs([(-1, 0, 1.0)])

    def test_inconsistent_total_rejected(self):
        with pytest.raises(InvalidMatchingError):
            Matching(pairs=((0, 0),), pair_costs=(1.0,), total_cost=5.0)

    def test_unmatched_helpers(self):
        m = Matching.from_pairs([(0, 2, 1.0), (3, 0, 2.0)])
        assert m.unmatched_predictions(5) == (1, 2, 4)
        assert m.unmatched_targets(4) == (1, 3)
        assert m.matched_predictions() == frozenset({0, 3})
        assert len(m) == 2


class TestHungarianMatch:
    def test_two_by_two(self):
        m = hungarian_match(np.array([[1.0, 2.0], [2.0, 1.0]]))
        assert set(m.pairs) == {(0, 0), (1, 1)}
        assert m.total_cost == 2.0

    def test_three_by_three(self):
        c = np.array([[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]])
        m = hungarian_match(c)
        assert m.total_cost == 5.0
        assert set(m.pairs) == {(0, 1), (1, 0), (2, 2)}

    def test_empty_rows(self):
        m = hungarian_match(np.zeros((0, 3)))
        assert m.pairs == ()
        assert m.total_cost == 0.0

    def test_empty_cols(self):
        assert hungarian_match(np.zeros((3, 0))).pairs == ()

    def test_rejects_nan(self):
        with pytest.raises(MalformedInputError):
            hungarian_match(np.array([[1.0, float("nan")], [0.0, 1.0]]))

    def test_rejects_one_dimensional(self):
        with pytest.raises(DimensionError):
            hungarian_match(np.array([1.0, 2.0]))

    def test_accepts_negative_entries(self):
        m = hungarian_match(np.array([[-5.0, 1.0], [1.0, -5.0]]))
        assert m.total_cost == -10.0

    def test_rectangular_wide(self):
        c = np.array([[9.0, 1.0, 9.0, 9.0, 2.0], [9.0, 9.0, 1.0, 9.0, 9.0]])
        m = hungarian_match(c)
        assert len(m) == 2
        assert m.total_cost == 2.0

    def test_rectangular_tall(self):
        c = np.array([[9.0, 1.0, 9.0, 9.0, 2.0], [9.0, 9.0, 1.0, 9.0, 9.0]]).T
        m = hungarian_match(c)
        assert len(m) == 2
        assert m.total_cost == 2.0

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        c = rand_cost(rng, 6, 6)
        assert hungarian_match(c) == hungarian_match(c.copy())

    def test_matches_brute_force_on_random_instances(self):
        rng = np.random.default_rng(101)
        for _ in range(200):
            n_p = int(rng.integers(1, 8))
            n_q = int(rng.integers(1, 8))
            c = rand_cost(rng, n_p, n_q)
            fast = hungarian_match(c)
            _, best = brute_min_cost_assignment(c)
            assert len(fast) == min(n_p, n_q)
            assert abs(fast.total_cost - best) <= 1e-9

    def test_constant_shift_covariance(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n_p = int(rng.integers(1, 7))
            n_q = int(rng.integers(1, 7))
            c = rand_cost(rng, n_p, n_q)
            k = float(rng.uniform(-3.0, 3.0))
            base = hungarian_match(c).total_cost
            shifted = hungarian_match(c + k).total_cost
            assert abs(shifted - (base + k * min(n_p, n_q))) <= 1e-9

    def test_one_to_one_structure(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            c = rand_cost(rng, int(rng.integers(1, 9)), int(rng.integers(1, 9)))
            m = hungarian_match(c)
            preds = [i for i, _ in m.pairs]
            targets = [j for _, j in m.pairs]
            assert len(set(preds)) == len(preds)
            assert len(set(targets)) == len(targets)
            assert math.isclose(m.total_cost, math.fsum(m.pair_costs), abs_tol=1e-9)
