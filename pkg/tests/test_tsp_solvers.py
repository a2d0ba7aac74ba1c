"""
TSP 精确解法与工具函数测试
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.tsp_solvers import (
    CAMPUS5, CAMPUS10, SolverGuardError, as_matrix, brute_force, evaluate, format_tour, held_karp,
    is_symmetric, is_valid_tour, load_matrix, nearest_neighbor, parse_tour, penalized_fitness, random_matrix,
    save_matrix, select_algorithm, tour_length, validation_value,
)

CAMPUS10_OPTIMUM = [0, 6, 3, 7, 2, 1, 8, 5, 9, 4]


class TestMatrix:
    @pytest.mark.parametrize("data", [
        [[0, 1, 2], [1, 0, 2]],
        [[0]],
        [[0, -1], [1, 0]],
        [[1, 2], [2, 0]],
        [[0, 1.5], [1, 0]],
        [["a", "b"], ["c", "d"]],
        [[0, None], [1, 0]],
        [[0, True], [True, 0]],
        [[0, float("nan")], [1, 0]],
    ])
    def test_invalid(self, data):
        with pytest.raises(ValueError):
            as_matrix(data)

    def test_float_integers_accepted(self):
        assert as_matrix([[0.0, 3.0], [2.0, 0.0]]).dtype == np.int64

    def test_symmetry(self, campus5, campus10):
        assert is_symmetric(campus5)
        assert not is_symmetric(campus10)
        assert is_symmetric(random_matrix(6, np.random.default_rng(1), symmetric=True))

    def test_bundled_files(self, data_dir, campus5, campus10):
        assert np.array_equal(load_matrix(data_dir / "tsp" / "campus5.txt"), campus5)
        assert np.array_equal(load_matrix(data_dir / "tsp" / "campus10.txt"), campus10)

    def test_save_and_load(self, tmp_path, campus10):
        path = tmp_path / "m" / "campus10.txt"
        save_matrix(campus10, path)
        assert np.array_equal(load_matrix(path), campus10)

    @pytest.mark.parametrize("text", ["", "3\n0 1\n1 0\n", "2\n0 x\n1 0\n", "2\n0 1 2\n1 0\n", "two\n"])
    def test_malformed_files(self, tmp_path, text):
        path = tmp_path / "bad.txt"
        path.write_text(text, encoding="utf-8")
        with pytest.raises(ValueError):
            load_matrix(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_matrix(tmp_path / "none.txt")


class TestTours:
    def test_labels(self):
        assert format_tour([0, 3, 1]) == "A-D-B-A"
        assert parse_tour("A-D-B-A") == [0, 3, 1]
        assert parse_tour("0-3-1-0") == [0, 3, 1]

    def test_evaluate(self):
        assert evaluate([0, 3, 1, 2, 4], CAMPUS5) == 24
        with pytest.raises(ValueError):
            evaluate([0, 3, 3, 2, 4], CAMPUS5)

    def test_validation_value(self):
        assert validation_value([0, 3, 1, 2, 4], CAMPUS5) == -24.0
        assert validation_value([1, 0, 2, 3, 4], CAMPUS5) == -math.inf
        assert validation_value([0, 1, 2], CAMPUS5) == -math.inf

    def test_penalized_fitness(self):
        assert penalized_fitness([0, 3, 1, 2, 4], CAMPUS5) == 24.0
        # 缺 3 个、重复 1 个，λ = 5 × 8
        assert penalized_fitness([0, 1, 1], CAMPUS5) == 10 + 40 * 4
        assert penalized_fitness([0, 1, 1], CAMPUS5, lam=1) == 14

    def test_is_valid_tour(self):
        assert is_valid_tour([2, 0, 1], 3)
        assert not is_valid_tour([2, 0, 1], 3, depot=0)
        assert not is_valid_tour([0, 1], 3)


class TestExactSolvers:
    def test_campus5_brute_force(self):
        length, optimal = brute_force(CAMPUS5)
        assert length == 24
        assert len(optimal) == 4
        assert all(tour_length(as_matrix(CAMPUS5), t) == 24 for t in optimal)

    def test_campus5_held_karp(self):
        tour = held_karp(CAMPUS5)
        assert tour.length == 24
        assert tour.order[0] == 0
        assert tour.closed()[-1] == 0

    def test_campus10_held_karp(self):
        tour = held_karp(CAMPUS10)
        assert tour.length == 60
        assert evaluate(CAMPUS10_OPTIMUM, CAMPUS10) == 60
        assert evaluate(tour.order, CAMPUS10) == 60

    @pytest.mark.slow
    def test_campus10_brute_force(self):
        length, optimal = brute_force(CAMPUS10)
        assert length == 60
        assert tuple(CAMPUS10_OPTIMUM) in optimal

    def test_nearest_neighbor(self):
        assert nearest_neighbor(CAMPUS5).length == 24
        tour = nearest_neighbor(CAMPUS10)
        assert tour.length == 63
        assert tour.labels() == "A-J-E-G-D-H-C-B-I-F-A"

    def test_guards(self):
        with pytest.raises(SolverGuardError):
            brute_force(np.zeros((12, 12), dtype=int))
        with pytest.raises(SolverGuardError):
            held_karp(np.zeros((21, 21), dtype=int))

    @pytest.mark.parametrize("n,algo", [(5, "brute"), (8, "brute"), (9, "hk"), (15, "hk"), (16, "aco")])
    def test_select_algorithm(self, n, algo):
        assert select_algorithm(n) == algo

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=3, max_value=7), st.integers(min_value=0, max_value=10_000), st.booleans())
    def test_held_karp_matches_brute_force(self, n, seed, symmetric):
        matrix = random_matrix(n, np.random.default_rng(seed), symmetric=symmetric)
        length, optimal = brute_force(matrix)
        tour = held_karp(matrix)
        assert tour.length == length
        assert tour_length(matrix, tour.order) == length
        assert is_valid_tour(tour.order, n, depot=0)

    @pytest.mark.slow
    def test_held_karp_matches_brute_force_on_200_matrices(self):
        rng = np.random.default_rng(2024)
        for i in range(200):
            n = 4 + i % 6
            matrix = random_matrix(n, rng, high=30, symmetric=bool(i % 2))
            length, _ = brute_force(matrix)
            assert held_karp(matrix).length == length, f"第 {i} 个矩阵 (n = {n}) 不一致"
