"""
元启发式求解器测试
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.metaheuristics import (
    ACO_PRESETS, AcoParams, Annealer, AntColony, GaParams, GeneticSolver, SaParams, acceptance_probability, aco,
    default_temperature, edge_recombination, ga, repair, sa, solve_tsp, two_opt_mutation,
)
from src.tsp_solvers import CAMPUS5, CAMPUS10, as_matrix, is_valid_tour, tour_length

permutations = st.integers(min_value=4, max_value=12).flatmap(
    lambda n: st.tuples(st.permutations(list(range(1, n))), st.permutations(list(range(1, n))))
)


class TestParams:
    @pytest.mark.parametrize("kwargs", [{"rho": 0}, {"rho": 1.5}, {"ants": 0}, {"iterations": 0}, {"tau0": 0}])
    def test_aco(self, kwargs):
        with pytest.raises(ValueError):
            AcoParams(**kwargs)

    @pytest.mark.parametrize("kwargs", [{"population": 3}, {"population": 0}, {"generations": 0},
                                        {"tournament_size": 0}, {"mutation_rate": 1.5}])
    def test_ga(self, kwargs):
        with pytest.raises(ValueError):
            GaParams(**kwargs)

    @pytest.mark.parametrize("kwargs", [{"cooling": 1.0}, {"cooling": 0}, {"t_min": 0}, {"steps_per_temperature": 0}])
    def test_sa(self, kwargs):
        with pytest.raises(ValueError):
            SaParams(**kwargs)

    def test_presets(self):
        assert (ACO_PRESETS["small"].ants, ACO_PRESETS["small"].iterations) == (50, 20)
        assert (ACO_PRESETS["large"].ants, ACO_PRESETS["large"].iterations) == (100, 50)
        assert ACO_PRESETS["large"].stagnation_k is None


class TestAntColony:
    def test_symmetric_deposit(self):
        colony = AntColony(CAMPUS5, AcoParams(tau0=0.1))
        colony.deposit([0, 1, 2, 3, 4], 29)
        assert colony.pheromone[0, 1] == pytest.approx(0.1 + 10 / 29)
        assert colony.pheromone[1, 0] == pytest.approx(0.1 + 10 / 29)
        assert colony.pheromone[0, 2] == pytest.approx(0.1)

    def test_asymmetric_deposit(self):
        colony = AntColony(CAMPUS10, AcoParams(tau0=0.1))
        colony.deposit(list(range(10)), 50)
        assert colony.pheromone[0, 1] == pytest.approx(0.3)
        assert colony.pheromone[1, 0] == pytest.approx(0.1)

    def test_campus5(self):
        tour = aco(CAMPUS5, ACO_PRESETS["small"])
        assert tour.length == 24
        assert is_valid_tour(tour.order, 5, depot=0)

    def test_stagnation_stops_early(self):
        colony = AntColony(CAMPUS5, ACO_PRESETS["small"])
        colony.run()
        # 最近邻已是最优，连续 5 轮无改进
        assert colony.history == [24] * 5

    def test_deterministic(self):
        params = AcoParams(ants=10, iterations=5, seed=7)
        assert aco(CAMPUS10, params) == aco(CAMPUS10, params)

    def test_never_worse_than_nearest_neighbor(self):
        colony = AntColony(CAMPUS10, AcoParams(ants=10, iterations=10, stagnation_k=None, seed=3))
        tour = colony.run()
        assert tour.length <= 63
        assert all(b <= a for a, b in zip(colony.history, colony.history[1:]))
        assert tour.evaluations == 1 + 10 * 10

    def test_cold_start_skips_nearest_neighbor(self):
        colony = AntColony(CAMPUS10, AcoParams(ants=5, iterations=2, stagnation_k=None, warm_start=False))
        tour = colony.run()
        assert tour.evaluations == 10
        assert len(colony.history) == 2
        assert tour.length == colony.history[-1]
        assert is_valid_tour(tour.order, 10, depot=0)

    @pytest.mark.slow
    def test_small_preset_reaches_optimum_on_every_seed(self):
        params = replace(ACO_PRESETS["small"], warm_start=False)
        lengths = [aco(CAMPUS5, replace(params, seed=seed)).length for seed in range(20)]
        assert lengths == [24] * 20

    @pytest.mark.slow
    def test_large_preset_reaches_optimum(self):
        params = replace(ACO_PRESETS["large"], warm_start=False)
        lengths = [aco(CAMPUS10, replace(params, seed=seed)).length for seed in range(20)]
        assert sum(length == 60 for length in lengths) >= 16
        assert min(lengths) == 60


class TestGenetic:
    def test_repair(self):
        assert repair([2, 2, 5, 1], 4) == [0, 2, 1, 3]
        assert repair([0, 1, 2], 3) == [0, 1, 2]

    @given(permutations, st.integers(min_value=0, max_value=1000))
    def test_edge_recombination_yields_tours(self, parents, seed):
        a, b = [0] + list(parents[0]), [0] + list(parents[1])
        child = edge_recombination(a, b, np.random.default_rng(seed))
        assert is_valid_tour(child, len(a), depot=0)

    @given(st.integers(min_value=4, max_value=12).flatmap(lambda n: st.permutations(list(range(1, n)))),
           st.integers(min_value=0, max_value=1000))
    def test_two_opt_keeps_depot(self, rest, seed):
        order = [0] + list(rest)
        mutated = two_opt_mutation(order, np.random.default_rng(seed))
        assert is_valid_tour(mutated, len(order), depot=0)

    def test_campus5(self):
        solver = GeneticSolver(CAMPUS5, GaParams(population=20, generations=10))
        tour = solver.run()
        assert tour.length == 24
        assert solver.population_sizes == [20] * 10
        assert all(b <= a for a, b in zip(solver.history, solver.history[1:]))

    def test_campus10(self):
        tour = ga(CAMPUS10, GaParams(population=30, generations=30, seed=5))
        assert tour.length <= 63
        assert is_valid_tour(tour.order, 10, depot=0)

    def test_cold_start_population_is_random(self):
        solver = GeneticSolver(CAMPUS5, GaParams(population=4, generations=1, seed=0, warm_start=False))
        population = solver.initial_population()
        assert len(population) == 4
        assert all(is_valid_tour(order, 5, depot=0) for order in population)

    def test_same_seed_same_tour(self):
        params = GaParams(population=20, generations=20, seed=11, warm_start=False)
        assert ga(CAMPUS10, params) == ga(CAMPUS10, params)

    @pytest.mark.slow
    def test_reaches_optimum_on_every_seed(self):
        lengths = [ga(CAMPUS5, GaParams(seed=seed, warm_start=False)).length for seed in range(20)]
        assert lengths == [24] * 20


class TestAnnealing:
    def test_acceptance_probability(self):
        assert acceptance_probability(-3, 5.0) == 1.0
        assert acceptance_probability(0, 5.0) == 1.0
        assert acceptance_probability(10, 10.0) == pytest.approx(math.exp(-1))

    def test_default_temperature(self):
        assert default_temperature(as_matrix(CAMPUS5)) == pytest.approx(56.0)

    def test_geometric_cooling(self):
        annealer = Annealer(CAMPUS5, SaParams(t0=10, cooling=0.5, t_min=1))
        annealer.run()
        assert annealer.temperatures == [10, 5, 2.5, 1.25]
        assert annealer.evaluations == 5

    def test_never_worse_than_start(self):
        tour = sa(CAMPUS10, SaParams(seed=2))
        assert tour.length <= 63
        start = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]
        assert sa(CAMPUS10, SaParams(seed=2), start).length <= 95

    def test_same_seed_same_tour(self):
        start = list(range(10))
        assert sa(CAMPUS10, SaParams(seed=4), start) == sa(CAMPUS10, SaParams(seed=4), start)

    def test_reaches_optimum_from_identity_tour(self):
        start = [0, 1, 2, 3, 4]
        assert tour_length(as_matrix(CAMPUS5), start) == 29
        lengths = [sa(CAMPUS5, SaParams(seed=seed), start).length for seed in range(50)]
        assert sum(length == 24 for length in lengths) >= 45

    def test_invalid_initial(self):
        with pytest.raises(ValueError):
            sa(CAMPUS5, initial=[1, 0, 2, 3, 4])


class TestSolveTsp:
    def test_auto_selection(self):
        assert solve_tsp(CAMPUS5).length == 24
        assert solve_tsp(CAMPUS10).length == 60

    @pytest.mark.parametrize("algo", ["brute", "hk", "nn", "aco", "ga", "sa"])
    def test_every_algorithm_on_campus5(self, algo):
        tour = solve_tsp(CAMPUS5, algo, preset="small")
        assert tour.length == 24

    def test_unknown_algorithm(self):
        with pytest.raises(ValueError):
            solve_tsp(CAMPUS5, "tabu")

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            solve_tsp(CAMPUS5, "aco", preset="huge")
