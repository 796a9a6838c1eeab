# This file is part of climabm, a spatial agent-based model of a
# climate-exposed economy.
#
# climabm is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License version 3
# as published by the Free Software Foundation.
#
# climabm is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with climabm.  If not, see <https://www.gnu.org/licenses/>.
"""
Unittests for climabm.evolution
"""
import math
import statistics
import unittest
from time import time

import numpy as np

from climabm.agents import LimitingFactor, StrategyGenome
from climabm.evolution import (
    SIGMA_DECLINED, SIGMA_IMPROVED, SIGMA_INITIAL, MutationState,
    NoPerformanceData, PerformanceMemory, firm_fitness, fitness,
    fitness_components, is_failed, mutate, replace_failed, select_sigma,
    should_mutate,
)
from climabm.markets import PRICE_BOUNDS
from climabm.testsuite.fixtures import make_firm

FACTORS = (LimitingFactor.LABOR, LimitingFactor.CAPITAL, LimitingFactor.INPUT)


class TimedTestCase(unittest.TestCase):
    def setUp(self):
        self.start_time = time()

    def tearDown(self):
        self.time_taken = time() - self.start_time
        print("%.3f: %s" % (self.time_taken, self.id()))


def memory_of(money, production, factors):
    memory = PerformanceMemory()
    for m, p, f in zip(money, production, factors):
        memory.record(m, p, 1.0, f)
    return memory


def reference_fitness(money, production, factors, age):
    growth = math.tanh(max(0.0, (money[-1] - money[0]) / max(money[0], 1e-6)))
    mean = statistics.fmean(production)
    if mean <= 0:
        stability = 0.0
    else:
        stability = min(1.0, max(0.0, 1.0 - statistics.pstdev(production) / mean))
    survival = min(age / 20.0, 1.0)
    entropy = 0.0
    for factor in FACTORS:
        p = factors.count(factor) / len(factors)
        if p:
            entropy -= p * math.log(p)
    balance = entropy / math.log(3)
    return 0.4 * growth + 0.3 * stability + 0.2 * survival + 0.1 * balance


class TestPerformanceMemory(TimedTestCase):
    def test_window_evicts_oldest(self):
        memory = memory_of(range(15), [1.0] * 15, [LimitingFactor.LABOR] * 15)
        self.assertEqual(len(memory), 10)
        self.assertEqual(memory.window[0].money, 5)

    def test_record_firm(self):
        memory = PerformanceMemory()
        firm = make_firm(money=3.0, capital=2.0, production=1.5,
                         limiting_factor=LimitingFactor.INPUT)
        memory.record_firm(firm)
        (record,) = memory.window
        self.assertEqual((record.money, record.production, record.capital),
                         (3.0, 1.5, 2.0))
        self.assertIs(record.limiting_factor, LimitingFactor.INPUT)


class TestFitness(TimedTestCase):
    def test_growing_stable_mature_firm(self):
        memory = memory_of(np.linspace(100, 110, 10), [5.0] * 10,
                           [LimitingFactor.LABOR] * 10)
        components = fitness_components(memory, 20)
        self.assertAlmostEqual(components.growth, math.tanh(0.1), places=12)
        self.assertEqual(components.stability, 1.0)
        self.assertEqual(components.survival, 1.0)
        self.assertEqual(components.balance, 0.0)
        self.assertAlmostEqual(fitness(memory, 20), 0.5398671978, places=9)

    def test_flat_newborn_firm(self):
        memory = memory_of([50.0] * 4, [2.0] * 4, [LimitingFactor.CAPITAL] * 4)
        self.assertAlmostEqual(fitness(memory, 0), 0.3, places=12)

    def test_balanced_limiting_factors(self):
        memory = memory_of([50.0] * 6, [0.0] * 6, FACTORS * 2)
        self.assertAlmostEqual(fitness(memory, 0), 0.1, places=12)

    def test_losses_do_not_go_negative(self):
        memory = memory_of([100.0, 10.0], [0.0, 0.0], [LimitingFactor.NONE] * 2)
        self.assertEqual(fitness(memory, 0), 0.0)

    def test_empty_memory(self):
        with self.assertRaises(NoPerformanceData) as cm:
            fitness(PerformanceMemory(), 3)
        self.assertEqual(str(cm.exception), "no performance data")
        self.assertEqual(firm_fitness(make_firm()), 0.0)

    def test_matches_reference_on_random_memories(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            n = int(rng.integers(1, 11))
            money = list(rng.uniform(0, 200, n))
            production = list(rng.uniform(0, 10, n) * rng.integers(0, 2, n))
            factors = [FACTORS[i] for i in rng.integers(0, 3, n)]
            age = int(rng.integers(0, 40))
            score = fitness(memory_of(money, production, factors), age)
            self.assertAlmostEqual(
                score, reference_fitness(money, production, factors, age), delta=1e-10)
            self.assertTrue(0.0 <= score <= 1.0)

    def test_scale_invariance(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            money = rng.uniform(1, 100, 10)
            production = rng.uniform(0.1, 10, 10)
            factors = [FACTORS[i] for i in rng.integers(0, 3, 10)]
            base = fitness(memory_of(money, production, factors), 7)
            scaled = fitness(memory_of(money * 7.5, production * 0.3, factors), 7)
            self.assertAlmostEqual(base, scaled, places=9)


class TestShouldMutate(TimedTestCase):
    def test_off_schedule_draws_nothing(self):
        rng = np.random.default_rng(1)
        self.assertFalse(should_mutate(7, rng).any())
        self.assertEqual(rng.random(), np.random.default_rng(1).random())

    def test_seeded_selection_is_reproducible(self):
        first = should_mutate(10, np.random.default_rng(99))
        second = should_mutate(10, np.random.default_rng(99))
        self.assertEqual(first.shape, (6,))
        self.assertTrue((first == second).all())

    def test_selection_frequency(self):
        rng = np.random.default_rng(123)
        hits = np.zeros(6)
        events = 100000
        for _ in range(events):
            hits += should_mutate(5, rng)
        for frequency in hits / events:
            self.assertTrue(0.29 <= frequency <= 0.31, frequency)


class TestSelectSigma(TimedTestCase):
    def test_first_call(self):
        self.assertEqual(select_sigma(MutationState(), 0.7), SIGMA_INITIAL)

    def test_improvement(self):
        self.assertEqual(select_sigma(MutationState(last_fitness=0.4), 0.5), SIGMA_IMPROVED)

    def test_decline(self):
        self.assertEqual(select_sigma(MutationState(last_fitness=0.5), 0.4), SIGMA_DECLINED)

    def test_equal_keeps_previous(self):
        state = MutationState(sigma=SIGMA_DECLINED, last_fitness=0.5)
        self.assertEqual(select_sigma(state, 0.5), SIGMA_DECLINED)

    def test_updates_last_fitness(self):
        state = MutationState()
        select_sigma(state, 0.2)
        select_sigma(state, 0.3)
        self.assertEqual(state.last_fitness, 0.3)
        self.assertEqual(state.sigma, SIGMA_IMPROVED)


class TestMutate(TimedTestCase):
    def test_empty_mask_is_identity(self):
        genome = StrategyGenome(0.2, 0.3, 0.5, 4.0, 0.1, 0.9)
        rng = np.random.default_rng(0)
        self.assertIs(mutate(genome, [False] * 6, 0.05, rng), genome)

    def test_labor_weight_only(self):
        genome = StrategyGenome(0.2, 0.3, 0.5, 4.0, 0.1, 0.9)
        mask = [True, False, False, False, False, False]
        child = mutate(genome, mask, 0.10, np.random.default_rng(4))
        self.assertAlmostEqual(sum(child.weights), 1.0, places=12)
        self.assertNotEqual(child.labor_weight, genome.labor_weight)
        self.assertAlmostEqual(child.input_weight / child.capital_weight, 0.6, places=12)
        self.assertEqual(child.as_array()[3:].tolist(), [4.0, 0.1, 0.9])

    def test_scalar_parameters_keep_weights(self):
        genome = StrategyGenome(0.2, 0.3, 0.5, 4.0, 0.1, 0.9)
        child = mutate(genome, [False, False, False, True, True, True], 0.05,
                       np.random.default_rng(4))
        self.assertEqual(child.weights, genome.weights)

    def test_validity_over_random_genomes(self):
        rng = np.random.default_rng(77)
        for _ in range(2000):
            genome = StrategyGenome.from_array(rng.uniform(-0.5, 11, 6))
            mask = rng.random(6) < 0.5
            sigma = [SIGMA_IMPROVED, SIGMA_INITIAL, SIGMA_DECLINED][int(rng.integers(3))]
            self.assertTrue(mutate(genome, mask, sigma, rng).is_valid())

    def test_relative_noise_spread(self):
        rng = np.random.default_rng(31)
        genome = StrategyGenome(risk_sensitivity=5.0)
        mask = [False, False, False, True, False, False]
        changes = np.array([
            mutate(genome, mask, 0.05, rng).risk_sensitivity / 5.0 - 1.0
            for _ in range(100000)
        ])
        self.assertTrue(0.049 <= changes.std() <= 0.051, changes.std())


class TestIsFailed(TimedTestCase):
    def firm(self, history):
        # one record per step, the last one being the current step
        firm = make_firm()
        for money in history:
            firm.money = money
            firm.memory.record_firm(firm)
        return firm

    def test_below_survival_money(self):
        self.assertTrue(is_failed(make_firm(money=0.5)))

    def test_halved_over_five_steps(self):
        self.assertTrue(is_failed(self.firm([100.0, 90.0, 80.0, 70.0, 60.0, 45.0])))

    def test_halved_over_four_steps_is_not_failure(self):
        self.assertFalse(is_failed(self.firm([100.0, 90.0, 80.0, 70.0, 49.0])))

    def test_span_starts_five_steps_back(self):
        self.assertFalse(is_failed(self.firm([200.0, 100.0, 90.0, 80.0, 70.0, 60.0])))
        self.assertTrue(is_failed(self.firm([200.0, 100.0, 90.0, 80.0, 70.0, 60.0, 49.0])))

    def test_moderate_decline(self):
        self.assertFalse(is_failed(self.firm([100.0, 90.0, 80.0, 70.0, 65.0, 60.0])))

    def test_short_memory_ignores_decline(self):
        self.assertFalse(is_failed(self.firm([100.0, 90.0, 80.0, 10.0])))


class TestReplaceFailed(TimedTestCase):
    def population(self, n=15, failed=7):
        return [make_firm(id=i, location=(i, 0), money=0.5 if i < failed else 50.0,
                          suppliers=[99] if i % 2 else [], trophic_level=1 + i % 2)
                for i in range(n)]

    def test_no_replacement_during_establishment(self):
        firms = self.population()
        for step in (3, 5):
            _, report = replace_failed(firms, step, np.random.default_rng(0))
            self.assertEqual(report.replaced, [])
            self.assertEqual(report.entry_money, 0.0)

    def test_replacement_cap(self):
        firms = self.population()
        originals = list(firms)
        _, report = replace_failed(firms, 6, np.random.default_rng(0))
        self.assertEqual(len(report.failed), 7)
        self.assertEqual(report.replaced, [0, 1, 2])
        self.assertEqual(report.entry_money, 30.0)
        self.assertAlmostEqual(report.removed_money, 1.5, places=12)
        for i in range(15):
            child = firms[i]
            self.assertEqual(child.id, i)
            if i in report.replaced:
                self.assertIsNot(child, originals[i])
                self.assertEqual(child.money, 10.0)
                self.assertEqual(child.capital, 5.0)
                self.assertEqual(child.output_inventory, 0.0)
                self.assertEqual(child.location, originals[i].location)
                self.assertEqual(child.trophic_level, originals[i].trophic_level)
                self.assertEqual(child.suppliers, originals[i].suppliers)
                self.assertEqual(child.generation, 1)
                self.assertTrue(child.genome.is_valid())
            else:
                self.assertIs(child, originals[i])

        _, report = replace_failed(firms, 7, np.random.default_rng(0))
        self.assertEqual(report.replaced, [3, 4, 5])

    def test_offspring_take_the_parent_price_and_wage(self):
        firms = self.population(n=8, failed=2)
        for firm in firms:
            if firm.money < 1.0:
                firm.price, firm.wage = PRICE_BOUNDS[1], 500.0
            else:
                firm.price, firm.wage = 3.0, 2.0
        _, report = replace_failed(firms, 6, np.random.default_rng(0))
        self.assertEqual(report.replaced, [0, 1])
        for child in firms[:2]:
            self.assertEqual(child.price, 3.0)
            self.assertEqual(child.wage, 2.0)
            self.assertLess(child.price, PRICE_BOUNDS[1])

    def test_nothing_failed(self):
        firms = self.population(failed=0)
        originals = list(firms)
        _, report = replace_failed(firms, 9, np.random.default_rng(0))
        self.assertEqual(report.failed, [])
        self.assertEqual(firms, originals)

    def test_no_surviving_parent(self):
        firms = self.population(n=4, failed=4)
        _, report = replace_failed(firms, 9, np.random.default_rng(0))
        self.assertEqual(len(report.failed), 4)
        self.assertEqual(report.replaced, [])

    def test_parents_are_fitness_weighted(self):
        firms = self.population(n=8, failed=2)
        for firm in firms[2:]:
            firm.genome = StrategyGenome(risk_sensitivity=1.0)
            firm.memory.record(50.0, 0.0, 1.0, LimitingFactor.NONE)
        strong = firms[7]
        strong.genome = StrategyGenome(risk_sensitivity=9.0)
        strong.age = 40
        _, report = replace_failed(firms, 6, np.random.default_rng(0))
        self.assertEqual(report.replaced, [0, 1])
        # only the oldest survivor has positive fitness
        for child in firms[:2]:
            self.assertGreater(child.genome.risk_sensitivity, 5.0)


if __name__ == "__main__":
    unittest.main()
