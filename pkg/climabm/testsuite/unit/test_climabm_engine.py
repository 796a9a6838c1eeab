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
Unittests for climabm.engine
"""
import unittest
from time import time

import mock
import networkx as nx
import numpy as np

from climabm.agents import LimitingFactor, Sector
from climabm.config import ConfigError
from climabm.engine import (
    COLUMNS, ConservationError, MetricsFrame, RngStreams, ScenarioConfig,
    assign_trophic_levels, build_supply_chain, indirect_exposure,
    init_world, link_suppliers, load_schedule, metrics_dataframe,
    place_firms, run, step,
)
from climabm.hazard import HazardGrid
from climabm.testsuite.fixtures import (
    TempDirMixin, hotspot_grid, make_firm, small_config,
)


class TimedTestCase(unittest.TestCase):
    def setUp(self):
        self.start_time = time()

    def tearDown(self):
        self.time_taken = time() - self.start_time
        print("%.3f: %s" % (self.time_taken, self.id()))


def world_signature(state):
    firms = [(f.id, f.location, f.sector, tuple(f.suppliers), f.genome) for f in state.firms]
    households = [(h.id, h.location, h.sector, h.monitoring_radius,
                   h.consumption_levels, h.distance_cost) for h in state.households]
    return firms, households


class TestScenarioConfig(TimedTestCase):
    def test_defaults_validate(self):
        config = ScenarioConfig()
        self.assertIs(config.validate(), config)
        self.assertEqual(config.steps, 320)
        self.assertEqual((config.n_firms, config.n_households), (15, 75))

    def test_sector_split(self):
        config = ScenarioConfig()
        self.assertEqual((config.n_commodity, config.n_manufacturer), (6, 9))
        self.assertEqual(ScenarioConfig(n_firms=2).n_commodity, 1)

    def test_invalid_values_name_the_key(self):
        cases = [
            (dict(steps=0), "steps"),
            (dict(n_firms=1), "n_firms"),
            (dict(commodity_fraction=1.0), "commodity_fraction"),
            (dict(firm_money=-1.0), "firm_money"),
            (dict(spend_fraction=1.5), "spend_fraction"),
            (dict(seed=-3), "seed"),
            (dict(hazard_epochs=[(0,)]), "hazard_epochs"),
        ]
        for kwargs, key in cases:
            with self.assertRaises(ConfigError) as cm:
                ScenarioConfig(**kwargs).validate()
            self.assertTrue(str(cm.exception).startswith(key + ":"), str(cm.exception))

    def test_snapshot_is_plain(self):
        snapshot = ScenarioConfig(seed=3).snapshot()
        self.assertEqual(snapshot["seed"], 3)
        self.assertEqual(snapshot["hazard_epochs"], [])


class TestRngStreams(TimedTestCase):
    def test_streams_are_reproducible_and_distinct(self):
        a, b = RngStreams.from_seed(42), RngStreams.from_seed(42)
        draws = [stream.random() for stream in (a.init, a.hazard, a.markets, a.evolution)]
        self.assertEqual(draws, [stream.random() for stream in
                                 (b.init, b.hazard, b.markets, b.evolution)])
        self.assertEqual(len(set(draws)), 4)


class TestPlacement(TimedTestCase):
    def test_zero_grid_is_uniform_and_distinct(self):
        grid = HazardGrid.zeros(5, 4)
        cells = place_firms(grid, 20, np.random.default_rng(0))
        self.assertEqual(len(set(cells)), 20)
        self.assertTrue(all(0 <= x < 5 and 0 <= y < 4 for x, y in cells))

    def test_firms_take_the_hot_cells(self):
        hot = [(1, 1), (3, 7), (10, 2), (11, 11), (0, 5), (6, 6)]
        cells = place_firms(hotspot_grid(12, 12, hot), 6, np.random.default_rng(1))
        self.assertEqual(sorted(cells), sorted(hot))

    def test_too_few_hot_cells_widens(self):
        hot = [(1, 1), (3, 7), (10, 2)]
        with self.assertLogs("climabm.engine", "WARNING") as logs:
            cells = place_firms(hotspot_grid(12, 12, hot), 6, np.random.default_rng(1))
        self.assertEqual(len(logs.records), 2)
        self.assertEqual(len(set(cells)), 6)

    def test_too_many_firms(self):
        with self.assertRaises(ConfigError):
            place_firms(HazardGrid.zeros(2, 2), 5, np.random.default_rng(0))


class TestSchedule(TempDirMixin, TimedTestCase):
    def test_default_is_zero_grid(self):
        schedule = load_schedule(ScenarioConfig(grid_width=7, grid_height=3))
        self.assertEqual(schedule.reference.shape, (3, 7))
        self.assertEqual(schedule.reference.reference_layer().max(), 0.0)

    def test_disabled_hazard_zeroes_grid(self):
        self.make_tmp()
        path = self.write_grid("grid.txt", hotspot_grid(4, 4, [(1, 1)]))
        hot = load_schedule(ScenarioConfig(grid_path=path))
        cold = load_schedule(ScenarioConfig(grid_path=path, hazard_enabled=False))
        self.assertGreater(hot.reference.reference_layer().max(), 0.0)
        self.assertEqual(cold.reference.reference_layer().max(), 0.0)
        self.assertEqual(cold.reference.shape, hot.reference.shape)

    def test_epochs(self):
        self.make_tmp()
        first = self.write_grid("a.txt", hotspot_grid(4, 4, [(1, 1)]))
        second = self.write_grid("b.txt", hotspot_grid(4, 4, [(2, 2)]))
        schedule = load_schedule(ScenarioConfig(hazard_epochs=[(0, first), (100, second)]))
        self.assertGreater(schedule.grid_at(99).reference_layer()[1, 1], 0.0)
        self.assertGreater(schedule.grid_at(100).reference_layer()[2, 2], 0.0)


class TestSupplyChain(TimedTestCase):
    def population(self):
        firms = [make_firm(id=i) for i in range(3)]
        firms += [make_firm(id=i, sector=Sector.MANUFACTURER) for i in range(3, 7)]
        return firms

    def test_links_distinct_commodity_suppliers(self):
        firms = link_suppliers(self.population(), 2, np.random.default_rng(0), 5.0)
        for firm in firms[3:]:
            self.assertEqual(len(set(firm.suppliers)), 2)
            self.assertTrue(all(s < 3 for s in firm.suppliers))
            self.assertEqual(firm.input_inventory, {s: 5.0 for s in firm.suppliers})
        for firm in firms[:3]:
            self.assertEqual(firm.suppliers, [])

    def test_fewer_commodity_firms_than_requested(self):
        firms = [make_firm(id=0), make_firm(id=1, sector=Sector.MANUFACTURER)]
        link_suppliers(firms, 2, np.random.default_rng(0))
        self.assertEqual(firms[1].suppliers, [0])

    def test_needs_a_commodity_firm(self):
        with self.assertRaises(ValueError):
            link_suppliers([make_firm(id=0, sector=Sector.MANUFACTURER)], 2,
                           np.random.default_rng(0))

    def test_two_trophic_levels(self):
        firms = link_suppliers(self.population(), 2, np.random.default_rng(0))
        graph = build_supply_chain(firms)
        self.assertIsInstance(graph, nx.DiGraph)
        self.assertEqual(graph.number_of_edges(), 8)
        levels = assign_trophic_levels(graph, firms)
        self.assertEqual([levels[i] for i in range(7)], [1, 1, 1, 2, 2, 2, 2])
        self.assertEqual([f.trophic_level for f in firms], [1, 1, 1, 2, 2, 2, 2])

    def test_cycle_is_rejected(self):
        graph = nx.DiGraph([(0, 1), (1, 0)])
        with self.assertRaises(ValueError):
            assign_trophic_levels(graph, [])

    def test_indirect_exposure(self):
        graph = nx.DiGraph([(0, 2), (1, 2), (1, 3)])
        self.assertEqual(indirect_exposure(graph, []), 0.0)
        self.assertEqual(indirect_exposure(graph, [1]), 0.5)
        self.assertEqual(indirect_exposure(graph, [2]), 0.0)
        self.assertEqual(indirect_exposure(nx.DiGraph(), [1]), 0.0)


class TestInitWorld(TimedTestCase):
    def test_population(self):
        state = init_world(ScenarioConfig(grid_width=20, grid_height=20))
        self.assertEqual(len(state.firms), 15)
        self.assertEqual(len(state.households), 75)
        sectors = [f.sector for f in state.firms]
        self.assertEqual(sectors.count(Sector.COMMODITY), 6)
        self.assertEqual(sectors.count(Sector.MANUFACTURER), 9)
        self.assertEqual(len({f.location for f in state.firms}), 15)
        for firm in state.firms:
            self.assertTrue(firm.genome.is_valid())
            self.assertEqual(firm.trophic_level, 1 if firm.is_commodity else 2)
        self.assertEqual(
            sum(1 for h in state.households if h.sector is Sector.COMMODITY), 30)
        for h in state.households:
            self.assertEqual(h.consumption_levels, (1, 2))

    def test_same_seed_same_world(self):
        config = small_config(seed=42)
        self.assertEqual(world_signature(init_world(config)),
                         world_signature(init_world(config)))

    def test_different_seed_different_world(self):
        self.assertNotEqual(world_signature(init_world(small_config(seed=1))),
                            world_signature(init_world(small_config(seed=2))))


class TestStep(TimedTestCase):
    def micro_world(self):
        config = small_config(
            n_firms=2, n_households=1, grid_width=3, grid_height=3,
            firm_money=100.0, household_money=20.0,
            hazard_enabled=False, evolution_enabled=False, steps=1)
        return init_world(config)

    def test_micro_world_hand_trace(self):
        state = self.micro_world()
        commodity, manufacturer = state.firms
        (h,) = state.households
        self.assertIs(h.sector, Sector.MANUFACTURER)
        self.assertEqual(state.total_money, 220.0)

        step(state)

        ledger = state.ledger
        self.assertEqual(ledger.volume("labor"), 1.0)
        self.assertEqual(ledger.capital_sink, 0.0)
        self.assertEqual(h.employer, manufacturer.id)
        self.assertAlmostEqual(manufacturer.input_inventory[commodity.id], 9.0, places=12)
        self.assertEqual(manufacturer.production, 1.0)
        self.assertIs(manufacturer.limiting_factor, LimitingFactor.LABOR)
        self.assertEqual(commodity.production, 0.0)
        self.assertAlmostEqual(commodity.money, 105.0, places=9)
        self.assertAlmostEqual(h.money, 15.0, places=9)
        self.assertAlmostEqual(manufacturer.money, 100.0, places=9)
        self.assertAlmostEqual(state.total_money, 220.0, delta=1e-9)

        (frame,) = state.metrics
        self.assertEqual(frame.step, 1)
        self.assertEqual(frame.unemployment_rate, 0.0)
        self.assertEqual(frame.share_labor_limited, 1.0)
        self.assertLessEqual(abs(frame.ledger_imbalance), 1e-9)

    def test_idle_firm_keeps_its_price(self):
        state = self.micro_world()
        commodity, manufacturer = state.firms
        commodity.output_inventory = 0.0
        step(state)
        self.assertEqual(commodity.production, 0.0)
        self.assertEqual(commodity.sales, 0.0)
        self.assertEqual(commodity.price, state.config.firm_price)

    def test_decline_is_measured_over_five_steps(self):
        for history, active in (([100.0, 90.0, 80.0, 70.0, 49.0], True),
                                ([100.0, 90.0, 80.0, 70.0, 60.0, 49.0], False)):
            state = init_world(small_config(
                n_firms=2, n_households=1, grid_width=3, grid_height=3,
                hazard_enabled=False, steps=1))
            firm = state.firms[1]
            for money in history:
                firm.money = money
                firm.memory.record_firm(firm)
            step(state)
            self.assertIs(firm.active, active, history)

    def test_imbalance_aborts(self):
        state = self.micro_world()
        with mock.patch("climabm.engine.engine.clear_goods_market") as goods:
            def leak(households, firms, rng, step, spend_fraction):
                households[0].money += 1.0
                return []
            goods.side_effect = leak
            with self.assertRaises(ConservationError) as cm:
                step(state)
        self.assertEqual(cm.exception.dump["step"], 1)
        self.assertAlmostEqual(cm.exception.dump["imbalance"], 1.0, places=9)

    def test_population_is_constant(self):
        state = init_world(small_config())
        for _ in range(20):
            step(state)
            self.assertEqual(len(state.firms), 6)
            self.assertEqual(len(state.households), 20)
            frame = state.metrics[-1]
            shares = (frame.share_labor_limited + frame.share_capital_limited
                      + frame.share_input_limited)
            self.assertTrue(shares == 0.0 or abs(shares - 1.0) < 1e-12)
            self.assertTrue(0.0 <= frame.unemployment_rate <= 1.0)


class TestRun(TimedTestCase):
    def test_zero_steps(self):
        series, state = run(small_config(), steps=0)
        self.assertEqual(series, [])
        self.assertEqual(state.step, 0)

    def test_progress_every_tenth(self):
        progress = mock.Mock()
        series, _ = run(small_config(steps=20), progress=progress)
        self.assertEqual(len(series), 20)
        self.assertEqual([c.args for c in progress.call_args_list],
                         [(i, 20) for i in range(2, 21, 2)])

    def test_deterministic(self):
        first, _ = run(small_config(seed=5))
        second, _ = run(small_config(seed=5))
        self.assertEqual(first, second)

    def test_evolution_disabled(self):
        series, state = run(small_config(evolution_enabled=False, steps=30))
        self.assertEqual(sum(frame.replaced_firms for frame in series), 0)
        self.assertTrue(all(firm.generation == 0 for firm in state.firms))

    def test_hazard_disabled_never_damages(self):
        hot = [(x, y) for x in range(12) for y in range(12) if (x + y) % 3 == 0]
        with mock.patch("climabm.engine.engine.load_hazard_dataset",
                        return_value=hotspot_grid(12, 12, hot)):
            series, _ = run(small_config(grid_path="grid.txt", hazard_enabled=False))
        self.assertTrue(all(frame.damaged_share == 0.0 for frame in series))
        self.assertTrue(all(frame.mean_damage_ratio == 0.0 for frame in series))

    def test_negative_steps(self):
        with self.assertRaises(ConfigError):
            run(small_config(), steps=-1)


class TestMetrics(TimedTestCase):
    def test_columns(self):
        self.assertEqual(COLUMNS[:2], ("step", "year"))
        self.assertEqual(len(COLUMNS), len(set(COLUMNS)))

    def test_dataframe(self):
        series, _ = run(small_config(steps=3))
        frame = metrics_dataframe(series)
        self.assertEqual(list(frame.columns), list(COLUMNS))
        self.assertEqual(list(frame["step"]), [1, 2, 3])
        self.assertEqual(list(frame["year"]), [2020.25, 2020.5, 2020.75])
        self.assertIsInstance(series[0], MetricsFrame)

    def test_empty_dataframe(self):
        self.assertEqual(list(metrics_dataframe([]).columns), list(COLUMNS))
        self.assertEqual(len(metrics_dataframe([])), 0)


if __name__ == "__main__":
    unittest.main()
