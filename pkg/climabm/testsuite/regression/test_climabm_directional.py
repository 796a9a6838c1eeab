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
Regression test for the headline experiment: the default 15-firm,
75-household world over 320 quarterly steps and five seeds, comparing
a hazard-free baseline, the flood scenario, and the flood scenario
with evolution switched off.

Trajectories are emergent and seed-dependent, so only the direction
of each effect is checked, and only in at least four of five seeds.
"""
import os
import shutil
import tempfile
import unittest
from dataclasses import replace
from time import time

import numpy as np

from climabm.engine import ScenarioConfig
from climabm.hazard import synthetic_flood_grid, write_hazard_dataset
from climabm.markets import PRICE_BOUNDS
from climabm.scenario import SCENARIOS, comparison_rows, run_jobs

SEEDS = (42, 43, 44, 45, 46)
MIN_AGREEING = 4
TIME_LIMIT = 300.0


class TestDirectionalExperiment(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.start_time = time()
        cls.tmp = tempfile.mkdtemp(prefix="climabm-regression-")
        grid = write_hazard_dataset(
            synthetic_flood_grid(50, 50, rng=np.random.default_rng(2020)),
            os.path.join(cls.tmp, "flood.grid"))
        base = ScenarioConfig(grid_path=grid)
        jobs = [
            (label, replace(base, seed=seed, **overrides))
            for seed in SEEDS
            for label, overrides in SCENARIOS
        ]
        cls.results = run_jobs(jobs, cls.tmp, workers=os.cpu_count() or 1)
        cls.rows = comparison_rows(cls.results, SEEDS, ablation=True)[:-1]
        cls.elapsed = time() - cls.start_time

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.tmp, ignore_errors=True)

    def setUp(self):
        self.test_start = time()

    def tearDown(self):
        print("%.3f: %s" % (time() - self.test_start, self.id()))

    def agreeing(self, predicate):
        return sum(1 for row in self.rows if predicate(row))

    def test_mid_horizon_production_drops_under_hazard(self):
        for row in self.rows:
            self.assertEqual(row["mid_step"], 120)
        self.assertGreaterEqual(
            self.agreeing(lambda r: r["hazard_mid_production"] < r["baseline_mid_production"]),
            MIN_AGREEING)

    def test_evolution_sustains_production_under_hazard(self):
        self.assertGreaterEqual(
            self.agreeing(
                lambda r: r["hazard_final_production"] > r["no_evolution_final_production"]),
            MIN_AGREEING)

    def test_final_price_rises_under_hazard(self):
        self.assertGreaterEqual(
            self.agreeing(lambda r: r["hazard_final_price"] > r["baseline_final_price"]),
            MIN_AGREEING)

    def test_no_price_at_the_ceiling(self):
        for (label, seed), result in self.results.items():
            for firm in result.state.firms:
                self.assertLess(firm.price, PRICE_BOUNDS[1], (label, seed, firm.id))

    def test_runs_complete_at_desk_scale(self):
        self.assertEqual(len(self.results), 15)
        for result in self.results.values():
            self.assertEqual(len(result.series), 320)
        self.assertLess(self.elapsed, TIME_LIMIT)


if __name__ == "__main__":
    unittest.main()
