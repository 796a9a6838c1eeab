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
Shared builders for the climabm test suites.
"""
import os
import shutil
import tempfile

import numpy as np

from climabm.agents import Firm, Household, Sector, StrategyGenome
from climabm.engine import ScenarioConfig
from climabm.hazard import HazardGrid, write_hazard_dataset


def make_firm(id=0, location=(0, 0), sector=Sector.COMMODITY, **kwargs):
    kwargs.setdefault("genome", StrategyGenome())
    return Firm(id=id, location=location, sector=sector, **kwargs)


def make_household(id=0, location=(0, 0), sector=Sector.COMMODITY, **kwargs):
    kwargs.setdefault("consumption_levels", (1, 2))
    return Household(id=id, location=location, sector=sector, **kwargs)


def single_cell_grid(depths, return_periods):
    """A 1x1 grid whose only cell has `depths` (one per return period)."""
    layers = np.array(depths, dtype=float).reshape(len(return_periods), 1, 1)
    return HazardGrid.from_layers(return_periods, layers)


def hotspot_grid(width, height, cells, depth=4.0, return_periods=(10, 100, 1000)):
    """A grid that is dry except for `cells`, flooded at every return period."""
    layers = np.zeros((len(return_periods), height, width))
    for k in range(len(return_periods)):
        for x, y in cells:
            layers[k, y, x] = depth * (k + 1) / len(return_periods)
    return HazardGrid.from_layers(return_periods, layers)


def small_config(**kwargs):
    """A short, small scenario for fast tests."""
    values = dict(
        steps=20,
        n_firms=6,
        n_households=20,
        grid_width=12,
        grid_height=12,
        seed=7,
    )
    values.update(kwargs)
    return ScenarioConfig(**values)


class TempDirMixin(object):
    """Gives each test a scratch directory in `self.tmp`."""

    def make_tmp(self):
        self.tmp = tempfile.mkdtemp(prefix="climabm-test-")
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)
        return self.tmp

    def write_file(self, name, text):
        path = os.path.join(self.tmp, name)
        with open(path, "w") as fout:
            fout.write(text)
        return path

    def write_grid(self, name, grid):
        return write_hazard_dataset(grid, os.path.join(self.tmp, name))
