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
climabm engine metrics:

One `MetricsFrame` is recorded per step. Its field order is the column
order of the exported metrics table and must stay stable.
"""
import math
from dataclasses import dataclass, fields, astuple

import numpy as np
import pandas as pd

from climabm.agents import LimitingFactor, Sector
from climabm.evolution import firm_fitness
from climabm.markets import total_money, unemployment_rate
from climabm.engine.network import indirect_exposure

__all__ = ["MetricsFrame", "COLUMNS", "collect_metrics", "metrics_dataframe"]


@dataclass(frozen=True)
class MetricsFrame:
    step: int
    year: float
    mean_production: float
    mean_firm_money: float
    mean_household_money: float
    mean_labor: float
    mean_price: float
    mean_wage: float
    unemployment_rate: float
    share_labor_limited: float
    share_capital_limited: float
    share_input_limited: float
    active_firms: int
    failed_firms: int
    replaced_firms: int
    entry_source: float
    capital_sink: float
    removal_sink: float
    total_money: float
    ledger_imbalance: float
    damaged_share: float
    indirect_exposure_share: float
    mean_damage_ratio: float
    relocations: int
    mean_capital: float
    mean_fitness: float
    commodity_production: float
    manufacturer_production: float
    commodity_firm_money: float
    manufacturer_firm_money: float
    commodity_price: float
    manufacturer_price: float
    commodity_wage: float
    manufacturer_wage: float
    commodity_labor: float
    manufacturer_labor: float
    commodity_household_money: float
    manufacturer_household_money: float

    def as_dict(self):
        return dict(zip(COLUMNS, astuple(self)))


COLUMNS = tuple(f.name for f in fields(MetricsFrame))


def _mean(values):
    values = list(values)
    if not values:
        return 0.0
    return float(np.mean(values))


def _bottleneck_shares(firms):
    limited = [f.limiting_factor for f in firms if f.limiting_factor is not LimitingFactor.NONE]
    if not limited:
        return 0.0, 0.0, 0.0
    n = len(limited)
    return tuple(
        sum(1 for factor in limited if factor is wanted) / n
        for wanted in (LimitingFactor.LABOR, LimitingFactor.CAPITAL, LimitingFactor.INPUT))


def collect_metrics(state, ledger, damage, failed=(), replaced=(), relocations=0,
                    imbalance=0.0):
    """
    Builds the `MetricsFrame` for the step just executed.

    `damage` maps firm id to the damage ratio applied this step (taken
    before replacement so replaced firms still count).
    """
    firms, households = state.firms, state.households
    by_sector = {
        sector: [f for f in firms if f.sector is sector] for sector in Sector}
    households_by_sector = {
        sector: [h for h in households if h.sector is sector] for sector in Sector}
    labor, capital, inputs = _bottleneck_shares(firms)
    damaged = [firm_id for firm_id, ratio in damage.items() if ratio > 0]
    commodity, manufacturer = by_sector[Sector.COMMODITY], by_sector[Sector.MANUFACTURER]
    h_commodity = households_by_sector[Sector.COMMODITY]
    h_manufacturer = households_by_sector[Sector.MANUFACTURER]
    config = state.config
    return MetricsFrame(
        step=state.step,
        year=config.start_year + state.step * config.dt_years,
        mean_production=_mean(f.production for f in firms),
        mean_firm_money=_mean(f.money for f in firms),
        mean_household_money=_mean(h.money for h in households),
        mean_labor=_mean(h.labor_supplied for h in households),
        mean_price=_mean(f.price for f in firms),
        mean_wage=_mean(f.wage for f in firms),
        unemployment_rate=unemployment_rate(households),
        share_labor_limited=labor,
        share_capital_limited=capital,
        share_input_limited=inputs,
        active_firms=sum(1 for f in firms if f.active),
        failed_firms=len(failed),
        replaced_firms=len(replaced),
        entry_source=ledger.entry_source,
        capital_sink=ledger.capital_sink,
        removal_sink=ledger.removal_sink,
        total_money=total_money(firms, households),
        ledger_imbalance=imbalance,
        damaged_share=len(damaged) / len(firms) if firms else 0.0,
        indirect_exposure_share=indirect_exposure(state.supply_chain, damaged),
        mean_damage_ratio=math.fsum(damage.values()) / len(damage) if damage else 0.0,
        relocations=relocations,
        mean_capital=_mean(f.capital for f in firms),
        mean_fitness=_mean(firm_fitness(f) for f in firms),
        commodity_production=_mean(f.production for f in commodity),
        manufacturer_production=_mean(f.production for f in manufacturer),
        commodity_firm_money=_mean(f.money for f in commodity),
        manufacturer_firm_money=_mean(f.money for f in manufacturer),
        commodity_price=_mean(f.price for f in commodity),
        manufacturer_price=_mean(f.price for f in manufacturer),
        commodity_wage=_mean(f.wage for f in commodity),
        manufacturer_wage=_mean(f.wage for f in manufacturer),
        commodity_labor=_mean(h.labor_supplied for h in h_commodity),
        manufacturer_labor=_mean(h.labor_supplied for h in h_manufacturer),
        commodity_household_money=_mean(h.money for h in h_commodity),
        manufacturer_household_money=_mean(h.money for h in h_manufacturer),
    )


def metrics_dataframe(series):
    """The series as a `pandas.DataFrame` in `COLUMNS` order (header only when empty)."""
    return pd.DataFrame([frame.as_dict() for frame in series], columns=list(COLUMNS))
