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
climabm markets:

Serial market clearing for one step: labor matching and wage payment,
input procurement down the supply chain, household goods purchases,
and genome-driven price and wage adjustment.

Every clearing function visits agents in an order drawn from the
`rng` it is given, so a fixed seed yields a fixed sequence of
transactions. Money and goods move between agents only through
`Transaction`s; money leaving or entering the economy is recorded on
the step's `Ledger`.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from climabm.agents import Sector, choose_employer, consumption_demand
from climabm.logging import make_logger

__all__ = [
    "Good", "LABOR", "CAPITAL", "trophic_good", "Transaction", "Ledger",
    "PRICE_BOUNDS", "WAGE_BOUNDS", "EXTERNAL", "total_money",
    "clear_labor_market", "unemployment_rate", "procure_inputs",
    "procure_all_inputs", "clear_goods_market", "target_inventory",
    "vacancy_ratio", "has_market_signal", "adjust_price", "adjust_wage",
]

PRICE_BOUNDS = (0.01, 1e6)
WAGE_BOUNDS = (0.01, 1e6)
LABOR_ENDOWMENT = 1.0
WAGE_BALANCE_POINT = 0.5
SALES_WINDOW = 4
EXTERNAL = "EXTERNAL"
EPSILON = 1e-12

logger = make_logger("markets")


@dataclass(frozen=True)
class Good:
    kind: str
    level: object = None

    def __str__(self):
        if self.kind == "trophic":
            return "trophic-{}".format(self.level)
        return self.kind


LABOR = Good("labor")
CAPITAL = Good("capital")


def trophic_good(level):
    return Good("trophic", int(level))


@dataclass(frozen=True)
class Transaction:
    buyer: str
    seller: str
    good: Good
    quantity: float
    unit_price: float
    step: int

    @property
    def value(self):
        return self.quantity * self.unit_price


@dataclass
class Ledger:
    """
    Transactions of one step plus the money that left (capital
    purchases, removed firms) or entered (entry endowments) the
    economy.
    """
    step: int = 0
    transactions: list = field(default_factory=list)
    capital_sink: float = 0.0
    removal_sink: float = 0.0
    entry_source: float = 0.0

    def extend(self, transactions):
        self.transactions.extend(transactions)

    @property
    def net_external(self):
        return self.entry_source - self.capital_sink - self.removal_sink

    def imbalance(self, money_before, money_after):
        """How far the change in total money misses the recorded external flows."""
        return (money_after - money_before) - self.net_external

    def volume(self, kind):
        return math.fsum(t.quantity for t in self.transactions if t.good.kind == kind)


def total_money(*groups):
    return math.fsum(agent.money for group in groups for agent in group)


def _debit(agent, amount):
    agent.money -= amount
    if -EPSILON < agent.money < 0:
        agent.money = 0.0


def clear_labor_market(households, firms, rng, step=0):
    """
    Matches households to same-sector firms with remaining labor
    budget, in a seeded shuffled household order. Each household sells
    up to one unit of labor to the firm picked by `choose_employer`;
    the hired quantity is capped by the firm's remaining budget.
    """
    for firm in firms:
        firm.labor_hired = 0.0
    by_id = {firm.id: firm for firm in firms}
    transactions = []
    for index in rng.permutation(len(households)):
        h = households[int(index)]
        h.labor_supplied = 0.0
        candidates = [
            f for f in firms
            if f.active and f.sector is h.sector and f.labor_budget > EPSILON
        ]
        chosen = choose_employer(h, candidates)
        if chosen is None:
            h.employer = None
            continue
        firm = by_id[chosen]
        quantity = min(LABOR_ENDOWMENT, firm.labor_budget / firm.wage)
        pay = quantity * firm.wage
        _debit(firm, pay)
        firm.labor_budget = max(0.0, firm.labor_budget - pay)
        firm.labor_hired += quantity
        h.money += pay
        h.labor_supplied = quantity
        h.employer = firm.id
        transactions.append(Transaction(h.uid, firm.uid, LABOR, quantity, firm.wage, step))
    logger.debug(f"Step {step}: {len(transactions)} households hired")
    return transactions


def unemployment_rate(households):
    """Fraction of households that sold no labor this step."""
    if not households:
        return 0.0
    return sum(1 for h in households if h.labor_supplied <= 0) / len(households)


def procure_inputs(firm, firms_by_id, step=0):
    """
    Spends a manufacturer's input budget in equal shares across its
    suppliers, buying `min(share / price, inventory)` from each.
    """
    transactions = []
    if firm.is_commodity or not firm.suppliers or firm.input_budget <= EPSILON:
        return transactions
    share = firm.input_budget / len(firm.suppliers)
    for supplier_id in firm.suppliers:
        supplier = firms_by_id[supplier_id]
        if supplier.output_inventory <= EPSILON:
            continue
        quantity = min(share / supplier.price, supplier.output_inventory)
        value = quantity * supplier.price
        _debit(firm, value)
        firm.input_budget = max(0.0, firm.input_budget - value)
        supplier.money += value
        supplier.output_inventory = max(0.0, supplier.output_inventory - quantity)
        supplier.sales += quantity
        firm.input_inventory[supplier_id] = firm.input_inventory.get(supplier_id, 0.0) + quantity
        transactions.append(Transaction(
            firm.uid, supplier.uid, trophic_good(supplier.trophic_level),
            quantity, supplier.price, step))
    return transactions


def procure_all_inputs(firms, rng, step=0):
    """
    Runs `procure_inputs` for every active manufacturer, lower trophic
    levels first and in seeded shuffled order within a level.
    """
    firms_by_id = {firm.id: firm for firm in firms}
    order = [firms[int(i)] for i in rng.permutation(len(firms))]
    buyers = sorted(
        (f for f in order if f.active and f.sector is Sector.MANUFACTURER),
        key=lambda f: f.trophic_level)
    transactions = []
    for firm in buyers:
        transactions.extend(procure_inputs(firm, firms_by_id, step))
    return transactions


def clear_goods_market(households, firms, rng, step=0, spend_fraction=0.8):
    """
    Households, in seeded shuffled order, spend their consumption
    budget for each targeted trophic level at the cheapest sellers of
    that level (ties by lowest id), moving on to the next cheapest
    until the budget or the supply runs out. Unspent budget stays
    with the household.
    """
    transactions = []
    for index in rng.permutation(len(households)):
        h = households[int(index)]
        for level, budget in sorted(consumption_demand(h, spend_fraction).items()):
            sellers = sorted(
                (f for f in firms if f.trophic_level == level and f.output_inventory > EPSILON),
                key=lambda f: (f.price, f.id))
            for firm in sellers:
                if budget <= EPSILON:
                    break
                quantity = min(budget / firm.price, firm.output_inventory)
                value = quantity * firm.price
                _debit(h, value)
                budget -= value
                firm.money += value
                firm.output_inventory = max(0.0, firm.output_inventory - quantity)
                firm.sales += quantity
                transactions.append(Transaction(
                    h.uid, firm.uid, trophic_good(level), quantity, firm.price, step))
    return transactions


def target_inventory(firm, floor=1.0):
    """Trailing mean of the last four steps' sales, at least `floor`."""
    if not firm.sales_history:
        return floor
    return max(floor, float(np.mean(firm.sales_history)))


def has_market_signal(firm):
    """True when the firm produced, sold or holds goods this step."""
    return firm.production > 0 or firm.sales > 0 or firm.output_inventory > 0


def vacancy_ratio(firm):
    """Unfilled share of this step's labor budget (0 without a budget)."""
    if firm.labor_budget_total <= 0:
        return 0.0
    return min(1.0, max(0.0, firm.labor_budget / firm.labor_budget_total))


def _clamp(value, bounds):
    return min(bounds[1], max(bounds[0], value))


def adjust_price(firm, target):
    """
    Moves the price against the inventory gap:
    `price * (1 + responsiveness * (target - inventory) / max(target, inventory))`.
    A shortage raises the price, a surplus lowers it; the relative gap
    lies in [-1, 1]. The result is clamped to `PRICE_BOUNDS`.
    """
    if target <= 0:
        raise ValueError("target inventory must be positive, got {}".format(target))
    gap = (target - firm.output_inventory) / max(target, firm.output_inventory)
    firm.price = _clamp(
        firm.price * (1.0 + firm.genome.price_responsiveness * gap), PRICE_BOUNDS)
    return firm.price


def adjust_wage(firm, ratio):
    """
    Raises wages for vacant firms and cuts them for fully staffed
    ones, balanced at a vacancy ratio of 0.5; clamped to `WAGE_BOUNDS`.
    """
    firm.wage = _clamp(
        firm.wage * (1.0 + firm.genome.wage_sensitivity * (ratio - WAGE_BALANCE_POINT) * 2.0),
        WAGE_BOUNDS)
    return firm.wage
