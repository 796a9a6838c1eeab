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
climabm agents:

Household and firm state and the per-agent transitions of a step:
the three hazard damage pathways (capital, productivity, inventory),
productivity recovery, Leontief production, budgeting, risk-driven
capital targets, household relocation, employer choice and
consumption planning.

Transitions update the agent they are given and return it, so they
can be chained or used in comprehensions.
"""
from enum import Enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from climabm.hazard import neighborhood_peak, normalized_field

__all__ = [
    "Sector", "LimitingFactor", "StrategyGenome", "LeontiefCoefficients",
    "Firm", "Household", "PRODUCTIVITY_FLOOR", "RADIUS_RANGE",
    "DISTANCE_COST_RANGE", "chebyshev_distance", "apply_damage",
    "recover_productivity", "leontief_output", "allocate_budget",
    "update_capital_target", "purchase_capital", "household_maybe_relocate",
    "choose_employer", "consumption_demand",
]

PRODUCTIVITY_FLOOR = 0.01
RADIUS_RANGE = (1, 50)
DISTANCE_COST_RANGE = (0.01, 0.1)
RELOCATION_THRESHOLD = 0.1
RELOCATION_ATTEMPTS = 100
DEFAULT_SPEND_FRACTION = 0.8


class Sector(Enum):
    COMMODITY = "commodity"
    MANUFACTURER = "manufacturer"


class LimitingFactor(Enum):
    LABOR = "labor"
    CAPITAL = "capital"
    INPUT = "input"
    NONE = "none"


@dataclass(frozen=True)
class StrategyGenome:
    """
    The six evolvable firm strategy parameters. The three budget
    weights live on the unit simplex; the others are clamped to
    `BOUNDS`.
    """
    labor_weight: float = 1.0 / 3.0
    input_weight: float = 1.0 / 3.0
    capital_weight: float = 1.0 / 3.0
    risk_sensitivity: float = 5.0
    price_responsiveness: float = 0.5
    wage_sensitivity: float = 0.5

    PARAMETERS = (
        "labor_weight",
        "input_weight",
        "capital_weight",
        "risk_sensitivity",
        "price_responsiveness",
        "wage_sensitivity",
    )
    BOUNDS = (
        (0.0, 1.0),
        (0.0, 1.0),
        (0.0, 1.0),
        (0.0, 10.0),
        (0.0, 1.0),
        (0.0, 1.0),
    )

    @classmethod
    def from_array(cls, values):
        """
        Builds a valid genome from six raw values: each is clamped to
        its bounds and the budget weights are renormalized to sum to 1
        (reset to equal thirds if they all clamp to 0).
        """
        lower = np.array([b[0] for b in cls.BOUNDS])
        upper = np.array([b[1] for b in cls.BOUNDS])
        values = np.clip(np.asarray(values, dtype=float), lower, upper)
        weights = values[:3]
        total = weights.sum()
        if total <= 0:
            weights = np.full(3, 1.0 / 3.0)
        else:
            weights = weights / total
        return cls(*(float(v) for v in np.concatenate([weights, values[3:]])))

    def as_array(self):
        return np.array([getattr(self, name) for name in self.PARAMETERS])

    @property
    def weights(self):
        return (self.labor_weight, self.input_weight, self.capital_weight)

    def is_valid(self, tolerance=1e-9):
        values = self.as_array()
        for value, (low, high) in zip(values, self.BOUNDS):
            if not low <= value <= high:
                return False
        return abs(sum(self.weights) - 1.0) <= tolerance


@dataclass(frozen=True)
class LeontiefCoefficients:
    """Input requirements per unit of output."""
    a_labor: float = 1.0
    a_capital: float = 2.0
    a_input: float = 1.0

    def __post_init__(self):
        for name in ("a_labor", "a_capital", "a_input"):
            if not getattr(self, name) > 0:
                raise ValueError("{} must be strictly positive, got {}".format(
                    name, getattr(self, name)))


def _new_memory():
    from climabm.evolution.evolution import PerformanceMemory
    return PerformanceMemory()


def _new_mutation_state():
    from climabm.evolution.evolution import MutationState
    return MutationState()


@dataclass
class Firm:
    id: int
    location: tuple
    sector: Sector
    money: float = 0.0
    capital: float = 0.0
    capital_target: float = 0.0
    output_inventory: float = 0.0
    input_inventory: dict = field(default_factory=dict)
    suppliers: list = field(default_factory=list)
    trophic_level: int = 1
    price: float = 1.0
    wage: float = 1.0
    productivity_multiplier: float = 1.0
    recovery_steps_left: int = 0
    monitoring_radius: int = 1
    genome: StrategyGenome = field(default_factory=StrategyGenome)
    age: int = 0
    memory: object = field(default_factory=_new_memory)
    mutation_state: object = field(default_factory=_new_mutation_state)
    labor_hired: float = 0.0
    limiting_factor: LimitingFactor = LimitingFactor.NONE
    # Per-step bookkeeping
    labor_budget: float = 0.0
    input_budget: float = 0.0
    capital_budget: float = 0.0
    labor_budget_total: float = 0.0
    production: float = 0.0
    sales: float = 0.0
    sales_history: deque = field(default_factory=lambda: deque(maxlen=4))
    last_damage: float = 0.0
    active: bool = True
    generation: int = 0

    @property
    def uid(self):
        return "F{}".format(self.id)

    @property
    def is_commodity(self):
        return self.sector is Sector.COMMODITY


@dataclass
class Household:
    id: int
    location: tuple
    sector: Sector
    money: float = 0.0
    employer: object = None
    monitoring_radius: int = 1
    consumption_levels: tuple = (1, 2)
    labor_supplied: float = 0.0
    distance_cost: float = 0.05
    relocations: int = 0

    def __post_init__(self):
        self.consumption_levels = tuple(sorted(set(self.consumption_levels)))
        if not 2 <= len(self.consumption_levels) <= 3:
            raise ValueError(
                "household {} must target 2 or 3 trophic levels, got {}".format(
                    self.id, self.consumption_levels))
        low, high = RADIUS_RANGE
        if not low <= self.monitoring_radius <= high:
            raise ValueError(
                "household {} monitoring radius {} outside [{}, {}]".format(
                    self.id, self.monitoring_radius, low, high))

    @property
    def uid(self):
        return "H{}".format(self.id)


def chebyshev_distance(a, b):
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def apply_damage(firm, d, recovery_steps=4):
    """
    Applies a damage ratio `d` to a firm through all three pathways:
    capital and every inventory shrink by `(1 - d)`, and productivity
    drops to `min(current, 1 - d)` (floored at `PRODUCTIVITY_FLOOR`)
    for `recovery_steps` steps. Money is untouched.
    """
    if not 0.0 <= d <= 1.0:
        raise ValueError("damage ratio must be in [0, 1], got {}".format(d))
    firm.last_damage = d
    if d == 0.0:
        return firm
    keep = 1.0 - d
    firm.capital *= keep
    firm.output_inventory *= keep
    for good in firm.input_inventory:
        firm.input_inventory[good] *= keep
    firm.productivity_multiplier = max(
        PRODUCTIVITY_FLOOR, min(firm.productivity_multiplier, keep))
    firm.recovery_steps_left = recovery_steps
    if recovery_steps <= 0:
        firm.productivity_multiplier = 1.0
    return firm


def recover_productivity(firm):
    """Moves productivity linearly back to 1 over the remaining steps."""
    if firm.recovery_steps_left <= 0:
        firm.recovery_steps_left = 0
        firm.productivity_multiplier = 1.0
        return firm
    gap = 1.0 - firm.productivity_multiplier
    firm.productivity_multiplier += gap / firm.recovery_steps_left
    firm.recovery_steps_left -= 1
    if firm.recovery_steps_left == 0:
        firm.productivity_multiplier = 1.0
    return firm


def leontief_output(firm, coeffs):
    """
    Fixed-proportions production. Returns `(quantity, limiting)`.

    `q_raw` is the smallest of labor/a_labor, capital/a_capital and,
    for manufacturers, each supplier good's inventory/a_input. Output
    is `q_raw` scaled by the productivity multiplier; inputs are
    consumed at `q_raw * a_input` per supplier good. Ties resolve in
    the order labor, capital, input.
    """
    ratios = [
        (LimitingFactor.LABOR, firm.labor_hired / coeffs.a_labor),
        (LimitingFactor.CAPITAL, firm.capital / coeffs.a_capital),
    ]
    if not firm.is_commodity:
        goods = firm.suppliers or list(firm.input_inventory)
        if goods:
            ratios.append((
                LimitingFactor.INPUT,
                min(firm.input_inventory.get(g, 0.0) for g in goods) / coeffs.a_input))
        else:
            ratios.append((LimitingFactor.INPUT, 0.0))
    limiting, q_raw = min(ratios, key=lambda pair: pair[1])
    q_raw = max(0.0, q_raw)
    if not firm.is_commodity and q_raw > 0:
        used = q_raw * coeffs.a_input
        for good in firm.suppliers:
            firm.input_inventory[good] = max(
                0.0, firm.input_inventory.get(good, 0.0) - used)
    quantity = q_raw * firm.productivity_multiplier
    firm.output_inventory += quantity
    firm.production = quantity
    firm.limiting_factor = limiting
    return quantity, limiting


def allocate_budget(firm):
    """
    Splits the firm's money into labor, input and capital budgets by
    genome weights. The capital budget takes the remainder so the
    three always sum to the firm's money.
    """
    money = firm.money
    labor = money * firm.genome.labor_weight
    inputs = money * firm.genome.input_weight
    capital = money - labor - inputs
    if capital < 0:
        capital = 0.0
        inputs = money - labor
    firm.labor_budget = labor
    firm.labor_budget_total = labor
    firm.input_budget = inputs
    firm.capital_budget = capital
    return labor, inputs, capital


def update_capital_target(firm, local_hazard, ceiling=None):
    """
    Raises the capital target by `risk_sensitivity * local_hazard`
    (relative) when a hazard is observed within the monitoring radius,
    up to `ceiling` when one is given. A target already above the
    ceiling is left alone.
    """
    if local_hazard > 0:
        raised = firm.capital_target * (1.0 + firm.genome.risk_sensitivity * local_hazard)
        if ceiling is not None:
            raised = max(firm.capital_target, min(raised, ceiling))
        firm.capital_target = raised
    return firm


def purchase_capital(firm, unit_price=1.0):
    """
    Buys capital toward the target at a fixed unit price, limited by
    the capital budget and the firm's money. Returns the money spent,
    which leaves the economy.
    """
    gap = firm.capital_target - firm.capital
    if gap <= 0 or firm.capital_budget <= 0:
        return 0.0
    spend = min(gap * unit_price, firm.capital_budget, firm.money)
    if spend <= 0:
        return 0.0
    firm.capital += spend / unit_price
    firm.money -= spend
    firm.capital_budget -= spend
    return spend


def household_maybe_relocate(h, field, grid, rng,
                             threshold=RELOCATION_THRESHOLD,
                             attempts=RELOCATION_ATTEMPTS):
    """
    Moves a household whose neighborhood peak exceeds `threshold` to a
    uniformly drawn cell with normalized intensity `<= threshold`
    (rejection sampling, at most `attempts` draws). The employer is
    dropped on a move; the household stays put if no safe cell is found.
    """
    if neighborhood_peak(field, h.location, h.monitoring_radius, grid) <= threshold:
        return h
    normalized = normalized_field(field, grid)
    for _ in range(attempts):
        x = int(rng.integers(0, grid.width))
        y = int(rng.integers(0, grid.height))
        if normalized[y, x] <= threshold:
            h.location = (x, y)
            h.employer = None
            h.relocations += 1
            break
    return h


def choose_employer(h, firms):
    """
    Returns the id of the candidate firm maximizing
    `wage - distance_cost * distance`, or None when there are no
    candidates or the best score is not positive. Ties go to the
    lowest firm id.
    """
    best_id, best_score = None, None
    for firm in sorted(firms, key=lambda f: f.id):
        score = firm.wage - h.distance_cost * chebyshev_distance(h.location, firm.location)
        if best_score is None or score > best_score:
            best_id, best_score = firm.id, score
    if best_score is None or best_score <= 0:
        return None
    return best_id


def consumption_demand(h, spend_fraction=DEFAULT_SPEND_FRACTION):
    """Budget per targeted trophic level: an equal share of money * spend_fraction."""
    if not 0.0 <= spend_fraction <= 1.0:
        raise ValueError("spend_fraction must be in [0, 1], got {}".format(spend_fraction))
    share = h.money * spend_fraction / len(h.consumption_levels)
    return {level: share for level in h.consumption_levels}
