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
climabm evolution:

Evolutionary learning for firms. Each firm keeps a rolling
performance memory; a four-component fitness (money growth,
production stability, survival, limiting-factor diversity) drives a
hill-climbing mutation size; strategy genomes are mutated on a fixed
schedule; failed firms are replaced by mutated offspring of
successful ones under a per-step cap.
"""
import math
from collections import deque, namedtuple
from dataclasses import dataclass, field

import numpy as np

from climabm.agents.agents import Firm, LimitingFactor, StrategyGenome
from climabm.logging import make_logger

__all__ = [
    "NoPerformanceData", "PerformanceRecord", "PerformanceMemory",
    "MutationState", "FitnessComponents", "ReplacementReport",
    "FITNESS_WEIGHTS", "SIGMA_IMPROVED", "SIGMA_INITIAL", "SIGMA_DECLINED",
    "fitness", "fitness_components", "should_mutate", "select_sigma",
    "mutate", "is_failed", "firm_fitness", "replace_failed",
]

MEMORY_WINDOW = 10
FITNESS_HISTORY = 2
FITNESS_WEIGHTS = (0.4, 0.3, 0.2, 0.1)
GROWTH_EPSILON = 1e-6
SURVIVAL_HORIZON = 20

SIGMA_IMPROVED = 0.025
SIGMA_INITIAL = 0.05
SIGMA_DECLINED = 0.10

MUTATION_INTERVAL = 5
MUTATION_PROBABILITY = 0.30

FAILURE_MONEY = 1.0
DECLINE_RATIO = 0.5
DECLINE_WINDOW = 5
ESTABLISHMENT_STEPS = 5
REPLACEMENT_CAP = 0.25

_BALANCE_FACTORS = (LimitingFactor.LABOR, LimitingFactor.CAPITAL, LimitingFactor.INPUT)

logger = make_logger("evolution")


class NoPerformanceData(ValueError):
    """Raised when fitness is requested for an empty performance memory."""


@dataclass(frozen=True)
class PerformanceRecord:
    money: float
    production: float
    capital: float
    limiting_factor: LimitingFactor


@dataclass
class PerformanceMemory:
    """
    Rolling window of the last 10 step records plus the last two
    fitness evaluations. The oldest record is evicted first.
    """
    window: deque = field(default_factory=lambda: deque(maxlen=MEMORY_WINDOW))
    fitness_history: deque = field(default_factory=lambda: deque(maxlen=FITNESS_HISTORY))

    def record(self, money, production, capital, limiting_factor):
        self.window.append(PerformanceRecord(money, production, capital, limiting_factor))

    def record_firm(self, firm):
        self.record(firm.money, firm.production, firm.capital, firm.limiting_factor)

    def __len__(self):
        return len(self.window)


@dataclass
class MutationState:
    sigma: float = SIGMA_INITIAL
    last_fitness: object = None


class FitnessComponents(namedtuple("FitnessComponents", "growth stability survival balance")):
    """The four fitness components, each in [0, 1]."""

    @property
    def score(self):
        return math.fsum(w * c for w, c in zip(FITNESS_WEIGHTS, self))


def fitness_components(memory, age):
    if not len(memory):
        raise NoPerformanceData("no performance data")
    window = list(memory.window)

    first, last = window[0].money, window[-1].money
    growth = math.tanh(max(0.0, (last - first) / max(first, GROWTH_EPSILON)))

    production = np.array([r.production for r in window])
    mean = production.mean()
    if mean <= 0:
        stability = 0.0
    else:
        cv = production.std() / mean
        stability = float(min(1.0, max(0.0, 1.0 - cv)))

    survival = min(age / SURVIVAL_HORIZON, 1.0)

    counts = [sum(1 for r in window if r.limiting_factor is f) for f in _BALANCE_FACTORS]
    total = sum(counts)
    entropy = 0.0
    for count in counts:
        if count:
            p = count / total
            entropy -= p * math.log(p)
    balance = min(1.0, entropy / math.log(len(_BALANCE_FACTORS)))

    return FitnessComponents(growth, stability, float(survival), balance)


def fitness(memory, age):
    """
    Weighted fitness `0.4*G + 0.3*S + 0.2*V + 0.1*B` in [0, 1]:

    * G: tanh of the (non-negative) relative money growth over the window
    * S: one minus the coefficient of variation of production, 0 when
      mean production is 0
    * V: age / 20, capped at 1
    * B: Shannon entropy of labor/capital/input limiting factors,
      normalized by ln 3
    """
    return fitness_components(memory, age).score


def should_mutate(step, rng, probability=MUTATION_PROBABILITY,
                  interval=MUTATION_INTERVAL):
    """
    Per-parameter selection mask. All false off-schedule (no draws);
    on steps divisible by `interval` each of the six parameters is
    selected independently with `probability`.
    """
    size = len(StrategyGenome.PARAMETERS)
    if step % interval != 0:
        return np.zeros(size, dtype=bool)
    return rng.random(size) < probability


def select_sigma(state, current_fitness):
    """Hill-climbing mutation size: shrink after improvement, grow after decline."""
    if state.last_fitness is None:
        state.sigma = SIGMA_INITIAL
    elif current_fitness > state.last_fitness:
        state.sigma = SIGMA_IMPROVED
    elif current_fitness < state.last_fitness:
        state.sigma = SIGMA_DECLINED
    state.last_fitness = current_fitness
    return state.sigma


def mutate(genome, mask, sigma, rng):
    """
    Multiplicative Gaussian mutation: each selected parameter becomes
    `p * (1 + N(0, sigma))`, clamped to its bounds. When any budget
    weight is selected the three weights are renormalized to sum to 1.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return genome
    values = genome.as_array()
    noise = rng.normal(0.0, sigma, size=len(values))
    mutated = np.where(mask, values * (1.0 + noise), values)
    lower = np.array([b[0] for b in StrategyGenome.BOUNDS])
    upper = np.array([b[1] for b in StrategyGenome.BOUNDS])
    mutated = np.clip(mutated, lower, upper)
    if mask[:3].any():
        return StrategyGenome.from_array(mutated)
    mutated[:3] = values[:3]
    return StrategyGenome(*(float(v) for v in mutated))


def is_failed(firm, failure_money=FAILURE_MONEY, decline_ratio=DECLINE_RATIO,
              decline_window=DECLINE_WINDOW):
    """
    A firm has failed when its money is below `failure_money`, or when
    money fell below `decline_ratio` of its value `decline_window` steps
    earlier. The latest memory record is the current step, so the span
    needs `decline_window + 1` records.
    """
    if firm.money < failure_money:
        return True
    window = firm.memory.window
    if len(window) > decline_window:
        return firm.money < decline_ratio * window[-(decline_window + 1)].money
    return False


def firm_fitness(firm):
    """Fitness of a firm, 0 for a firm without performance data."""
    if not len(firm.memory):
        return 0.0
    return fitness(firm.memory, firm.age)


@dataclass
class ReplacementReport:
    replaced: list = field(default_factory=list)
    failed: list = field(default_factory=list)
    entry_money: float = 0.0
    removed_money: float = 0.0


def _spawn(failed, parent, rng, entry_money, entry_capital, sigma):
    genome = mutate(
        parent.genome,
        np.ones(len(StrategyGenome.PARAMETERS), dtype=bool),
        sigma,
        rng)
    return Firm(
        id=failed.id,
        location=failed.location,
        sector=failed.sector,
        trophic_level=failed.trophic_level,
        suppliers=list(failed.suppliers),
        input_inventory={s: 0.0 for s in failed.suppliers},
        money=entry_money,
        capital=entry_capital,
        capital_target=entry_capital,
        output_inventory=0.0,
        price=parent.price,
        wage=parent.wage,
        monitoring_radius=failed.monitoring_radius,
        genome=genome,
        generation=failed.generation + 1,
    )


def replace_failed(firms, step, rng,
                   entry_money=10.0,
                   entry_capital=5.0,
                   establishment_steps=ESTABLISHMENT_STEPS,
                   cap=REPLACEMENT_CAP,
                   failure_money=FAILURE_MONEY,
                   sigma=SIGMA_INITIAL):
    """
    Replaces up to `floor(cap * len(firms))` failed firms, lowest
    fitness first, with offspring of fitness-proportionally drawn
    surviving parents. Offspring take the failed firm's slot (id,
    location, sector, trophic level and suppliers), a mutated copy of
    the parent genome, the parent's price and wage, and the entry
    endowment. Does nothing during the establishment period or when no
    firm survived.

    `firms` is updated in place; returns `(firms, ReplacementReport)`.
    The report carries the entry money injected and the residual money
    removed with the replaced firms.
    """
    report = ReplacementReport()
    if step <= establishment_steps:
        return firms, report
    scores = {firm.id: firm_fitness(firm) for firm in firms}
    failed = [f for f in firms if is_failed(f, failure_money=failure_money)]
    report.failed = [f.id for f in failed]
    if not failed:
        return firms, report
    failed_ids = set(report.failed)
    survivors = [f for f in firms if f.id not in failed_ids]
    if not survivors:
        logger.warning(f"Step {step}: {len(failed)} failed firms but no surviving parent")
        return firms, report

    weights = np.array([scores[f.id] for f in survivors], dtype=float)
    if weights.sum() > 0:
        probabilities = weights / weights.sum()
    else:
        probabilities = np.full(len(survivors), 1.0 / len(survivors))

    limit = int(math.floor(cap * len(firms)))
    queue = sorted(failed, key=lambda f: (scores[f.id], f.id))[:limit]
    index_of = {f.id: index for index, f in enumerate(firms)}
    for dead in queue:
        parent = survivors[int(rng.choice(len(survivors), p=probabilities))]
        child = _spawn(dead, parent, rng, entry_money, entry_capital, sigma)
        firms[index_of[dead.id]] = child
        report.replaced.append(dead.id)
        report.entry_money += entry_money
        report.removed_money += dead.money
        logger.debug(
            f"Step {step}: replaced firm {dead.id} (money {dead.money:.4g}, "
            f"fitness {scores[dead.id]:.4g}) with offspring of firm {parent.id}")
    return firms, report
