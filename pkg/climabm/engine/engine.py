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
climabm engine:

World construction and the fixed per-step phase schedule.

A `ScenarioConfig` fully determines a run: `init_world` builds the
world from it and `step` advances it one quarter through these phases,
always in this order:

1. sample the hazard field (a zero field when hazards are disabled)
2. damage firms at their cells
3. recover productivity of firms not damaged this step
4. relocate households out of hazardous neighborhoods
5. raise capital targets from the hazard seen within each firm's radius
6. allocate budgets
7. clear the labor market
8. procure inputs, lower trophic levels first
9. produce
10. clear the goods market
11. buy capital (money leaves the economy)
12. adjust prices and wages
13. record performance and mutate strategies
14. replace failed firms
15. collect metrics and audit money conservation

Randomness comes from four generators spawned from the seed, one per
subsystem (init, hazard, markets, evolution), so disabling hazards
leaves market and evolution draws untouched.

Usage:

    :::python
    from climabm.engine import ScenarioConfig, run

    series, state = run(ScenarioConfig(seed=7, steps=40))
    print(series[-1].mean_price)
"""
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from climabm.agents import (
    Firm, Household, LeontiefCoefficients, LimitingFactor, RADIUS_RANGE,
    DISTANCE_COST_RANGE, Sector, StrategyGenome, allocate_budget,
    apply_damage, household_maybe_relocate, leontief_output,
    purchase_capital, recover_productivity, update_capital_target,
)
from climabm.config import ConfigError
from climabm.evolution import (
    SIGMA_INITIAL, firm_fitness, is_failed, mutate, replace_failed,
    select_sigma, should_mutate,
)
from climabm.hazard import (
    HazardField, HazardGrid, HazardSchedule, ImpactCurve, damage_ratio,
    load_hazard_dataset, load_impact_curve, neighborhood_peak,
    sample_step_hazard,
)
from climabm.logging import make_logger, logged
from climabm.markets import (
    CAPITAL, EXTERNAL, Ledger, Transaction, adjust_price, adjust_wage,
    clear_goods_market, clear_labor_market, has_market_signal,
    procure_all_inputs, target_inventory, total_money, vacancy_ratio,
)
from .metrics import collect_metrics
from .network import assign_trophic_levels, build_supply_chain, link_suppliers

__all__ = [
    "ScenarioConfig", "RngStreams", "WorldState", "ConservationError",
    "load_schedule", "place_firms", "init_world", "step", "run",
]

STREAM_NAMES = ("init", "hazard", "markets", "evolution")
PLACEMENT_QUANTILES = (0.9, 0.75)
PROGRESS_FRACTION = 0.1

logger = make_logger("engine")


class ConservationError(RuntimeError):
    """
    Raised when the money ledger of a step does not balance. `dump`
    holds the diagnostic state of the offending step.
    """
    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}


@dataclass
class ScenarioConfig:
    """
    Everything a run depends on. Paths are taken as given; relative
    paths are resolved by `climabm.scenario.parse_config`.

    Without `grid_path` or `hazard_epochs` the world is a hazard-free
    `grid_width` x `grid_height` grid. `hazard_epochs` is a list of
    `(start_step, path)` pairs and takes precedence over `grid_path`.
    """
    grid_path: str = None
    hazard_epochs: list = field(default_factory=list)
    impact_curve_path: str = None
    grid_width: int = 50
    grid_height: int = 50
    steps: int = 320
    dt_years: float = 0.25
    start_year: float = 2020.0
    n_firms: int = 15
    n_households: int = 75
    commodity_fraction: float = 0.4
    suppliers_per_manufacturer: int = 2
    hazard_enabled: bool = True
    evolution_enabled: bool = True
    seed: int = 42
    a_labor: float = 1.0
    a_capital: float = 2.0
    a_input: float = 1.0
    firm_money: float = 400.0
    firm_capital: float = 10.0
    firm_inventory: float = 5.0
    firm_input_inventory: float = 5.0
    firm_price: float = 1.0
    firm_wage: float = 1.0
    household_money: float = 80.0
    recovery_steps: int = 4
    spend_fraction: float = 0.8
    capital_price: float = 1.0
    capital_target_multiple: float = 1.5
    relocation_threshold: float = 0.1
    entry_money: float = 40.0
    entry_capital: float = 5.0
    establishment_steps: int = 5
    replacement_cap: float = 0.25
    mutation_interval: int = 5
    mutation_probability: float = 0.3
    failure_money: float = 1.0
    audit_tolerance: float = 1e-9
    out_dir: str = None

    @property
    def n_commodity(self):
        return max(1, int(math.floor(self.n_firms * self.commodity_fraction)))

    @property
    def n_manufacturer(self):
        return self.n_firms - self.n_commodity

    @property
    def coefficients(self):
        return LeontiefCoefficients(self.a_labor, self.a_capital, self.a_input)

    def validate(self):
        """Raises `ConfigError` naming the first offending key."""
        def check(condition, key, message):
            if not condition:
                raise ConfigError("{}: {} (got {!r})".format(key, message, getattr(self, key)))

        check(isinstance(self.steps, int) and self.steps > 0, "steps", "must be a positive integer")
        check(self.dt_years > 0, "dt_years", "must be positive")
        check(self.n_firms >= 2, "n_firms", "must be at least 2")
        check(self.n_households >= 1, "n_households", "must be at least 1")
        check(0.0 <= self.commodity_fraction <= 1.0, "commodity_fraction", "must be in [0, 1]")
        check(self.n_manufacturer >= 1, "commodity_fraction", "leaves no manufacturer")
        check(self.suppliers_per_manufacturer >= 1, "suppliers_per_manufacturer", "must be at least 1")
        check(isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64, "seed", "must be a 64-bit unsigned integer")
        check(self.grid_width >= 1, "grid_width", "must be at least 1")
        check(self.grid_height >= 1, "grid_height", "must be at least 1")
        for key in ("a_labor", "a_capital", "a_input", "capital_price"):
            check(getattr(self, key) > 0, key, "must be positive")
        for key in ("firm_money", "firm_capital", "firm_inventory", "firm_input_inventory",
                    "household_money", "entry_money", "entry_capital", "failure_money"):
            check(getattr(self, key) >= 0, key, "must not be negative")
        for key in ("firm_price", "firm_wage"):
            check(getattr(self, key) > 0, key, "must be positive")
        for key in ("spend_fraction", "relocation_threshold", "replacement_cap",
                    "mutation_probability"):
            check(0.0 <= getattr(self, key) <= 1.0, key, "must be in [0, 1]")
        check(self.capital_target_multiple >= 1.0, "capital_target_multiple", "must be at least 1")
        check(self.recovery_steps >= 0, "recovery_steps", "must not be negative")
        check(self.establishment_steps >= 0, "establishment_steps", "must not be negative")
        check(self.mutation_interval >= 1, "mutation_interval", "must be at least 1")
        check(self.audit_tolerance > 0, "audit_tolerance", "must be positive")
        for epoch in self.hazard_epochs:
            if len(epoch) != 2 or int(epoch[0]) < 0:
                raise ConfigError("hazard_epochs: expected (start_step, path) pairs, got {!r}".format(epoch))
        return self

    def snapshot(self):
        """Plain-value copy for manifests."""
        return asdict(self)


@dataclass
class RngStreams:
    init: np.random.Generator
    hazard: np.random.Generator
    markets: np.random.Generator
    evolution: np.random.Generator

    @classmethod
    def from_seed(cls, seed):
        children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
        return cls(*(np.random.default_rng(child) for child in children))


@dataclass
class WorldState:
    config: ScenarioConfig
    schedule: HazardSchedule
    curve: ImpactCurve
    firms: list
    households: list
    rngs: RngStreams
    supply_chain: object
    step: int = 0
    hazard: HazardField = None
    ledger: Ledger = None
    metrics: list = field(default_factory=list)

    @property
    def grid(self):
        return self.schedule.grid_at(self.step)

    @property
    def total_money(self):
        return total_money(self.firms, self.households)


def load_schedule(config):
    """The hazard schedule for `config`, zeroed when hazards are disabled."""
    if config.hazard_epochs:
        schedule = HazardSchedule([
            (int(start), load_hazard_dataset(path)) for start, path in config.hazard_epochs])
    elif config.grid_path:
        schedule = HazardSchedule.single(load_hazard_dataset(config.grid_path))
    else:
        schedule = HazardSchedule.single(HazardGrid.zeros(config.grid_width, config.grid_height))
    if not config.hazard_enabled:
        schedule = schedule.zeroed()
    return schedule


def place_firms(grid, n, rng):
    """
    Draws `n` distinct cells for firms, uniformly among the top decile
    of the reference (100-year) layer. Falls back to the top quartile
    and then the whole grid, with a warning, when there are too few
    such cells. A hazard-free grid gives uniform placement.
    """
    height, width = grid.shape
    if n > width * height:
        raise ConfigError("n_firms: {} firms do not fit on a {}x{} grid".format(n, width, height))
    reference = grid.reference_layer()
    candidates = None
    if reference.max() > 0:
        for quantile in PLACEMENT_QUANTILES:
            threshold = np.quantile(reference, quantile)
            cells = np.argwhere((reference >= threshold) & (reference > 0))
            if len(cells) >= n:
                candidates = cells
                break
            logger.warning(
                f"Only {len(cells)} cells at the {quantile:.2f} intensity quantile "
                f"for {n} firms, widening placement")
    if candidates is None:
        candidates = np.argwhere(np.ones(grid.shape, dtype=bool))
    chosen = rng.choice(len(candidates), size=n, replace=False)
    return [(int(candidates[i][1]), int(candidates[i][0])) for i in chosen]


def _initial_genome(rng):
    mask = np.zeros(len(StrategyGenome.PARAMETERS), dtype=bool)
    mask[:3] = True
    return mutate(StrategyGenome(), mask, SIGMA_INITIAL, rng)


def _make_households(config, grid, levels, rng):
    n_commodity = int(math.floor(config.n_households * config.n_commodity / config.n_firms))
    households = []
    for index in range(config.n_households):
        sector = Sector.COMMODITY if index < n_commodity else Sector.MANUFACTURER
        location = (int(rng.integers(0, grid.width)), int(rng.integers(0, grid.height)))
        radius = int(rng.integers(RADIUS_RANGE[0], RADIUS_RANGE[1] + 1))
        cost = float(rng.uniform(*DISTANCE_COST_RANGE))
        size = 2 if len(levels) <= 2 else int(rng.integers(2, 4))
        chosen = rng.choice(levels, size=size, replace=False)
        households.append(Household(
            id=index,
            location=location,
            sector=sector,
            money=config.household_money,
            monitoring_radius=radius,
            consumption_levels=tuple(int(level) for level in chosen),
            distance_cost=cost,
        ))
    return households


@logged("engine")
def init_world(config):
    """
    Builds the initial `WorldState`: firms on high-hazard cells of the
    first hazard epoch, commodity firms first (ids `0..n_commodity-1`),
    each manufacturer linked to distinct commodity suppliers, and
    households placed uniformly with sectors in proportion to firm
    counts.
    """
    config.validate()
    schedule = load_schedule(config)
    curve = load_impact_curve(config.impact_curve_path) if config.impact_curve_path else ImpactCurve.default()
    rngs = RngStreams.from_seed(config.seed)
    rng = rngs.init
    grid = schedule.reference

    firms = []
    for index, location in enumerate(place_firms(grid, config.n_firms, rng)):
        sector = Sector.COMMODITY if index < config.n_commodity else Sector.MANUFACTURER
        firms.append(Firm(
            id=index,
            location=location,
            sector=sector,
            money=config.firm_money,
            capital=config.firm_capital,
            capital_target=config.firm_capital,
            output_inventory=config.firm_inventory,
            price=config.firm_price,
            wage=config.firm_wage,
            monitoring_radius=int(rng.integers(RADIUS_RANGE[0], RADIUS_RANGE[1] + 1)),
            genome=_initial_genome(rng),
        ))
    link_suppliers(firms, config.suppliers_per_manufacturer, rng, config.firm_input_inventory)
    graph = build_supply_chain(firms)
    levels = sorted(set(assign_trophic_levels(graph, firms).values()))
    households = _make_households(config, grid, levels, rng)

    logger.info(
        f"World: {config.n_commodity} commodity firms, {config.n_manufacturer} "
        f"manufacturers, {len(households)} households on a {grid.width}x{grid.height} "
        f"grid, seed {config.seed}")
    return WorldState(
        config=config,
        schedule=schedule,
        curve=curve,
        firms=firms,
        households=households,
        rngs=rngs,
        supply_chain=graph,
    )


def _dump(state, ledger, money_before, money_after, imbalance, tolerance):
    return {
        "step": state.step,
        "money_before": money_before,
        "money_after": money_after,
        "imbalance": imbalance,
        "tolerance": tolerance,
        "entry_source": ledger.entry_source,
        "capital_sink": ledger.capital_sink,
        "removal_sink": ledger.removal_sink,
        "transactions": len(ledger.transactions),
        "firms": {f.uid: f.money for f in state.firms},
        "households": {h.uid: h.money for h in state.households},
    }


def _audit(state, ledger, money_before, money_after):
    imbalance = ledger.imbalance(money_before, money_after)
    n_agents = len(state.firms) + len(state.households)
    tolerance = max(
        state.config.audit_tolerance,
        n_agents * float(np.spacing(max(abs(money_before), abs(money_after)))))
    if not abs(imbalance) <= tolerance:
        dump = _dump(state, ledger, money_before, money_after, imbalance, tolerance)
        logger.critical(f"Money ledger does not balance: {dump}")
        raise ConservationError(
            "step {}: money ledger imbalance {:.3e} exceeds {:.3e}".format(
                state.step, imbalance, tolerance),
            dump)
    return imbalance


def step(state):
    """Advances `state` by one step in place and returns it."""
    config = state.config
    rngs = state.rngs
    state.step += 1
    current = state.step
    grid = state.schedule.grid_at(current)
    firms, households = state.firms, state.households
    ledger = Ledger(current)
    money_before = total_money(firms, households)

    for firm in firms:
        firm.sales = 0.0
        if config.evolution_enabled:
            firm.active = not is_failed(firm, failure_money=config.failure_money)

    # 1-2
    if config.hazard_enabled:
        hazard = sample_step_hazard(grid, config.dt_years, rngs.hazard, current)
    else:
        hazard = HazardField.zeros(grid, current)
    state.hazard = hazard
    damage = {}
    for firm in firms:
        damage[firm.id] = damage_ratio(state.curve, hazard.at(firm.location))
        apply_damage(firm, damage[firm.id], config.recovery_steps)

    # 3
    for firm in firms:
        if firm.last_damage == 0.0:
            recover_productivity(firm)

    # 4
    relocations = sum(h.relocations for h in households)
    for h in households:
        household_maybe_relocate(h, hazard, grid, rngs.hazard, config.relocation_threshold)
    relocations = sum(h.relocations for h in households) - relocations

    # 5-6
    active = [f for f in firms if f.active]
    for firm in active:
        update_capital_target(
            firm, neighborhood_peak(hazard, firm.location, firm.monitoring_radius, grid),
            ceiling=config.capital_target_multiple * config.firm_capital)
        allocate_budget(firm)
    for firm in firms:
        if not firm.active:
            firm.labor_budget = firm.labor_budget_total = 0.0
            firm.input_budget = firm.capital_budget = 0.0

    # 7-10
    ledger.extend(clear_labor_market(households, firms, rngs.markets, current))
    ledger.extend(procure_all_inputs(firms, rngs.markets, current))
    for firm in firms:
        if firm.active:
            leontief_output(firm, config.coefficients)
        else:
            firm.labor_hired = 0.0
            firm.production = 0.0
            firm.limiting_factor = LimitingFactor.NONE
    ledger.extend(clear_goods_market(
        households, firms, rngs.markets, current, config.spend_fraction))

    # 11-12
    for firm in active:
        spent = purchase_capital(firm, config.capital_price)
        if spent > 0:
            ledger.capital_sink += spent
            ledger.transactions.append(Transaction(
                firm.uid, EXTERNAL, CAPITAL, spent / config.capital_price,
                config.capital_price, current))
    for firm in firms:
        firm.sales_history.append(firm.sales)
    for firm in active:
        # nothing made, sold or held: the price stands
        if has_market_signal(firm):
            adjust_price(firm, target_inventory(firm))
        adjust_wage(firm, vacancy_ratio(firm))

    # 13
    for firm in firms:
        firm.age += 1
        firm.memory.record_firm(firm)
    if config.evolution_enabled and current % config.mutation_interval == 0:
        for firm in firms:
            if not firm.active:
                continue
            score = firm_fitness(firm)
            firm.memory.fitness_history.append(score)
            sigma = select_sigma(firm.mutation_state, score)
            mask = should_mutate(
                current, rngs.evolution, config.mutation_probability, config.mutation_interval)
            firm.genome = mutate(firm.genome, mask, sigma, rngs.evolution)

    # 14
    if config.evolution_enabled:
        _, report = replace_failed(
            firms, current, rngs.evolution,
            entry_money=config.entry_money,
            entry_capital=config.entry_capital,
            establishment_steps=config.establishment_steps,
            cap=config.replacement_cap,
            failure_money=config.failure_money)
        ledger.entry_source += report.entry_money
        ledger.removal_sink += report.removed_money
        failed, replaced = report.failed, report.replaced
    else:
        failed = [f.id for f in firms if is_failed(f, failure_money=config.failure_money)]
        replaced = []

    # 15
    imbalance = _audit(state, ledger, money_before, total_money(firms, households))
    state.ledger = ledger
    state.metrics.append(collect_metrics(
        state, ledger, damage, failed, replaced, relocations, imbalance))
    logger.debug(
        f"Step {current}: {len(ledger.transactions)} transactions, "
        f"{len(failed)} failed, {len(replaced)} replaced")
    return state


@logged("engine")
def run(config, steps=None, progress=None):
    """
    Builds the world and runs it for `steps` steps (default
    `config.steps`). Progress is logged, and passed to the optional
    `progress(step, total)` callable, every 10% of the run.

    Returns `(metrics, state)`; with `steps=0` the metrics are empty
    and the state is the initial world.
    """
    state = init_world(config)
    total = config.steps if steps is None else int(steps)
    if total < 0:
        raise ConfigError("steps: must not be negative (got {})".format(total))
    every = max(1, int(math.ceil(total * PROGRESS_FRACTION)))
    for index in range(1, total + 1):
        step(state)
        if index % every == 0 or index == total:
            logger.info(f"Seed {config.seed}: step {index}/{total} ({100 * index // total}%)")
            if progress is not None:
                progress(index, total)
    return state.metrics, state
