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
climabm scenario:

Scenario files, run orchestration and the `climabm` command line.

A scenario file is a flat `key = value` file; every key is a
`climabm.engine.ScenarioConfig` field. A `[scenario]` header is
optional, `#` and `;` start comments. Values are layered:

1. `ScenarioConfig` defaults
2. `$CLIMABM_HOME/etc/default/scenario.conf` then
`$CLIMABM_HOME/etc/local/scenario.conf` (section `[scenario]`)
3. the scenario file
4. command line flags

`hazard_epochs` takes comma separated `start_step:path` pairs, for
example `hazard_epochs = 0:rcp85_2030.grid, 120:rcp85_2050.grid`.
Relative input paths are resolved against the directory of the file
declaring them.

Sub-commands:

* `run`: one scenario, writes metrics, summary, manifest and charts
* `compare`: baseline and hazard (optionally without evolution) over
several seeds, writes per-run metrics, seed-averaged charts and a
summary table
* `validate`: parse the scenario and load its inputs
* `make-grid`: write a synthetic flood grid file
"""
import os
import sys
import queue
import configparser
from threading import Thread
from dataclasses import dataclass, fields, replace

import numpy as np
import pandas as pd

from climabm.cli import Cli
from climabm.config import (
    CLIMABM_HOME, FALSE_VALUES, TRUE_VALUES, ConfigError, get_config,
)
from climabm.engine import ConservationError, ScenarioConfig, load_schedule, metrics_dataframe, run
from climabm.hazard import (
    DEFAULT_RETURN_PERIODS, HazardDataError, ImpactCurve, ImpactCurveError,
    load_impact_curve, synthetic_flood_grid, write_hazard_dataset,
)
from climabm.logging import make_logger, logged
from climabm.pprint import print_table, status_line
from climabm.timestamp import Timestamp
from .charts import EmptySeriesError, emit_charts
from .export import write_manifest, write_metrics, write_summary_table

__all__ = [
    "CONFIG_FIELDS", "SCENARIOS", "RunResult", "parse_config",
    "output_directory", "execute", "run_jobs", "comparison_rows", "cli",
    "main",
]

CONFIG_FIELDS = {f.name: f for f in fields(ScenarioConfig)}
PATH_KEYS = ("grid_path", "impact_curve_path")
SECTION = "scenario"
MID_HORIZON_FRACTION = 0.375
SCENARIOS = (
    ("baseline", {"hazard_enabled": False}),
    ("hazard", {"hazard_enabled": True}),
    ("no_evolution", {"hazard_enabled": True, "evolution_enabled": False}),
)
DIAGNOSTIC_ERRORS = (
    ConfigError, HazardDataError, ImpactCurveError, ConservationError,
    EmptySeriesError, OSError,
)

logger = make_logger("scenario")
cli = Cli(
    description="Spatial agent-based simulation of a climate-exposed economy",
    prog="climabm")


def _has_header(text):
    for line in text.splitlines():
        line = line.strip()
        if not line or line[0] in "#;":
            continue
        return line.startswith("[")
    return False


def _resolve(path, base_dir):
    if os.path.isabs(path):
        return path
    return os.path.normpath(os.path.join(base_dir, path))


def _parse_epochs(key, raw, base_dir):
    epochs = []
    for item in raw.replace("\n", ",").split(","):
        item = item.strip()
        if not item:
            continue
        start, sep, path = item.partition(":")
        if not sep or not path.strip():
            raise ConfigError("{}: expected start_step:path, got {!r}".format(key, item))
        try:
            start = int(start)
        except ValueError:
            raise ConfigError("{}: start step must be an integer, got {!r}".format(key, item))
        epochs.append((start, _resolve(path.strip(), base_dir)))
    return epochs


def _convert(key, raw, base_dir):
    """Coerces one raw value to the type of the `ScenarioConfig` field `key`."""
    kind = CONFIG_FIELDS[key].type
    raw = raw.strip()
    if kind is bool:
        if raw.lower() in TRUE_VALUES:
            return True
        if raw.lower() in FALSE_VALUES:
            return False
        raise ConfigError("{}: expected a boolean, got {!r}".format(key, raw))
    if kind is int:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError("{}: expected an integer, got {!r}".format(key, raw))
    if kind is float:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError("{}: expected a number, got {!r}".format(key, raw))
    if kind is list:
        return _parse_epochs(key, raw, base_dir)
    if raw.lower() in ("", "none"):
        return None
    if key in PATH_KEYS:
        return _resolve(raw, base_dir)
    return raw


def _layer(values, parser, base_dir, source):
    for section in parser.sections():
        if section != SECTION:
            raise ConfigError("{}: unknown section [{}]".format(source, section))
    if not parser.has_section(SECTION):
        return values
    for key, raw in parser.items(SECTION):
        if key not in CONFIG_FIELDS:
            raise ConfigError("{}: unknown key {!r}".format(source, key))
        values[key] = _convert(key, raw, base_dir)
    return values


@logged("scenario")
def parse_config(path=None, overrides=None, base_dir=None):
    """
    Returns the validated `ScenarioConfig` for the scenario file at
    `path` layered over the site configuration (`base_dir` overrides
    `$CLIMABM_HOME/etc`) and under `overrides`, a `dict` of already
    typed values. Without `path` only the site configuration and
    `overrides` apply.

    Raises `ConfigError` naming the offending key for unknown keys,
    unparsable values and invalid settings, and for a missing file.
    """
    values = {}
    _layer(values, get_config("scenario.conf", base_dir=base_dir), CLIMABM_HOME,
           "site scenario.conf")
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigError("config: no such file {!r}".format(path))
        with open(path) as fin:
            text = fin.read()
        if not _has_header(text):
            text = "[{}]\n{}".format(SECTION, text)
        parser = configparser.ConfigParser(
            interpolation=None, inline_comment_prefixes=("#", ";"))
        try:
            parser.read_string(text, source=path)
        except configparser.Error as e:
            raise ConfigError("{}: {}".format(path, " ".join(str(e).split())))
        _layer(values, parser, os.path.dirname(os.path.abspath(path)), path)
    for key, value in (overrides or {}).items():
        if key not in CONFIG_FIELDS:
            raise ConfigError("unknown key {!r}".format(key))
        values[key] = value
    return ScenarioConfig(**values).validate()


def output_directory(*parts):
    """`$CLIMABM_OUT` (default `./climabm-out`) joined with `parts`."""
    root = os.environ.get("CLIMABM_OUT", os.path.join(os.getcwd(), "climabm-out"))
    return os.path.join(root, *parts)


def _input_files(config, config_path=None):
    paths = [config_path, config.grid_path, config.impact_curve_path]
    paths.extend(path for _, path in config.hazard_epochs)
    return [p for p in paths if p]


@dataclass
class RunResult:
    label: str
    seed: int
    series: list
    state: object
    paths: list


@logged("scenario")
def execute(config, out_dir, label=None, charts=True, config_path=None):
    """
    Runs one scenario and writes its outputs into `out_dir`. Charts are
    skipped for an empty run or when `charts` is false.
    """
    label = label or ("hazard" if config.hazard_enabled else "baseline")
    started = Timestamp()
    series, state = run(config)
    paths = list(write_metrics(series, out_dir))
    if charts and series:
        paths.extend(emit_charts({label: series}, os.path.join(out_dir, "charts")))
    paths.append(write_manifest(
        out_dir, config, started, Timestamp(), paths, _input_files(config, config_path)))
    logger.info(f"Run {label} seed {config.seed}: {len(series)} steps written to {out_dir}")
    return RunResult(label, config.seed, series, state, paths)


def _worker(jobs, results, out_dir):
    while True:
        try:
            label, config = jobs.get_nowait()
        except queue.Empty:
            return
        run_dir = os.path.join(out_dir, label, "seed-{}".format(config.seed))
        try:
            results.put((label, config.seed, execute(config, run_dir, label, charts=False)))
        except Exception as e:
            logger.exception(f"Run {label} seed {config.seed} failed")
            results.put((label, config.seed, e))


def run_jobs(jobs, out_dir, workers=1):
    """
    Executes `(label, config)` jobs on `workers` threads, each run
    writing under `out_dir/<label>/seed-<seed>`. Returns a `dict`
    keyed by `(label, seed)`; the first failure (in job order) is
    re-raised once all threads have finished.
    """
    pending = queue.Queue()
    for job in jobs:
        pending.put(job)
    results = queue.Queue()
    threads = [
        Thread(target=_worker, args=(pending, results, out_dir))
        for _ in range(max(1, min(int(workers), len(jobs))))
    ]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    collected = {}
    while not results.empty():
        label, seed, result = results.get()
        collected[(label, seed)] = result
    for label, config in jobs:
        result = collected[(label, config.seed)]
        if isinstance(result, Exception):
            raise result
    return collected


def _ratio(numerator, denominator):
    if denominator == 0:
        return float("nan")
    return numerator / denominator


def comparison_rows(results, seeds, ablation=False):
    """
    One row per seed comparing the hazard run with the baseline (and
    with the no-evolution run under `ablation`), followed by a `mean`
    row.
    """
    rows = []
    for seed in seeds:
        baseline = results[("baseline", seed)].series
        hazard = results[("hazard", seed)].series
        mid = max(1, int(round(len(baseline) * MID_HORIZON_FRACTION)))
        row = {
            "seed": seed,
            "mid_step": mid,
            "baseline_final_price": baseline[-1].mean_price,
            "hazard_final_price": hazard[-1].mean_price,
            "price_ratio": _ratio(hazard[-1].mean_price, baseline[-1].mean_price),
            "baseline_mid_production": baseline[mid - 1].mean_production,
            "hazard_mid_production": hazard[mid - 1].mean_production,
            "mid_production_gap": baseline[mid - 1].mean_production - hazard[mid - 1].mean_production,
            "baseline_final_production": baseline[-1].mean_production,
            "hazard_final_production": hazard[-1].mean_production,
        }
        if ablation:
            frozen = results[("no_evolution", seed)].series
            row["no_evolution_final_production"] = frozen[-1].mean_production
            row["evolution_production_ratio"] = _ratio(
                hazard[-1].mean_production, frozen[-1].mean_production)
        rows.append(row)
    if rows:
        mean = {"seed": "mean"}
        for key in rows[0]:
            if key != "seed":
                mean[key] = float(np.nanmean([row[key] for row in rows]))
        rows.append(mean)
    return rows


def _seed_average(results, label, seeds):
    frames = [metrics_dataframe(results[(label, seed)].series) for seed in seeds]
    return pd.concat(frames).groupby("step", as_index=False).mean()


@cli.command("run", category="scenarios")
def run_command(config=None, seed=None, no_hazard=False, no_evolution=False, out=None):
    """Run one scenario and write its metrics, summary, manifest and charts.

Parameters:

* `-c, --config`: The scenario file. Without it the defaults and the
site `scenario.conf` apply
* `-s, --seed`: Overrides the scenario seed
* `-n, --no-hazard`: Disable hazards (an all-zero hazard field every step)
regardless of the scenario file
* `-N, --no-evolution`: Disable mutation and replacement of firms
* `-o, --out`: The output directory. Defaults to `out_dir` from the
scenario or `$CLIMABM_OUT/run-seed-<seed>`"""
    overrides = {}
    if seed is not None:
        try:
            overrides["seed"] = int(seed)
        except ValueError:
            raise ConfigError("seed: expected an integer, got {!r}".format(seed))
    if no_hazard:
        overrides["hazard_enabled"] = False
    if no_evolution:
        overrides["evolution_enabled"] = False
    scenario = parse_config(config, overrides)
    out_dir = out or scenario.out_dir or output_directory("run-seed-{}".format(scenario.seed))
    result = execute(scenario, out_dir, config_path=config)
    for path in result.paths:
        status_line("Wrote {}".format(path))


@cli.command("compare", category="scenarios")
def compare(config=None, seeds=5, out=None, workers=1, ablation=False):
    """Run the baseline and hazard scenarios over several seeds and compare them.

Seeds run from the scenario seed upwards. Every run writes its own
directory `<out>/<scenario>/seed-<seed>`; seed-averaged charts go to
`<out>/charts` and the comparison table to `<out>/summary.csv` and
`<out>/summary.xlsx`.

Parameters:

* `-c, --config`: The scenario file
* `-s, --seeds`: The number of seeds
* `-o, --out`: The output directory, defaults to `$CLIMABM_OUT/compare`
* `-w, --workers`: The number of runs executed in parallel
* `-a, --ablation`: Also run the hazard scenario without evolution"""
    if seeds < 1:
        raise ConfigError("seeds: must be at least 1 (got {})".format(seeds))
    base = parse_config(config)
    out_dir = out or base.out_dir or output_directory("compare")
    seed_list = list(range(base.seed, base.seed + seeds))
    scenarios = SCENARIOS if ablation else SCENARIOS[:2]
    jobs = [
        (label, replace(base, seed=seed, **overrides))
        for seed in seed_list
        for label, overrides in scenarios
    ]
    logger.info(f"Comparing {len(jobs)} runs on {workers} worker(s) into {out_dir}")
    results = run_jobs(jobs, out_dir, workers)
    rows = comparison_rows(results, seed_list, ablation)
    csv_path, xlsx_path = write_summary_table(rows, out_dir)
    emit_charts(
        {label: _seed_average(results, label, seed_list) for label, _ in scenarios},
        os.path.join(out_dir, "charts"))

    columns = ["seed", "price_ratio", "mid_production_gap", "hazard_final_production"]
    if ablation:
        columns.append("evolution_production_ratio")
    print_table(
        [columns] + [[row[c] for c in columns] for row in rows],
        title="Hazard vs baseline over {} seed(s)".format(seeds))
    print()
    status_line("Mean hazard/baseline final price ratio: {:.4f}".format(rows[-1]["price_ratio"]))
    status_line("Wrote {} and {}".format(csv_path, xlsx_path))


@cli.command("validate", category="scenarios")
def validate(config=None):
    """Parse a scenario and load its hazard grids and impact curve without
running it. Prints `OK` on success.

Parameters:

* `-c, --config`: The scenario file"""
    scenario = parse_config(config)
    schedule = load_schedule(replace(scenario, hazard_enabled=True))
    if scenario.impact_curve_path:
        load_impact_curve(scenario.impact_curve_path)
    else:
        ImpactCurve.default()
    grid = schedule.reference
    logger.info(
        f"Validated {config}: {len(schedule.epochs)} hazard epoch(s) on a "
        f"{grid.width}x{grid.height} grid")
    status_line("OK")


@cli.command("make-grid", category="inputs")
def make_grid(out=None, width=50, height=50, seed=0, hotspots=3):
    """Write a synthetic riverine flood grid in the hazard grid file format.

Parameters:

* `-o, --out`: The file to write
* `-w, --width`: Cells along x
* `-H, --height`: Cells along y
* `-s, --seed`: Seed for the hotspot locations
* `--hotspots`: Number of flood channel hotspots"""
    if not out:
        raise ConfigError("out: an output file is required")
    grid = synthetic_flood_grid(
        width, height, DEFAULT_RETURN_PERIODS, np.random.default_rng(seed), n_hotspots=hotspots)
    directory = os.path.dirname(os.path.abspath(out))
    os.makedirs(directory, exist_ok=True)
    write_hazard_dataset(grid, out)
    status_line("Wrote {} ({}x{}, max depth {:.3g} m)".format(
        out, grid.width, grid.height, grid.max_intensity))


def main(argv=None):
    """
    Runs the command line and returns its exit code: 0 on success, 1
    with a one-line diagnostic on stderr for invalid scenarios, input
    files, failed audits and unwritable outputs. Usage errors exit 2.
    """
    try:
        return cli.run(argv)
    except DIAGNOSTIC_ERRORS as e:
        message = " ".join(str(e).split()) or type(e).__name__
        sys.stderr.write("climabm: error: {}\n".format(message))
        return 1
