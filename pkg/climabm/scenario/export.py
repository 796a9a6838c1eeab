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
climabm scenario export:

Files written for a run and for a comparison:

* `metrics.csv`: one row per step, columns in `climabm.engine.COLUMNS`
order (header only for an empty run)
* `summary.json`: final-step values and run aggregates
* `manifest.conf`: the run manifest (config snapshot, seed, timestamps,
outputs, input digests, version) in INI form
* `summary.csv` / `summary.xlsx`: the per-seed comparison table

`metrics.csv` and `summary.json` depend only on the config and seed;
`manifest.conf` carries wall-clock timestamps.
"""
import os
import json
import math
import configparser

import numpy as np
import openpyxl
import pandas as pd

from climabm import __version__
from climabm.engine import metrics_dataframe
from climabm.hashes import digest_files
from climabm.logging import logged

__all__ = [
    "METRICS_FILE", "SUMMARY_FILE", "MANIFEST_FILE", "FLOAT_FORMAT",
    "summarize", "write_metrics", "write_manifest", "write_summary_table",
]

METRICS_FILE = "metrics.csv"
SUMMARY_FILE = "summary.json"
MANIFEST_FILE = "manifest.conf"
FLOAT_FORMAT = "%.12g"


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _plain(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def summarize(series):
    """
    Final-step values plus run aggregates. An empty series gives
    `{"steps": 0, "final": None, "aggregates": {}}`.
    """
    if not series:
        return {"steps": 0, "final": None, "aggregates": {}}
    final = series[-1]
    aggregates = {
        "mean_final_price": final.mean_price,
        "mean_production": float(np.mean([f.mean_production for f in series])),
        "mean_price": float(np.mean([f.mean_price for f in series])),
        "mean_unemployment_rate": float(np.mean([f.unemployment_rate for f in series])),
        "total_failed": int(sum(f.failed_firms for f in series)),
        "total_replaced": int(sum(f.replaced_firms for f in series)),
        "total_relocations": int(sum(f.relocations for f in series)),
        "total_capital_sink": math.fsum(f.capital_sink for f in series),
        "total_entry_source": math.fsum(f.entry_source for f in series),
        "total_removal_sink": math.fsum(f.removal_sink for f in series),
        "max_abs_ledger_imbalance": max(abs(f.ledger_imbalance) for f in series),
    }
    return {
        "steps": len(series),
        "final": {k: _plain(v) for k, v in final.as_dict().items()},
        "aggregates": aggregates,
    }


@logged("scenario")
def write_metrics(series, out_dir):
    """
    Writes `metrics.csv` and `summary.json` into `out_dir` (created if
    needed) and returns their paths.
    """
    _ensure_dir(out_dir)
    csv_path = os.path.join(out_dir, METRICS_FILE)
    json_path = os.path.join(out_dir, SUMMARY_FILE)
    metrics_dataframe(series).to_csv(
        csv_path, index=False, lineterminator="\n", float_format=FLOAT_FORMAT)
    with open(json_path, "w", newline="\n") as fout:
        json.dump(summarize(series), fout, sort_keys=True, indent=2)
        fout.write("\n")
    return csv_path, json_path


def write_manifest(out_dir, config, started, finished, outputs, inputs=()):
    """
    Writes `manifest.conf`: the run's config snapshot, seed, start and
    end timestamps (`climabm.timestamp.Timestamp`), output paths and
    the sha256 digests of `inputs`.
    """
    _ensure_dir(out_dir)
    manifest = configparser.ConfigParser(interpolation=None)
    manifest["run"] = {
        "version": __version__,
        "seed": str(config.seed),
        "started": started.iso,
        "finished": finished.iso,
        "elapsed_seconds": "{:.3f}".format(started.elapsed(finished)),
    }
    manifest["config"] = {
        key: "" if value is None else str(value)
        for key, value in config.snapshot().items()
    }
    manifest["outputs"] = {
        "output_{}".format(index): path for index, path in enumerate(outputs)}
    manifest["inputs"] = digest_files([p for p in inputs if p])
    path = os.path.join(out_dir, MANIFEST_FILE)
    with open(path, "w") as fout:
        manifest.write(fout)
    return path


def write_summary_table(rows, out_dir, sheet_title="Comparison"):
    """
    Writes the comparison table (a list of `dict`s sharing keys) as
    `summary.csv` and `summary.xlsx`; returns both paths.
    """
    _ensure_dir(out_dir)
    frame = pd.DataFrame(rows)
    csv_path = os.path.join(out_dir, "summary.csv")
    xlsx_path = os.path.join(out_dir, "summary.xlsx")
    frame.to_csv(csv_path, index=False, lineterminator="\n", float_format=FLOAT_FORMAT)
    wb = openpyxl.Workbook()
    ws = wb.active
    ws.title = sheet_title
    ws.append(list(frame.columns))
    for row in frame.itertuples(index=False):
        ws.append([_plain(value) for value in row])
    wb.save(xlsx_path)
    return csv_path, xlsx_path
