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
climabm scenario charts:

Static line charts of one or more metric series, one image per panel:
production, firm money, labor supplied, price, wage, unemployment,
household money, and a production-bottleneck panel per scenario.
Sector panels overlay the commodity and manufacturer series of every
scenario. Rendering uses the non-interactive Agg backend.
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

from climabm.engine import metrics_dataframe
from climabm.logging import logged

__all__ = ["EmptySeriesError", "PANELS", "emit_charts"]

# (file stem, title, y label, columns); a `None` column list is the
# per-scenario bottleneck panel.
PANELS = (
    ("production", "Firm production", "units per firm",
     ("commodity_production", "manufacturer_production")),
    ("firm_money", "Firm money", "money per firm",
     ("commodity_firm_money", "manufacturer_firm_money")),
    ("labor", "Labor supplied", "units per household",
     ("commodity_labor", "manufacturer_labor")),
    ("price", "Price of goods", "price",
     ("commodity_price", "manufacturer_price")),
    ("wage", "Wage", "wage",
     ("commodity_wage", "manufacturer_wage")),
    ("unemployment", "Unemployment rate", "share of households",
     ("unemployment_rate",)),
    ("household_money", "Household money", "money per household",
     ("mean_household_money",)),
)
BOTTLENECK_COLUMNS = (
    ("share_labor_limited", "labor"),
    ("share_capital_limited", "capital"),
    ("share_input_limited", "input"),
)
SHORT_NAMES = {
    "commodity_production": "Com", "manufacturer_production": "Man",
    "commodity_firm_money": "Com", "manufacturer_firm_money": "Man",
    "commodity_labor": "Com", "manufacturer_labor": "Man",
    "commodity_price": "Com", "manufacturer_price": "Man",
    "commodity_wage": "Com", "manufacturer_wage": "Man",
}


class EmptySeriesError(ValueError):
    """Raised when there is nothing to chart."""


def _as_frame(series):
    if isinstance(series, pd.DataFrame):
        return series
    return metrics_dataframe(series)


def _normalize(series):
    if isinstance(series, dict):
        frames = {label: _as_frame(s) for label, s in series.items()}
    else:
        frames = {"baseline": _as_frame(series)}
    if not frames or any(frame.empty for frame in frames.values()):
        raise EmptySeriesError("empty series")
    return frames


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


@logged("scenario")
def emit_charts(series, out_dir, image_format="png"):
    """
    Writes one chart per panel into `out_dir` and returns the paths.

    `series` is either one metrics series (a list of `MetricsFrame`s or
    a `DataFrame`) or a `dict` of scenario label to series. Each
    scenario adds one bottleneck panel, so a baseline/hazard pair gives
    nine files and a single series eight.
    """
    frames = _normalize(series)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for stem, title, ylabel, columns in PANELS:
        fig, ax = plt.subplots(figsize=(7, 4))
        for label, frame in frames.items():
            tag = label[:1].upper()
            for column in columns:
                name = SHORT_NAMES.get(column)
                legend = "{}-{}".format(name, tag) if name else label
                ax.plot(frame["year"], frame[column], label=legend)
        ax.set_title(title)
        ax.set_xlabel("year")
        ax.set_ylabel(ylabel)
        ax.legend(loc="best", fontsize="small")
        paths.append(_save(fig, os.path.join(out_dir, "{}.{}".format(stem, image_format))))
    for label, frame in frames.items():
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.stackplot(
            frame["year"],
            *(frame[column] for column, _ in BOTTLENECK_COLUMNS),
            labels=[name for _, name in BOTTLENECK_COLUMNS])
        ax.set_ylim(0.0, 1.0)
        ax.set_title("Production bottlenecks ({})".format(label))
        ax.set_xlabel("year")
        ax.set_ylabel("share of firms")
        ax.legend(loc="upper right", fontsize="small")
        paths.append(_save(fig, os.path.join(
            out_dir, "bottleneck_{}.{}".format(label, image_format))))
    return paths
