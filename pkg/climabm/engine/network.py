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
climabm engine network:

The supply chain as a `networkx.DiGraph` with one node per firm id and
one edge per supplier relationship, pointing from supplier to buyer.
Trophic levels and upstream exposure are read off the graph.
"""
import networkx as nx

from climabm.agents import Sector

__all__ = [
    "link_suppliers", "build_supply_chain", "assign_trophic_levels",
    "indirect_exposure",
]


def link_suppliers(firms, per_manufacturer, rng, input_inventory=0.0):
    """
    Gives every manufacturer `per_manufacturer` distinct commodity
    suppliers drawn uniformly (fewer when there are not enough
    commodity firms), stocked with `input_inventory` of each input.
    """
    commodity_ids = [f.id for f in firms if f.sector is Sector.COMMODITY]
    if not commodity_ids:
        raise ValueError("a supply chain needs at least one commodity firm")
    size = min(per_manufacturer, len(commodity_ids))
    for firm in firms:
        if firm.sector is not Sector.MANUFACTURER:
            continue
        chosen = rng.choice(commodity_ids, size=size, replace=False)
        firm.suppliers = sorted(int(i) for i in chosen)
        firm.input_inventory = {s: float(input_inventory) for s in firm.suppliers}
    return firms


def build_supply_chain(firms):
    graph = nx.DiGraph()
    for firm in firms:
        graph.add_node(firm.id, sector=firm.sector.value)
    for firm in firms:
        for supplier in firm.suppliers:
            graph.add_edge(supplier, firm.id)
    return graph


def assign_trophic_levels(graph, firms):
    """
    Sets each firm's trophic level to 1 plus the length of the longest
    supplier path ending at it. Raises `ValueError` on a cyclic chain.
    """
    if not nx.is_directed_acyclic_graph(graph):
        raise ValueError("the supply chain contains a cycle")
    levels = {}
    for node in nx.topological_sort(graph):
        levels[node] = 1 + max(
            (levels[p] for p in graph.predecessors(node)), default=0)
    for firm in firms:
        firm.trophic_level = levels[firm.id]
    nx.set_node_attributes(graph, levels, "trophic_level")
    return levels


def indirect_exposure(graph, damaged):
    """
    Fraction of all firms that were not damaged themselves but have a
    damaged firm upstream in the supply chain (0 for an empty graph).
    """
    damaged = set(damaged)
    if graph.number_of_nodes() == 0:
        return 0.0
    exposed = 0
    for node in graph.nodes:
        if node in damaged:
            continue
        if damaged & nx.ancestors(graph, node):
            exposed += 1
    return exposed / graph.number_of_nodes()
