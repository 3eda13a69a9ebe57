"""Overlapping link communities by local minimisation of the ratio node-cut."""

from linkcomm.cost import SubgraphState, psi, sigma, tau
from linkcomm.graph import Graph, LinkSet, components, is_connected, load_graph, main_component, read_edge_list
from linkcomm.memetic import Community, EvolutionConfig, detect_communities
from linkcomm.search import AdaptationConfig, Resolution, adapt

__all__ = [
    "AdaptationConfig",
    "Community",
    "EvolutionConfig",
    "Graph",
    "LinkSet",
    "Resolution",
    "SubgraphState",
    "adapt",
    "components",
    "detect_communities",
    "is_connected",
    "load_graph",
    "main_component",
    "psi",
    "read_edge_list",
    "sigma",
    "tau",
]
