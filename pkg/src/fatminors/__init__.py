"""Fat K4 / K4-minus minors versus radial graph-decompositions."""

from .graph import (
    INF,
    Graph,
    Path,
    ball,
    components,
    dist,
    parse_edge_list,
    format_edge_list,
    rad_of_set,
    shortest_path,
)

__all__ = [
    "INF",
    "Graph",
    "Path",
    "ball",
    "components",
    "dist",
    "parse_edge_list",
    "format_edge_list",
    "rad_of_set",
    "shortest_path",
]
