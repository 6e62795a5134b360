"""Grid circuit routing with learned net order and cost maps."""

from .astar import RouteRequest, bfs_oracle, dijkstra_oracle, route
from .grid import (
    GridMap,
    Net,
    ProblemInstance,
    RoutingOutcome,
    Vertex,
    generate_instance,
    load_instance,
    manhattan,
    neighbors,
    save_instance,
    validate_outcome,
)
from .solver import Mode, SolverConfig, post_process, sequential_route, solve

__all__ = [
    "GridMap", "Net", "ProblemInstance", "RoutingOutcome", "Vertex",
    "generate_instance", "load_instance", "save_instance", "manhattan", "neighbors",
    "validate_outcome", "RouteRequest", "route", "bfs_oracle", "dijkstra_oracle",
    "Mode", "SolverConfig", "solve", "sequential_route", "post_process",
]
