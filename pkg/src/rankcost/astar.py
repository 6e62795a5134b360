"""
Deterministic A* on a grid with an additive vertex-cost field.

Entering a vertex ``v`` costs ``1 + cost[v]`` and the heuristic is the
Manhattan distance to the target. Because every step costs at least 1 the
heuristic stays consistent for any non-negative field, so returned paths
are cost-optimal. Frontier ties on ``g + h`` go to the larger ``g``, then to
the earlier insertion (neighbour order up, down, left, right).

``bfs_oracle`` and ``dijkstra_oracle`` are plain-Python reference searches
used to check the compiled router.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import _kernels
from .grid import GridMap, InstanceError, Net, Path, Vertex, neighbors


def cost_field(grid: GridMap, values=None) -> np.ndarray:
    """Dense row-major cost array for ``grid``; zeros when ``values`` is None."""
    if values is None:
        return np.zeros(grid.size)
    arr = np.ascontiguousarray(values, dtype=np.float64).reshape(-1)
    if arr.shape[0] != grid.size:
        raise InstanceError(f"cost field has {arr.shape[0]} entries, grid has {grid.size}")
    if not np.all(arr >= 0.0):
        raise InstanceError("cost field entries must be non-negative")
    return arr


@dataclass(frozen=True, eq=False)
class RouteRequest:
    grid: GridMap
    net: Net
    blocked: frozenset[Vertex] = frozenset()
    cost_field: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "blocked", frozenset(Vertex(*v) for v in self.blocked))
        object.__setattr__(self, "cost_field", cost_field(self.grid, self.cost_field))
        for pin in self.net.pins:
            if not self.grid.in_bounds(pin):
                raise InstanceError(f"pin {tuple(pin)} is out of bounds")
            if pin in self.grid.obstacles or pin in self.blocked:
                raise InstanceError(f"pin {tuple(pin)} is blocked")

    def blocked_mask(self) -> np.ndarray:
        mask = self.grid.obstacle_mask.copy()
        for v in self.blocked:
            if self.grid.in_bounds(v):
                mask[self.grid.index(v)] = 1
        return mask


def route(request: RouteRequest) -> Optional[tuple[Path, float]]:
    """Cheapest path for the request's net, or None if the target is unreachable."""
    grid = request.grid
    path, cost = _kernels.astar(
        grid.width,
        grid.height,
        request.blocked_mask(),
        request.cost_field,
        grid.index(request.net.start),
        grid.index(request.net.end),
    )
    if path.shape[0] == 0:
        return None
    return tuple(grid.vertex(int(i)) for i in path), float(cost)


def _passable(grid: GridMap, blocked: Iterable[Vertex]):
    blocked = set(blocked)
    return lambda v: [n for n in neighbors(grid, v) if n not in blocked]


def bfs_oracle(grid: GridMap, net: Net, blocked: Iterable[Vertex] = ()) -> Optional[int]:
    """Unweighted shortest-path edge count by breadth-first search."""
    step = _passable(grid, blocked)
    dist = {net.start: 0}
    queue = deque([net.start])
    while queue:
        v = queue.popleft()
        if v == net.end:
            return dist[v]
        for n in step(v):
            if n not in dist:
                dist[n] = dist[v] + 1
                queue.append(n)
    return None


def dijkstra_oracle(grid: GridMap, request: RouteRequest) -> Optional[float]:
    """Minimal accumulated ``1 + cost`` over entered vertices by uniform-cost search."""
    step = _passable(grid, request.blocked)
    field = request.cost_field
    best = {request.net.start: 0.0}
    heap = [(0.0, request.net.start)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        if v == request.net.end:
            return d
        for n in step(v):
            nd = d + 1.0 + field[grid.index(n)]
            if nd < best.get(n, float("inf")):
                best[n] = nd
                heapq.heappush(heap, (nd, n))
    return None
