"""
Ranking Cost: sequential A* driven by a learned net order and learned
per-net cost maps, trained end to end with evolution strategies.

Parameters are a ranking vector ``beta`` (one score per net, highest routed
first) and a ``(k, m)`` raw cost-map matrix clamped at zero. The net at
order position ``j`` is routed on the sum of the cost maps of the nets
routed after it, so the last net always takes a plain shortest path.
"""

from __future__ import annotations

import enum
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .astar import RouteRequest, route
from .es import ESConfig, GenerationStats, default_workers, optimize
from .grid import InstanceError, ProblemInstance, RoutingOutcome, Vertex, path_length, validate_outcome


class Mode(str, enum.Enum):
    FULL = "full"
    RANKING_ONLY = "ranking_only"
    COST_ONLY = "cost_only"


_KERNEL_MODE = {
    Mode.FULL: _kernels.MODE_FULL,
    Mode.RANKING_ONLY: _kernels.MODE_RANKING_ONLY,
    Mode.COST_ONLY: _kernels.MODE_COST_ONLY,
}


@dataclass(frozen=True)
class SolverConfig:
    mode: Mode = Mode.FULL
    generations: int = 1000
    population_size: int = 40
    learning_rate: float = 0.001
    sigma_ranking: float = 0.1
    sigma_cost: float = 0.1
    seed: int = 0
    post_process: bool = False
    failure_reward: float = -1.0
    length_upper_bound_factor: float = 1.0
    shaped_failures: bool = False
    mirrored: bool = False
    workers: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.length_upper_bound_factor <= 0:
            raise ValueError("length_upper_bound_factor must be positive")

    def es_config(self, instance: ProblemInstance) -> ESConfig:
        k, m = instance.num_nets, instance.grid.size
        segments = []
        if self.mode is not Mode.COST_ONLY:
            segments.append((k, self.sigma_ranking))
        if self.mode is not Mode.RANKING_ONLY:
            segments.append((k * m, self.sigma_cost))
        return ESConfig(
            noise_scales=tuple(segments),
            population_size=self.population_size,
            learning_rate=self.learning_rate,
            max_generations=self.generations,
            seed=self.seed,
            mirrored=self.mirrored,
            workers=self.workers,
        )


@dataclass(frozen=True, eq=False)
class SolverParams:
    beta: np.ndarray       # (k,)
    cost_raw: np.ndarray   # (k, m)

    @classmethod
    def zeros(cls, instance: ProblemInstance) -> "SolverParams":
        k, m = instance.num_nets, instance.grid.size
        return cls(np.zeros(k), np.zeros((k, m)))

    def flatten(self, mode: Mode) -> np.ndarray:
        parts = []
        if mode is not Mode.COST_ONLY:
            parts.append(self.beta)
        if mode is not Mode.RANKING_ONLY:
            parts.append(self.cost_raw.reshape(-1))
        return np.concatenate(parts) if parts else np.zeros(0)

    @classmethod
    def unflatten(cls, flat: np.ndarray, instance: ProblemInstance, mode: Mode) -> "SolverParams":
        k, m = instance.num_nets, instance.grid.size
        flat = np.asarray(flat, dtype=np.float64)
        beta = np.zeros(k)
        raw = np.zeros((k, m))
        off = 0
        if mode is not Mode.COST_ONLY:
            beta = flat[:k].copy()
            off = k
        if mode is not Mode.RANKING_ONLY:
            raw = flat[off:off + k * m].reshape(k, m).copy()
        return cls(beta, raw)


def order_from_ranking(beta: Sequence[float]) -> tuple[int, ...]:
    """Net indices by descending score; equal scores keep index order."""
    beta = np.asarray(beta, dtype=np.float64)
    return tuple(int(i) for i in np.argsort(-beta, kind="mergesort"))


def cost_maps_from_params(raw: np.ndarray) -> np.ndarray:
    return np.maximum(np.asarray(raw, dtype=np.float64), 0.0)


def staged_cost_field(cost_maps: np.ndarray, order: Sequence[int], stage: int) -> np.ndarray:
    """Cost field for the net at 1-based position ``stage`` of ``order``.

    Sums the maps of every net routed after that position, accumulating
    from the last one backwards.
    """
    k = len(order)
    if not 1 <= stage <= k:
        raise ValueError(f"stage {stage} outside 1..{k}")
    acc = np.zeros(cost_maps.shape[1])
    for pos in range(k - 1, stage - 1, -1):
        acc = acc + cost_maps[order[pos]]
    return acc


def sequential_route(instance: ProblemInstance, order: Sequence[int], cost_maps: np.ndarray) -> RoutingOutcome:
    """Route nets one at a time in ``order``.

    Each net avoids obstacles, earlier paths and every other net's pins.
    A failed net is recorded as ``None`` and routing carries on.
    """
    grid = instance.grid
    pins = instance.pin_set
    occupied: set[Vertex] = set()
    paths: list = [None] * instance.num_nets
    for stage, net_idx in enumerate(order, start=1):
        net = instance.nets[net_idx]
        field_ = staged_cost_field(cost_maps, order, stage) if len(order) else None
        blocked = (pins - set(net.pins)) | occupied
        found = route(RouteRequest(grid, net, frozenset(blocked), field_))
        if found is not None:
            paths[net_idx] = found[0]
            occupied.update(found[0])
    return RoutingOutcome(tuple(paths))


def length_upper_bound(instance: ProblemInstance, config: SolverConfig) -> float:
    g = instance.grid
    return config.length_upper_bound_factor * instance.num_nets * (g.width + g.height)


def reward(outcome: RoutingOutcome, instance: ProblemInstance, config: SolverConfig) -> float:
    return float(_rewards(
        np.array([outcome.connected_count]),
        np.array([sum(path_length(p) for p in outcome.paths if p is not None)]),
        instance,
        config,
    )[0])


def _rewards(connected: np.ndarray, lengths: np.ndarray, instance: ProblemInstance,
             config: SolverConfig) -> np.ndarray:
    """Vectorized reward in [-1, 0].

    Success: ``-L / L_ub`` clamped. Failure: ``failure_reward``, or with
    ``shaped_failures`` successes are squeezed into [-0.5, 0] and failures
    spread over [-1, -0.5] by the fraction of unconnected nets.
    """
    k = instance.num_nets
    ub = length_upper_bound(instance, config)
    success = np.clip(-lengths / ub, -1.0, 0.0)
    ok = connected == k
    if not config.shaped_failures:
        return np.where(ok, success, config.failure_reward)
    missing = (k - connected) / max(k, 1)
    return np.where(ok, 0.5 * success, -0.5 - 0.5 * missing)


class PopulationObjective:
    """Batch objective: routes each candidate row with the compiled kernel,
    splitting rows across a thread pool (results are placed by row index)."""

    def __init__(self, instance: ProblemInstance, config: SolverConfig):
        self.instance = instance
        self.config = config
        self.mode = _KERNEL_MODE[config.mode]
        self.workers = config.workers or default_workers()
        self.stop_on_failure = not config.shaped_failures

    def route_rows(self, candidates: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        cands = np.ascontiguousarray(candidates, dtype=np.float64)
        n = cands.shape[0]
        connected = np.zeros(n, np.int64)
        lengths = np.zeros(n, np.int64)
        g = self.instance.grid
        args = (g.width, g.height, g.obstacle_mask, self.instance.pin_indices, cands,
                self.mode, self.stop_on_failure, connected, lengths)
        chunks = min(self.workers, n)
        if chunks <= 1:
            _kernels.evaluate_candidates(*args, 0, n)
        else:
            bounds = np.linspace(0, n, chunks + 1).astype(int)
            with ThreadPoolExecutor(max_workers=chunks) as pool:
                list(pool.map(lambda b: _kernels.evaluate_candidates(*args, b[0], b[1]),
                              zip(bounds[:-1], bounds[1:])))
        return connected, lengths

    def __call__(self, candidates: np.ndarray) -> np.ndarray:
        connected, lengths = self.route_rows(candidates)
        return _rewards(connected, lengths, self.instance, self.config)


def evaluate_params(instance: ProblemInstance, params: SolverParams, mode: Mode) -> tuple[tuple[int, ...], RoutingOutcome]:
    k = instance.num_nets
    order = tuple(range(k)) if mode is Mode.COST_ONLY else order_from_ranking(params.beta)
    maps = np.zeros((k, instance.grid.size)) if mode is Mode.RANKING_ONLY else cost_maps_from_params(params.cost_raw)
    return order, sequential_route(instance, order, maps)


def post_process(instance: ProblemInstance, outcome: RoutingOutcome) -> RoutingOutcome:
    """Re-plan each path with plain A* against all the others until no path shortens."""
    report = validate_outcome(instance, outcome)
    if not report.valid or not report.all_connected:
        raise InstanceError("post-processing needs a valid, fully connected outcome: "
                            + "; ".join(report.errors or ["unconnected nets"]))
    grid = instance.grid
    pins = instance.pin_set
    paths = list(outcome.paths)
    changed = True
    while changed:
        changed = False
        for i, net in enumerate(instance.nets):
            others = set(pins - set(net.pins))
            for j, p in enumerate(paths):
                if j != i:
                    others.update(p)
            found = route(RouteRequest(grid, net, frozenset(others)))
            if found is not None and path_length(found[0]) < path_length(paths[i]):
                paths[i] = found[0]
                changed = True
    return RoutingOutcome(tuple(paths))


@dataclass
class SolveResult:
    outcome: RoutingOutcome
    order: tuple[int, ...]
    params: SolverParams
    best_reward: float
    history: list[GenerationStats] = field(default_factory=list)
    raw_outcome: Optional[RoutingOutcome] = None  # before post-processing

    @property
    def generations(self) -> int:
        return len(self.history)


def solve(
    instance: ProblemInstance,
    config: SolverConfig = SolverConfig(),
    callback: Optional[Callable] = None,
) -> SolveResult:
    es_config = config.es_config(instance)
    theta0 = SolverParams.zeros(instance).flatten(config.mode)
    objective = PopulationObjective(instance, config)
    result = optimize(theta0, None, es_config, callback, batch_objective=objective)
    params = SolverParams.unflatten(result.best_theta, instance, config.mode)
    order, outcome = evaluate_params(instance, params, config.mode)
    raw = outcome
    if config.post_process and outcome.all_connected:
        outcome = post_process(instance, outcome)
    return SolveResult(
        outcome=outcome,
        order=order,
        params=params,
        best_reward=result.best_reward,
        history=result.history,
        raw_outcome=raw,
    )


def with_post_process(result: SolveResult, instance: ProblemInstance) -> SolveResult:
    """Post-processed copy of an unprocessed result."""
    if not result.raw_outcome.all_connected:
        return replace(result, outcome=result.raw_outcome)
    return replace(result, outcome=post_process(instance, result.raw_outcome))


# --------------------------------------------------------------------------
# Solution files

SOLUTION_VERSION = 1


def save_solution(outcome: RoutingOutcome, order: Sequence[int], generations: int = 0) -> bytes:
    doc = {
        "version": SOLUTION_VERSION,
        "order": [int(i) for i in order],
        "generations": generations,
        "connected": outcome.connected_count,
        "num_nets": len(outcome.paths),
        "total_length": outcome.total_length,
        "nets": [
            {"connected": p is not None, "path": [[v.x, v.y] for v in p] if p is not None else []}
            for p in outcome.paths
        ],
    }
    return (json.dumps(doc, indent=1, separators=(",", ": ")) + "\n").encode("utf-8")


def load_solution(source, instance: Optional[ProblemInstance] = None) -> tuple[RoutingOutcome, tuple[int, ...]]:
    """Parse a solution file; with ``instance`` the net count must match."""
    if hasattr(source, "read"):
        source = source.read()
    try:
        doc = json.loads(source)
        paths = tuple(
            tuple(Vertex(x, y) for x, y in n["path"]) if n["connected"] else None
            for n in doc["nets"]
        )
        order = tuple(int(i) for i in doc["order"])
    except (json.JSONDecodeError, UnicodeDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"malformed solution document: {exc}") from exc
    if instance is not None and len(paths) != instance.num_nets:
        raise InstanceError(f"solution has {len(paths)} nets, instance has {instance.num_nets}")
    return RoutingOutcome(paths), order
