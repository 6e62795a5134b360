"""
Baselines and the evaluation protocol: success rate over a map suite and
average wire length over the maps that every compared algorithm solved in
every seed.
"""

from __future__ import annotations

import json
import logging
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .grid import ProblemInstance, RoutingOutcome, path_length, validate_outcome
from .solver import Mode, SolverConfig, post_process, sequential_route, solve

log = logging.getLogger(__name__)


def _partial_length(outcome: RoutingOutcome) -> int:
    return sum(path_length(p) for p in outcome.paths if p is not None)


def sample_orders(k: int, num_orders: int, seed: int) -> list[tuple[int, ...]]:
    """Uniform random permutations drawn from one stream, so a larger
    ``num_orders`` extends a smaller one with the same seed."""
    rng = np.random.default_rng(seed)
    return [tuple(int(i) for i in rng.permutation(k)) for _ in range(num_orders)]


def seq_astar_baseline(instance: ProblemInstance, num_orders: int, seed: int) -> RoutingOutcome:
    """Best of ``num_orders`` random orders with zero cost maps.

    More connected nets wins, then the shorter total length; the earliest
    sampled order wins remaining ties.
    """
    if num_orders < 1:
        raise ValueError("num_orders must be positive")
    zero = np.zeros((instance.num_nets, instance.grid.size))
    cache: dict[tuple[int, ...], RoutingOutcome] = {}
    best = None
    best_key = None
    for order in sample_orders(instance.num_nets, num_orders, seed):
        if order not in cache:
            cache[order] = sequential_route(instance, order, zero)
        outcome = cache[order]
        key = (-outcome.connected_count, _partial_length(outcome))
        if best_key is None or key < best_key:
            best, best_key = outcome, key
    return best


# --------------------------------------------------------------------------
# Algorithms

@dataclass(frozen=True)
class Algorithm:
    """One benchmark row: ``seq-astar:N``, ``cml``, ``ranking``, ``rc`` or ``rc-pp``."""

    name: str
    kind: str
    num_orders: int = 0
    solver: SolverConfig = SolverConfig()

    @classmethod
    def parse(cls, text: str, solver: SolverConfig = SolverConfig()) -> "Algorithm":
        text = text.strip()
        kind, _, arg = text.partition(":")
        if kind == "seq-astar":
            n = int(arg) if arg else 5
            return cls(f"seq-astar:{n}", kind, num_orders=n)
        modes = {
            "cml": (Mode.COST_ONLY, False),
            "ranking": (Mode.RANKING_ONLY, False),
            "rc": (Mode.FULL, False),
            "rc-pp": (Mode.FULL, True),
        }
        if kind not in modes or arg:
            raise ValueError(f"unknown algorithm {text!r}")
        mode, pp = modes[kind]
        return cls(kind, kind, solver=replace(solver, mode=mode, post_process=pp))


def parse_algorithms(text: str, solver: SolverConfig = SolverConfig()) -> list[Algorithm]:
    return [Algorithm.parse(t, solver) for t in text.split(",") if t.strip()]


@dataclass
class AlgoResult:
    algorithm: str
    instance: str
    seed: int
    success: bool
    total_length: Optional[int]
    connected: int
    wallclock: float
    error: Optional[str] = None
    valid: bool = True  # paths passed validate_outcome


def success_rate(results: Sequence[AlgoResult]) -> float:
    if not results:
        raise ValueError("success_rate of an empty result set")
    return sum(r.success for r in results) / len(results)


def common_instances(results: Iterable[AlgoResult]) -> set[str]:
    """Instances solved by every algorithm in every seed that appears."""
    results = list(results)
    cells: dict[str, dict[tuple[str, int], bool]] = {}
    keys = {(r.algorithm, r.seed) for r in results}
    for r in results:
        cells.setdefault(r.instance, {})[(r.algorithm, r.seed)] = r.success
    return {
        inst for inst, got in cells.items()
        if all(got.get(key, False) for key in keys)
    }


def common_average_length(results_by_algorithm: Mapping[str, Sequence[AlgoResult]]) -> Optional[dict[str, float]]:
    """Mean total length per algorithm over the common solved instances,
    or None when the intersection is empty."""
    everything = [r for rs in results_by_algorithm.values() for r in rs]
    common = common_instances(everything)
    if not common:
        return None
    return {
        algo: statistics.fmean(r.total_length for r in rs if r.instance in common)
        for algo, rs in results_by_algorithm.items()
    }


# --------------------------------------------------------------------------
# Reports

@dataclass
class AlgoSummary:
    algorithm: str
    success_mean: float
    success_std: float
    length_mean: Optional[float]
    length_std: Optional[float]
    seconds_per_map: float


@dataclass
class BenchReport:
    records: list[AlgoResult]
    summaries: list[AlgoSummary] = field(default_factory=list)
    common: list[str] = field(default_factory=list)

    @classmethod
    def from_records(cls, records: Sequence[AlgoResult]) -> "BenchReport":
        # stable: keeps the per-cell algorithm order
        records = sorted(records, key=lambda r: (r.seed, r.instance))
        algos = list(dict.fromkeys(r.algorithm for r in records))
        seeds = sorted({r.seed for r in records})
        common = sorted(common_instances(records))
        summaries = []
        for algo in algos:
            rates, lengths = [], []
            own = [r for r in records if r.algorithm == algo]
            for seed in seeds:
                cell = [r for r in own if r.seed == seed]
                if not cell:
                    continue
                rates.append(success_rate(cell))
                solved = [r.total_length for r in cell if r.instance in common]
                if solved:
                    lengths.append(statistics.fmean(solved))
            summaries.append(AlgoSummary(
                algorithm=algo,
                success_mean=statistics.fmean(rates),
                success_std=statistics.pstdev(rates),
                length_mean=statistics.fmean(lengths) if lengths else None,
                length_std=statistics.pstdev(lengths) if lengths else None,
                seconds_per_map=statistics.fmean(r.wallclock for r in own),
            ))
        return cls(records=list(records), summaries=summaries, common=common)

    def summary(self, algorithm: str) -> AlgoSummary:
        for s in self.summaries:
            if s.algorithm == algorithm:
                return s
        raise KeyError(algorithm)

    def to_json(self) -> str:
        doc = {
            "records": [asdict(r) for r in self.records],
            "summaries": [asdict(s) for s in self.summaries],
            "common_instances": self.common,
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "BenchReport":
        doc = json.loads(text)
        return cls.from_records([AlgoResult(**r) for r in doc["records"]])

    def format_table(self) -> str:
        """Aligned text table with ``rate±std(length±std)`` cells."""
        rows = [("algorithm", "success(common length)", "sec/map")]
        for s in self.summaries:
            length = "-" if s.length_mean is None else f"{s.length_mean:.1f}±{s.length_std:.2f}"
            rows.append((s.algorithm, f"{s.success_mean:.2f}±{s.success_std:.2f}({length})",
                         f"{s.seconds_per_map:.2f}"))
        widths = [max(len(r[i]) for r in rows) for i in range(3)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        lines.append(f"common instances: {len(self.common)}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Runner

def _record(algo: Algorithm, instance: ProblemInstance, name: str, seed: int,
            outcome: Optional[RoutingOutcome], seconds: float, error: Optional[str] = None) -> AlgoResult:
    if outcome is None:
        return AlgoResult(algo.name, name, seed, False, None, 0, seconds, error)
    report = validate_outcome(instance, outcome)
    if not report.valid:
        log.warning("%s on %s (seed %d) produced invalid paths: %s", algo.name, name, seed, report.errors[0])
    return AlgoResult(algo.name, name, seed, outcome.all_connected and report.valid, outcome.total_length,
                      outcome.connected_count, seconds, error, report.valid)


def run_cell(instance: ProblemInstance, name: str, algorithms: Sequence[Algorithm], seed: int) -> list[AlgoResult]:
    """Evaluate every algorithm on one (instance, seed).

    ``rc`` and ``rc-pp`` with the same training settings share one training
    run; post-processing is applied to its unprocessed result.
    """
    out = []
    trained: dict[SolverConfig, tuple] = {}
    for algo in algorithms:
        t0 = time.perf_counter()
        try:
            if algo.kind == "seq-astar":
                outcome = seq_astar_baseline(instance, algo.num_orders, seed)
            else:
                base = replace(algo.solver, seed=seed, post_process=False)
                if base not in trained:
                    t_train = time.perf_counter()
                    res = solve(instance, base)
                    trained[base] = (res, time.perf_counter() - t_train)
                    t0 = time.perf_counter()
                res, train_seconds = trained[base]
                outcome = res.outcome
                if algo.solver.post_process and outcome.all_connected:
                    outcome = post_process(instance, outcome)
                t0 -= train_seconds
            out.append(_record(algo, instance, name, seed, outcome, time.perf_counter() - t0))
        except Exception as exc:  # a failed cell must not abort the sweep
            log.warning("%s on %s (seed %d) failed: %r", algo.name, name, seed, exc)
            out.append(_record(algo, instance, name, seed, None, time.perf_counter() - t0, repr(exc)))
    return out


def run_benchmark(
    instances: Mapping[str, ProblemInstance],
    algorithms: Sequence[Algorithm],
    seeds: Sequence[int],
    workers: int = 1,
    progress=None,
) -> BenchReport:
    cells = [(name, seed) for seed in seeds for name in instances]

    def work(cell):
        name, seed = cell
        res = run_cell(instances[name], name, algorithms, seed)
        if progress is not None:
            progress(name, seed, res)
        return res

    if workers <= 1:
        results = [work(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, cells))
    return BenchReport.from_records([r for rs in results for r in rs])
