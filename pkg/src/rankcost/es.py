"""
OpenAI-style evolution strategies with per-segment noise scales.

The flat parameter vector is split into consecutive segments, each with its
own perturbation scale. One standard-normal vector per population member is
shared by all segments. Rewards are standardized per generation before the
score-function update, and the update sum always runs in population order so
results do not depend on how evaluations were scheduled.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

log = logging.getLogger(__name__)

THREADS_ENV = "RANKCOST_THREADS"


class ObjectiveError(RuntimeError):
    """An objective evaluation raised; carries generation/evaluator context."""

    def __init__(self, generation: int, evaluator: Optional[int], cause: BaseException):
        where = f"generation {generation}"
        if evaluator is not None:
            where += f", evaluator {evaluator}"
        super().__init__(f"objective failed at {where}: {cause!r}")
        self.generation = generation
        self.evaluator = evaluator


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ESConfig:
    noise_scales: tuple[tuple[int, float], ...]
    population_size: int = 40
    learning_rate: float = 0.001
    max_generations: int = 1000
    seed: int = 0
    mirrored: bool = False
    workers: Optional[int] = None

    def __post_init__(self):
        scales = tuple((int(n), float(s)) for n, s in self.noise_scales)
        object.__setattr__(self, "noise_scales", scales)
        if self.population_size < 1:
            raise ValueError("population_size must be positive")
        if self.mirrored and self.population_size % 2:
            raise ValueError("mirrored sampling needs an even population size")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_generations < 0:
            raise ValueError("max_generations must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        for n, s in scales:
            if n < 0 or not s > 0:
                raise ValueError(f"bad noise segment ({n}, {s})")

    @property
    def dim(self) -> int:
        return sum(n for n, _ in self.noise_scales)

    def sigma_vector(self) -> np.ndarray:
        return np.repeat(
            np.array([s for _, s in self.noise_scales]),
            [n for n, _ in self.noise_scales],
        )


@dataclass
class Generation:
    index: int
    noises: np.ndarray
    candidates: np.ndarray
    rewards: np.ndarray
    normalized_rewards: Optional[np.ndarray] = None


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    reward_max: float
    reward_mean: float
    reward_min: float
    best_so_far: float

    def as_dict(self) -> dict:
        return {
            "generation": self.generation,
            "best": self.reward_max,
            "mean": self.reward_mean,
            "min": self.reward_min,
            "best_so_far": self.best_so_far,
        }


@dataclass
class OptimizeResult:
    theta: np.ndarray
    best_theta: np.ndarray
    best_reward: float
    history: list[GenerationStats] = field(default_factory=list)


def sample_noise(dim: int, n: int, seed: int, generation: int, mirrored: bool = False,
                 workers: int = 1) -> np.ndarray:
    """``(n, dim)`` standard normals; row ``i`` depends only on (seed, generation, i).

    Each row has its own stream, so rows can be filled by ``workers``
    threads without changing the result. With ``mirrored`` the second half
    of the rows negates the first half.
    """
    out = np.empty((n, dim))
    rows = n // 2 if mirrored else n

    def fill(i):
        np.random.default_rng([seed, generation, i]).standard_normal(dim, out=out[i])

    if workers <= 1 or rows < 2:
        for i in range(rows):
            fill(i)
    else:
        with ThreadPoolExecutor(max_workers=min(workers, rows)) as pool:
            list(pool.map(fill, range(rows)))
    if mirrored:
        np.negative(out[:rows], out=out[rows:])
    return out


def _check_dim(vec: np.ndarray, config: ESConfig, what: str):
    if vec.shape[-1] != config.dim:
        raise ValueError(f"{what} has dimension {vec.shape[-1]}, config segments sum to {config.dim}")


def perturb(theta: np.ndarray, noise: np.ndarray, config: ESConfig) -> np.ndarray:
    """``theta + sigma_s * noise`` segment by segment; ``noise`` may be a batch."""
    theta = np.asarray(theta, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    _check_dim(theta, config, "theta")
    _check_dim(noise, config, "noise")
    out = config.sigma_vector() * noise
    out += theta
    return out


def normalize_rewards(rewards: Sequence[float]) -> np.ndarray:
    """Standardize to zero mean and unit (population) std; all zeros if std is 0."""
    r = np.asarray(rewards, dtype=np.float64)
    if r.ndim != 1 or r.shape[0] < 2:
        raise ValueError("need at least two rewards to normalize")
    std = r.std()
    if std == 0.0:
        return np.zeros_like(r)
    return (r - r.mean()) / std


def update(theta: np.ndarray, generation: Generation, config: ESConfig) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    _check_dim(theta, config, "theta")
    _check_dim(generation.noises, config, "noise")
    if generation.normalized_rewards is None:
        raise ValueError("generation has no normalized rewards")
    weights = generation.normalized_rewards
    n = len(weights)
    # fixed reduction order: evaluator 0, 1, ..., n-1
    acc = np.zeros(config.dim)
    for j in range(n):
        if weights[j] != 0.0:
            acc += weights[j] * generation.noises[j]
    return theta + config.learning_rate / (n * config.sigma_vector()) * acc


def _evaluate(objective, candidates: np.ndarray, generation: int, workers: int) -> np.ndarray:
    def call(i):
        try:
            return float(objective(candidates[i]))
        except Exception as exc:
            raise ObjectiveError(generation, i, exc) from exc

    if workers <= 1:
        return np.array([call(i) for i in range(len(candidates))])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(call, range(len(candidates)))))


def optimize(
    initial_theta,
    objective: Optional[Callable[[np.ndarray], float]],
    config: ESConfig,
    callback: Optional[Callable[[GenerationStats, Generation, float], None]] = None,
    *,
    batch_objective: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> OptimizeResult:
    """Maximize ``objective`` for ``config.max_generations`` generations.

    ``batch_objective`` maps an ``(n, dim)`` candidate matrix to ``n``
    rewards and replaces the per-candidate thread pool when given. The
    starting point is evaluated once and seeds the best-ever record; after
    that only perturbed candidates can replace it (strictly better reward,
    earliest wins ties). ``callback`` receives the stats, the generation and
    the elapsed wallclock seconds.
    """
    theta = np.array(initial_theta, dtype=np.float64)
    _check_dim(theta, config, "initial theta")
    if objective is None and batch_objective is None:
        raise ValueError("need an objective or a batch objective")
    workers = config.workers or default_workers()

    def evaluate(cands, gen):
        if batch_objective is not None:
            try:
                out = np.asarray(batch_objective(cands), dtype=np.float64)
            except ObjectiveError:
                raise
            except Exception as exc:
                raise ObjectiveError(gen, None, exc) from exc
            if out.shape != (len(cands),):
                raise ObjectiveError(gen, None, ValueError(f"batch objective returned shape {out.shape}"))
            return out
        return _evaluate(objective, cands, gen, workers)

    best_theta = theta.copy()
    best_reward = float(evaluate(theta[None, :], -1)[0])
    history: list[GenerationStats] = []
    t0 = time.perf_counter()
    for gen in range(config.max_generations):
        noises = sample_noise(config.dim, config.population_size, config.seed, gen, config.mirrored, workers)
        candidates = perturb(theta, noises, config)
        rewards = evaluate(candidates, gen)
        i = int(np.argmax(rewards))
        if rewards[i] > best_reward:
            best_reward = float(rewards[i])
            best_theta = candidates[i].copy()
        generation = Generation(gen, noises, candidates, rewards, normalize_rewards(rewards)
                                if len(rewards) > 1 else np.zeros(1))
        theta = update(theta, generation, config)
        stats = GenerationStats(
            generation=gen,
            reward_max=float(rewards.max()),
            reward_mean=float(rewards.mean()),
            reward_min=float(rewards.min()),
            best_so_far=best_reward,
        )
        history.append(stats)
        if callback is not None:
            callback(stats, generation, time.perf_counter() - t0)
        if gen % 100 == 0:
            log.debug("generation %d: max %.4f mean %.4f best %.4f",
                      gen, stats.reward_max, stats.reward_mean, best_reward)
    return OptimizeResult(theta=theta, best_theta=best_theta, best_reward=best_reward, history=history)
