"""
Grid-graph model for two-pin routing problems.

Coordinates are 0-based, ``x`` is the column and ``y`` the row with the
origin in the top-left corner. Vertices are flattened row-major
(``y * width + x``) whenever a dense array is needed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

FORMAT_VERSION = 1


class InstanceError(ValueError):
    """Base class for invalid problem instances."""


class InstanceFormatError(InstanceError):
    """The instance document is not well-formed."""


class OutOfBoundsError(InstanceError):
    pass


class DuplicatePinError(InstanceError):
    pass


class PinOnObstacleError(InstanceError):
    pass


class GenerationError(RuntimeError):
    """Random instance generation could not place all pins."""


class Vertex(NamedTuple):
    x: int
    y: int


Path = tuple[Vertex, ...]


def manhattan(a: Vertex, b: Vertex) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


@dataclass(frozen=True)
class GridMap:
    width: int
    height: int
    obstacles: frozenset[Vertex] = frozenset()

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InstanceError(f"grid dimensions must be positive, got {self.width}x{self.height}")
        object.__setattr__(self, "obstacles", frozenset(Vertex(*v) for v in self.obstacles))
        for v in self.obstacles:
            if not self.in_bounds(v):
                raise OutOfBoundsError(f"obstacle {tuple(v)} outside {self.width}x{self.height} grid")

    @property
    def size(self) -> int:
        """Vertex count m, the length of every cost map."""
        return self.width * self.height

    def in_bounds(self, v: Vertex) -> bool:
        return 0 <= v[0] < self.width and 0 <= v[1] < self.height

    def index(self, v: Vertex) -> int:
        return v[1] * self.width + v[0]

    def vertex(self, index: int) -> Vertex:
        return Vertex(index % self.width, index // self.width)

    @cached_property
    def obstacle_mask(self) -> np.ndarray:
        mask = np.zeros(self.size, dtype=np.uint8)
        for v in self.obstacles:
            mask[self.index(v)] = 1
        mask.flags.writeable = False
        return mask


# up, down, left, right
_OFFSETS = ((0, -1), (0, 1), (-1, 0), (1, 0))


def neighbors(grid: GridMap, v: Vertex) -> list[Vertex]:
    """In-bounds, obstacle-free 4-neighbours of ``v`` in up/down/left/right order."""
    if not grid.in_bounds(v):
        raise OutOfBoundsError(f"vertex {tuple(v)} outside {grid.width}x{grid.height} grid")
    out = []
    for dx, dy in _OFFSETS:
        n = Vertex(v[0] + dx, v[1] + dy)
        if grid.in_bounds(n) and n not in grid.obstacles:
            out.append(n)
    return out


@dataclass(frozen=True)
class Net:
    start: Vertex
    end: Vertex

    def __post_init__(self):
        object.__setattr__(self, "start", Vertex(*self.start))
        object.__setattr__(self, "end", Vertex(*self.end))
        if self.start == self.end:
            raise DuplicatePinError(f"net start and end coincide at {tuple(self.start)}")

    @property
    def pins(self) -> tuple[Vertex, Vertex]:
        return (self.start, self.end)


@dataclass(frozen=True)
class ProblemInstance:
    grid: GridMap
    nets: tuple[Net, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nets", tuple(self.nets))
        seen: set[Vertex] = set()
        for i, net in enumerate(self.nets):
            for pin in net.pins:
                if not self.grid.in_bounds(pin):
                    raise OutOfBoundsError(f"net {i} pin {tuple(pin)} is out of bounds")
                if pin in self.grid.obstacles:
                    raise PinOnObstacleError(f"net {i} pin {tuple(pin)} lies on an obstacle")
                if pin in seen:
                    raise DuplicatePinError(f"net {i} pin {tuple(pin)} is shared with another pin")
                seen.add(pin)

    @property
    def num_nets(self) -> int:
        return len(self.nets)

    @cached_property
    def pin_indices(self) -> np.ndarray:
        """(k, 2) array of flat start/end indices."""
        arr = np.array(
            [[self.grid.index(n.start), self.grid.index(n.end)] for n in self.nets],
            dtype=np.int64,
        ).reshape(len(self.nets), 2)
        arr.flags.writeable = False
        return arr

    @cached_property
    def pin_set(self) -> frozenset[Vertex]:
        return frozenset(p for n in self.nets for p in n.pins)


def path_length(path: Sequence[Vertex]) -> int:
    """Edge count of a path; a single vertex has length 0."""
    return max(len(path) - 1, 0)


@dataclass(frozen=True)
class RoutingOutcome:
    paths: tuple[Optional[Path], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "paths",
            tuple(None if p is None else tuple(Vertex(*v) for v in p) for p in self.paths),
        )

    @property
    def connected_count(self) -> int:
        return sum(p is not None for p in self.paths)

    @property
    def all_connected(self) -> bool:
        return all(p is not None for p in self.paths)

    @property
    def total_length(self) -> Optional[int]:
        """Total edge count, defined only when every net is connected."""
        if not self.all_connected:
            return None
        return sum(path_length(p) for p in self.paths)


# --------------------------------------------------------------------------
# Instance file format

def instance_to_dict(instance: ProblemInstance) -> dict:
    grid = instance.grid
    return {
        "version": FORMAT_VERSION,
        "width": grid.width,
        "height": grid.height,
        "obstacles": [[v.x, v.y] for v in sorted(grid.obstacles)],
        "nets": [
            {"start": [n.start.x, n.start.y], "end": [n.end.x, n.end.y]} for n in instance.nets
        ],
    }


def _dump(doc: dict) -> bytes:
    # one top-level key per line, one net per line
    lines = []
    for key, value in doc.items():
        if isinstance(value, list) and value and isinstance(value[0], dict):
            items = ",\n".join("    " + json.dumps(v, separators=(", ", ": ")) for v in value)
            lines.append(f'  "{key}": [\n{items}\n  ]')
        else:
            lines.append(f'  "{key}": {json.dumps(value, separators=(",", ":"))}')
    return ("{\n" + ",\n".join(lines) + "\n}\n").encode("utf-8")


def save_instance(instance: ProblemInstance) -> bytes:
    return _dump(instance_to_dict(instance))


def _coord(value, what: str) -> Vertex:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(c, int) and not isinstance(c, bool) for c in value)
    ):
        raise InstanceFormatError(f"{what}: expected [x, y] integer pair, got {value!r}")
    return Vertex(value[0], value[1])


def instance_from_dict(doc) -> ProblemInstance:
    if not isinstance(doc, dict):
        raise InstanceFormatError("instance document must be an object")
    if doc.get("version") != FORMAT_VERSION:
        raise InstanceFormatError(f"unsupported instance version {doc.get('version')!r}")
    for key in ("width", "height", "obstacles", "nets"):
        if key not in doc:
            raise InstanceFormatError(f"missing field {key!r}")
    width, height = doc["width"], doc["height"]
    if not isinstance(width, int) or not isinstance(height, int):
        raise InstanceFormatError("width and height must be integers")
    if not isinstance(doc["obstacles"], list) or not isinstance(doc["nets"], list):
        raise InstanceFormatError("obstacles and nets must be lists")
    obstacles = [_coord(o, "obstacle") for o in doc["obstacles"]]
    nets = []
    for i, n in enumerate(doc["nets"]):
        if not isinstance(n, dict) or "start" not in n or "end" not in n:
            raise InstanceFormatError(f"net {i}: expected {{'start': .., 'end': ..}}")
        nets.append((_coord(n["start"], f"net {i} start"), _coord(n["end"], f"net {i} end")))
    grid = GridMap(width, height, frozenset(obstacles))
    return ProblemInstance(grid, tuple(Net(s, e) for s, e in nets))


def load_instance(source) -> ProblemInstance:
    """Parse an instance from bytes, text or a binary file object."""
    if hasattr(source, "read"):
        source = source.read()
    try:
        doc = json.loads(source)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InstanceFormatError(f"malformed instance document: {exc}") from exc
    return instance_from_dict(doc)


# --------------------------------------------------------------------------
# Random instances

def generate_instance(
    width: int,
    height: int,
    num_nets: int,
    obstacle_density: float = 0.0,
    seed: int = 0,
    max_retries: int = 100,
) -> ProblemInstance:
    """Random map with ``round(density * m)`` obstacles and distinct random pins.

    Solvability is not guaranteed.
    """
    if not 0.0 <= obstacle_density < 1.0:
        raise ValueError(f"obstacle_density must be in [0, 1), got {obstacle_density}")
    if num_nets <= 0:
        raise ValueError("num_nets must be positive")
    m = width * height
    if 2 * num_nets > m:
        raise GenerationError(f"{width}x{height} grid cannot hold {num_nets} nets")
    rng = np.random.default_rng(seed)
    n_obstacles = int(round(obstacle_density * m))
    for _ in range(max_retries):
        cells = rng.permutation(m)
        blocked = np.sort(cells[:n_obstacles])
        free = cells[n_obstacles:]
        if len(free) < 2 * num_nets:
            continue
        pins = rng.choice(free, size=2 * num_nets, replace=False)
        grid = GridMap(width, height, frozenset(Vertex(int(i % width), int(i // width)) for i in blocked))
        nets = tuple(
            Net(grid.vertex(int(pins[2 * i])), grid.vertex(int(pins[2 * i + 1])))
            for i in range(num_nets)
        )
        return ProblemInstance(grid, nets)
    raise GenerationError(
        f"could not place {num_nets} nets on {width}x{height} at density {obstacle_density} "
        f"after {max_retries} attempts"
    )


# --------------------------------------------------------------------------
# Validation

@dataclass
class ValidationReport:
    connected: list[bool]
    errors: list[str] = field(default_factory=list)
    total_length: Optional[int] = None

    @property
    def valid(self) -> bool:
        return not self.errors

    @property
    def all_connected(self) -> bool:
        return all(self.connected)


def validate_outcome(instance: ProblemInstance, outcome: RoutingOutcome) -> ValidationReport:
    """Check endpoints, adjacency, obstacle avoidance and vertex-disjointness.

    Unconnected nets (``None`` paths) are not errors; the report is valid iff
    every present path is well-formed and no two paths share a vertex.
    """
    grid = instance.grid
    report = ValidationReport(connected=[False] * instance.num_nets)
    if len(outcome.paths) != instance.num_nets:
        report.errors.append(f"outcome has {len(outcome.paths)} paths for {instance.num_nets} nets")
        return report
    owner: dict[Vertex, int] = {p: i for i, n in enumerate(instance.nets) for p in n.pins}
    for i, (net, path) in enumerate(zip(instance.nets, outcome.paths)):
        if path is None:
            continue
        ok = True
        if not path or path[0] != net.start or path[-1] != net.end:
            report.errors.append(f"net {i}: path endpoints do not match pins")
            ok = False
        if len(set(path)) != len(path):
            report.errors.append(f"net {i}: path revisits a vertex")
            ok = False
        for a, b in zip(path, path[1:]):
            if manhattan(a, b) != 1:
                report.errors.append(f"net {i}: step {tuple(a)}->{tuple(b)} is not a grid edge")
                ok = False
                break
        for v in path:
            if not grid.in_bounds(v):
                report.errors.append(f"net {i}: vertex {tuple(v)} out of bounds")
                ok = False
            elif v in grid.obstacles:
                report.errors.append(f"net {i}: vertex {tuple(v)} is an obstacle")
                ok = False
            if v in owner and owner[v] != i:
                report.errors.append(f"net {i} uses vertex {tuple(v)} owned by net {owner[v]}")
                ok = False
            owner.setdefault(v, i)
        report.connected[i] = ok
    if report.valid and all(report.connected):
        report.total_length = sum(path_length(p) for p in outcome.paths)
    return report
