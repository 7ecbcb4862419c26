"""Bootstrap cellular automaton on finite regions with a declared exterior.

A configuration assigns one of three states (empty / occupied / closed) to
every vertex of a finite region; everything outside the region is imputed a
single uniform exterior state that never changes.  Evolution is synchronous:
at each round every currently-empty region vertex fires iff the rule is
satisfied against the previous round's occupied set.  Closed vertices never
change and occupation is permanent, so the dynamics reach a fixpoint.

Two engines produce identical results: a frontier-driven sparse engine (only
neighbors of newly occupied vertices are re-examined each round) and a dense
numpy engine used automatically when the region's bounding box is small
enough to rasterize.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, TextIO, Union

import numpy as np

from .lattice import BoxUnion, Cuboid, Vertex, neighbors

DENSE_VOLUME_LIMIT = 2**27


class SiteState(enum.Enum):
    EMPTY = "E"
    OCCUPIED = "O"
    CLOSED = "C"


EMPTY = SiteState.EMPTY
OCCUPIED = SiteState.OCCUPIED
CLOSED = SiteState.CLOSED

Region = Union[Cuboid, frozenset, set, BoxUnion]


@dataclass(frozen=True)
class Rule:
    """Growth rule: variant ('standard' counts occupied neighbors, 'modified'
    counts coordinate directions with an occupied neighbor) at threshold r."""

    variant: str
    threshold: int

    def __post_init__(self) -> None:
        if self.variant not in ("standard", "modified"):
            raise ValueError(f"unknown rule variant {self.variant!r}")
        if self.threshold not in (1, 2, 3):
            raise ValueError("threshold must be 1, 2 or 3")

    @classmethod
    def standard(cls, r: int) -> "Rule":
        return cls("standard", r)

    @classmethod
    def modified(cls, r: int) -> "Rule":
        return cls("modified", r)


# --- region helpers ---------------------------------------------------------

def region_contains(region: Region, v: Vertex) -> bool:
    if isinstance(region, Cuboid):
        return region.contains(v)
    if isinstance(region, BoxUnion):
        return region.contains(v)
    return v in region


def region_bbox(region: Region) -> Cuboid:
    if isinstance(region, Cuboid):
        return region
    if isinstance(region, BoxUnion):
        return region.bounding
    if not region:
        raise ValueError("empty region has no bounding box")
    xs, ys, zs = zip(*region)
    return Cuboid((min(xs), min(ys), min(zs)), (max(xs), max(ys), max(zs)))


def region_vertices(region: Region) -> Iterator[Vertex]:
    if isinstance(region, Cuboid):
        return region.vertices()
    if isinstance(region, BoxUnion):
        return region.vertices()
    return iter(region)


def region_size(region: Region) -> int:
    if isinstance(region, Cuboid):
        return region.volume
    if isinstance(region, BoxUnion):
        return region.size()
    return len(region)


@dataclass(frozen=True)
class Configuration:
    """Finite-region state assignment plus a uniform exterior state.

    ``occupied`` and ``closed`` list the non-empty region vertices; every
    other region vertex is empty.  State queries outside the region resolve
    to ``exterior``.
    """

    region: Region
    occupied: frozenset = frozenset()
    closed: frozenset = frozenset()
    exterior: SiteState = EMPTY

    def state(self, v: Vertex) -> SiteState:
        if not region_contains(self.region, v):
            return self.exterior
        if v in self.closed:
            return CLOSED
        if v in self.occupied:
            return OCCUPIED
        return EMPTY

    def is_occupied(self, v: Vertex) -> bool:
        if region_contains(self.region, v):
            return v in self.occupied
        return self.exterior is OCCUPIED

    def replace(self, **kw) -> "Configuration":
        data = dict(region=self.region, occupied=self.occupied,
                    closed=self.closed, exterior=self.exterior)
        data.update(kw)
        return Configuration(**data)


@dataclass
class EvolutionResult:
    final: Configuration
    occupation_time: dict = field(default_factory=dict)
    rounds: int = 0


def rule_fires(rule: Rule, v: Vertex, occupied_test: Callable[[Vertex], bool]) -> bool:
    """Would an empty vertex v become occupied against this occupied set?"""
    x, y, z = v
    if rule.variant == "standard":
        count = 0
        for nb in neighbors(v):
            if occupied_test(nb):
                count += 1
                if count >= rule.threshold:
                    return True
        return False
    count = 0
    if occupied_test((x - 1, y, z)) or occupied_test((x + 1, y, z)):
        count += 1
    if occupied_test((x, y - 1, z)) or occupied_test((x, y + 1, z)):
        count += 1
    if count >= rule.threshold:
        return True
    if occupied_test((x, y, z - 1)) or occupied_test((x, y, z + 1)):
        count += 1
    return count >= rule.threshold


def evolve(config: Configuration, rule: Rule, *, engine: str = "auto",
           dense_limit: int = DENSE_VOLUME_LIMIT) -> EvolutionResult:
    """Run the synchronous dynamics to their fixpoint.

    ``engine`` is 'auto', 'dense' or 'sparse'; both engines return identical
    final sets and occupation times.
    """
    if engine == "auto":
        try:
            bbox = region_bbox(config.region)
            engine = "dense" if bbox.volume <= dense_limit else "sparse"
        except ValueError:
            engine = "sparse"
    if engine == "dense":
        return _evolve_dense(config, rule)
    if engine == "sparse":
        return _evolve_sparse(config, rule)
    raise ValueError(f"unknown engine {engine!r}")


def evolve_internal(vertices: Iterable[Vertex], states: dict, rule: Rule) -> EvolutionResult:
    """Dynamics internal to an arbitrary vertex set: exterior is empty forever."""
    region = frozenset(vertices)
    occupied = frozenset(v for v in region if states.get(v) is OCCUPIED)
    closed = frozenset(v for v in region if states.get(v) is CLOSED)
    return evolve(Configuration(region, occupied, closed, EMPTY), rule)


def _exterior_adjacent(region: Region) -> Iterator[Vertex]:
    """Region vertices with at least one neighbor outside the region."""
    if isinstance(region, Cuboid):
        yield from region.boundary_vertices()
        return
    for v in region_vertices(region):
        for nb in neighbors(v):
            if not region_contains(region, nb):
                yield v
                break


def _evolve_sparse(config: Configuration, rule: Rule) -> EvolutionResult:
    region = config.region
    occupied = set(config.occupied)
    closed = config.closed
    exterior_occupied = config.exterior is OCCUPIED

    def occ(v: Vertex) -> bool:
        if region_contains(region, v):
            return v in occupied
        return exterior_occupied

    def empty(v: Vertex) -> bool:
        return region_contains(region, v) and v not in occupied and v not in closed

    times = {v: 0 for v in occupied}
    candidates: set[Vertex] = set()
    for v in occupied:
        candidates.update(nb for nb in neighbors(v) if empty(nb))
    if exterior_occupied:
        candidates.update(v for v in _exterior_adjacent(region) if empty(v))

    rounds = 0
    while candidates:
        newly = [v for v in candidates if rule_fires(rule, v, occ)]
        if not newly:
            break
        rounds += 1
        for v in newly:
            occupied.add(v)
            times[v] = rounds
        candidates = set()
        for v in newly:
            candidates.update(nb for nb in neighbors(v) if empty(nb))

    final = config.replace(occupied=frozenset(occupied))
    return EvolutionResult(final, times, rounds)


def _region_mask(region: Region, bbox: Cuboid) -> np.ndarray:
    if isinstance(region, Cuboid):
        return np.ones(bbox.sides, dtype=bool)
    if isinstance(region, BoxUnion):
        return region.mask().copy()
    m = np.zeros(bbox.sides, dtype=bool)
    ox, oy, oz = bbox.lo
    for x, y, z in region:
        m[x - ox, y - oy, z - oz] = True
    return m


def _paint(mask: np.ndarray, pts: Iterable[Vertex], origin: Vertex) -> None:
    ox, oy, oz = origin
    for x, y, z in pts:
        mask[x - ox, y - oy, z - oz] = True


def _evolve_dense(config: Configuration, rule: Rule) -> EvolutionResult:
    bbox = region_bbox(config.region)
    shape = tuple(s + 2 for s in bbox.sides)
    origin = tuple(c - 1 for c in bbox.lo)  # padded-array origin

    region_m = np.zeros(shape, dtype=bool)
    region_m[1:-1, 1:-1, 1:-1] = _region_mask(config.region, bbox)

    occ = np.zeros(shape, dtype=bool)
    clo = np.zeros(shape, dtype=bool)
    if config.exterior is OCCUPIED:
        occ[~region_m] = True
    elif config.exterior is CLOSED:
        clo[~region_m] = True
    _paint(occ, config.occupied, origin)
    _paint(clo, config.closed, origin)

    core = (slice(1, -1),) * 3
    empty = region_m[core] & ~occ[core] & ~clo[core]
    r = rule.threshold
    modified = rule.variant == "modified"

    times = {v: 0 for v in config.occupied}
    rounds = 0
    while True:
        xp = occ[2:, 1:-1, 1:-1]
        xm = occ[:-2, 1:-1, 1:-1]
        yp = occ[1:-1, 2:, 1:-1]
        ym = occ[1:-1, :-2, 1:-1]
        zp = occ[1:-1, 1:-1, 2:]
        zm = occ[1:-1, 1:-1, :-2]
        if modified:
            count = (xp | xm).astype(np.uint8)
            count += (yp | ym)
            count += (zp | zm)
        else:
            count = xp.astype(np.uint8)
            for arr in (xm, yp, ym, zp, zm):
                count += arr
        fires = empty & (count >= r)
        if not fires.any():
            break
        rounds += 1
        occ[core] |= fires
        empty &= ~fires
        ox, oy, oz = bbox.lo
        for x, y, z in np.argwhere(fires):
            times[(int(x) + ox, int(y) + oy, int(z) + oz)] = rounds

    inner = occ[core] & region_m[core]
    ox, oy, oz = bbox.lo
    occupied = frozenset((int(x) + ox, int(y) + oy, int(z) + oz)
                         for x, y, z in np.argwhere(inner))
    final = config.replace(occupied=occupied)
    return EvolutionResult(final, times, rounds)


# --- clusters ----------------------------------------------------------------

def final_clusters(result: EvolutionResult) -> list[frozenset]:
    """Maximal nearest-neighbor-connected components of the final occupied set."""
    return connected_components(result.final.occupied)


def connected_components(vertices: Iterable[Vertex]) -> list[frozenset]:
    remaining = set(vertices)
    out = []
    while remaining:
        seed = remaining.pop()
        comp = {seed}
        queue = deque([seed])
        while queue:
            v = queue.popleft()
            for nb in neighbors(v):
                if nb in remaining:
                    remaining.remove(nb)
                    comp.add(nb)
                    queue.append(nb)
        out.append(frozenset(comp))
    return out


def linf_diameter(cluster: Iterable[Vertex]) -> int:
    pts = list(cluster)
    if not pts:
        return 0
    xs, ys, zs = zip(*pts)
    return max(max(xs) - min(xs), max(ys) - min(ys), max(zs) - min(zs))


def bounding_cuboid(cluster: Iterable[Vertex]) -> Cuboid:
    xs, ys, zs = zip(*cluster)
    return Cuboid((min(xs), min(ys), min(zs)), (max(xs), max(ys), max(zs)))


# --- grid-snapshot format ----------------------------------------------------
#
#   # key=value            (optional metadata comment lines)
#   region x0 y0 z0 x1 y1 z1 exterior E|O|C
#   x y z O                (one line per non-empty vertex, lexicographic)

def write_snapshot(config: Configuration, f: TextIO, meta: dict | None = None) -> None:
    if not isinstance(config.region, Cuboid):
        raise ValueError("snapshot format requires a box region")
    for key in sorted(meta or {}):
        f.write(f"# {key}={meta[key]}\n")
    lo, hi = config.region.lo, config.region.hi
    f.write(f"region {lo[0]} {lo[1]} {lo[2]} {hi[0]} {hi[1]} {hi[2]} "
            f"exterior {config.exterior.value}\n")
    rows = [(v, "O") for v in config.occupied] + [(v, "C") for v in config.closed]
    for (x, y, z), s in sorted(rows):
        f.write(f"{x} {y} {z} {s}\n")


def read_snapshot(f: TextIO) -> Configuration:
    header = None
    for line in f:
        line = line.strip()
        if line and not line.startswith("#"):
            header = line
            break
    if header is None:
        raise ValueError("snapshot has no header line")
    parts = header.split()
    if len(parts) != 9 or parts[0] != "region" or parts[7] != "exterior":
        raise ValueError(f"bad snapshot header: {header!r}")
    nums = [int(p) for p in parts[1:7]]
    region = Cuboid((nums[0], nums[1], nums[2]), (nums[3], nums[4], nums[5]))
    exterior = SiteState(parts[8])
    occupied, closed = set(), set()
    for line in f:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        x, y, z, s = line.split()
        v = (int(x), int(y), int(z))
        if s == "O":
            occupied.add(v)
        elif s == "C":
            closed.add(v)
        else:
            raise ValueError(f"bad state code {s!r}")
    return Configuration(region, frozenset(occupied), frozenset(closed), exterior)
