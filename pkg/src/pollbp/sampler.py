"""Random and planted initial configurations.

All randomness is the counter-based per-vertex construction from ``rng``;
a vertex's state is a pure function of (seed, mode, vertex), so overlapping
regions, iteration order and thread count can never change it.

Sampling law (iid and two-stage share it; the two-stage form also exposes
the active set):

    closed(v)   iff  U_closed(v)  < q
    active(v)   iff  U_active(v)  < p / (1 - q)
    occupied(v) =    active(v) and not closed(v)

which gives the product marginals (q, p, 1-p-q) and makes the occupied set
pointwise increasing in p under a shared seed.  The ``occupied_first``
coupling realizes the same product law as

    occupied(v) iff  U_of(v) < p
    closed(v)   iff  not occupied(v) and U_closed(v) < q / (1 - p)

making the closed set pointwise increasing and the occupied set pointwise
decreasing in q.  Big obstacles: centers are a product(q) field, a vertex is
closed iff a center lies within l1 distance 1, and open vertices are occupied
independently with probability p.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from . import rng, shell as shell_mod, stego as stego_mod
from .dynamics import EMPTY, Configuration, SiteState, region_vertices
from .lattice import Cuboid, Vertex, neighbors

_CHUNK = 1 << 21  # max points evaluated per vectorized batch

MODES = ("iid", "two_stage", "big_obstacles")


@dataclass(frozen=True)
class SampleParams:
    p: float
    q: float
    mode: str = "iid"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.q <= 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.mode in ("iid", "two_stage") and self.p + self.q > 1.0 + 1e-12:
            raise ValueError("need p + q <= 1 for iid/two-stage sampling")


def _box_chunks(box: Cuboid) -> Iterator[np.ndarray]:
    """(k, 3) coordinate arrays covering the box in lexicographic order."""
    (x0, y0, z0), (x1, y1, z1) = box.lo, box.hi
    ny, nz = y1 - y0 + 1, z1 - z0 + 1
    plane = ny * nz
    step = max(1, _CHUNK // max(plane, 1))
    ys = np.arange(y0, y1 + 1, dtype=np.int64)
    zs = np.arange(z0, z1 + 1, dtype=np.int64)
    for xa in range(x0, x1 + 1, step):
        xs = np.arange(xa, min(xa + step, x1 + 1), dtype=np.int64)
        grid = np.stack(np.meshgrid(xs, ys, zs, indexing="ij"), axis=-1)
        yield grid.reshape(-1, 3)


def _tuples(pts: np.ndarray) -> list[Vertex]:
    return [(int(a), int(b), int(c)) for a, b, c in pts]


class StateField:
    """Query surface over an unbounded deterministic initial configuration."""

    def is_closed(self, v: Vertex) -> bool:
        raise NotImplementedError

    def is_active(self, v: Vertex) -> bool:
        raise NotImplementedError

    def is_occupied(self, v: Vertex) -> bool:
        raise NotImplementedError

    def closed_points(self, box: Cuboid) -> np.ndarray:
        raise NotImplementedError

    def occupied_points(self, box: Cuboid) -> np.ndarray:
        raise NotImplementedError

    def active_points(self, box: Cuboid) -> np.ndarray:
        raise NotImplementedError

    # derived helpers -------------------------------------------------------

    def closed_in(self, box: Cuboid) -> list[Vertex]:
        return _tuples(self.closed_points(box))

    def any_active_in(self, box: Cuboid) -> bool:
        return len(self.active_points(box)) > 0

    def any_occupied_in(self, box: Cuboid) -> bool:
        return len(self.occupied_points(box)) > 0

    def closed_mask(self, box: Cuboid) -> np.ndarray:
        mask = np.zeros(box.sides, dtype=bool)
        pts = self.closed_points(box)
        if len(pts):
            rel = pts - np.array(box.lo, dtype=np.int64)
            mask[rel[:, 0], rel[:, 1], rel[:, 2]] = True
        return mask

    def state_counts(self, box: Cuboid) -> tuple[int, int, int]:
        """(closed, occupied, empty) counts over the box."""
        n_closed = len(self.closed_points(box))
        n_occ = len(self.occupied_points(box))
        return n_closed, n_occ, box.volume - n_closed - n_occ

    def sample(self, region, exterior: SiteState = EMPTY) -> Configuration:
        if isinstance(region, Cuboid):
            occupied = frozenset(_tuples(self.occupied_points(region)))
            closed = frozenset(_tuples(self.closed_points(region)))
        else:
            verts = list(region_vertices(region))
            occupied = frozenset(v for v in verts if self.is_occupied(v))
            closed = frozenset(v for v in verts if self.is_closed(v))
            region = frozenset(verts)
        return Configuration(region, occupied, closed, exterior)

    def active_set(self, region) -> frozenset:
        if isinstance(region, Cuboid):
            return frozenset(_tuples(self.active_points(region)))
        return frozenset(v for v in region_vertices(region) if self.is_active(v))


class RandomField(StateField):
    """Counter-based random configuration for one of the sampling modes."""

    def __init__(self, params: SampleParams, coupling: str = "two_stage"):
        if coupling not in ("two_stage", "occupied_first"):
            raise ValueError(f"unknown coupling {coupling!r}")
        if coupling == "occupied_first" and params.mode == "big_obstacles":
            raise ValueError("occupied-first coupling applies to iid/two-stage only")
        self.params = params
        self.coupling = coupling
        p, q = params.p, params.q
        self._active_threshold = p / (1.0 - q) if q < 1.0 else (1.0 if p > 0 else 0.0)
        self._closed_cond_threshold = q / (1.0 - p) if p < 1.0 else 0.0

    # scalar queries ---------------------------------------------------------

    def _u(self, tag: int, v: Vertex) -> float:
        return rng.point_uniform(self.params.seed, tag, *v)

    def is_closed(self, v: Vertex) -> bool:
        p = self.params
        if p.mode == "big_obstacles":
            return any(self._u(rng.TAG_CENTER, w) < p.q for w in (v, *neighbors(v)))
        if self.coupling == "occupied_first":
            return not self.is_occupied(v) \
                and self._u(rng.TAG_CLOSED, v) < self._closed_cond_threshold
        return self._u(rng.TAG_CLOSED, v) < p.q

    def is_active(self, v: Vertex) -> bool:
        p = self.params
        if p.mode == "big_obstacles":
            return self._u(rng.TAG_OCCUPY, v) < p.p
        if self.coupling == "occupied_first":
            return self._u(rng.TAG_OCC_FIRST, v) < p.p
        return self._u(rng.TAG_ACTIVE, v) < self._active_threshold

    def is_occupied(self, v: Vertex) -> bool:
        if self.coupling == "occupied_first":
            return self._u(rng.TAG_OCC_FIRST, v) < self.params.p
        return self.is_active(v) and not self.is_closed(v)

    # vectorized queries -----------------------------------------------------

    def _uniforms(self, tag: int, pts: np.ndarray) -> np.ndarray:
        return rng.grid_uniform(self.params.seed, tag, pts)

    def _closed_flags(self, pts: np.ndarray) -> np.ndarray:
        p = self.params
        if p.mode == "big_obstacles":
            flags = self._uniforms(rng.TAG_CENTER, pts) < p.q
            for d in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)):
                flags |= self._uniforms(rng.TAG_CENTER, pts + np.array(d)) < p.q
            return flags
        if self.coupling == "occupied_first":
            occ = self._uniforms(rng.TAG_OCC_FIRST, pts) < p.p
            return ~occ & (self._uniforms(rng.TAG_CLOSED, pts) < self._closed_cond_threshold)
        return self._uniforms(rng.TAG_CLOSED, pts) < p.q

    def _active_flags(self, pts: np.ndarray) -> np.ndarray:
        p = self.params
        if p.mode == "big_obstacles":
            return self._uniforms(rng.TAG_OCCUPY, pts) < p.p
        if self.coupling == "occupied_first":
            return self._uniforms(rng.TAG_OCC_FIRST, pts) < p.p
        return self._uniforms(rng.TAG_ACTIVE, pts) < self._active_threshold

    def _occupied_flags(self, pts: np.ndarray) -> np.ndarray:
        if self.coupling == "occupied_first":
            return self._uniforms(rng.TAG_OCC_FIRST, pts) < self.params.p
        return self._active_flags(pts) & ~self._closed_flags(pts)

    def _collect(self, box: Cuboid, flagger) -> np.ndarray:
        hits = [pts[flagger(pts)] for pts in _box_chunks(box)]
        hits = [h for h in hits if len(h)]
        if not hits:
            return np.empty((0, 3), dtype=np.int64)
        return np.concatenate(hits)

    def closed_points(self, box: Cuboid) -> np.ndarray:
        return self._collect(box, self._closed_flags)

    def occupied_points(self, box: Cuboid) -> np.ndarray:
        return self._collect(box, self._occupied_flags)

    def active_points(self, box: Cuboid) -> np.ndarray:
        return self._collect(box, self._active_flags)

    def any_active_in(self, box: Cuboid) -> bool:
        for pts in _box_chunks(box):
            if self._active_flags(pts).any():
                return True
        return False

    def state_counts(self, box: Cuboid) -> tuple[int, int, int]:
        n_closed = n_occ = 0
        for pts in _box_chunks(box):
            closed = self._closed_flags(pts)
            n_closed += int(closed.sum())
            n_occ += int((self._active_flags(pts) & ~closed).sum())
        return n_closed, n_occ, box.volume - n_closed - n_occ

    def obstacle_centers_in(self, box: Cuboid) -> list[Vertex]:
        if self.params.mode != "big_obstacles":
            raise ValueError("centers exist only in big-obstacles mode")
        return _tuples(self._collect(
            box, lambda pts: self._uniforms(rng.TAG_CENTER, pts) < self.params.q))


class PlantedField(StateField):
    """Deterministic configuration given by explicit vertex sets."""

    def __init__(self, closed: Iterable[Vertex] = (),
                 occupied: Iterable[Vertex] = (),
                 active: Iterable[Vertex] | None = None,
                 centers: Iterable[Vertex] = ()):
        self.closed = frozenset(closed)
        self.occupied = frozenset(occupied)
        self.active = frozenset(self.occupied if active is None else active)
        self.centers = frozenset(centers)
        self._closed_arr = self._as_array(self.closed)
        self._occupied_arr = self._as_array(self.occupied)
        self._active_arr = self._as_array(self.active)

    @staticmethod
    def _as_array(pts: frozenset) -> np.ndarray:
        if not pts:
            return np.empty((0, 3), dtype=np.int64)
        arr = np.array(sorted(pts), dtype=np.int64)
        return arr

    def is_closed(self, v: Vertex) -> bool:
        return v in self.closed

    def is_active(self, v: Vertex) -> bool:
        return v in self.active

    def is_occupied(self, v: Vertex) -> bool:
        return v in self.occupied

    @staticmethod
    def _filter(arr: np.ndarray, members: frozenset, box: Cuboid) -> np.ndarray:
        if not len(arr):
            return arr
        if box.volume <= 4096 and box.volume * 8 < len(arr):
            hits = [v for v in box.vertices() if v in members]
            if not hits:
                return np.empty((0, 3), dtype=np.int64)
            return np.array(hits, dtype=np.int64)
        lo = np.array(box.lo, dtype=np.int64)
        hi = np.array(box.hi, dtype=np.int64)
        keep = ((arr >= lo) & (arr <= hi)).all(axis=1)
        return arr[keep]

    def closed_points(self, box: Cuboid) -> np.ndarray:
        return self._filter(self._closed_arr, self.closed, box)

    def occupied_points(self, box: Cuboid) -> np.ndarray:
        return self._filter(self._occupied_arr, self.occupied, box)

    def active_points(self, box: Cuboid) -> np.ndarray:
        return self._filter(self._active_arr, self.active, box)

    def any_active_in(self, box: Cuboid) -> bool:
        return len(self.active_points(box)) > 0

    def without_closed(self, gone: Iterable[Vertex]) -> "PlantedField":
        gone = set(gone)
        return PlantedField(self.closed - gone, self.occupied, self.active,
                            self.centers)

    def with_occupied(self, extra: Iterable[Vertex]) -> "PlantedField":
        extra = set(extra)
        return PlantedField(self.closed, self.occupied | extra,
                            self.active | extra, self.centers)


# --- sampling entry points ------------------------------------------------------


@dataclass
class TwoStageSample:
    configuration: Configuration
    active: frozenset


def sample_iid(params: SampleParams, region) -> Configuration:
    """Product measure: closed w.p. q, occupied w.p. p, per-vertex deterministic."""
    return RandomField(params).sample(region)


def sample_two_stage(params: SampleParams, region) -> TwoStageSample:
    """Closed (density q) and active (density p/(1-q)) stages; occupied =
    active minus closed.  Marginal law identical to ``sample_iid``."""
    if params.q >= 1.0 and params.p > 0:
        raise ValueError("two-stage sampling needs q < 1")
    f = RandomField(params)
    return TwoStageSample(f.sample(region), f.active_set(region))


def sample_big_obstacles(params: SampleParams, region) -> Configuration:
    if params.mode != "big_obstacles":
        params = SampleParams(params.p, params.q, "big_obstacles", params.seed)
    return RandomField(params).sample(region)


def trial_seed(seed: int, index: int) -> int:
    return rng.derive_seed(seed, index)


# --- planted fixtures -------------------------------------------------------------

def plant_obstacles(centers: Iterable[Vertex]) -> PlantedField:
    """Deterministic big-obstacle configuration: plus-shaped closed sets."""
    centers = frozenset(centers)
    closed = set()
    for c in centers:
        closed.add(c)
        closed.update(neighbors(c))
    return PlantedField(closed=closed, centers=centers)


def _subcube_cluster(site: Vertex, signs: tuple[int, int, int],
                     params: stego_mod.ScaleParams) -> list[Vertex]:
    """Planted nice vertices for one subcube: its center, plus one axis
    neighbor per direction in the standard-pairs model (collinear pairs)."""
    c = stego_mod.subcube_center(site, signs, params)
    if params.model != "standard_pairs":
        return [c]
    if params.half_width < 3:
        raise ValueError("standard-pairs planting needs half_width >= 3")
    pts = [c]
    for axis in range(3):
        d = [0, 0, 0]
        d[axis] = signs[axis]
        pts.append((c[0] + d[0], c[1] + d[1], c[2] + d[2]))
    return pts


def plant_nice_placement(site: Vertex, params: stego_mod.ScaleParams) -> PlantedField:
    closed = set()
    for signs in stego_mod.SUBCUBE_SIGNS:
        closed.update(_subcube_cluster(site, signs, params))
    return PlantedField(closed=closed)


def plant_keystone(center: Vertex, params: stego_mod.ScaleParams) -> PlantedField:
    return PlantedField(closed=stego_mod.keystone_corners(center, params))


def plant_all_black_shell(radius: int, params: stego_mod.ScaleParams,
                          cap: int | None = None) -> PlantedField:
    """Make every cell in the exploration annulus good, so the goodness
    coloring is deterministically black there."""
    cap = shell_mod.default_cap(radius) if cap is None else cap
    closed = set()
    for site in _annulus_sites(radius, cap + 3):
        for signs in stego_mod.SUBCUBE_SIGNS:
            closed.update(_subcube_cluster(site, signs, params))
    return PlantedField(closed=closed)


def _annulus_sites(lo: int, hi: int) -> Iterator[Vertex]:
    for x0 in range(-hi, hi + 1):
        for x1 in range(-(hi - abs(x0)), hi - abs(x0) + 1):
            r = abs(x0) + abs(x1)
            for x2 in range(-(hi - r), hi - r + 1):
                if lo <= r + abs(x2) <= hi:
                    yield (x0, x1, x2)


@dataclass
class FullStegoFixture:
    field: PlantedField
    shell: shell_mod.ShellCandidate
    params: stego_mod.ScaleParams
    radius: int


def full_stego_fixture(radius: int, params: stego_mod.ScaleParams) -> FullStegoFixture:
    """Plant nice vertices at the canonical subcube positions of every shell
    cell of the deterministic (all-black) shell, plus all keystone corners.
    No vertex is active or occupied, so every planted vertex is nice and the
    goodness coloring reproduces the same shell."""
    cand = shell_mod.explore_shell(radius, shell_mod.all_black())
    closed = set()
    for site in cand.sites:
        for signs in stego_mod.SUBCUBE_SIGNS:
            closed.update(_subcube_cluster(site, signs, params))
    for corners in stego_mod.all_keystone_corners(radius, params).values():
        closed.update(corners)
    return FullStegoFixture(PlantedField(closed=closed), cand, params, radius)


_FIXTURES = {
    "all-black-shell": plant_all_black_shell,
    "nice-placement": plant_nice_placement,
    "keystone": plant_keystone,
}


def plant_fixture(fixture_id: str, **geometry) -> PlantedField:
    """Deterministic test fixtures realizing the construction's random events.

    ``fixture_id`` is one of 'all-black-shell', 'nice-placement', 'keystone'
    or 'full-stego' (alias 'full').
    """
    key = fixture_id.lower().replace("_", "-")
    if key in ("full", "full-stego"):
        return full_stego_fixture(**geometry).field
    if key not in _FIXTURES:
        raise ValueError(f"unknown fixture {fixture_id!r}")
    return _FIXTURES[key](**geometry)
