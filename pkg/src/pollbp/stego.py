"""Blocking-set ("stegosaurus") construction and structural verification.

The renormalized lattice has cells of pitch 2L+1 (L = ``half_width``).  A
vertex is *nice* when it is closed and no active vertex lies within l-inf
distance ``clearance`` of its three axis segments of reach 36L.  A cell is
*good* when each of its eight subcubes holds a nice vertex, *swell* when each
subcube holds a collinear pair of nice vertices per coordinate direction.

Given a shell of good cells, one or two nice vertices are selected per shell
site (the ``generators``), keystone cubes of side 20L+1 are placed at the six
axis poles, and the blocking set Z is assembled as a union of boxes: one
protection cuboid per octant generator (possibly anchored past a coordinate
plane when a spine site protects it), thickness-1 plates (or collinear-pair
slabs in the standard-pairs model) for spine generators, and a box per
keystone corner.

``verify_structure`` checks, for every corner/edge vertex of every box, the
five sufficient conditions under which exposed vertices of Z are safe, plus
the direct hypotheses of the comparison proposition (fully exposed vertices
closed; no initial occupation near doubly exposed vertices).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, TextIO

import numpy as np
from scipy import ndimage

from . import shell as shell_mod
from .lattice import BoxUnion, Cuboid, Vertex, ORIGIN, sign, vertex_sign

SUBCUBE_SIGNS = tuple(itertools.product((1, -1), repeat=3))


class StructureError(ValueError):
    """Raised when the construction's structural preconditions fail."""


@dataclass(frozen=True)
class ScaleParams:
    """Renormalization scales.

    ``half_width`` is L (cells have pitch 2L+1, axis segments reach 36L,
    keystones have side 20L+1); ``clearance`` is the l-inf protection radius
    around nice vertices' segments.  The structural lemmas guarantee keystone
    edge coverage only for half_width >= 13; smaller values are legitimate at
    fixture scale and are checked directly by verify_structure.
    """

    half_width: int
    clearance: int
    model: str = "modified"

    def __post_init__(self) -> None:
        if self.half_width < 1:
            raise ValueError("half_width must be positive")
        if self.clearance < 1:
            raise ValueError("clearance must be at least 1")
        if self.model not in ("modified", "standard_pairs"):
            raise ValueError(f"unknown model {self.model!r}")

    @property
    def pitch(self) -> int:
        return 2 * self.half_width + 1

    @property
    def segment_reach(self) -> int:
        return 36 * self.half_width


# --- niceness ----------------------------------------------------------------

def axis_segments(u: Vertex, reach: int) -> tuple[Cuboid, Cuboid, Cuboid]:
    """The three axis-aligned segments of the given reach centered at u."""
    x, y, z = u
    return (
        Cuboid((x - reach, y, z), (x + reach, y, z)),
        Cuboid((x, y - reach, z), (x, y + reach, z)),
        Cuboid((x, y, z - reach), (x, y, z + reach)),
    )


def clearance_slabs(u: Vertex, params: ScaleParams) -> tuple[Cuboid, ...]:
    m = params.clearance
    return tuple(seg.expand(m) for seg in axis_segments(u, params.segment_reach))


def is_viable(u: Vertex, field_, params: ScaleParams) -> bool:
    """No active vertex within l-inf clearance of u's axis segments."""
    return not any(field_.any_active_in(slab) for slab in clearance_slabs(u, params))


def is_nice(u: Vertex, field_, params: ScaleParams) -> bool:
    return field_.is_closed(u) and is_viable(u, field_, params)


# --- renormalized cells ---------------------------------------------------------

def cell_box(site: Vertex, params: ScaleParams) -> Cuboid:
    L, pitch = params.half_width, params.pitch
    c = (pitch * site[0], pitch * site[1], pitch * site[2])
    return Cuboid((c[0] - L, c[1] - L, c[2] - L), (c[0] + L, c[1] + L, c[2] + L))


def subcube(site: Vertex, signs: tuple[int, int, int], params: ScaleParams) -> Cuboid:
    """The signs-subcube of the cell: side-L block strictly off the center planes."""
    L, pitch = params.half_width, params.pitch
    lo, hi = [], []
    for c, s in zip(site, signs):
        base = pitch * c
        if s > 0:
            lo.append(base + 1)
            hi.append(base + L)
        else:
            lo.append(base - L)
            hi.append(base - 1)
    return Cuboid(tuple(lo), tuple(hi))


def subcube_center(site: Vertex, signs: tuple[int, int, int], params: ScaleParams) -> Vertex:
    L, pitch = params.half_width, params.pitch
    off = (L + 1) // 2
    return tuple(pitch * c + s * off for c, s in zip(site, signs))  # type: ignore[return-value]


def good_box_witnesses(site: Vertex, field_, params: ScaleParams,
                       nice_memo: dict | None = None) -> dict:
    """Per-subcube lexicographically smallest nice vertex (None if absent)."""
    out = {}
    for signs in SUBCUBE_SIGNS:
        out[signs] = _nice_in(subcube(site, signs, params), field_, params, nice_memo)
    return out


def _nice_in(box: Cuboid, field_, params: ScaleParams,
             nice_memo: dict | None = None) -> Vertex | None:
    for u in field_.closed_in(box):
        if _nice_cached(u, field_, params, nice_memo):
            return u
    return None


def _nice_cached(u: Vertex, field_, params: ScaleParams, memo: dict | None) -> bool:
    if memo is None:
        return is_viable(u, field_, params)
    got = memo.get(u)
    if got is None:
        got = memo[u] = is_viable(u, field_, params)
    return got


def is_good_box(site: Vertex, field_, params: ScaleParams,
                nice_memo: dict | None = None) -> bool:
    return all(v is not None
               for v in good_box_witnesses(site, field_, params, nice_memo).values())


def swell_box_witnesses(site: Vertex, field_, params: ScaleParams,
                        nice_memo: dict | None = None) -> dict:
    """Per (subcube, axis): canonical collinear pair of nice vertices, or None.

    The pair is the lexicographically first line (by the two cross
    coordinates) holding two nice vertices, with its two smallest members.
    """
    out = {}
    for signs in SUBCUBE_SIGNS:
        box = subcube(site, signs, params)
        nice = [u for u in field_.closed_in(box)
                if _nice_cached(u, field_, params, nice_memo)]
        for axis in range(3):
            i, j = [a for a in range(3) if a != axis]
            lines: dict[tuple[int, int], list[Vertex]] = {}
            for u in nice:
                lines.setdefault((u[i], u[j]), []).append(u)
            best = None
            for key in sorted(lines):
                if len(lines[key]) >= 2:
                    pair = sorted(lines[key], key=lambda v: v[axis])[:2]
                    best = (pair[0], pair[1])
                    break
            out[(signs, axis)] = best
    return out


def is_swell_box(site: Vertex, field_, params: ScaleParams,
                 nice_memo: dict | None = None) -> bool:
    return all(v is not None
               for v in swell_box_witnesses(site, field_, params, nice_memo).values())


def goodness_coloring(field_, params: ScaleParams,
                      nice_memo: dict | None = None) -> shell_mod.Coloring:
    """Shell coloring for the pipeline: black iff the cell is good (or swell
    in the standard-pairs model)."""
    memo = {} if nice_memo is None else nice_memo
    test = is_swell_box if params.model == "standard_pairs" else is_good_box
    return shell_mod.coloring_from(
        lambda site: test(site, field_, params, memo), memoize=True)


# --- keystones ------------------------------------------------------------------

def keystone_centers(radius: int, params: ScaleParams) -> list[Vertex]:
    d = radius * params.pitch
    return [(d, 0, 0), (-d, 0, 0), (0, d, 0), (0, -d, 0), (0, 0, d), (0, 0, -d)]


def keystone_corners(center: Vertex, params: ScaleParams) -> list[Vertex]:
    r = 10 * params.half_width
    return sorted((center[0] + sx * r, center[1] + sy * r, center[2] + sz * r)
                  for sx, sy, sz in itertools.product((1, -1), repeat=3))


def all_keystone_corners(radius: int, params: ScaleParams) -> dict[Vertex, list[Vertex]]:
    return {c: keystone_corners(c, params) for c in keystone_centers(radius, params)}


def keystones_nice(radius: int, field_, params: ScaleParams,
                   nice_memo: dict | None = None) -> bool:
    return all(field_.is_closed(u) and _nice_cached(u, field_, params, nice_memo)
               for corners in all_keystone_corners(radius, params).values()
               for u in corners)


# --- selection -------------------------------------------------------------------

@dataclass(frozen=True)
class Generator:
    """One chosen nice vertex (or collinear pair) and the box it generates."""

    kind: str                     # 'octant' | 'spine' | 'keystone'
    vertex: Vertex                # outermost nice vertex of the box
    partner: Vertex | None = None  # inner pair member (standard-pairs spine)
    site: Vertex | None = None    # generating shell site
    subcube: tuple | None = None  # sign pattern of the generating subcube
    box: Cuboid | None = None


def selection_plan(site: Vertex) -> list[tuple[str, tuple[int, int, int]]]:
    """Which subcubes of a shell site's cell contribute generators.

    Octant sites (all coordinates nonzero, at least two of size >= 4) take one
    nice vertex in the subcube opposite their sign pattern.  Spine sites (one
    zero coordinate, both others >= 4) take one per subcube on either side of
    the plane, matching their signs elsewhere.  Sites with two or more small
    coordinates contribute nothing.
    """
    small = sum(1 for c in site if abs(c) < 4)
    if small >= 2:
        return []
    zeros = [i for i in range(3) if site[i] == 0]
    if not zeros:
        signs = tuple(-sign(c) for c in site)
        return [("octant", signs)]
    k = zeros[0]
    base = [sign(c) for c in site]
    plus, minus = base.copy(), base.copy()
    plus[k], minus[k] = 1, -1
    return [("spine", tuple(plus)), ("spine", tuple(minus))]


def select_generators(sites: Iterable[Vertex], field_, params: ScaleParams,
                      nice_memo: dict | None = None) -> list[Generator]:
    """Pick the generating nice vertices for every contributing shell site."""
    memo = {} if nice_memo is None else nice_memo
    pairs_mode = params.model == "standard_pairs"
    out = []
    for site in sorted(sites):
        for kind, signs in selection_plan(site):
            if kind == "spine" and pairs_mode:
                axis = [i for i in range(3) if site[i] == 0][0]
                wit = swell_box_witnesses(site, field_, params, memo)[(signs, axis)]
                if wit is None:
                    raise StructureError(
                        f"no collinear nice pair in subcube {signs} of {site}")
                near, far = sorted(wit, key=lambda v: abs(v[axis]))
                out.append(Generator(kind, far, near, site, signs))
            else:
                u = _nice_in(subcube(site, signs, params), field_, params, memo)
                if u is None:
                    raise StructureError(f"no nice vertex in subcube {signs} of {site}")
                out.append(Generator(kind, u, None, site, signs))
    return out


def choose_protectors(generators: list[Generator], sites: frozenset,
                      ) -> dict[tuple[Vertex, Vertex], Vertex]:
    """For each octant generator's site, one protector per protection vector."""
    choices: dict[tuple[Vertex, Vertex], Vertex] = {}
    for g in generators:
        if g.kind != "octant":
            continue
        for a in shell_mod.protection_vectors(g.site):
            key = (g.site, a)
            if key in choices:
                continue
            y = shell_mod.find_protector(g.site, a, sites)
            if y is None:
                raise StructureError(f"site {g.site} has no protector for {a}")
            choices[key] = y
    return choices


# --- assembly --------------------------------------------------------------------

@dataclass
class Stegosaurus:
    """The assembled blocking set with all of its generating data."""

    radius: int
    params: ScaleParams
    generators: tuple[Generator, ...]          # every generator carries its box
    shell_sites: frozenset
    protector_choices: dict
    _union: BoxUnion | None = field(default=None, repr=False)

    def boxes(self) -> list[Cuboid]:
        return [g.box for g in self.generators]

    def box_union(self) -> BoxUnion:
        if self._union is None:
            self._union = BoxUnion(self.boxes())
        return self._union

    def contains(self, v: Vertex) -> bool:
        return self.box_union().contains(v)

    def inner_radius(self) -> int:
        """Half-side of the axis box guaranteed inside Z by the diagonal hits."""
        return self.params.pitch * (self.radius - 1) // 3

    def keystone_corner_map(self) -> dict[Vertex, list[Vertex]]:
        return all_keystone_corners(self.radius, self.params)


def _anchor_vertex(g: Generator, axis: int) -> Vertex:
    """Pair member whose coordinate anchors boxes protected by this spine
    generator: the one farther from the coordinate plane (verify_structure
    arbitrates this choice)."""
    return g.vertex if g.partner is None else \
        max((g.vertex, g.partner), key=lambda v: abs(v[axis]))


def assemble(sites: frozenset, generators: list[Generator],
             keystone_gens: list[Generator],
             protector_choices: dict, params: ScaleParams,
             radius: int) -> Stegosaurus:
    """Assign every generator its box and take the union.

    Octant generators get the cuboid from the origin, with one coordinate
    re-anchored at a spine generator's level when exactly one chosen protector
    sits on the spine.  Spine generators get plates (or pair slabs), keystone
    corners get origin boxes.
    """
    spine_index: dict[tuple[Vertex, tuple], Generator] = {}
    for g in generators:
        if g.kind == "spine":
            spine_index[(g.site, g.subcube)] = g

    done = []
    for g in generators:
        if g.kind == "spine":
            axis = [i for i in range(3) if g.site[i] == 0][0]
            outer = g.vertex
            near = g.partner if g.partner is not None else g.vertex
            anchor = [0, 0, 0]
            anchor[axis] = near[axis]
            box = Cuboid.spanning(tuple(anchor), outer)
            done.append(replace(g, box=box))
            continue
        # octant generator: count spine protectors among this site's choices
        spine_hits = []
        for a in shell_mod.protection_vectors(g.site):
            y = protector_choices[(g.site, a)]
            if 0 in y:
                spine_hits.append((a, y))
        if not spine_hits:
            box = Cuboid.spanning(ORIGIN, g.vertex)
        elif len(spine_hits) == 1:
            a, y = spine_hits[0]
            zeros = [i for i in range(3) if y[i] == 0]
            if len(zeros) != 1:
                raise StructureError(f"spine protector {y} of {g.site} has "
                                     f"{len(zeros)} zero coordinates")
            k = zeros[0]
            signs = list(vertex_sign(y))
            signs[k] = -sign(g.site[k])
            v_gen = spine_index.get((y, tuple(signs)))
            if v_gen is None:
                raise StructureError(
                    f"spine protector {y} of {g.site} has no generator in "
                    f"subcube {tuple(signs)}")
            anchor = [0, 0, 0]
            anchor[k] = _anchor_vertex(v_gen, k)[k]
            box = Cuboid.spanning(tuple(anchor), g.vertex)
        else:
            raise StructureError(
                f"site {g.site}: {len(spine_hits)} chosen protectors on the spine")
        done.append(replace(g, box=box))

    for g in keystone_gens:
        done.append(replace(g, box=Cuboid.spanning(ORIGIN, g.vertex)))

    return Stegosaurus(radius, params, tuple(done), sites, dict(protector_choices))


def keystone_generators(radius: int, params: ScaleParams) -> list[Generator]:
    out = []
    for center, corners in sorted(all_keystone_corners(radius, params).items()):
        for u in corners:
            out.append(Generator("keystone", u, None, None, None))
    return out


def build_structure(sites: frozenset, field_, params: ScaleParams, radius: int,
                    nice_memo: dict | None = None) -> Stegosaurus:
    """Full selection + protector choice + assembly from a verified shell."""
    memo = {} if nice_memo is None else nice_memo
    gens = select_generators(sites, field_, params, memo)
    choices = choose_protectors(gens, sites)
    return assemble(sites, gens, keystone_generators(radius, params),
                    choices, params, radius)


# --- exposure --------------------------------------------------------------------

def coordinate_exposure(zset, x: Vertex) -> int:
    """Number of coordinates in which x has a neighbor outside the set."""
    contains = _containment(zset)
    if not contains(x):
        raise ValueError(f"{x} is not in the set")
    count = 0
    for i in range(3):
        lo = list(x); lo[i] -= 1
        hi = list(x); hi[i] += 1
        if not contains(tuple(lo)) or not contains(tuple(hi)):
            count += 1
    return count


def neighbor_exposure(zset, x: Vertex) -> int:
    """Total number of neighbors of x outside the set."""
    contains = _containment(zset)
    if not contains(x):
        raise ValueError(f"{x} is not in the set")
    count = 0
    for i in range(3):
        lo = list(x); lo[i] -= 1
        hi = list(x); hi[i] += 1
        count += (not contains(tuple(lo))) + (not contains(tuple(hi)))
    return count


def _containment(zset) -> Callable[[Vertex], bool]:
    if isinstance(zset, BoxUnion):
        return zset.contains
    if isinstance(zset, Cuboid):
        return zset.contains
    if callable(zset):
        return zset
    return zset.__contains__


def exposure_grids(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate exposure and neighbor exposure arrays (valid on mask cells)."""
    padded = np.zeros(tuple(s + 2 for s in mask.shape), dtype=bool)
    padded[1:-1, 1:-1, 1:-1] = mask
    eta = np.zeros(mask.shape, dtype=np.uint8)
    etp = np.zeros(mask.shape, dtype=np.uint8)
    core = (slice(1, -1),) * 3
    shifts = [
        (padded[2:, 1:-1, 1:-1], padded[:-2, 1:-1, 1:-1]),
        (padded[1:-1, 2:, 1:-1], padded[1:-1, :-2, 1:-1]),
        (padded[1:-1, 1:-1, 2:], padded[1:-1, 1:-1, :-2]),
    ]
    for up, down in shifts:
        out_up = ~up
        out_down = ~down
        eta += out_up | out_down
        etp += out_up
        etp += out_down
    return eta, etp


# --- structural verification -------------------------------------------------------

@dataclass
class StructureReport:
    boxes_checked: int
    condition_violations: list = field(default_factory=list)   # (generator vertex, w)
    exposed_unclosed: list = field(default_factory=list)       # exposure>=3, not closed
    occupied_near_exposed: list = field(default_factory=list)  # exposure>=2, occupied nearby
    not_nice: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.condition_violations or self.exposed_unclosed
                    or self.occupied_near_exposed or self.not_nice)

    def summary(self) -> str:
        return (f"boxes={self.boxes_checked} "
                f"condition_violations={len(self.condition_violations)} "
                f"exposed_unclosed={len(self.exposed_unclosed)} "
                f"occupied_near_exposed={len(self.occupied_near_exposed)} "
                f"not_nice={len(self.not_nice)}")


def _corner_edge_points(box: Cuboid) -> np.ndarray:
    """All vertices of the box extremal in at least two coordinates."""
    runs = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        k = 3 - i - j
        kr = np.arange(box.lo[k], box.hi[k] + 1, dtype=np.int64)
        for ci in {box.lo[i], box.hi[i]}:
            for cj in {box.lo[j], box.hi[j]}:
                pts = np.empty((len(kr), 3), dtype=np.int64)
                pts[:, i] = ci
                pts[:, j] = cj
                pts[:, k] = kr
                runs.append(pts)
    allpts = np.concatenate(runs)
    return np.unique(allpts, axis=0)


def _extremal_counts(pts: np.ndarray, box: Cuboid) -> np.ndarray:
    lo = np.array(box.lo, dtype=np.int64)
    hi = np.array(box.hi, dtype=np.int64)
    return ((pts == lo) | (pts == hi)).sum(axis=1)


def _within_segments(pts: np.ndarray, u: Vertex, reach: int) -> np.ndarray:
    diff = pts - np.array(u, dtype=np.int64)
    return ((diff != 0).sum(axis=1) <= 1) & (np.abs(diff).max(axis=1) <= reach)


def verify_structure(stego: Stegosaurus, field_, *,
                     nice_memo: dict | None = None) -> StructureReport:
    """Exhaustive scan of the sufficient conditions and proposition hypotheses."""
    params = stego.params
    L = params.half_width
    ten_l = 10 * L
    outer_limit = params.pitch * stego.radius + ten_l
    reach = params.segment_reach
    union = stego.box_union()
    bbox = union.bounding
    origin = np.array(bbox.lo, dtype=np.int64)

    # condition (v) cover: cells interior (in >= 2 coordinates) to a non-keystone box
    cover = np.zeros(bbox.sides, dtype=bool)
    for g in stego.generators:
        if g.kind == "keystone":
            continue
        lo = np.array(g.box.lo) - origin
        hi = np.array(g.box.hi) - origin
        for i, j in ((0, 1), (0, 2), (1, 2)):
            k = 3 - i - j
            sl = [None, None, None]
            sl[i] = slice(lo[i] + 1, hi[i])
            sl[j] = slice(lo[j] + 1, hi[j])
            sl[k] = slice(lo[k], hi[k] + 1)
            cover[tuple(sl)] = True

    violations = []
    for g in stego.generators:
        pts = _corner_edge_points(g.box)
        abspts = np.abs(pts)
        strict = (abspts < ten_l).sum(axis=1)
        equal = (abspts == ten_l).sum(axis=1)
        linf = abspts.max(axis=1)
        cond1 = (strict >= 2) | ((equal >= 1) & (strict >= 1) & (linf < outer_limit))

        u_arr = np.array(g.vertex, dtype=np.int64)
        cond2 = (pts == u_arr).all(axis=1)
        in_j = _within_segments(pts, g.vertex, reach)
        if g.partner is not None:
            cond2 |= (pts == np.array(g.partner, dtype=np.int64)).all(axis=1)
            in_j |= _within_segments(pts, g.partner, reach)

        extremal = _extremal_counts(pts, g.box)
        if g.kind == "keystone":
            cond34 = in_j
        else:
            cond34 = (extremal == 2) & in_j

        idx = pts - origin
        cond5 = cover[idx[:, 0], idx[:, 1], idx[:, 2]]

        bad = ~(cond1 | cond2 | cond34 | cond5)
        for w in pts[bad]:
            violations.append((g.vertex, (int(w[0]), int(w[1]), int(w[2]))))

    # proposition hypotheses on Z itself
    mask = union.mask()
    eta, etp = exposure_grids(mask)
    exposure = etp if params.model == "standard_pairs" else eta

    closed_mask = field_.closed_mask(bbox)
    h1 = mask & (exposure >= 3) & ~closed_mask
    exposed_unclosed = [tuple(int(c) for c in w + origin) for w in np.argwhere(h1)]

    occupied_near = []
    occ_pts = field_.occupied_points(bbox)
    if len(occ_pts):
        occ_mask = np.zeros(bbox.sides, dtype=bool)
        rel = occ_pts - origin
        occ_mask[rel[:, 0], rel[:, 1], rel[:, 2]] = True
        m = params.clearance
        dil = ndimage.maximum_filter(occ_mask, size=2 * m + 1, mode="constant")
        h2 = mask & (exposure >= 2) & dil
        occupied_near = [tuple(int(c) for c in w + origin) for w in np.argwhere(h2)]

    memo = {} if nice_memo is None else nice_memo
    not_nice = []
    for g in stego.generators:
        for u in (g.vertex, g.partner):
            if u is not None and not (field_.is_closed(u)
                                      and _nice_cached(u, field_, params, memo)):
                not_nice.append(u)

    return StructureReport(
        boxes_checked=len(stego.generators),
        condition_violations=violations,
        exposed_unclosed=sorted(exposed_unclosed),
        occupied_near_exposed=sorted(occupied_near),
        not_nice=sorted(set(not_nice)),
    )


def exposure_box_consistency(stego: Stegosaurus) -> dict:
    """Exposure-vs-box invariants: fully exposed vertices must be box corners,
    doubly exposed ones corners or edges, and vertices with two coordinates
    strictly inside the keystone beams must have exposure <= 1."""
    union = stego.box_union()
    bbox = union.bounding
    origin = np.array(bbox.lo, dtype=np.int64)
    mask = union.mask()
    eta, _ = exposure_grids(mask)

    corner_mask = np.zeros(bbox.sides, dtype=bool)
    edge_mask = np.zeros(bbox.sides, dtype=bool)
    for g in stego.generators:
        pts = _corner_edge_points(g.box)
        counts = _extremal_counts(pts, g.box)
        idx = pts - origin
        corner_mask[idx[counts == 3, 0], idx[counts == 3, 1], idx[counts == 3, 2]] = True
        edge_mask[idx[counts == 2, 0], idx[counts == 2, 1], idx[counts == 2, 2]] = True

    eta3_not_corner = mask & (eta == 3) & ~corner_mask
    eta2_not_edge = mask & (eta == 2) & ~(corner_mask | edge_mask)

    ten_l = 10 * stego.params.half_width
    coords = [np.abs(np.arange(bbox.lo[i], bbox.hi[i] + 1, dtype=np.int64))
              for i in range(3)]
    strict = ((coords[0] < ten_l).astype(np.uint8)[:, None, None]
              + (coords[1] < ten_l).astype(np.uint8)[None, :, None]
              + (coords[2] < ten_l).astype(np.uint8)[None, None, :])
    axis_bad = mask & (strict >= 2) & (eta >= 2)

    return {
        "eta3_not_corner": int(eta3_not_corner.sum()),
        "eta2_not_corner_or_edge": int(eta2_not_edge.sum()),
        "axis_protection_violations": int(axis_bad.sum()),
    }


# --- JSON dump -----------------------------------------------------------------

def stego_to_dict(stego: Stegosaurus, report: StructureReport | None = None) -> dict:
    gens = []
    for g in stego.generators:
        gens.append({
            "kind": g.kind,
            "vertex": list(g.vertex),
            "partner": list(g.partner) if g.partner else None,
            "site": list(g.site) if g.site else None,
            "subcube": list(g.subcube) if g.subcube else None,
            "box": {"lo": list(g.box.lo), "hi": list(g.box.hi)},
        })
    data = {
        "radius": stego.radius,
        "params": {"half_width": stego.params.half_width,
                   "clearance": stego.params.clearance,
                   "model": stego.params.model},
        "generators": gens,
        "shell_sites": sorted(list(s) for s in stego.shell_sites),
        "protector_choices": [
            {"site": list(site), "vector": list(a), "protector": list(y)}
            for (site, a), y in sorted(stego.protector_choices.items())
        ],
    }
    if report is not None:
        data["report"] = {
            "ok": report.ok,
            "boxes_checked": report.boxes_checked,
            "condition_violations": [[list(u), list(w)]
                                     for u, w in report.condition_violations],
            "exposed_unclosed": [list(w) for w in report.exposed_unclosed],
            "occupied_near_exposed": [list(w) for w in report.occupied_near_exposed],
            "not_nice": [list(w) for w in report.not_nice],
        }
    return data


def write_stego(stego: Stegosaurus, f: TextIO,
                report: StructureReport | None = None,
                meta: dict | None = None) -> None:
    data = stego_to_dict(stego, report)
    if meta:
        data["meta"] = {k: meta[k] for k in sorted(meta)}
    json.dump(data, f, indent=2, sort_keys=True)
    f.write("\n")


def read_stego(f: TextIO) -> Stegosaurus:
    data = json.load(f)
    params = ScaleParams(**data["params"])
    gens = []
    for g in data["generators"]:
        gens.append(Generator(
            kind=g["kind"],
            vertex=tuple(g["vertex"]),
            partner=tuple(g["partner"]) if g["partner"] else None,
            site=tuple(g["site"]) if g["site"] else None,
            subcube=tuple(g["subcube"]) if g["subcube"] else None,
            box=Cuboid(tuple(g["box"]["lo"]), tuple(g["box"]["hi"])),
        ))
    choices = {(tuple(c["site"]), tuple(c["vector"])): tuple(c["protector"])
               for c in data["protector_choices"]}
    sites = frozenset(tuple(s) for s in data["shell_sites"])
    return Stegosaurus(data["radius"], params, tuple(gens), sites, choices)
