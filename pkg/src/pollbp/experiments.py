"""Monte Carlo studies and finite-scale surrogates.

Final-density scans over (p, q) grids, renormalized-site statistics, cluster
statistics for the threshold-2 internal dynamics, the scheduled search for a
blocking set over disjoint annuli, and the path-blocking check behind the
non-percolation coupling.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np
from scipy import ndimage

from . import rng
from .dynamics import (EMPTY, OCCUPIED, SiteState, Configuration, Rule,
                       evolve)
from .lattice import Cuboid, Vertex
from .sampler import RandomField, SampleParams, StateField, trial_seed
from .shell import COMPLETE, ShellCandidate, explore_shell, verify_shell
from .stego import (ScaleParams, Stegosaurus, build_structure,
                    goodness_coloring, keystones_nice)

# --- density scans ---------------------------------------------------------------


@dataclass(frozen=True)
class ScanSpec:
    p_grid: tuple
    q_grid: tuple
    rule: Rule
    box_side: int
    exterior: SiteState
    trials: int
    seed: int
    mode: str = "iid"

    def __post_init__(self) -> None:
        if not self.p_grid or not self.q_grid:
            raise ValueError("grids must be nonempty")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.box_side < 1:
            raise ValueError("box side must be positive")


@dataclass
class DensityEstimate:
    p: float
    q: float
    exterior: SiteState
    trials: int
    successes: int
    estimate: float
    ci95: float


def centered_box(side: int) -> Cuboid:
    lo = -(side // 2)
    return Cuboid((lo, lo, lo), (lo + side - 1,) * 3)


def _origin_occupied_trial(p: float, q: float, mode: str, seed: int,
                           box: Cuboid, rule: Rule, exterior: SiteState) -> bool:
    f = RandomField(SampleParams(p, q, mode, seed))
    config = f.sample(box, exterior)
    result = evolve(config, rule)
    return (0, 0, 0) in result.final.occupied


def estimate_final_density(spec: ScanSpec, threads: int = 1) -> list[DensityEstimate]:
    """Per grid point: fraction of trials whose fixpoint occupies the origin.

    With an occupied exterior the estimate upper-bounds the infinite-volume
    final density; with an empty exterior it lower-bounds it.  Binomial 95%
    confidence half-width under the normal approximation.
    """
    box = centered_box(spec.box_side)
    points = [(p, q) for p in spec.p_grid for q in spec.q_grid]
    out = []
    for i, (p, q) in enumerate(points):
        seeds = [trial_seed(spec.seed, i * spec.trials + t)
                 for t in range(spec.trials)]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                hits = list(ex.map(
                    lambda s: _origin_occupied_trial(p, q, spec.mode, s, box,
                                                     spec.rule, spec.exterior),
                    seeds))
        else:
            hits = [_origin_occupied_trial(p, q, spec.mode, s, box,
                                           spec.rule, spec.exterior)
                    for s in seeds]
        successes = sum(hits)
        est = successes / spec.trials
        ci = 1.96 * math.sqrt(est * (1.0 - est) / spec.trials)
        out.append(DensityEstimate(p, q, spec.exterior, spec.trials,
                                   successes, est, ci))
    return out


CSV_HEADER = "p,q,rule,variant,box_side,exterior,trials,estimate,ci95,seed"


def write_scan_csv(f: TextIO, spec: ScanSpec, estimates: Iterable[DensityEstimate],
                   meta: dict | None = None) -> None:
    for key in sorted(meta or {}):
        f.write(f"# {key}={meta[key]}\n")
    f.write(CSV_HEADER + "\n")
    for e in estimates:
        f.write(f"{e.p:g},{e.q:g},{spec.rule.threshold},{spec.rule.variant},"
                f"{spec.box_side},{e.exterior.value},{e.trials},"
                f"{e.estimate:.6f},{e.ci95:.6f},{spec.seed}\n")


# --- renormalized sites ------------------------------------------------------------


def block_box(site: Vertex, n: int) -> Cuboid:
    lo = (n * site[0], n * site[1], n * site[2])
    return Cuboid(lo, (lo[0] + n - 1, lo[1] + n - 1, lo[2] + n - 1))


def is_block_open(site: Vertex, field_: StateField, n: int) -> bool:
    """The site's n-box holds no closed vertex and every axis-parallel line
    through it holds an initially occupied vertex."""
    box = block_box(site, n)
    if len(field_.closed_points(box)):
        return False
    occ = field_.occupied_points(box)
    if len(occ) == 0:
        return False
    rel = occ - np.array(box.lo, dtype=np.int64)
    for axis in range(3):
        i, j = [a for a in range(3) if a != axis]
        lines = set(zip(rel[:, i].tolist(), rel[:, j].tolist()))
        if len(lines) < n * n:
            return False
    return True


def is_block_occupied(site: Vertex, occupied, n: int) -> bool:
    """Is the site's n-box fully occupied (against a set or predicate)?"""
    test = occupied if callable(occupied) else occupied.__contains__
    return all(test(v) for v in block_box(site, n).vertices())


@dataclass
class GrowthFixture:
    n: int
    site: Vertex
    filled_neighbors: tuple[Vertex, Vertex]
    occupied: frozenset  # initial occupation inside the site's box


def random_growth_fixture(n: int, seed: int, p: float = 0.2,
                          site: Vertex = (0, 0, 0)) -> GrowthFixture:
    """A random block-open box next to two filled neighbor boxes that differ
    from the site in two distinct coordinates."""
    box = block_box(site, n)
    occ = set()
    for v in box.vertices():
        if rng.point_uniform(seed, rng.TAG_OCCUPY, *v) < p:
            occ.add(v)
    # patch every vacant line so the box is block-open (no closed vertices: q=0)
    lo = box.lo
    for axis in range(3):
        i, j = [a for a in range(3) if a != axis]
        for a in range(n):
            for b in range(n):
                base = [0, 0, 0]
                base[i], base[j] = lo[i] + a, lo[j] + b
                line = []
                for t in range(n):
                    base[axis] = lo[axis] + t
                    line.append(tuple(base))
                if not any(v in occ for v in line):
                    k = rng.point_hash(seed, rng.TAG_TRIAL, axis, a, b) % n
                    occ.add(line[k])
    pick = rng.point_hash(seed, rng.TAG_TRIAL, 7, 0, 0) % 12
    axes = [(0, 1), (0, 2), (1, 2)][pick % 3]
    s1 = 1 if (pick // 3) % 2 == 0 else -1
    s2 = 1 if (pick // 6) % 2 == 0 else -1
    y1 = list(site); y1[axes[0]] += s1
    y2 = list(site); y2[axes[1]] += s2
    return GrowthFixture(n, site, (tuple(y1), tuple(y2)), frozenset(occ))


def check_block_growth(fixture: GrowthFixture) -> bool:
    """Does a block-open site flanked by two filled neighbor boxes (adjacent
    in two different coordinates) become fully occupied under the modified
    threshold-3 rule?"""
    n = fixture.n
    boxes = [block_box(fixture.site, n)] + \
        [block_box(y, n) for y in fixture.filled_neighbors]
    region = set()
    occupied = set(fixture.occupied)
    for b in boxes[1:]:
        occupied.update(b.vertices())
    for b in boxes:
        region.update(b.vertices())
    config = Configuration(frozenset(region), frozenset(occupied),
                           frozenset(), EMPTY)
    result = evolve(config, Rule.modified(3))
    return is_block_occupied(fixture.site, result.final.occupied, n)


# --- threshold-2 cluster statistics --------------------------------------------------


@dataclass
class ClusterStats:
    trials: int
    cuboid_violations: int
    max_side_counts: Counter
    overall_max_side: int


_SIX_CONN = ndimage.generate_binary_structure(3, 1)


def r2_cluster_statistics(p: float, box_side: int, trials: int, seed: int) -> ClusterStats:
    """Modified threshold-2 dynamics internal to a box at pollution q=0:
    per trial, check every final cluster against its bounding cuboid and
    record the largest side length."""
    box = centered_box(box_side)
    violations = 0
    side_counts: Counter = Counter()
    overall = 0
    for t in range(trials):
        f = RandomField(SampleParams(p, 0.0, "iid", trial_seed(seed, t)))
        config = f.sample(box, EMPTY)
        result = evolve(config, Rule.modified(2))
        mask = np.zeros(box.sides, dtype=bool)
        lo = np.array(box.lo, dtype=np.int64)
        if result.final.occupied:
            rel = np.array(sorted(result.final.occupied), dtype=np.int64) - lo
            mask[rel[:, 0], rel[:, 1], rel[:, 2]] = True
        labels, count = ndimage.label(mask, structure=_SIX_CONN)
        if count == 0:
            side_counts[0] += 1
            continue
        sizes = np.bincount(labels.ravel())[1:]
        max_side = 0
        for k, sl in enumerate(ndimage.find_objects(labels)):
            dims = [s.stop - s.start for s in sl]
            if sizes[k] != dims[0] * dims[1] * dims[2]:
                violations += 1
            max_side = max(max_side, max(dims))
        side_counts[max_side] += 1
        overall = max(overall, max_side)
    return ClusterStats(trials, violations, side_counts, overall)


# --- scheduled attempts ---------------------------------------------------------------


@dataclass(frozen=True)
class AttemptSpec:
    radius: int
    width: int | None = None  # annulus thickness; default ceil(3*sqrt(radius))
    cap: int | None = None    # exploration cap; default radius + width

    def resolved(self) -> tuple[int, int, int]:
        w = self.width
        if w is None:
            w = math.isqrt(9 * self.radius - 1) + 1
        cap = self.cap if self.cap is not None else self.radius + w
        return self.radius, w, cap


@dataclass
class AttemptRecord:
    radius: int
    status: str
    shell_ok: bool | None = None
    keystones_ok: bool | None = None


@dataclass
class ScheduleResult:
    success_index: int | None
    structure: Stegosaurus | None
    records: list = field(default_factory=list)


def run_attempt_schedule(attempts: Sequence[AttemptSpec], field_: StateField,
                         params: ScaleParams, *, gap: int = 1,
                         dependency_radius: int | None = None) -> ScheduleResult:
    """Try shells of increasing radius until one is complete, verifies, and
    all 48 keystone corners are nice; build the blocking set for the first
    success.

    Dependency annuli (each attempt's queried vertex shell, padded by the
    dependency radius, default 40L) must be pairwise disjoint so that attempt
    outcomes are independent under the per-vertex sampling law.
    """
    dep = 40 * params.half_width if dependency_radius is None else dependency_radius
    resolved = [a.resolved() for a in attempts]
    for (n0, w0, c0), (n1, _, _) in zip(resolved, resolved[1:]):
        if n1 < n0 + w0 + gap:
            raise ValueError(f"attempt radii too close: {n0}+{w0}+{gap} > {n1}")
    intervals = [(params.pitch * n - dep, params.pitch * (cap + 3) + dep)
                 for n, w, cap in resolved]
    for (lo0, hi0), (lo1, hi1) in zip(intervals, intervals[1:]):
        if lo1 <= hi0:
            raise ValueError(
                f"dependency annuli overlap: [{lo0},{hi0}] vs [{lo1},{hi1}]")

    records: list[AttemptRecord] = []
    for k, (n, w, cap) in enumerate(resolved):
        memo: dict = {}
        coloring = goodness_coloring(field_, params, memo)
        cand = explore_shell(n, coloring, cap=cap)
        rec = AttemptRecord(n, cand.status)
        if cand.status == COMPLETE:
            report = verify_shell(cand)
            rec.shell_ok = report.ok
            rec.keystones_ok = keystones_nice(n, field_, params, memo)
            if report.ok and rec.keystones_ok:
                structure = build_structure(cand.sites, field_, params, n, memo)
                records.append(rec)
                return ScheduleResult(k, structure, records)
        records.append(rec)
    return ScheduleResult(None, None, records)


# --- path blocking ----------------------------------------------------------------------


def occupied_escape_blocked(field_: StateField, sim_box: Cuboid,
                            inner_box: Cuboid,
                            rule: Rule = Rule.modified(3),
                            exterior: SiteState = OCCUPIED) -> bool:
    """Evolve on the simulation box and test whether any eventually occupied
    path connects the inner box to the simulation boundary."""
    config = field_.sample(sim_box, exterior)
    result = evolve(config, rule)
    occ = result.final.occupied
    seeds = [v for v in occ if inner_box.contains(v)]
    visited = set(seeds)
    queue = deque(seeds)
    lo, hi = sim_box.lo, sim_box.hi
    while queue:
        v = queue.popleft()
        if any(c == l or c == h for l, c, h in zip(lo, v, hi)):
            return False
        x, y, z = v
        for nb in ((x + 1, y, z), (x - 1, y, z), (x, y + 1, z),
                   (x, y - 1, z), (x, y, z + 1), (x, y, z - 1)):
            if nb in occ and nb not in visited:
                visited.add(nb)
                queue.append(nb)
    return True


def check_no_percolation_coupling(n_fine: int, n_outer: int,
                                  sites: Iterable[Vertex],
                                  classifier: Callable[[Vertex], bool],
                                  field_: StateField, *,
                                  rule: Rule = Rule.modified(3),
                                  sim_half: int | None = None) -> bool:
    """For every blocked (classifier-true) renormalized site, no nearest
    neighbor path of eventually occupied vertices may run from the site's
    inner box to the complement of its outer box.

    ``n_fine`` should be ``n_outer // 2``; the outer box half-width is
    ``22 * n_outer`` unless a smaller simulation half-width is supplied
    (sound, since escape past a smaller occupied-exterior boundary is
    necessary for escape past the larger one).
    """
    if n_fine != n_outer // 2:
        raise ValueError("inner scale must be half the outer scale")
    half = 22 * n_outer if sim_half is None else sim_half
    for x in sites:
        if not classifier(x):
            continue
        center = (n_fine * x[0], n_fine * x[1], n_fine * x[2])
        inner = Cuboid(tuple(c - n_fine for c in center),
                       tuple(c + n_fine for c in center))
        sim = Cuboid(tuple(c - half for c in center),
                     tuple(c + half for c in center))
        if not occupied_escape_blocked(field_, sim, inner, rule):
            return False
    return True


# --- small statistical helpers ------------------------------------------------------------


def line_vacancy_rate(p: float, n: int, lines: int, seed: int) -> float:
    """Fraction of length-n axis lines with no initially occupied vertex
    at pollution q=0 (expected rate (1-p)^n)."""
    f = RandomField(SampleParams(p, 0.0, "iid", seed))
    pts = np.stack(np.meshgrid(np.arange(lines, dtype=np.int64),
                               np.arange(n, dtype=np.int64),
                               indexing="ij"), axis=-1).reshape(-1, 2)
    coords = np.zeros((len(pts), 3), dtype=np.int64)
    coords[:, 0] = pts[:, 1]  # position along the line
    coords[:, 1] = pts[:, 0]  # line index
    occ = f._occupied_flags(coords).reshape(lines, n)
    return float((~occ.any(axis=1)).mean())
