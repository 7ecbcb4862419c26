"""Dual-surface shell machinery on the renormalized lattice.

Sites are colored black or white.  From the open l1-ball of a given radius we
take the closure A under two kinds of steps: *free* steps (a fixed 38-vector
move set, always allowed, strictly decreasing the l1 norm) and *taxed* steps
(every nonzero coordinate moves one further from zero, zero coordinates move
by at most one; allowed only into white sites; strictly increasing the l1
norm).  The shell S is the set of taxed-step targets just outside A.  With
black meaning "good renormalized box", S is the candidate blocking surface.

Reachability closure is used instead of explicit path enumeration: permissible
paths are sequences of distinct sites, but any walk can be shortcut to a path,
so the reachable set is identical.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, TextIO

import numpy as np

from . import rng
from .lattice import (Vertex, in_closed, in_half_open, l1_norm, linf_norm,
                      sign, sub, vertex_sign)

COMPLETE = "complete"
ESCAPED = "escaped"
FAILED = "failed"

_FREE_GENERATORS = ((1, 0, 0), (1, 1, 1), (3, 1, 1))


def _generate_free_steps() -> frozenset:
    out = set()
    for gen in _FREE_GENERATORS:
        for perm in itertools.permutations(gen):
            for s in itertools.product((1, -1), repeat=3):
                out.add((perm[0] * s[0], perm[1] * s[1], perm[2] * s[2]))
    return frozenset(out)


FREE_STEPS = _generate_free_steps()  # 6 + 8 + 24 = 38 move vectors
_FREE_ARRAY = np.array(sorted(FREE_STEPS), dtype=np.int64)

# All candidate taxed displacements; which apply at a site depends on its
# sign pattern.  (0,0,0) is excluded: steps join distinct sites.
_TAXED_OFFSETS = tuple(d for d in itertools.product((-1, 0, 1), repeat=3)
                       if d != (0, 0, 0))


def free_step_set() -> frozenset:
    return FREE_STEPS


def is_taxed_step(x: Vertex, y: Vertex) -> bool:
    """Every nonzero coordinate of x moves one further from zero (sign kept);
    zero coordinates move to -1, 0 or 1.  Requires x != y."""
    if x == y:
        return False
    for xi, yi in zip(x, y):
        if xi > 0:
            if yi != xi + 1:
                return False
        elif xi < 0:
            if yi != xi - 1:
                return False
        elif yi not in (-1, 0, 1):
            return False
    return True


def is_free_step(x: Vertex, y: Vertex) -> bool:
    return l1_norm(y) < l1_norm(x) and sub(y, x) in FREE_STEPS


def taxed_successors(x: Vertex) -> list[Vertex]:
    choices = [((xi + 1,) if xi > 0 else (xi - 1,) if xi < 0 else (-1, 0, 1))
               for xi in x]
    return [y for y in itertools.product(*choices) if y != x]


def free_successors(x: Vertex) -> list[Vertex]:
    nx = l1_norm(x)
    out = []
    for f in FREE_STEPS:
        y = (x[0] + f[0], x[1] + f[1], x[2] + f[2])
        if l1_norm(y) < nx:
            out.append(y)
    return out


# --- colorings ---------------------------------------------------------------

@dataclass
class Coloring:
    """Site coloring: scalar predicate plus a vectorized batch form."""

    black: Callable[[Vertex], bool]
    black_many: Callable[[np.ndarray], np.ndarray]
    density: float | None = None


def all_black() -> Coloring:
    return Coloring(lambda v: True,
                    lambda pts: np.ones(len(pts), dtype=bool), 1.0)


def all_white() -> Coloring:
    return Coloring(lambda v: False,
                    lambda pts: np.zeros(len(pts), dtype=bool), 0.0)


def random_coloring(b: float, seed: int) -> Coloring:
    """Independent black marks with density b, pure function of (seed, site)."""

    def black(v: Vertex) -> bool:
        return rng.point_uniform(seed, rng.TAG_COLOR, *v) < b

    def black_many(pts: np.ndarray) -> np.ndarray:
        return rng.grid_uniform(seed, rng.TAG_COLOR, pts) < b

    return Coloring(black, black_many, b)


def coloring_from(fn: Callable[[Vertex], bool], memoize: bool = True) -> Coloring:
    """Wrap an arbitrary (possibly expensive) site predicate."""
    cache: dict = {}

    def black(v: Vertex) -> bool:
        if not memoize:
            return fn(v)
        got = cache.get(v)
        if got is None:
            got = cache[v] = bool(fn(v))
        return got

    def black_many(pts: np.ndarray) -> np.ndarray:
        return np.fromiter((black((int(a), int(b), int(c))) for a, b, c in pts),
                           dtype=bool, count=len(pts))

    return Coloring(black, black_many)


# --- exploration --------------------------------------------------------------

@dataclass
class ShellCandidate:
    radius: int
    status: str
    sites: frozenset = frozenset()      # S: the dual surface
    reachable: frozenset = frozenset()  # A: diagnostic


def default_cap(radius: int) -> int:
    return radius + 6 * math.isqrt(radius - 1) + 6 if radius > 1 else radius + 6


def explore_shell(radius: int, coloring: Coloring, cap: int | None = None) -> ShellCandidate:
    """Closure A of the open l1-ball under free and taxed-to-white steps,
    plus the dual surface S of taxed targets outside A.

    Exploration aborts with status 'escaped' as soon as any reached site
    exceeds ``cap`` in either norm.  Caps below radius + ceil(3*sqrt(radius))
    deliberately narrow the searched annulus (scheduled attempts do this);
    the default leaves generous headroom.
    """
    n = radius
    if n < 1:
        raise ValueError("radius must be positive")
    if cap is None:
        cap = default_cap(n)
    if cap < n + 3:
        raise ValueError("cap leaves no room for the shell annulus")

    margin = cap + 3
    dim = 2 * margin + 1

    def encode(pts: np.ndarray) -> np.ndarray:
        return ((pts[:, 0] + margin) * dim + (pts[:, 1] + margin)) * dim \
            + (pts[:, 2] + margin)

    def decode(idx: np.ndarray) -> np.ndarray:
        z = idx % dim
        rest = idx // dim
        y = rest % dim
        x = rest // dim
        return np.stack([x - margin, y - margin, z - margin], axis=1)

    visited = np.zeros(dim**3, dtype=bool)

    g = np.arange(-(n - 1), n, dtype=np.int64)
    grid = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    seeds = grid[np.abs(grid).sum(axis=1) < n]
    visited[encode(seeds)] = True

    status = COMPLETE
    frontier = seeds
    while len(frontier):
        batches = []
        source_l1 = np.abs(frontier).sum(axis=1)
        for vec in _FREE_ARRAY:
            y = frontier + vec
            keep = np.abs(y).sum(axis=1) < source_l1
            if keep.any():
                batches.append(y[keep])
        signs = np.sign(frontier)
        for d in _TAXED_OFFSETS:
            ok = np.ones(len(frontier), dtype=bool)
            for i in range(3):
                ok &= (signs[:, i] == d[i]) | (signs[:, i] == 0)
            if not ok.any():
                continue
            y = frontier[ok] + np.array(d, dtype=np.int64)
            idx = encode(y)
            unseen = ~visited[idx]
            if not unseen.any():
                continue
            y = y[unseen]
            white = ~coloring.black_many(y)
            if white.any():
                batches.append(y[white])
        if not batches:
            break
        cands = np.concatenate(batches)
        idx = encode(cands)
        fresh = ~visited[idx]
        if not fresh.any():
            break
        uniq_idx, first = np.unique(idx[fresh], return_index=True)
        new_pts = cands[fresh][first]
        if (np.abs(new_pts).sum(axis=1) > cap).any() \
                or (np.abs(new_pts).max(axis=1) > cap).any():
            status = ESCAPED
            break
        visited[uniq_idx] = True
        frontier = new_pts

    a_pts = decode(np.nonzero(visited)[0])
    reachable = frozenset((int(x), int(y), int(z)) for x, y, z in a_pts)
    if status != COMPLETE:
        return ShellCandidate(n, status, frozenset(), reachable)

    surf = []
    signs = np.sign(a_pts)
    for d in _TAXED_OFFSETS:
        ok = np.ones(len(a_pts), dtype=bool)
        for i in range(3):
            ok &= (signs[:, i] == d[i]) | (signs[:, i] == 0)
        if not ok.any():
            continue
        y = a_pts[ok] + np.array(d, dtype=np.int64)
        outside = ~visited[encode(y)]
        if outside.any():
            surf.append(y[outside])
    if surf:
        pts = np.concatenate(surf)
        uniq = np.unique(encode(pts))
        pts = decode(uniq)
        sites = frozenset((int(x), int(y), int(z)) for x, y, z in pts)
    else:
        sites = frozenset()
    return ShellCandidate(n, COMPLETE, sites, reachable)


# --- protection ---------------------------------------------------------------

def protection_vectors(x: Vertex) -> list[Vertex]:
    """The sign-adjusted protection vectors required for x.

    Sites with all coordinates nonzero need three; sites with exactly one
    zero coordinate need four (the zero coordinate takes both signs).
    Undefined for sites with fewer than two nonzero coordinates.
    """
    nonzero = [i for i in range(3) if x[i] != 0]
    if len(nonzero) == 3:
        s = vertex_sign(x)
        base = ((-3, 3, 3), (3, -3, 3), (3, 3, -3))
        return [(b[0] * s[0], b[1] * s[1], b[2] * s[2]) for b in base]
    if len(nonzero) == 2:
        i, j = nonzero
        k = 3 - i - j
        out = []
        for ai, aj in ((-3, 3), (3, -3)):
            for ak in (-3, 3):
                v = [0, 0, 0]
                v[i] = ai * sign(x[i])
                v[j] = aj * sign(x[j])
                v[k] = ak
                out.append((v[0], v[1], v[2]))
        return out
    raise ValueError(f"protection undefined for {x}: fewer than two nonzero coordinates")


def a_protected(x: Vertex, y: Vertex, a: Vertex) -> bool:
    """Is x protected by y along vector a (signed-interval box membership)?

    The base test puts y - x in the product of half-open intervals from 0 to
    a_i.  When a coordinate of y is zero, the other two intervals relax to
    include 0.
    """
    d = sub(y, x)
    if all(in_half_open(d[i], a[i]) for i in range(3)):
        return True
    for i in range(3):
        if y[i] == 0 and in_half_open(d[i], a[i]) \
                and all(in_closed(d[j], a[j]) for j in range(3) if j != i):
            return True
    return False


@lru_cache(maxsize=None)
def _candidate_offsets(a: Vertex) -> tuple[Vertex, ...]:
    ranges = [sorted(range(0, ai + 1) if ai > 0 else range(ai, 1), key=abs)
              for ai in a]
    offs = [d for d in itertools.product(*ranges)]
    offs.sort(key=l1_norm)
    return tuple(offs)


def protector_candidates(x: Vertex, a: Vertex, members) -> list[Vertex]:
    out = []
    for d in _candidate_offsets(a):
        y = (x[0] + d[0], x[1] + d[1], x[2] + d[2])
        if y in members and a_protected(x, y, a):
            out.append(y)
    return out


def protected(x: Vertex, members) -> bool:
    """Does the member set protect x along every required vector?"""
    for a in protection_vectors(x):
        found = False
        for d in _candidate_offsets(a):
            y = (x[0] + d[0], x[1] + d[1], x[2] + d[2])
            if y in members and a_protected(x, y, a):
                found = True
                break
        if not found:
            return False
    return True


def find_protector(x: Vertex, a: Vertex, members) -> Vertex | None:
    """Canonical protector choice: prefer sites with no zero coordinate
    (off the spine), then lexicographic order."""
    cands = protector_candidates(x, a, members)
    if not cands:
        return None
    off_spine = [y for y in cands if 0 not in y]
    pool = off_spine if off_spine else cands
    return min(pool)


def spine(sites: Iterable[Vertex]) -> frozenset:
    return frozenset(x for x in sites if 0 in x)


# --- verification -------------------------------------------------------------

@dataclass
class ShellReport:
    s1: bool
    s2: bool
    s3: bool
    s4: bool
    s1_missing: list = field(default_factory=list)
    s2_offenders: list = field(default_factory=list)
    s3_witnesses: list = field(default_factory=list)
    s4_hits: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.s1 and self.s2 and self.s3 and self.s4


def _l1_sphere(n: int) -> Iterable[Vertex]:
    for x0 in range(-n, n + 1):
        r0 = n - abs(x0)
        for x1 in range(-r0, r0 + 1):
            r1 = r0 - abs(x1)
            yield (x0, x1, r1)
            if r1 != 0:
                yield (x0, x1, -r1)


def cap_region_sites(n: int) -> list[Vertex]:
    """Sphere sites near the six axis poles that the shell must contain."""
    return [v for v in _l1_sphere(n) if linf_norm(v) >= n - 12]


def verify_shell(candidate: ShellCandidate) -> ShellReport:
    """Exhaustive check of the four shell properties for a complete candidate."""
    if candidate.status != COMPLETE:
        raise ValueError("can only verify a complete candidate")
    n = candidate.radius
    s = candidate.sites

    s1_missing = [v for v in cap_region_sites(n) if v not in s]

    s2_offenders = []
    for v in s:
        nv = l1_norm(v)
        if nv < n or (nv - n) ** 2 > 9 * n or linf_norm(v) > n:
            s2_offenders.append(v)

    s3_witnesses = []
    for v in s:
        small = sum(1 for c in v if abs(c) < 4)
        if small <= 1 and not protected(v, s):
            s3_witnesses.append(v)

    s4_hits: dict[Vertex, int | None] = {}
    k_lo = -(-n // 3)  # ceil(n/3)
    k_hi = max((linf_norm(v) for v in s), default=k_lo)
    for phi in itertools.product((1, -1), repeat=3):
        hit = None
        for k in range(k_lo, k_hi + 1):
            if (k * phi[0], k * phi[1], k * phi[2]) in s:
                hit = k
                break
        s4_hits[phi] = hit

    return ShellReport(
        s1=not s1_missing,
        s2=not s2_offenders,
        s3=not s3_witnesses,
        s4=all(v is not None for v in s4_hits.values()),
        s1_missing=sorted(s1_missing),
        s2_offenders=sorted(s2_offenders),
        s3_witnesses=sorted(s3_witnesses),
        s4_hits=s4_hits,
    )


# --- shell dump format ---------------------------------------------------------

def write_shell(candidate: ShellCandidate, f: TextIO, meta: dict | None = None) -> None:
    for key in sorted(meta or {}):
        f.write(f"# {key}={meta[key]}\n")
    f.write(f"shell n={candidate.radius} status={candidate.status}\n")
    for x, y, z in sorted(candidate.sites):
        f.write(f"{x} {y} {z}\n")


def read_shell(f: TextIO) -> ShellCandidate:
    header = None
    for line in f:
        line = line.strip()
        if line and not line.startswith("#"):
            header = line
            break
    if header is None or not header.startswith("shell "):
        raise ValueError("missing shell header")
    fields = dict(part.split("=", 1) for part in header.split()[1:])
    sites = set()
    for line in f:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        x, y, z = line.split()
        sites.add((int(x), int(y), int(z)))
    return ShellCandidate(int(fields["n"]), fields["status"], frozenset(sites))
