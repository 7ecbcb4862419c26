"""Core lattice geometry: vertices, norms, cuboids and signed intervals.

Vertices are plain integer triples.  Cuboids are axis-aligned integer boxes
normalized so ``lo <= hi`` componentwise; degenerate boxes (plates, segments,
single points) are first-class.  All values here are immutable and freely
shareable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

Vertex = tuple[int, int, int]

ORIGIN: Vertex = (0, 0, 0)

UNIT_VECTORS: tuple[Vertex, ...] = ((1, 0, 0), (0, 1, 0), (0, 0, 1))

NEIGHBOR_OFFSETS: tuple[Vertex, ...] = (
    (1, 0, 0), (-1, 0, 0),
    (0, 1, 0), (0, -1, 0),
    (0, 0, 1), (0, 0, -1),
)


def l1_norm(v: Vertex) -> int:
    return abs(v[0]) + abs(v[1]) + abs(v[2])


def linf_norm(v: Vertex) -> int:
    return max(abs(v[0]), abs(v[1]), abs(v[2]))


def sign(a: int) -> int:
    return (a > 0) - (a < 0)


def vertex_sign(v: Vertex) -> Vertex:
    return (sign(v[0]), sign(v[1]), sign(v[2]))


def add(u: Vertex, v: Vertex) -> Vertex:
    return (u[0] + v[0], u[1] + v[1], u[2] + v[2])


def sub(u: Vertex, v: Vertex) -> Vertex:
    return (u[0] - v[0], u[1] - v[1], u[2] - v[2])


def neighbors(v: Vertex) -> tuple[Vertex, ...]:
    x, y, z = v
    return (
        (x + 1, y, z), (x - 1, y, z),
        (x, y + 1, z), (x, y - 1, z),
        (x, y, z + 1), (x, y, z - 1),
    )


# --- signed intervals ------------------------------------------------------
#
# Intervals follow the reversed-interval convention: for a < 0 the notation
# (0, a] denotes the integers {a, ..., -1} and [0, a] denotes {a, ..., 0}.

def half_open_from_zero(a: int) -> range:
    """Integers strictly between 0 and a, inclusive of a.  Undefined for 0."""
    if a == 0:
        raise ValueError("half-open-from-zero interval needs a nonzero endpoint")
    return range(1, a + 1) if a > 0 else range(a, 0)


def closed_with_zero(a: int) -> range:
    """Integers between 0 and a inclusive of both."""
    return range(0, a + 1) if a >= 0 else range(a, 1)


def in_half_open(delta: int, a: int) -> bool:
    """Membership in half_open_from_zero(a) without materializing the range."""
    if a > 0:
        return 1 <= delta <= a
    if a < 0:
        return a <= delta <= -1
    return False


def in_closed(delta: int, a: int) -> bool:
    if a >= 0:
        return 0 <= delta <= a
    return a <= delta <= 0


# --- cuboids ---------------------------------------------------------------

@dataclass(frozen=True)
class Cuboid:
    """Axis-aligned integer box with componentwise ``lo <= hi``."""

    lo: Vertex
    hi: Vertex

    def __post_init__(self) -> None:
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"cuboid not normalized: {self.lo} .. {self.hi}")

    @classmethod
    def spanning(cls, u: Vertex, v: Vertex) -> "Cuboid":
        """Box B[u, v] from any ordered corner pair (reversed intervals ok)."""
        lo = tuple(min(a, b) for a, b in zip(u, v))
        hi = tuple(max(a, b) for a, b in zip(u, v))
        return cls(lo, hi)  # type: ignore[arg-type]

    def contains(self, v: Vertex) -> bool:
        return all(l <= c <= h for l, c, h in zip(self.lo, v, self.hi))

    @property
    def sides(self) -> Vertex:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))  # type: ignore[return-value]

    @property
    def volume(self) -> int:
        sx, sy, sz = self.sides
        return sx * sy * sz

    def expand(self, r: int) -> "Cuboid":
        return Cuboid(tuple(l - r for l in self.lo), tuple(h + r for h in self.hi))  # type: ignore[arg-type]

    def shift(self, v: Vertex) -> "Cuboid":
        return Cuboid(add(self.lo, v), add(self.hi, v))

    def union_bound(self, other: "Cuboid") -> "Cuboid":
        lo = tuple(min(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(max(a, b) for a, b in zip(self.hi, other.hi))
        return Cuboid(lo, hi)  # type: ignore[arg-type]

    def vertices(self) -> Iterator[Vertex]:
        (x0, y0, z0), (x1, y1, z1) = self.lo, self.hi
        for x in range(x0, x1 + 1):
            for y in range(y0, y1 + 1):
                for z in range(z0, z1 + 1):
                    yield (x, y, z)

    def boundary_vertices(self) -> Iterator[Vertex]:
        """Vertices of the box with at least one neighbor outside it."""
        for v in self.vertices():
            if any(c == l or c == h for l, c, h in zip(self.lo, v, self.hi)):
                yield v

    def extremal_count(self, v: Vertex) -> int:
        """Number of coordinates in which v has a neighbor outside the box."""
        return sum(1 for l, c, h in zip(self.lo, v, self.hi) if c == l or c == h)

    def corner_and_edge_vertices(self) -> tuple[set[Vertex], set[Vertex]]:
        """Corners (outside-neighbors in 3 coordinates) and edge vertices (exactly 2).

        Degenerate boxes follow the same counting rule: a flattened dimension
        makes every vertex extremal in that coordinate.
        """
        corners: set[Vertex] = set()
        edges: set[Vertex] = set()
        for i, j in ((0, 1), (0, 2), (1, 2)):
            k = 3 - i - j
            for ci in {self.lo[i], self.hi[i]}:
                for cj in {self.lo[j], self.hi[j]}:
                    for ck in range(self.lo[k], self.hi[k] + 1):
                        w = [0, 0, 0]
                        w[i], w[j], w[k] = ci, cj, ck
                        v: Vertex = (w[0], w[1], w[2])
                        n = self.extremal_count(v)
                        if n == 3:
                            corners.add(v)
                        elif n == 2:
                            edges.add(v)
        return corners, edges

    def axis_range(self, axis: int) -> range:
        return range(self.lo[axis], self.hi[axis] + 1)


class BoxUnion:
    """Union of cuboids with O(#boxes) membership and a dense-mask view.

    Used as a dynamics region for blocking-set experiments where the union
    has millions of vertices but a compact bounding box.
    """

    def __init__(self, boxes: Iterable[Cuboid]):
        self.boxes: tuple[Cuboid, ...] = tuple(boxes)
        if not self.boxes:
            raise ValueError("empty box union")
        bound = self.boxes[0]
        for b in self.boxes[1:]:
            bound = bound.union_bound(b)
        self.bounding: Cuboid = bound
        self._mask: np.ndarray | None = None

    def contains(self, v: Vertex) -> bool:
        if not self.bounding.contains(v):
            return False
        return any(b.contains(v) for b in self.boxes)

    def mask(self) -> np.ndarray:
        """Boolean occupancy array indexed by (v - bounding.lo)."""
        if self._mask is None:
            m = np.zeros(self.bounding.sides, dtype=bool)
            ox, oy, oz = self.bounding.lo
            for b in self.boxes:
                m[b.lo[0] - ox:b.hi[0] - ox + 1,
                  b.lo[1] - oy:b.hi[1] - oy + 1,
                  b.lo[2] - oz:b.hi[2] - oz + 1] = True
            self._mask = m
        return self._mask

    def size(self) -> int:
        return int(self.mask().sum())

    def vertices(self) -> Iterator[Vertex]:
        ox, oy, oz = self.bounding.lo
        for x, y, z in np.argwhere(self.mask()):
            yield (int(x) + ox, int(y) + oy, int(z) + oz)
