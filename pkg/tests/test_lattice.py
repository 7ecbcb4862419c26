import itertools

import pytest
from hypothesis import given, strategies as st

from pollbp.lattice import (Cuboid, BoxUnion, closed_with_zero, half_open_from_zero,
                            in_closed, in_half_open, l1_norm, linf_norm, neighbors)

from oracles import classify_box_vertices, interval_closed, interval_half_open

coords = st.integers(min_value=-50, max_value=50)
vertices = st.tuples(coords, coords, coords)


def test_l1_norm_examples():
    assert l1_norm((0, 0, 0)) == 0
    assert l1_norm((1, -2, 3)) == 6
    assert l1_norm((-3, 1, 1)) == 5


def test_linf_norm_examples():
    assert linf_norm((0, 0, 0)) == 0
    assert linf_norm((1, -2, 3)) == 3
    assert linf_norm((-7, 0, 0)) == 7


def test_cube_corner_and_edge_counts():
    # brute-force value: 8 corners, 12 edge vertices (one interior vertex per edge)
    b = Cuboid.spanning((0, 0, 0), (2, 2, 2))
    corners, edges = b.corner_and_edge_vertices()
    assert corners == set(itertools.product((0, 2), repeat=3))
    assert len(edges) == 12
    oc, oe = classify_box_vertices((0, 0, 0), (2, 2, 2))
    assert corners == oc and edges == oe


def test_single_vertex_box_is_all_corner():
    b = Cuboid.spanning((0, 0, 0), (0, 0, 0))
    corners, edges = b.corner_and_edge_vertices()
    assert corners == {(0, 0, 0)}
    assert edges == set()


def test_plate_classification():
    b = Cuboid.spanning((0, 0, 0), (5, 5, 0))
    corners, edges = b.corner_and_edge_vertices()
    assert corners == {(x, y, 0) for x in (0, 5) for y in (0, 5)}
    oc, oe = classify_box_vertices((0, 0, 0), (5, 5, 0))
    assert corners == oc and edges == oe
    assert len(edges) == 16  # rectangle boundary minus the four corners


@given(vertices, vertices)
def test_spanning_is_order_independent(u, v):
    assert Cuboid.spanning(u, v) == Cuboid.spanning(v, u)


@given(st.tuples(*(st.integers(-4, 4),) * 3), st.tuples(*(st.integers(-4, 4),) * 3))
def test_classification_matches_neighbor_enumeration(u, v):
    b = Cuboid.spanning(u, v)
    corners, edges = b.corner_and_edge_vertices()
    members = set(b.vertices())
    for w in members:
        out_coords = 0
        for axis in range(3):
            lo = list(w); lo[axis] -= 1
            hi = list(w); hi[axis] += 1
            if tuple(lo) not in members or tuple(hi) not in members:
                out_coords += 1
        assert (w in corners) == (out_coords == 3)
        assert (w in edges) == (out_coords == 2)


@pytest.mark.parametrize("a", [a for a in range(-10, 11) if a != 0])
def test_half_open_interval_matches_enumeration(a):
    got = list(half_open_from_zero(a))
    assert got == interval_half_open(a)
    for t in range(-15, 16):
        assert in_half_open(t, a) == (t in got)


@pytest.mark.parametrize("a", list(range(-10, 11)))
def test_closed_interval_matches_enumeration(a):
    got = list(closed_with_zero(a))
    assert got == interval_closed(a)
    for t in range(-15, 16):
        assert in_closed(t, a) == (t in got)


def test_half_open_rejects_zero():
    with pytest.raises(ValueError):
        half_open_from_zero(0)


def test_box_union_membership_and_mask():
    u = BoxUnion([Cuboid((0, 0, 0), (2, 2, 2)), Cuboid((2, 2, 2), (4, 4, 4))])
    assert u.contains((1, 1, 1)) and u.contains((3, 3, 3))
    assert not u.contains((0, 0, 4))
    assert u.size() == 27 + 27 - 1
    assert u.bounding == Cuboid((0, 0, 0), (4, 4, 4))
    assert set(u.vertices()) == set(Cuboid((0, 0, 0), (2, 2, 2)).vertices()) | \
        set(Cuboid((2, 2, 2), (4, 4, 4)).vertices())


def test_neighbors_are_l1_unit():
    v = (3, -1, 2)
    assert len(set(neighbors(v))) == 6
    assert all(l1_norm((a - v[0], b - v[1], c - v[2])) == 1
               for a, b, c in neighbors(v))
