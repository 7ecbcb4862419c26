import io
import itertools

import pytest

from pollbp import shell
from pollbp.dynamics import Configuration, OCCUPIED, Rule, evolve
from pollbp.lattice import BoxUnion, Cuboid, linf_norm
from pollbp.sampler import (PlantedField, full_stego_fixture, plant_fixture,
                            plant_obstacles)
from pollbp.stego import (Generator, ScaleParams, StructureError, SUBCUBE_SIGNS,
                          axis_segments, build_structure, cell_box,
                          coordinate_exposure, exposure_box_consistency,
                          exposure_grids, is_good_box, is_nice, is_swell_box,
                          is_viable, keystone_centers, keystone_corners,
                          neighbor_exposure, read_stego, select_generators,
                          selection_plan, subcube, subcube_center,
                          swell_box_witnesses, verify_structure, write_stego)

P52 = ScaleParams(5, 2)
P31 = ScaleParams(3, 1)


# --- axis segments and niceness -----------------------------------------------

def test_axis_cross_size():
    segs = axis_segments((0, 0, 0), 2)
    pts = set()
    for s in segs:
        pts.update(s.vertices())
    assert len(pts) == 13  # 3 * 5 minus 2 duplicated centers
    assert (0, 0, 2) in pts
    assert (1, 1, 0) not in pts


def test_viability_boundary_cases():
    m, reach = P52.clearance, P52.segment_reach
    assert is_viable((0, 0, 0), PlantedField(), P52)
    # an active vertex exactly at clearance distance from a segment tip blocks
    tip = PlantedField(occupied=[(0, 0, reach + m)])
    assert not is_viable((0, 0, 0), tip, P52)
    # distance m+1 diagonally off every segment is fine
    clear = PlantedField(occupied=[(m + 1, m + 1, 0)])
    assert is_viable((0, 0, 0), clear, P52)


def test_niceness():
    f = PlantedField(closed=[(0, 0, 0)])
    assert is_nice((0, 0, 0), f, P52)
    assert not is_nice((1, 0, 0), f, P52)  # not closed
    crowded = PlantedField(closed=[(0, 0, 0)], occupied=[(0, 0, 1)])
    assert not is_nice((0, 0, 0), crowded, P52)


# --- cells, subcubes, goodness ---------------------------------------------------

def test_cell_and_subcube_geometry():
    assert cell_box((1, 0, -1), P52) == Cuboid((6, -5, -16), (16, 5, -6))
    sc = subcube((0, 0, 0), (1, -1, 1), P52)
    assert sc == Cuboid((1, -5, 1), (5, -1, 5))
    assert sc.contains(subcube_center((0, 0, 0), (1, -1, 1), P52))
    # subcubes partition off the center planes: disjoint, 8 * L^3 cells
    seen = set()
    for signs in SUBCUBE_SIGNS:
        pts = set(subcube((0, 0, 0), signs, P52).vertices())
        assert not (pts & seen)
        seen |= pts
    assert len(seen) == 8 * 5**3


def test_good_box_on_fixture_and_negatives():
    f = plant_fixture("nice-placement", site=(2, 2, 2), params=P52)
    assert is_good_box((2, 2, 2), f, P52)
    assert not is_good_box((2, 2, 2), PlantedField(), P52)
    gone = subcube_center((2, 2, 2), (1, 1, 1), P52)
    assert not is_good_box((2, 2, 2), f.without_closed([gone]), P52)


def test_swell_box_witnesses():
    pairs_params = ScaleParams(5, 2, "standard_pairs")
    f = plant_fixture("nice-placement", site=(0, 0, 0), params=pairs_params)
    assert is_swell_box((0, 0, 0), f, pairs_params)
    wit = swell_box_witnesses((0, 0, 0), f, pairs_params)
    for (signs, axis), pair in wit.items():
        u, v = pair
        assert u != v
        assert [c for i, c in enumerate(u) if i != axis] == \
            [c for i, c in enumerate(v) if i != axis]
    # one planted vertex per subcube is good but not swell
    single = plant_fixture("nice-placement", site=(0, 0, 0), params=P52)
    assert is_good_box((0, 0, 0), single, P52)
    assert not is_swell_box((0, 0, 0), single, P52)


def test_big_obstacle_center_makes_subcube_swell():
    # a plus shape supplies a collinear closed pair in every direction
    centers = [subcube_center((0, 0, 0), signs, P52) for signs in SUBCUBE_SIGNS]
    f = plant_obstacles(centers)
    assert is_swell_box((0, 0, 0), f, P52)


# --- selection --------------------------------------------------------------------

def test_selection_plan_examples():
    assert selection_plan((5, 6, 7)) == [("octant", (-1, -1, -1))]
    assert selection_plan((0, 5, 6)) == [("spine", (1, 1, 1)), ("spine", (-1, 1, 1))]
    assert selection_plan((2, 2, 9)) == []
    assert selection_plan((12, 1, 0)) == []
    assert selection_plan((-5, 6, -7)) == [("octant", (1, -1, 1))]
    assert selection_plan((5, 0, -6)) == [("spine", (1, 1, -1)), ("spine", (1, -1, -1))]


def test_select_generators_uses_witnesses():
    fx = full_stego_fixture(8, P31)
    gens = select_generators(fx.shell.sites, fx.field, P31)
    by_site = {}
    for g in gens:
        by_site.setdefault(g.site, []).append(g)
        assert g.vertex in fx.field.closed
        assert subcube(g.site, g.subcube, P31).contains(g.vertex)
    for site, glist in by_site.items():
        expected = selection_plan(site)
        assert len(glist) == len(expected)


def test_select_generators_fails_without_witnesses():
    with pytest.raises(StructureError):
        select_generators({(5, 6, 7)}, PlantedField(), P31)


# --- keystones ---------------------------------------------------------------------

def test_keystone_layout():
    centers = keystone_centers(12, P52)
    assert set(centers) == {(132, 0, 0), (-132, 0, 0), (0, 132, 0),
                            (0, -132, 0), (0, 0, 132), (0, 0, -132)}
    corners = keystone_corners((132, 0, 0), P52)
    assert len(corners) == 8
    assert (182, 50, 50) in corners and (82, -50, -50) in corners
    # outer corners are sign permutations of (pitch*n + 10L, 10L, 10L)
    outer = [u for c in centers for u in keystone_corners(c, P52)
             if linf_norm(u) == 182]
    assert len(outer) == 24
    for u in outer:
        assert sorted(map(abs, u)) == [50, 50, 182]


# --- exposure -----------------------------------------------------------------------

def test_exposure_examples():
    box = Cuboid((0, 0, 0), (2, 2, 2))
    zset = frozenset(box.vertices())
    assert coordinate_exposure(zset, (0, 0, 0)) == 3
    assert neighbor_exposure(zset, (0, 0, 0)) == 3
    assert coordinate_exposure(zset, (1, 1, 0)) == 1
    assert neighbor_exposure(zset, (1, 1, 0)) == 1
    assert coordinate_exposure(zset, (1, 1, 1)) == 0
    with pytest.raises(ValueError):
        coordinate_exposure(zset, (5, 5, 5))


def test_exposure_grids_match_scalar():
    union = BoxUnion([Cuboid((0, 0, 0), (3, 2, 2)), Cuboid((2, 2, 2), (5, 4, 2))])
    eta, etp = exposure_grids(union.mask())
    ox, oy, oz = union.bounding.lo
    for v in union.vertices():
        assert eta[v[0] - ox, v[1] - oy, v[2] - oz] == coordinate_exposure(union, v)
        assert etp[v[0] - ox, v[1] - oy, v[2] - oz] == neighbor_exposure(union, v)


def test_plate_neighbor_exposure_exceeds_coordinate_exposure():
    plate = frozenset((x, y, 0) for x in range(3) for y in range(3))
    assert coordinate_exposure(plate, (1, 1, 0)) == 1
    assert neighbor_exposure(plate, (1, 1, 0)) == 2
    assert coordinate_exposure(plate, (1, 0, 0)) == 2
    assert neighbor_exposure(plate, (1, 0, 0)) == 3


# --- full construction ---------------------------------------------------------------

@pytest.fixture(scope="module")
def small_build():
    fx = full_stego_fixture(12, P31)
    structure = build_structure(fx.shell.sites, fx.field, P31, 12)
    return fx, structure


def test_box_kinds(small_build):
    fx, st = small_build
    kinds = {k: sum(1 for g in st.generators if g.kind == k)
             for k in ("octant", "spine", "keystone")}
    assert kinds["keystone"] == 48
    assert kinds["spine"] > 0 and kinds["octant"] > 0
    for g in st.generators:
        if g.kind == "keystone":
            assert g.box == Cuboid.spanning((0, 0, 0), g.vertex)
        elif g.kind == "spine":
            axis = [i for i in range(3) if g.site[i] == 0][0]
            assert g.box.sides[axis] == 1  # thickness-1 plate in modified model
            assert g.box.contains(g.vertex)


def test_inner_box_containment(small_build):
    fx, st = small_build
    union = st.box_union()
    n0 = st.inner_radius()
    assert n0 == P31.pitch * 11 // 3
    for v in itertools.product((-n0, 0, n0), repeat=3):
        assert union.contains(v)
    mask = union.mask()
    lo = union.bounding.lo
    sub = mask[-n0 - lo[0]:n0 - lo[0] + 1,
               -n0 - lo[1]:n0 - lo[1] + 1,
               -n0 - lo[2]:n0 - lo[2] + 1]
    assert bool(sub.all())


def test_structure_verifies_clean(small_build):
    fx, st = small_build
    report = verify_structure(st, fx.field)
    assert report.ok, report.summary()
    consistency = exposure_box_consistency(st)
    assert consistency == {"eta3_not_corner": 0, "eta2_not_corner_or_edge": 0,
                           "axis_protection_violations": 0}


def test_negative_controls(small_build):
    fx, st = small_build
    corner = max(keystone_corners(keystone_centers(12, P31)[0], P31))
    report = verify_structure(st, fx.field.without_closed([corner]))
    assert not report.ok
    assert corner in report.exposed_unclosed
    assert corner in report.not_nice

    # occupied vertex planted on an exposed cuboid edge near a protruding tip
    union = st.box_union()
    octant = next(g for g in st.generators if g.kind == "octant"
                  and coordinate_exposure(union, g.vertex) == 3)
    u = octant.vertex
    step = -1 if u[0] > 0 else 1
    edge_pt = (u[0] + step, u[1], u[2])
    assert coordinate_exposure(union, edge_pt) >= 2
    report = verify_structure(st, fx.field.with_occupied([edge_pt]))
    assert report.occupied_near_exposed


def test_spine_protector_anchors_box_past_plane(small_build):
    fx, st = small_build
    # a box protected by a plate crosses the plate's coordinate plane
    anchored = [g for g in st.generators if g.kind == "octant"
                and any(g.box.lo[i] < 0 < g.box.hi[i] for i in range(3))]
    assert anchored, "fixture should produce plate-protected cuboids"
    for g in anchored:
        crossing = [i for i in range(3) if g.box.lo[i] < 0 < g.box.hi[i]]
        assert len(crossing) == 1
        k = crossing[0]
        far = g.box.lo[k] if g.vertex[k] > 0 else g.box.hi[k]
        # anchored strictly past the coordinate plane, within one cell width
        assert 1 <= abs(far) <= P31.half_width
        assert far * g.vertex[k] < 0


def test_standard_pairs_build_and_verify():
    params = ScaleParams(3, 1, "standard_pairs")
    fx = full_stego_fixture(10, params)
    st = build_structure(fx.shell.sites, fx.field, params, 10)
    for g in st.generators:
        if g.kind == "spine":
            axis = [i for i in range(3) if g.site[i] == 0][0]
            assert g.partner is not None
            assert g.box.sides[axis] == 2  # collinear pair slab
            assert g.box.contains(g.vertex) and g.box.contains(g.partner)
    report = verify_structure(st, fx.field)
    assert report.ok, report.summary()


def test_multiple_spine_protectors_is_structural_failure():
    params = P31
    fx = full_stego_fixture(12, params)
    gens = select_generators(fx.shell.sites, fx.field, params)
    octant = next(g for g in gens if g.kind == "octant"
                  and sum(1 for c in g.site if abs(c) < 4) == 1)
    bad_choices = {}
    for a in shell.protection_vectors(octant.site):
        y = list(octant.site)
        y[0] = 0
        bad_choices[(octant.site, a)] = tuple(y)
    from pollbp.stego import assemble
    with pytest.raises(StructureError):
        assemble(fx.shell.sites, [octant], [], bad_choices, params, 12)


def test_stego_dump_round_trip(small_build):
    fx, st = small_build
    buf = io.StringIO()
    report = verify_structure(st, fx.field)
    write_stego(st, buf, report, meta={"fixture": "full"})
    back = read_stego(io.StringIO(buf.getvalue()))
    assert back.radius == st.radius
    assert back.params == st.params
    assert back.generators == st.generators
    assert back.protector_choices == st.protector_choices
    assert back.shell_sites == st.shell_sites


def test_blocked_dynamics_on_fixture(small_build):
    fx, st = small_build
    union = st.box_union()
    cfg = Configuration(union, frozenset(), frozenset(fx.field.closed), OCCUPIED)
    result = evolve(cfg, Rule.modified(3))
    assert result.final.occupied == frozenset()
