import io
import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from pollbp.dynamics import (CLOSED, EMPTY, OCCUPIED, Configuration, Rule,
                             SiteState, bounding_cuboid, evolve, evolve_internal,
                             final_clusters, linf_diameter, read_snapshot,
                             rule_fires, write_snapshot)
from pollbp.lattice import Cuboid

from oracles import naive_evolve

MOD3 = Rule.modified(3)
MOD2 = Rule.modified(2)
STD3 = Rule.standard(3)


def occupied_test(occ):
    return lambda v: v in occ


def test_rule_fires_examples():
    occ3 = {(1, 0, 0), (-1, 0, 0), (0, 1, 0)}
    # two coordinates covered only: the two x-neighbors share a coordinate
    assert not rule_fires(MOD3, (0, 0, 0), occupied_test(occ3))
    assert rule_fires(STD3, (0, 0, 0), occupied_test(occ3))
    assert rule_fires(MOD2, (0, 0, 0), occupied_test({(1, 0, 0), (0, 0, -1)}))


def test_standard_fire_implies_neighbor_count():
    rng_ = random.Random(5)
    for _ in range(200):
        occ = {tuple(rng_.randint(-1, 1) for _ in range(3)) for _ in range(4)}
        occ.discard((0, 0, 0))
        for r in (1, 2, 3):
            if rule_fires(Rule.standard(r), (0, 0, 0), occupied_test(occ)):
                count = sum(1 for d in ((1, 0, 0), (-1, 0, 0), (0, 1, 0),
                                        (0, -1, 0), (0, 0, 1), (0, 0, -1))
                            if d in occ)
                assert count >= r


def test_modified_does_not_dominate_standard():
    # both x-neighbors occupied: standard r=2 fires, modified r=2 does not
    occ = occupied_test({(1, 0, 0), (-1, 0, 0)})
    assert rule_fires(Rule.standard(2), (0, 0, 0), occ)
    assert not rule_fires(Rule.modified(2), (0, 0, 0), occ)


def test_occupied_exterior_floods_box():
    # brute-force values: corners fire at round 1, the origin at round 7
    box = Cuboid((-2, -2, -2), (2, 2, 2))
    result = evolve(Configuration(box, exterior=OCCUPIED), MOD3)
    assert len(result.final.occupied) == box.volume
    assert result.occupation_time[(2, 2, 2)] == 1
    assert result.occupation_time[(0, 0, 0)] == 7
    assert result.rounds == 7


def test_empty_exterior_nothing_happens():
    box = Cuboid((-2, -2, -2), (2, 2, 2))
    for rule in (Rule.modified(1), MOD2, STD3):
        result = evolve(Configuration(box, exterior=EMPTY), rule)
        assert result.final.occupied == frozenset()
        assert result.rounds == 0


def test_single_seed_is_fixpoint_at_standard_r3():
    box = Cuboid((-5, -5, -5), (5, 5, 5))
    cfg = Configuration(box, occupied=frozenset({(0, 0, 0)}))
    result = evolve(cfg, STD3)
    assert result.final.occupied == frozenset({(0, 0, 0)})
    assert result.occupation_time == {(0, 0, 0): 0}


def test_internal_plate_already_fixpoint():
    plate = [(x, y, 0) for x in range(2) for y in range(2)]
    states = {v: OCCUPIED for v in plate}
    result = evolve_internal(plate, states, MOD2)
    assert result.final.occupied == frozenset(plate)
    assert result.rounds == 0


def test_internal_far_seeds_stay_put():
    region = [(x, y, 0) for x in range(4) for y in range(4)]
    states = {(0, 0, 0): OCCUPIED, (3, 3, 0): OCCUPIED}
    result = evolve_internal(region, states, MOD2)
    assert result.final.occupied == frozenset({(0, 0, 0), (3, 3, 0)})


def test_internal_diagonal_seeds_in_unit_cube():
    # brute-force simulation: the space-diagonal pair covers only one
    # coordinate at every other vertex, so the cube does NOT fill
    region = list(itertools.product((0, 1), repeat=3))
    states = {(0, 0, 0): OCCUPIED, (1, 1, 1): OCCUPIED}
    result = evolve_internal(region, states, MOD2)
    assert result.final.occupied == frozenset({(0, 0, 0), (1, 1, 1)})
    # whereas a face-diagonal pair spans its rectangle
    states = {(0, 0, 0): OCCUPIED, (1, 1, 0): OCCUPIED}
    result = evolve_internal(region, states, MOD2)
    assert {(1, 0, 0), (0, 1, 0)} <= result.final.occupied


def _random_config(rng_, side):
    box = Cuboid((0, 0, 0), (side - 1, side - 1, side - 1))
    verts = list(box.vertices())
    occ = frozenset(v for v in verts if rng_.random() < 0.2)
    clo = frozenset(v for v in verts if v not in occ and rng_.random() < 0.1)
    ext = rng_.choice([EMPTY, OCCUPIED, CLOSED])
    return Configuration(box, occ, clo, ext)


@pytest.mark.parametrize("variant", ["standard", "modified"])
@pytest.mark.parametrize("r", [1, 2, 3])
def test_engines_match_full_rescan_oracle(variant, r):
    rng_ = random.Random(hash((variant, r)) & 0xFFFF)
    for _ in range(12):
        cfg = _random_config(rng_, rng_.randint(2, 10))
        expected_occ, expected_t, expected_rounds = naive_evolve(
            list(cfg.region.vertices()), cfg.occupied, cfg.closed,
            cfg.exterior.value, variant, r)
        for engine in ("sparse", "dense"):
            res = evolve(cfg, Rule(variant, r), engine=engine)
            assert res.final.occupied == frozenset(expected_occ)
            assert res.occupation_time == expected_t
            assert res.rounds == expected_rounds


def test_engines_match_on_non_box_regions():
    rng_ = random.Random(77)
    for _ in range(10):
        verts = {tuple(rng_.randint(-3, 3) for _ in range(3)) for _ in range(40)}
        occ = frozenset(v for v in verts if rng_.random() < 0.3)
        cfg = Configuration(frozenset(verts), occ, frozenset(),
                            rng_.choice([EMPTY, OCCUPIED]))
        res_s = evolve(cfg, MOD2, engine="sparse")
        res_d = evolve(cfg, MOD2, engine="dense")
        assert res_s.final.occupied == res_d.final.occupied
        assert res_s.occupation_time == res_d.occupation_time


def test_monotonicity_in_initial_configuration():
    rng_ = random.Random(3)
    for _ in range(25):
        cfg = _random_config(rng_, 6)
        # grow the occupied set, shrink the closed set
        extra = frozenset(v for v in cfg.region.vertices() if rng_.random() < 0.1)
        bigger = Configuration(cfg.region, cfg.occupied | (extra - cfg.closed),
                               frozenset(v for v in cfg.closed if rng_.random() < 0.6),
                               cfg.exterior)
        rule = Rule(rng_.choice(["standard", "modified"]), rng_.randint(1, 3))
        assert evolve(cfg, rule).final.occupied <= evolve(bigger, rule).final.occupied


def test_occupation_time_zero_iff_initially_occupied():
    rng_ = random.Random(11)
    for _ in range(10):
        cfg = _random_config(rng_, 5)
        res = evolve(cfg, MOD2)
        zeros = {v for v, t in res.occupation_time.items() if t == 0}
        assert zeros == set(cfg.occupied)


def test_threshold2_clusters_are_cuboids():
    rng_ = random.Random(19)
    for _ in range(30):
        side = rng_.randint(4, 12)
        box = Cuboid((0, 0, 0), (side - 1,) * 3)
        occ = frozenset(v for v in box.vertices() if rng_.random() < 0.08)
        res = evolve(Configuration(box, occ), MOD2)
        for cluster in final_clusters(res):
            assert len(cluster) == bounding_cuboid(cluster).volume


def test_final_clusters_examples():
    box = Cuboid((0, 0, 0), (4, 4, 4))
    empty = evolve(Configuration(box), MOD3)
    assert final_clusters(empty) == []

    two = Configuration(box, occupied=frozenset({(0, 0, 0), (0, 0, 2)}))
    clusters = final_clusters(evolve(two, STD3))
    assert sorted(map(len, clusters)) == [1, 1]

    solid = frozenset(Cuboid((0, 0, 0), (2, 1, 1)).vertices())
    clusters = final_clusters(evolve(Configuration(box, occupied=solid), STD3))
    assert len(clusters) == 1 and len(clusters[0]) == 12


def test_linf_diameter():
    assert linf_diameter([(0, 0, 0)]) == 0
    assert linf_diameter([(0, 0, 0), (2, 1, 0)]) == 2


st_state = st.sampled_from([EMPTY, OCCUPIED, CLOSED])


@given(st.sets(st.tuples(st.integers(-4, 4), st.integers(-4, 4),
                         st.integers(-4, 4)), max_size=20),
       st.sets(st.tuples(st.integers(-4, 4), st.integers(-4, 4),
                         st.integers(-4, 4)), max_size=20),
       st_state)
@settings(max_examples=60)
def test_snapshot_round_trip(occ, clo, ext):
    clo = clo - occ
    box = Cuboid((-4, -4, -4), (4, 4, 4))
    cfg = Configuration(box, frozenset(occ), frozenset(clo), ext)
    buf = io.StringIO()
    write_snapshot(cfg, buf, meta={"seed": 1})
    back = read_snapshot(io.StringIO(buf.getvalue()))
    assert back == cfg
    # byte determinism of the writer
    buf2 = io.StringIO()
    write_snapshot(cfg, buf2, meta={"seed": 1})
    assert buf.getvalue() == buf2.getvalue()


def test_snapshot_rejects_non_box_regions():
    cfg = Configuration(frozenset({(0, 0, 0)}))
    with pytest.raises(ValueError):
        write_snapshot(cfg, io.StringIO())


def test_snapshot_rejects_garbage():
    with pytest.raises(ValueError):
        read_snapshot(io.StringIO("not a header\n"))
