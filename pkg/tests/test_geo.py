import math
import random

import pytest

from cityrisk.errors import EmptyInput
from cityrisk.geo import ClusterSet, cut_tree, haversine_km, upgma_cluster
from cityrisk.graph import Location

from oracles import brute_upgma

PARIS = (48.8566, 2.3522)
EVRY = (48.6241, 2.4278)


def random_locations(rng, n, prefix="L"):
    return [
        Location(id=f"{prefix}{i:02d}", lat=rng.uniform(-80, 80), lon=rng.uniform(-179, 179))
        for i in range(n)
    ]


def test_haversine_zero_on_identical_points():
    assert haversine_km(PARIS, PARIS) == 0.0


def test_haversine_paris_evry_about_30km():
    d = haversine_km(PARIS, EVRY)
    assert 25.0 <= d <= 35.0


def test_haversine_antipodal_half_circumference():
    assert abs(haversine_km((0.0, 0.0), (0.0, 180.0)) - math.pi * 6371.0) <= 1.0


def test_haversine_symmetric_nonnegative():
    rng = random.Random(7)
    for _ in range(50):
        a = (rng.uniform(-90, 90), rng.uniform(-180, 180))
        b = (rng.uniform(-90, 90), rng.uniform(-180, 180))
        assert haversine_km(a, b) == pytest.approx(haversine_km(b, a))
        assert haversine_km(a, b) >= 0.0


# -----------------------------
# UPGMA
# -----------------------------


def three_collinear():
    """Points on the equator with d(1,2)=d(2,3)~10km, d(1,3)~20km."""
    deg = 10.0 / 111.19492664455873  # ~10 km in longitude at the equator
    return [
        Location("p1", 0.0, 0.0),
        Location("p2", 0.0, deg),
        Location("p3", 0.0, 2 * deg),
    ]


def test_upgma_single_location_no_merges():
    tree = upgma_cluster([Location("only", 1.0, 2.0)])
    assert tree.leaves == ["only"] and tree.merges == []


def test_upgma_empty_raises():
    with pytest.raises(EmptyInput):
        upgma_cluster([])


def test_upgma_three_collinear_points():
    tree = upgma_cluster(three_collinear())
    (l1, r1, h1), (l2, r2, h2) = tree.merges
    # Tie between {p1,p2} and {p2,p3} at ~10km resolves to the lowest id pair.
    assert (l1, r1) == (("p1",), ("p2",))
    assert h1 == pytest.approx(10.0, abs=0.01)
    # Second merge joins p3 at the mean of d(1,3) and d(2,3).
    assert (l2, r2) == (("p1", "p2"), ("p3",))
    assert h2 == pytest.approx(15.0, abs=0.01)


def test_upgma_matches_bruteforce_on_random_instances():
    rng = random.Random(42)
    for trial in range(40):
        locs = random_locations(rng, rng.randint(1, 8), prefix=f"t{trial}n")
        got = upgma_cluster(locs).merges
        want = brute_upgma(locs)
        assert len(got) == len(want)
        for (gl, gr, gh), (wl, wr, wh) in zip(got, want):
            assert (gl, gr) == (wl, wr)
            assert gh == pytest.approx(wh, abs=1e-9)


def test_upgma_invariant_under_input_permutation():
    rng = random.Random(5)
    locs = random_locations(rng, 8)
    base = upgma_cluster(locs).merges
    for _ in range(5):
        shuffled = locs[:]
        rng.shuffle(shuffled)
        assert upgma_cluster(shuffled).merges == base


def test_upgma_merge_count_and_monotone_heights():
    rng = random.Random(11)
    locs = random_locations(rng, 12)
    tree = upgma_cluster(locs)
    assert len(tree.merges) == len(locs) - 1
    heights = [h for _, _, h in tree.merges]
    assert all(a <= b + 1e-9 for a, b in zip(heights, heights[1:]))


# -----------------------------
# cut_tree
# -----------------------------


def test_cut_above_root_single_cluster():
    locs = three_collinear()
    tree = upgma_cluster(locs)
    cs = cut_tree(tree, 1000.0)
    assert cs.clusters == [["p1", "p2", "p3"]]


def test_cut_below_first_merge_all_singletons():
    tree = upgma_cluster(three_collinear())
    cs = cut_tree(tree, 0.5)
    assert cs.clusters == [["p1"], ["p2"], ["p3"]]


def test_cut_three_points_at_12km():
    tree = upgma_cluster(three_collinear())
    cs = cut_tree(tree, 12.0)
    assert cs.clusters == [["p1", "p2"], ["p3"]]


def test_cut_is_a_partition():
    rng = random.Random(3)
    locs = random_locations(rng, 15)
    tree = upgma_cluster(locs)
    for threshold in (1.0, 50.0, 400.0, 5000.0, 1e9):
        cs = cut_tree(tree, threshold)
        flat = [loc for c in cs.clusters for loc in c]
        assert sorted(flat) == sorted(l.id for l in locs)
        assert len(flat) == len(set(flat))


def test_clusterset_json_roundtrip():
    cs = ClusterSet(clusters=[["a", "b"], ["c"]], threshold_km=100.0)
    again = ClusterSet.from_json(cs.to_json())
    assert again.clusters == cs.clusters and again.threshold_km == cs.threshold_km
