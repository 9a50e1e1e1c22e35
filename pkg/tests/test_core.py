"""Registry-level behavior: id generation, resolution, indexes, cascades."""

import random
from decimal import Decimal

import pytest

from agraph.core import AGIndex
from agraph.errors import AnchorInUse, CycleError, DuplicateId, NoSuchObject
from agraph.ids import Kind

from conftest import build_random_graph


def smallest_free_suffix(api, parent, kind_label):
    """Independent oracle: linear scan for the first free <Kind><N> id."""
    n = 1
    while api.exists("%s:%s%d" % (parent, kind_label, n)):
        n += 1
    return "%s:%s%d" % (parent, kind_label, n)


def test_first_generated_ag_id(api):
    api.create_agset("Timit")
    assert api.create_ag("Timit") == "Timit:AG1"


def test_generation_skips_explicitly_taken_suffixes(api):
    api.create_agset("Timit")
    first = api.create_timeline("Timit")
    assert first == "Timit:Timeline1"
    assert api.create_timeline("Timit:Timeline2") == "Timit:Timeline2"
    expected = smallest_free_suffix(api, "Timit", "Timeline")
    assert expected == "Timit:Timeline3"
    assert api.create_timeline("Timit") == expected


def test_generated_anchor_ids_all_distinct(api):
    api.create_agset("Timit")
    ag = api.create_ag("Timit")
    seen = {api.create_anchor(ag) for _ in range(10_000)}
    assert len(seen) == 10_000


def test_deleted_ids_are_not_reused(api):
    api.create_agset("X")
    ag = api.create_ag("X")
    api.delete(ag)
    assert api.create_ag("X") == "X:AG2"


def test_resolve_after_create_and_delete(api):
    api.create_agset("Timit")
    found = api.registry.resolve("Timit")
    assert found.kind is Kind.AGSET
    with pytest.raises(NoSuchObject):
        api.registry.resolve("CallHome")
    api.delete("Timit")
    with pytest.raises(NoSuchObject):
        api.registry.resolve("Timit")


def test_duplicate_agset_rejected(api):
    api.create_agset("Timit")
    with pytest.raises(DuplicateId):
        api.create_agset("Timit")


def test_explicit_ag_id_taken_by_timeline_is_regenerated(api):
    api.create_agset("T")
    api.create_timeline("T:Shared")
    assert api.create_ag("T:Shared") == "T:AG1"


def test_agset_deletion_cascades(api):
    api.create_agset("C")
    ag1 = api.create_ag("C")
    ag2 = api.create_ag("C")
    anchor = api.create_anchor(ag1)
    api.delete("C")
    for gone in ("C", ag1, ag2, anchor):
        assert not api.exists(gone)


def test_timeline_deletion_detaches_graphs(api):
    api.create_agset("C")
    tl = api.create_timeline("C")
    ag = api.create_ag("C", tl)
    api.delete(tl)
    assert api.exists(ag)
    assert api.registry.resolve(ag).obj.timeline_id is None


def test_anchor_with_annotations_cannot_be_deleted(api):
    api.create_agset("C")
    ag = api.create_ag("C")
    a1 = api.create_anchor(ag)
    a2 = api.create_anchor(ag)
    api.create_annotation(ag, a1, a2, "word")
    with pytest.raises(AnchorInUse):
        api.delete(a2)


def test_cycle_rejected_between_unanchored_anchors(api):
    api.create_agset("C")
    ag = api.create_ag("C")
    a1, a2, a3 = (api.create_anchor(ag) for _ in range(3))
    api.create_annotation(ag, a1, a2, "e")
    api.create_annotation(ag, a2, a3, "e")
    with pytest.raises(CycleError):
        api.create_annotation(ag, a3, a1, "e")
    with pytest.raises(CycleError):
        api.create_annotation(ag, a1, a1, "e")


def test_cycle_rejected_through_equal_offsets(api):
    api.create_agset("C")
    ag = api.create_ag("C")
    a1, a2 = api.create_anchor(ag), api.create_anchor(ag)
    api.set_anchor_offset(a1, 1)
    api.set_anchor_offset(a2, 1)
    api.create_annotation(ag, a1, a2, "e")
    with pytest.raises(CycleError):
        api.create_annotation(ag, a2, a1, "e")


def test_cycle_rejected_through_unanchored_detour(api):
    # Forward-looking offsets are not enough once unanchored anchors
    # carry edges; the full reachability check has to catch this.
    api.create_agset("C")
    ag = api.create_ag("C")
    lo, hi, mid = api.create_anchor(ag), api.create_anchor(ag), api.create_anchor(ag)
    api.set_anchor_offset(lo, 1)
    api.set_anchor_offset(hi, 2)
    api.create_annotation(ag, hi, mid, "e")
    api.create_annotation(ag, mid, lo, "e")
    with pytest.raises(CycleError):
        api.create_annotation(ag, lo, hi, "e")


def _mutate_randomly(api, rng, ag_id, steps):
    ag = api.registry.resolve(ag_id).obj
    for _ in range(steps):
        move = rng.randrange(6)
        try:
            if move == 0:
                anchor = api.create_anchor(ag_id)
                if rng.random() < 0.8:
                    api.set_anchor_offset(anchor, Decimal(rng.randrange(0, 5000)) / 100)
            elif move == 1 and ag.anchors:
                api.set_anchor_offset(
                    rng.choice(list(ag.anchors)), Decimal(rng.randrange(0, 5000)) / 100
                )
            elif move == 2 and len(ag.anchors) >= 2:
                a, b = rng.sample(list(ag.anchors), 2)
                api.create_annotation(ag_id, a, b, rng.choice("wxyz"))
            elif move == 3 and ag.annotations:
                api.set_feature(
                    rng.choice(list(ag.annotations)), rng.choice("abc"), str(rng.randrange(9))
                )
            elif move == 4 and ag.annotations:
                api.delete(rng.choice(list(ag.annotations)))
            elif move == 5 and ag.anchors:
                api.delete(rng.choice(list(ag.anchors)))
        except Exception:
            # rejected moves (order, cycle, in-use) are part of the walk
            continue


def test_indexes_survive_a_thousand_random_mutations(api):
    rng = random.Random(20_240_401)
    api.create_agset("Mut")
    ag_id = api.create_ag("Mut")
    _mutate_randomly(api, rng, ag_id, 1000)
    ag = api.registry.resolve(ag_id).obj
    assert api.registry.index_of(ag) == AGIndex.rebuilt(ag)
    # the annotation edge set stayed a DAG throughout
    api.registry.topo_order(ag)


def test_random_graphs_are_dags(api):
    rng = random.Random(7)
    api.create_agset("D")
    for _ in range(5):
        ag_id = build_random_graph(api, rng, "D", 40, 80, unanchored=3)
        api.registry.topo_order(api.registry.resolve(ag_id).obj)


def test_generation_never_collides_with_interleaved_explicit_ids(api):
    rng = random.Random(2468)
    api.create_agset("I")
    ag_id = api.create_ag("I")
    ag = api.registry.resolve(ag_id).obj
    for step in range(300):
        if rng.random() < 0.4:
            api.create_anchor("%s:Anchor%d" % (ag_id, rng.randrange(1, 120)))
        else:
            live_before = set(ag.anchors)
            created = api.create_anchor(ag_id)
            assert created not in live_before
        if ag.anchors and rng.random() < 0.2:
            api.delete(rng.choice(list(ag.anchors)))
