import math

import pytest
from hypothesis import given, settings, strategies as st

from zipbench import twothree as tt
from zipbench.twothree import (MutTTTree, Node2, Node3, Path2L, Path3L, bottom2, bottom3,
                               check_invariants, tt_insert_root)
from zipbench.verify import insert_all, insertion_constructions, split_count, twothree_case


def build_root(values):
    t = None
    for v in values:
        t = tt_insert_root(t, v)
    return t


def build_zipper(values):
    it = iter(values)
    z = tt.tt_singleton_zipper(next(it))
    for v in it:
        z = tt.tt_insert_min_zipper(z, v)
    return z


def test_insert_into_empty():
    assert tt_insert_root(None, 5) == Node2(None, 5, None)


def test_three_two_one():
    t = tt_insert_root(None, 3)
    assert t == bottom2(3)
    t = tt_insert_root(t, 2)
    assert t == bottom3(2, 3)
    t = tt_insert_root(t, 1)
    assert t == Node2(bottom2(1), 2, bottom3(2, 3))
    assert check_invariants(t) == []


def test_split_places_new_minimum_in_two_node():
    t = build_root([30, 20, 10])
    assert t.left == bottom2(10)


def test_general_insertion_orders():
    # Root insertion is a general algorithm: any order of distinct values works.
    for order in ([1, 2, 3, 4, 5, 6, 7], [4, 1, 7, 3, 6, 2, 5], [2, 9, 4, 8, 1, 7, 3]):
        t = build_root(order)
        assert check_invariants(t) == []
        assert tt.bottom_values(t) == sorted(order)


def test_duplicates_rejected():
    t = build_root([5, 3])
    with pytest.raises(tt.DuplicateValue):
        tt_insert_root(t, 3)
    mt = MutTTTree()
    for v in (5, 3):
        mt.insert_root(v)
    with pytest.raises(tt.DuplicateValue):
        mt.insert_root(5)


def test_split_cadence_small():
    # Bottom splits on insertions 3, 5, 7, 9 of a descending run.
    cumulative, t = [], None
    with tt.counting() as c:
        for v in range(10, 0, -1):
            t = tt_insert_root(t, v)
            cumulative.append(c.bottom_splits)
    steps = [i + 1 for i in range(10) if cumulative[i] > (cumulative[i - 1] if i else 0)]
    assert steps == [3, 5, 7, 9]


@pytest.mark.parametrize("n", [1, 2, 3, 10, 11, 1000])
def test_split_cadence(n):
    assert split_count(n) == (n - 1) // 2


def test_split_cadence_all_engines():
    n = 501
    for engine in ("zipper", "finger", "mroot"):
        with tt.counting() as c:
            if engine == "zipper":
                build_zipper(range(n, 0, -1))
            else:
                mt = MutTTTree()
                for v in range(n, 0, -1):
                    (mt.insert_finger if engine == "finger" else mt.insert_root)(v)
        assert c.bottom_splits == (n - 1) // 2, engine


# -- zipper -----------------------------------------------------------------------

def test_leftmost_of_single_bottom_node():
    z = tt.tt_from_tree_leftmost(bottom2(5))
    assert z.focus == tt.Nonempty2(None, 5, None) and z.path is None


def test_leftmost_rejects_empty():
    with pytest.raises(tt.TTError, match="empty tree"):
        tt.tt_from_tree_leftmost(None)


def test_leftmost_round_trip_and_path_length():
    for n in (1, 2, 5, 40, 300):
        t = build_root(range(n, 0, -1))
        z = tt.tt_from_tree_leftmost(t)
        assert tt.tt_to_tree(z) == t
        assert len(z.path_entries()) == tt.tt_height(t) - 1


def test_zipper_insert_without_split():
    z = tt.tt_insert_min_zipper(tt.tt_from_tree_leftmost(bottom2(5)), 4)
    assert tt.tt_to_tree(z) == bottom3(4, 5)


def test_zipper_insert_with_split():
    z = tt.tt_insert_min_zipper(tt.tt_from_tree_leftmost(bottom3(2, 3)), 1)
    assert tt.tt_to_tree(z) == tt_insert_root(bottom3(2, 3), 1)


def test_zipper_path_is_leftmost_only():
    z = build_zipper(range(2000, 0, -1))
    assert all(type(p) in (Path2L, Path3L) for p in z.path_entries())


def test_zipper_precondition():
    z = build_zipper([5, 4])
    with pytest.raises(tt.PreconditionError):
        tt.tt_insert_min_zipper(z, 4)
    with pytest.raises(tt.PreconditionError):
        tt.tt_insert_min_zipper(z, 9)


def test_zipper_focus_must_be_leftmost():
    # Focus on a full right child: its split cannot be absorbed leftwards.
    z = tt.TTZipper(tt.Nonempty3(None, 3, None, 4, None), tt.Path2R(bottom2(1), 3, None))
    with pytest.raises(tt.PreconditionError):
        tt.tt_insert_min_zipper(z, 2)


def test_zipper_chain_equals_root_chain_large():
    n = 10_000
    assert tt.tt_to_tree(build_zipper(range(n, 0, -1))) == build_root(range(n, 0, -1))


# -- mutable ----------------------------------------------------------------------

def test_mutable_three_two_one():
    for finger in (True, False):
        mt = MutTTTree()
        for v in (3, 2, 1):
            (mt.insert_finger if finger else mt.insert_root)(v)
        assert mt.snapshot() == Node2(bottom2(1), 2, bottom3(2, 3))
        assert mt.check_links() == []


def test_mutable_insert_into_two_node_builds_nothing():
    mt = MutTTTree()
    mt.insert_finger(5)
    node = mt.root
    with tt.counting() as c:
        mt.insert_finger(4)
    assert c.nodes == 0 and mt.root is node and not node.two


def test_mutable_finger_precondition():
    mt = MutTTTree()
    mt.insert_finger(5)
    with pytest.raises(tt.PreconditionError):
        mt.insert_finger(6)


def test_mutable_finger_tracks_last_insert():
    mt = MutTTTree()
    for v in range(50, 0, -1):
        mt.insert_finger(v)
        assert mt.last_inserted.k1 == v


def test_mutable_destroy():
    mt = MutTTTree()
    for v in range(20, 0, -1):
        mt.insert_root(v)
    root = mt.root
    mt.destroy()
    assert mt.root is None and root.c0 is None


def test_mutable_construction_bound():
    n = 1 << 16
    counts = insertion_constructions(n)
    assert counts["mutable-cursor"] <= 3 * n
    assert counts["mutable-root"] <= 3 * n


# -- construction counts ------------------------------------------------------------

def test_root_engine_copies_the_path():
    t = build_root(range(500, 1, -1))
    with tt.counting() as c:
        tt_insert_root(t, 1)
    assert c.nodes >= tt.tt_height(t)


def test_zipper_constant_calibrated_bound():
    small, large = 1 << 10, 1 << 16
    c = math.ceil(insertion_constructions(small)["persistent-cursor"] / small)
    assert insertion_constructions(large)["persistent-cursor"] <= c * large


# -- invariant checker ------------------------------------------------------------

def test_check_invariants_empty():
    assert check_invariants(None) == []


def test_check_invariants_redundancy():
    problems = check_invariants(Node2(bottom2(1), 99, bottom2(5)))
    assert len(problems) == 1 and problems[0].startswith("redundancy: root")


def test_check_invariants_depth_and_order():
    assert any(p.startswith("depth") for p in check_invariants(Node2(bottom2(1), 2, Node2(bottom2(2), 3, bottom2(3)))))
    assert any(p.startswith("order") for p in check_invariants(bottom3(3, 2)))
    assert any(p.startswith("order") for p in check_invariants(Node2(bottom2(5), 5, bottom2(5))))
    assert any("mixes" in p for p in check_invariants(Node2(bottom2(1), 2, None)))


def test_check_invariants_reports_path():
    t = Node2(Node2(bottom2(1), 2, bottom2(2)), 3, Node2(bottom2(3), 100, bottom2(4)))
    assert check_invariants(t) == ["redundancy: root.1: separator 100 != min of child 1 = 4"]


def test_checksum_agrees_across_kinds():
    mt = MutTTTree()
    for v in range(100, 0, -1):
        mt.insert_finger(v)
    assert tt.tree_checksum(mt.root) == tt.tree_checksum(mt.snapshot())


def test_counting_restores_constructors():
    with tt.counting():
        pass
    assert tt._mk2 is Node2 and tt._mkMut is tt.MutTTNode and tt._stats is None


# -- properties -------------------------------------------------------------------

descending = st.sets(st.integers(-2 ** 63, 2 ** 63 - 1), min_size=1, max_size=400).map(
    lambda s: sorted(s, reverse=True))


@settings(max_examples=150, deadline=None)
@given(descending)
def test_engines_agree_and_sorted(values):
    assert twothree_case(values) == []


@settings(max_examples=50, deadline=None)
@given(descending)
def test_every_intermediate_tree_is_valid(values):
    z = None
    for v in values:
        z = tt.tt_singleton_zipper(v) if z is None else tt.tt_insert_min_zipper(z, v)
        assert check_invariants(tt.tt_to_tree(z)) == []


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-1000, 1000), unique=True, min_size=1, max_size=200))
def test_root_insertion_any_order(values):
    t = build_root(values)
    assert check_invariants(t) == []
    assert tt.bottom_values(t) == sorted(values)
    mt = MutTTTree()
    for v in values:
        mt.insert_root(v)
    assert mt.snapshot() == t
    assert mt.check_links() == []
