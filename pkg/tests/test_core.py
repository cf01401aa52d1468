import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsat import (ContractViolation, GSATree, KeyRecord, build_ideal, check_ideal, get_policy,
                  node_search, rebuild, sabt, sait)
from gsat.core import LAZY_DELETE, STANDARD, audit, depth_bound, flatten, height, iter_nodes
from gsat.policies import POLICY_NAMES


def four_key_golden(backend=None):
    recs = [KeyRecord(k, str(k), a) for k, a in zip([1, 2, 3, 4], [1, 18, 2, 3])]
    return build_ideal(recs, 1, 5, sait(), backend)


def test_four_key_golden_shape(backend):
    root = four_key_golden(backend)
    assert list(root.rep) == [2, 4]
    assert list(root.ac) == [18, 3]
    assert root.m == 24
    c0, c1, c2 = root.children
    assert list(c0.rep) == [1] and (c0.lb, c0.rb) == (1, 2)
    assert list(c1.rep) == [3] and (c1.lb, c1.rb) == (3, 4)
    assert c2 is None
    assert list(root.index) == [0, 0, 0, 1, 1]


def test_build_validation():
    with pytest.raises(ContractViolation):
        build_ideal([KeyRecord(2), KeyRecord(1)], 0, 10, sait())
    with pytest.raises(ContractViolation):
        build_ideal([KeyRecord(1), KeyRecord(1)], 0, 10, sait())
    with pytest.raises(ContractViolation):
        build_ideal([KeyRecord(1, ac=0)], 0, 10, sait())
    with pytest.raises(ContractViolation):
        build_ideal([KeyRecord(10)], 0, 10, sait())
    with pytest.raises(ContractViolation):
        build_ideal([], 5, 5, sait())
    assert build_ideal([], 0, 10, sait()) is None


@pytest.mark.parametrize("name", POLICY_NAMES)
def test_build_is_ideal_and_round_trips(name, backend):
    rnd = random.Random(name)
    pol = get_policy(name)
    for _ in range(30):
        keys = sorted(rnd.sample(range(-1000, 1000), rnd.randint(1, 150)))
        recs = [KeyRecord(k, k * 2, rnd.choice([1, 1, 2, 5, 40, 700])) for k in keys]
        root = build_ideal(recs, -1000, 1000, pol, backend)
        assert check_ideal(root, pol)
        assert not audit(root)
        back = flatten(root)
        assert [r.key for r in back] == keys
        assert [r.value for r in back] == [k * 2 for k in keys]
        if pol.weighted:
            assert root.m == sum(r.ac for r in recs)
        else:
            assert root.m == len(keys)


def test_single_key_and_empty_tree():
    t = GSATree(sait())
    assert t.get(5) is None
    t.delete(5)
    assert len(t) == 0 and t.height() == -1
    t.insert(5, "v")
    assert t.get(5) == "v" and len(t) == 1 and t.height() == 0


def test_key_bounds_enforced():
    t = GSATree(sabt(), lb=0, rb=100)
    for op in (lambda: t.get(100), lambda: t.insert(-1, 0), lambda: t.delete(1000)):
        with pytest.raises(ContractViolation):
            op()
    with pytest.raises(ContractViolation):
        GSATree(sait(), lb=3, rb=3)


def test_insert_keeps_existing_value_and_revives_tombstone():
    t = GSATree(sait())
    t.insert(1, "a")
    t.insert(1, "b")
    assert t.get(1) == "a"
    t.delete(1)
    assert t.get(1) is None and 1 not in t
    t.insert(1, "c")
    assert t.get(1) == "c" and 1 in t


def test_access_counts_and_failed_lookup():
    t = GSATree(sait())
    t.bulk_load(range(0, 100, 2))
    assert t.access_count(10) == 1
    t.get(10)
    t.get(10)
    assert t.access_count(10) == 3
    m = t.m
    t.get(11)  # absent: counters move, access counts do not
    assert t.m == m
    assert t.root.c >= 1


def test_counter_overflow_rebuilds_shallowest_node():
    t = GSATree(sabt(4))
    t.bulk_load(range(200))
    events = []
    t.rebuild_hook = lambda depth, old, new: events.append(depth)
    im = t.root.im
    for _ in range(im // 4 + 1):
        t.get(0)
    assert events and events[-1] == 0
    assert t.stats()["rebuilds"] == len(events)
    assert t.root.c == 0 and t.root.im == t.root.m
    assert check_ideal(t, t.policy)


def test_standard_rebuild_drops_tombstones():
    pol = sabt(4)
    gone = set(range(0, 400, 40))
    recs = [KeyRecord(k, k, 2, k in gone) for k in range(400)]
    root = build_ideal(recs, 0, 400, pol)
    assert len(flatten(root)) == 390
    assert len(flatten(root, include_marked=True)) == 400
    std = rebuild(root, pol, STANDARD)
    assert [r.key for r in flatten(std, include_marked=True)] == [k for k in range(400) if k not in gone]
    assert std.m == root.m - 20
    lazy = rebuild(root, pol, LAZY_DELETE)
    back = flatten(lazy, include_marked=True)
    assert len(back) == 400 and sum(r.marked for r in back) == 10
    assert lazy.m == root.m
    with pytest.raises(ContractViolation):
        rebuild(root, pol, "eager")


def test_standard_mode_accounting_matches_discards():
    # every op on a stored key (live or tombstoned) adds one access, and so
    # does an insert of a new key; rebuilds only move accesses to "discarded"
    t = GSATree(sait())
    t.bulk_load(range(1000))
    rnd = random.Random(3)
    m0 = t.m
    accesses = 0
    for _ in range(20000):
        k = rnd.randrange(1100)
        r = rnd.random()
        stored = t.access_count(k) is not None
        if r < 0.7:
            t.get(k)
        elif r < 0.85:
            t.insert(k, k)
        else:
            t.delete(k)
        accesses += stored or 0.7 <= r < 0.85
    assert t.m + t.stats()["discarded"] == m0 + accesses
    assert not audit(t)


def test_node_search_checks_bounds():
    root = four_key_golden()
    assert node_search(root, 2) == 0
    assert node_search(root, 3) == 1
    assert node_search(root, 1, sait()) == 0
    with pytest.raises(ContractViolation):
        node_search(root, 5)


def test_depth_bound_values():
    assert depth_bound(1) == 2
    assert depth_bound(4, 3) == 3
    assert depth_bound(10 ** 6) == 51
    assert depth_bound(100, 100) == 2


def test_iter_nodes_and_height():
    t = GSATree(get_policy("sa2t"))
    t.bulk_load(range(7))
    depths = [d for _, d in iter_nodes(t.root)]
    assert depths[0] == 0 and max(depths) == height(t) == 1


@pytest.mark.parametrize("name", POLICY_NAMES)
@pytest.mark.parametrize("lazy", [False, True])
def test_oracle_replay(name, lazy, backend, oracle_cls):
    rnd = random.Random(f"{name}{lazy}")
    t = GSATree(get_policy(name), lazy_delete=lazy, backend=backend)
    base = list(range(0, 4000, 2))
    t.bulk_load(base)
    ref = oracle_cls(base)
    for i in range(20000):
        k = rnd.randrange(60) if rnd.random() < 0.5 else rnd.randrange(4000)
        r = rnd.random()
        if r < 0.8:
            assert t.get(k) == ref.get(k)
        elif r < 0.9:
            t.insert(k, i)
            ref.insert(k, i)
        else:
            t.delete(k)
            ref.delete(k)
    assert len(t) == len(ref)
    assert t.items() == ref.items()
    assert not audit(t)


ops = st.lists(st.tuples(st.sampled_from("gid"), st.integers(-50, 50)), max_size=300)


@settings(max_examples=60, deadline=None)
@given(ops=ops, name=st.sampled_from(POLICY_NAMES), lazy=st.booleans())
def test_property_matches_dict(ops, name, lazy):
    t = GSATree(get_policy(name), lazy_delete=lazy)
    ref = {}
    for i, (op, k) in enumerate(ops):
        if op == "g":
            assert t.get(k) == ref.get(k)
        elif op == "i":
            t.insert(k, i)
            ref.setdefault(k, i)
        else:
            t.delete(k)
            ref.pop(k, None)
    assert t.items() == sorted(ref.items())
    assert not audit(t)
