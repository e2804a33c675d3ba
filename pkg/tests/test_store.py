from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from montiweb.classdiagram import parse_classdiagram
from montiweb.linker import check_project
from montiweb.runtime.store import ChildSpec, ObjectStore, StoreError
from montiweb.runtime.values import EnumVal, ObjectId

SHOP = """
classdiagram Shop {
  class Root { MWString name; }
  class Mid { Number n; }
  class Leaf { MWString tag; }
  class Holder { Part part; }
  class Part { Number size; }
  composition Root -> (mids) Mid [*];
  composition Mid -> (leaves) Leaf [0..3];
  association Leaf -> (home) Root [0..1];
  association Root -> (favs) Leaf [0..4];
  association Mid -> (peer) Mid;
}
"""

COMPOSITION_ROLES = {"mids", "leaves", "part"}
MAX_OBJECTS = 20


def _table(text=SHOP):
    model = check_project([parse_classdiagram(text, "shop.cd")])
    assert model.ok, model.diagnostics
    return model.table


TABLE = _table()


@pytest.fixture
def store():
    return ObjectStore(TABLE)


@pytest.fixture
def carsharing(corrected_model):
    return ObjectStore(corrected_model.table)


# -- examples ---------------------------------------------------------------------

def _car(brand="AUDI"):
    return ChildSpec({"brand": EnumVal("Brand", brand), "numSeats": 4})


def test_person_with_two_cars(carsharing):
    p = carsharing.create_object("Person", {"name": "Ann", "email": "a@b.cd", "age": 18},
                                 {"cars": [_car(), _car("VW")]})
    cars = carsharing.get(p).fields["cars"]
    assert len(cars) == 2 and len(carsharing) == 3
    assert {carsharing.owners[c] for c in cars} == {(p, "cars")}


def test_person_without_cars_is_legal(carsharing):
    p = carsharing.create_object("Person", {"name": "Ann"})
    assert carsharing.get(p).fields["cars"] == []


def test_implicit_composition_needs_its_child(store):
    with pytest.raises(StoreError) as exc:
        store.create_object("Holder")
    assert exc.value.code == "MW501"
    assert len(store) == 0
    h = store.create_object("Holder", children={"part": [ChildSpec({"size": 3})]})
    assert isinstance(store.get(h).fields["part"], ObjectId)


def test_cardinality_max_checked_before_insert(store):
    with pytest.raises(StoreError) as exc:
        store.create_object("Mid", children={"leaves": [ChildSpec()] * 4})
    assert exc.value.code == "MW501"
    assert len(store) == 0


def test_unknown_class_and_bad_values(store):
    with pytest.raises(StoreError, match="unknown class") as exc:
        store.create_object("Nope")
    assert exc.value.code == "MW502"
    with pytest.raises(StoreError):
        store.create_object("Mid", {"n": "seven"})
    with pytest.raises(StoreError):
        store.create_object("Mid", {"zzz": 1})
    with pytest.raises(StoreError):
        store.create_object("Mid", {"n": True})


def test_cascade_delete(carsharing):
    p = carsharing.create_object("Person", {"name": "Ann"}, {"cars": [_car(), _car()]})
    c1, c2 = carsharing.get(p).fields["cars"]
    assert carsharing.delete_object(p) == {p, c1, c2}
    assert len(carsharing) == 0 and not carsharing.owners


def test_delete_child_only(carsharing):
    p = carsharing.create_object("Person", {"name": "Ann"}, {"cars": [_car(), _car()]})
    c1, c2 = carsharing.get(p).fields["cars"]
    assert carsharing.delete_object(c1) == {c1}
    assert carsharing.get(p).fields["cars"] == [c2]


def test_delete_unknown(store):
    with pytest.raises(StoreError) as exc:
        store.delete_object(ObjectId(99))
    assert exc.value.code == "MW502"


def test_ids_never_reused(store):
    a = store.create_object("Root")
    store.delete_object(a)
    b = store.create_object("Root")
    assert b != a and b.serial > a.serial


def test_link_single_replaces(store):
    m1, m2, m3 = (store.create_object("Mid") for _ in range(3))
    store.link_objects(m1, "peer", m2)
    store.link_objects(m1, "peer", m3)
    assert store.get(m1).fields["peer"] == m3


def test_link_list_has_set_semantics_and_max(store):
    r = store.create_object("Root")
    m = store.create_object("Mid", children={"leaves": [ChildSpec()] * 3})
    leaves = store.get(m).fields["leaves"]
    store.link_objects(r, "favs", leaves[0])
    store.link_objects(r, "favs", leaves[0])
    assert store.get(r).fields["favs"] == [leaves[0]]
    for leaf in leaves[1:]:
        store.link_objects(r, "favs", leaf)
    extra = store.create_object("Mid", children={"leaves": [ChildSpec()]})
    store.link_objects(r, "favs", store.get(extra).fields["leaves"][0])
    with pytest.raises(StoreError) as exc:
        m2 = store.create_object("Mid", children={"leaves": [ChildSpec()]})
        store.link_objects(r, "favs", store.get(m2).fields["leaves"][0])
    assert exc.value.code == "MW501"


def test_link_wrong_class_or_composition(store):
    r = store.create_object("Root")
    m = store.create_object("Mid")
    with pytest.raises(StoreError) as exc:
        store.link_objects(r, "favs", m)
    assert exc.value.code == "MW502"
    with pytest.raises(StoreError):
        store.link_objects(r, "mids", m)


def test_delete_clears_links(store):
    r = store.create_object("Root", children={"mids": [ChildSpec(children={"leaves": [ChildSpec()]})]})
    leaf = store.get(store.get(r).fields["mids"][0]).fields["leaves"][0]
    other = store.create_object("Root")
    store.link_objects(other, "favs", leaf)
    store.link_objects(leaf, "home", other)
    store.delete_object(r)
    assert store.get(other).fields["favs"] == []
    assert store.integrity_problems() == []


def test_replace_children(store):
    m = store.create_object("Mid", children={"leaves": [ChildSpec({"tag": "a"})]})
    old = store.get(m).fields["leaves"][0]
    store.replace_children(m, "leaves", [ChildSpec({"tag": "b"}), ChildSpec({"tag": "c"})])
    assert old not in store
    assert [store.get(c).fields["tag"] for c in store.get(m).fields["leaves"]] == ["b", "c"]
    assert store.integrity_problems() == []


def test_label_and_find(carsharing):
    p = carsharing.create_object("Person", {"name": "Ann"}, {"cars": [_car()]})
    (car,) = carsharing.get(p).fields["cars"]
    assert carsharing.label(p) == "Ann"
    assert carsharing.label(car) == str(car)
    assert carsharing.find("Person", "Ann") == p
    assert carsharing.find("Car", str(car)) == car
    with pytest.raises(StoreError):
        carsharing.find("Person", "Bob")


# -- property: cascade soundness and closure -----------------------------------------

leaf_counts = st.lists(st.integers(0, 3), max_size=3)
create_ops = st.one_of(
    st.tuples(st.just("root"), leaf_counts),
    st.tuples(st.just("mid"), st.integers(0, 3)),
)
link_ops = st.tuples(st.just("link"), st.sampled_from(["home", "favs", "peer"]),
                     st.integers(0, 40), st.integers(0, 40))
delete_ops = st.tuples(st.just("delete"), st.integers(0, 40))


def store_sequences():
    return st.lists(st.one_of(create_ops, link_ops, delete_ops), max_size=50)


def random_sequence(rng) -> list[tuple]:
    """Same operation mix as ``store_sequences`` drawn from a seeded ``random.Random``."""
    ops = []
    for _ in range(rng.randint(0, 50)):
        kind = rng.choice(["root", "mid", "link", "delete"])
        if kind == "root":
            ops.append(("root", [rng.randint(0, 3) for _ in range(rng.randint(0, 3))]))
        elif kind == "mid":
            ops.append(("mid", rng.randint(0, 3)))
        elif kind == "link":
            ops.append(("link", rng.choice(["home", "favs", "peer"]),
                        rng.randint(0, 40), rng.randint(0, 40)))
        else:
            ops.append(("delete", rng.randint(0, 40)))
    return ops


def oracle_closure(objects: dict, start: ObjectId) -> set[ObjectId]:
    """Reachability over composition fields only, by repeated scanning."""
    found = {start}
    changed = True
    while changed:
        changed = False
        for oid in list(found):
            for role, value in objects[oid].fields.items():
                if role not in COMPOSITION_ROLES:
                    continue
                for child in (value if isinstance(value, list) else [value]):
                    if child is not None and child not in found:
                        found.add(child)
                        changed = True
    return found


def dangling(objects: dict) -> list[str]:
    out = []
    for oid, obj in objects.items():
        for name, value in obj.fields.items():
            for ref in (value if isinstance(value, list) else [value]):
                if isinstance(ref, ObjectId) and ref not in objects:
                    out.append(f"{oid}.{name} -> {ref}")
    return out


_ROLE_SOURCE = {"home": ("Leaf", "Root"), "favs": ("Root", "Leaf"), "peer": ("Mid", "Mid")}


def run_store_sequence(ops):
    store = ObjectStore(TABLE)
    for op in ops:
        kind = op[0]
        live = sorted(store.objects)
        if kind == "root":
            size = 1 + len(op[1]) + sum(op[1])
            if len(store) + size > MAX_OBJECTS:
                continue
            mids = [ChildSpec({"n": i}, {"leaves": [ChildSpec({"tag": f"t{j}"}) for j in range(k)]})
                    for i, k in enumerate(op[1])]
            store.create_object("Root", {"name": "r"}, {"mids": mids})
        elif kind == "mid":
            if len(store) + 1 + op[1] > MAX_OBJECTS:
                continue
            store.create_object("Mid", {}, {"leaves": [ChildSpec() for _ in range(op[1])]})
        elif kind == "link":
            src_cls, tgt_cls = _ROLE_SOURCE[op[1]]
            srcs = [o for o in live if store.get(o).class_name == src_cls]
            tgts = [o for o in live if store.get(o).class_name == tgt_cls]
            if not srcs or not tgts:
                continue
            try:
                store.link_objects(srcs[op[2] % len(srcs)], op[1], tgts[op[3] % len(tgts)])
            except StoreError as exc:
                assert exc.code == "MW501"
        else:
            if not live:
                continue
            victim = live[op[1] % len(live)]
            before = dict(store.objects)
            expected = oracle_closure(before, victim)
            removed = store.delete_object(victim)
            assert removed == expected
            assert set(store.objects) == set(before) - expected
        assert len(store) <= MAX_OBJECTS
        assert dangling(store.objects) == []
        assert store.integrity_problems() == []


@settings(max_examples=200, deadline=None)
@given(store_sequences())
def test_random_sequences_keep_store_closed(ops):
    run_store_sequence(ops)


def test_oracle_sees_three_levels():
    store = ObjectStore(TABLE)
    r = store.create_object("Root", children={"mids": [ChildSpec(children={"leaves": [ChildSpec()] * 2})]})
    assert len(oracle_closure(store.objects, r)) == 4
