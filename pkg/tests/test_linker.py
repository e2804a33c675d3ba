"""Cross-model linking: symbol table, view resolution, activity typing."""

from __future__ import annotations

import random

from conftest import CORRECTED

from montiweb.activity import parse_activity
from montiweb.classdiagram import Cardinality, parse_classdiagram
from montiweb.classviews import parse_classviews
from montiweb.linker import ClassRef, Role, TextElement, build_symbol_table, check_project

CD = (CORRECTED / "Carsharing.cd").read_text()
CV = (CORRECTED / "Person.cv").read_text()
AD = (CORRECTED / "UserRegistration.ad").read_text()


def link(cds=(CD,), cvs=(CV,), ads=(AD,)):
    return check_project(
        [parse_classdiagram(t, f"d{i}.cd") for i, t in enumerate(cds)],
        [parse_classviews(t, f"v{i}.cv") for i, t in enumerate(cvs)],
        [parse_activity(t, f"a{i}.ad") for i, t in enumerate(ads)],
    )


def error_codes(model):
    return [d.code for d in model.errors]


# -- symbol table --------------------------------------------------------------------

def test_symbol_table_for_carsharing():
    table, diags = build_symbol_table([parse_classdiagram(CD, "c.cd")])
    assert diags == []
    assert set(table.classes) == {"Person", "Car"} and set(table.enums) == {"Brand"}
    cars = table.classes["Person"].roles["cars"]
    assert (cars.target, cars.cardinality, cars.is_composition) == \
        ("Car", Cardinality(0, None), True)


def test_duplicate_class_across_diagrams():
    model = link(cds=(CD, "classdiagram Other { class Person { MWString x; } }"), cvs=(), ads=())
    assert "MW104" in error_codes(model)


def test_unknown_attribute_type():
    model = link(cds=("classdiagram X { class A { Foo bar; } }",), cvs=(), ads=())
    assert error_codes(model) == ["MW401"]


def test_builtin_base_type_cannot_be_redeclared():
    model = link(cds=("classdiagram X { class MWString { } }",), cvs=(), ads=())
    assert error_codes(model) == ["MW108"]


def test_undirected_composition():
    model = link(cds=("classdiagram X { class A {} class B {} composition A -- B; }",),
                 cvs=(), ads=())
    assert "MW103" in error_codes(model)


def test_class_typed_attribute_is_implicit_composition():
    table, _ = build_symbol_table([parse_classdiagram(
        "classdiagram X { class A { B b; } class B {} }", "x.cd")])
    role = table.classes["A"].member("b")
    assert isinstance(role, Role) and role.relation.synthetic and role.cardinality == Cardinality(1, 1)


def test_symbol_table_is_independent_of_views_and_activities():
    full = link()
    bare = link(cvs=(), ads=())
    assert full.table.data_model() == bare.table.data_model()


# -- classviews ----------------------------------------------------------------------

def test_carsharing_views_bind():
    model = link()
    assert model.ok, model.diagnostics
    reg = model.table.view("Person.registration")
    cars = next(f for f in reg.fields() if f.name == "cars")
    assert isinstance(cars.binding, Role) and cars.binding.is_composition
    welcome = model.table.view("Person.welcome")
    names = [e.name if not isinstance(e, TextElement) else "text" for e in welcome.elements]
    assert names == ["text", "name", "email", "cars", "age"]
    email = next(f for f in welcome.fields() if f.name == "email")
    assert email.via == ("protectedMail",) and email.annotation("AsImage") is not None


def test_attributes_block_annotations_are_inherited():
    model = link()
    name = next(f for f in model.table.view("Person.registration").fields() if f.name == "name")
    assert {a.name for a in name.annotations} == {"Required", "Length"}


def test_unknown_attribute_in_view():
    model = link(cvs=(CV.replace("    age;\n    cars;", "    height;\n    cars;"),))
    assert "MW404" in error_codes(model)


def test_second_file_for_same_class():
    model = link(cvs=(CV, "Person { display other { name; } }"))
    assert "MW205" in error_codes(model)


def test_unknown_class_for_view_file():
    model = link(cvs=(CV, "Nobody { display v { name; } }"))
    assert "MW403" in error_codes(model)


def test_unknown_include_target():
    model = link(cvs=(CV.replace("include protectedMail;", "include nothing;"),))
    assert "MW405" in error_codes(model)


def test_include_cycle_reports_both_spans():
    model = link(cvs=("Person { display a { include b; } display b { include a; } }",), ads=())
    (cycle,) = [d for d in model.errors if d.code == "MW406"]
    spans = [cycle.span] + [span for span, _ in cycle.related]
    assert len({(s.start_line, s.start_col) for s in spans}) == 2


def test_annotation_misuse():
    model = link(cvs=("Person { display v { @Length(min=1) age; } }",), ads=())
    assert "MW203" in error_codes(model)
    model = link(cvs=("Person { display v { @Shiny name; } }",), ads=())
    assert error_codes(model) == [] and "MW204" in [d.code for d in model.warnings]


def test_anonymous_view_warns():
    model = link(cvs=(CV.replace("  display error {", "  display { name; }\n  display error {"),))
    assert model.ok and "MW202" in [d.code for d in model.warnings]


# -- activities ----------------------------------------------------------------------

def test_view_name_mismatch_yields_single_mw402():
    model = link(ads=(AD.replace("Person.error(p)", "Person.registrationError(p)"),))
    assert error_codes(model) == ["MW402"]
    assert "registrationError" in model.errors[0].message


def test_undeclared_guard_param():
    model = link(ads=(AD.replace("[p.age >= 18]", "[q.age >= 18]"),))
    assert "MW408" in error_codes(model)


def test_ordering_on_string():
    model = link(ads=(AD.replace("[p.age >= 18]", "[p.name >= 18]"),))
    assert "MW409" in error_codes(model)


def test_unknown_endpoint():
    model = link(ads=(AD.replace("Welcome | Error", "Welcome | Nowhere"),))
    assert "MW410" in error_codes(model)


def test_param_type_mismatch():
    model = link(ads=(AD.replace("in: Person p;\n    view : Person.welcome",
                                 "in: Car p;\n    view : Person.welcome"),))
    assert "MW407" in error_codes(model)


def test_empty_project_warns_only():
    model = check_project()
    assert model.errors == []
    assert [(d.code, d.span.file) for d in model.warnings] == [("MW411", "<project>")]


def test_error_free_model_has_no_unbound_references():
    model = link()
    assert model.ok and model.unbound_references() == []
    assert all(isinstance(b.type, type(b.type)) and b.param == "p" for b in
               model.activities["UserRegistration"].operand_bindings)


def test_broken_model_lists_unbound_references():
    model = link(ads=(AD.replace("Person.error(p)", "Person.registrationError(p)"),))
    assert any("registrationError" in r for r in model.unbound_references())


def _named(parse, texts, ext):
    # names derive from content so arrival order does not change them
    return [parse(t, f"{sorted(texts).index(t)}.{ext}") for t in texts]


def test_link_order_is_deterministic():
    cds = [CD, "classdiagram Extra { class Shop { Foo x; } class Till {} }"]
    cvs = [CV, "Shop { display s { x; height; } }"]
    ads = [AD.replace("[p.age >= 18]", "[q.age >= 18]"), "activity B { initial -> Z; }"]
    reference = check_project(_named(parse_classdiagram, cds, "cd"),
                              _named(parse_classviews, cvs, "cv"),
                              _named(parse_activity, ads, "ad")).diagnostics
    assert len(reference) >= 4
    rng = random.Random(7)
    for _ in range(10):
        for seq in (cds, cvs, ads):
            rng.shuffle(seq)
        again = check_project(_named(parse_classdiagram, cds, "cd"),
                              _named(parse_classviews, cvs, "cv"),
                              _named(parse_activity, ads, "ad")).diagnostics
        assert again == reference


def test_class_ref_attribute_binding():
    model = link(cds=("classdiagram X { class A { B b; } class B { Number n; } }",),
                 cvs=("A { display v { b; } }",), ads=())
    field = model.table.view("A.v").fields()[0]
    assert isinstance(field.binding, Role) and field.binding.target == "B"
    assert ClassRef("B") == ClassRef("B")
