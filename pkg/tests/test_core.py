"""Lexer, diagnostics and the annotation sublanguage."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import annotations as annotation_lists

from montiweb.annotations import Annotation, parse_annotation_text, print_annotation
from montiweb.diagnostics import (Diagnostic, ModelError, Severity, SourceSpan, error,
                                  render_diagnostics, sort_diagnostics, warning)
from montiweb.lexer import EOF, IDENT, INT, RAW, STRING, lex


# -- spans and diagnostics ---------------------------------------------------------

def test_span_rejects_inverted_range():
    with pytest.raises(ValueError):
        SourceSpan("a", 3, 1, 2, 1)
    assert str(SourceSpan("f.cd", 3, 7, 3, 9)) == "f.cd:3:7"


def test_diagnostic_invariants():
    span = SourceSpan.point("f", 1, 1)
    with pytest.raises(ValueError):
        Diagnostic(Severity.ERROR, "E1", "x", span)
    with pytest.raises(ValueError):
        Diagnostic(Severity.ERROR, "MW010", "", span)


def test_render_empty():
    assert render_diagnostics([]) == ""


def test_render_golden():
    source = "classdiagram X {\n  class A {\n  @Length(min=) \n}\n"
    span = SourceSpan("x.cd", 3, 3, 3, 15)
    text = render_diagnostics([error("MW010", "expected a value", span)], {"x.cd": source})
    assert text == ("x.cd:3:3: error[MW010]: expected a value\n"
                    "   3 |   @Length(min=) \n"
                    "         ^~~~~~~~~~~~\n")


def test_render_orders_by_file_then_position():
    a = error("MW020", "late", SourceSpan.point("b.cd", 1, 1))
    b = warning("MW204", "early", SourceSpan.point("a.cv", 9, 2))
    c = error("MW101", "first", SourceSpan.point("a.cv", 2, 5))
    text = render_diagnostics([a, b, c])
    assert [line.split(":")[0] + ":" + line.split(":")[1] for line in text.splitlines()] == \
        ["a.cv:2", "a.cv:9", "b.cd:1"]
    assert render_diagnostics([c, a, b]) == text


@settings(max_examples=200)
@given(st.lists(st.tuples(st.sampled_from(["a", "b"]), st.integers(1, 5), st.integers(1, 5),
                          st.sampled_from(["MW010", "MW020", "MW101"]), st.booleans()),
                max_size=8))
def test_diagnostic_order_is_total(items):
    diags = [(error if e else warning)(code, "m", SourceSpan.point(f, line, col))
             for f, line, col, code, e in items]
    once = sort_diagnostics(diags)
    assert sort_diagnostics(reversed(diags)) == once
    assert render_diagnostics(diags) == render_diagnostics(list(reversed(diags)))


def test_color_output_uses_ansi():
    d = error("MW010", "bad", SourceSpan.point("f", 1, 1))
    assert "\x1b[" in render_diagnostics([d], color=True)
    assert "\x1b[" not in render_diagnostics([d])


# -- lexer ---------------------------------------------------------------------------

def kinds(src, **kw):
    return [(t.kind, t.text) for t in lex(src, "t", **kw)]


def test_lexer_basic_tokens():
    toks = kinds('composition Person (keeper) -> (cars) Car [*]; "s" 42 -7 // tail\n')
    assert toks[:4] == [(IDENT, "composition"), (IDENT, "Person"), ("(", "("), (IDENT, "keeper")]
    assert (("->", "->")) in toks and ((STRING, '"s"')) in toks
    assert (INT, "42") in toks and (INT, "-7") in toks
    assert toks[-1][0] == EOF


def test_lexer_comments_and_punctuation():
    toks = kinds("a /* x\n y */ b >= c != d && e || f .. g -- h")
    texts = [t for _, t in toks[:-1]]
    assert texts == ["a", "b", ">=", "c", "!=", "d", "&&", "e", "||", "f", "..", "g", "--", "h"]


def test_string_escapes():
    (tok, _) = lex(r'"a\"b\\c\nd\te"', "t")
    assert tok.value == 'a"b\\c\nd\te'


def test_raw_blocks_are_balanced():
    toks = lex("text { a {b} c } x", "t", raw_keywords={"text"})
    assert [(t.kind, t.text) for t in toks[:1]] == [(IDENT, "text")]
    assert (toks[1].kind, toks[1].value) == (RAW, "a {b} c")
    assert toks[2].text == "x"


@pytest.mark.parametrize("src,code", [
    ("a # b", "MW001"),
    ('"open', "MW002"),
    (r'"\q"', "MW002"),
    ("/* never closed", "MW003"),
    (b"abc \xff", "MW004"),
])
def test_lexer_errors(src, code):
    with pytest.raises(ModelError) as exc:
        lex(src, "t")
    assert exc.value.codes == [code]


def test_unterminated_raw_block():
    with pytest.raises(ModelError) as exc:
        lex("text { a { b }", "t", raw_keywords={"text"})
    assert exc.value.codes == ["MW005"]


def test_spans_are_one_based():
    toks = lex("a\n  bb", "t")
    assert (toks[1].span.start_line, toks[1].span.start_col, toks[1].span.end_col) == (2, 3, 5)


@settings(max_examples=300)
@given(st.binary(max_size=60))
def test_lexing_is_total(data):
    try:
        toks = lex(data, "fuzz", raw_keywords={"text"})
    except ModelError as exc:
        assert exc.diagnostics and all(d.code.startswith("MW00") for d in exc.diagnostics)
    else:
        assert toks[-1].kind == EOF


# -- annotations ---------------------------------------------------------------------

def test_annotation_examples():
    assert parse_annotation_text("@Required") == Annotation("Required", ())
    assert parse_annotation_text("@Length(min=3, max=30)").args == (("min", 3), ("max", 30))
    assert parse_annotation_text("@AsImage(alt=false)").args == (("alt", False),)
    assert parse_annotation_text('@Hint(text="a \\"b\\"")').get("text") == 'a "b"'


@pytest.mark.parametrize("text", [
    "@Length(min=)", "@Length(min 3)", "@Length(min=3", "@Length(min=3, min=4)",
    "@", "@Length(min=99999999999999999999)", "@Length(min=x)",
])
def test_malformed_annotations(text):
    with pytest.raises(ModelError) as exc:
        parse_annotation_text(text)
    assert "MW010" in exc.value.codes


def test_bool_is_not_int():
    assert Annotation("A", (("x", True),)) != Annotation("A", (("x", 1),))


@settings(max_examples=300)
@given(annotation_lists(3))
def test_annotation_round_trip(anns):
    for ann in anns:
        assert parse_annotation_text(print_annotation(ann)) == ann
