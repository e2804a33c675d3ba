"""Classviews frontend: per-class editor, display and field views."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

from .annotations import Annotation, parse_annotations, print_annotation
from .diagnostics import DiagnosticSink, SourceSpan
from .lexer import EOF, IDENT, RAW, Cursor, lex

KEYWORDS = frozenset({"attributes", "editor", "display", "field", "text", "include"})


class ViewModifier(enum.Enum):
    EDITOR = "editor"
    DISPLAY = "display"
    FIELD = "field"


MODIFIER_WORDS = {m.value: m for m in ViewModifier}


@dataclass
class AttributeEntry:
    attribute_name: str
    annotations: list[Annotation] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class AttributesBlock:
    entries: list[AttributeEntry] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class AttributeRef:
    name: str
    annotations: list[Annotation] = field(default_factory=list)
    modifier_override: ViewModifier | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class StaticText:
    text: str
    annotations: list[Annotation] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class Include:
    view_name: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


ViewElement = Union[AttributeRef, StaticText, Include]


@dataclass
class ViewDef:
    modifier: ViewModifier
    name: str | None
    elements: list[ViewElement]
    annotations: list[Annotation] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class ClassviewsFile:
    class_name: str
    views: list[ViewDef] = field(default_factory=list)
    attributes_block: AttributesBlock | None = None
    annotations: list[Annotation] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    @property
    def file(self) -> str:
        return self.span.file if self.span else "<input>"

    def view(self, name: str) -> ViewDef | None:
        return next((v for v in self.views if v.name == name), None)


class _Parser:
    def __init__(self, cur: Cursor):
        self.cur = cur
        self.sink = DiagnosticSink()

    def file(self) -> ClassviewsFile:
        cur = self.cur
        first = cur.current
        annotations = parse_annotations(cur)
        name = cur.ident("class name")
        cur.expect("{")
        cv = ClassviewsFile(name.text, annotations=annotations)
        if cur.at_word("attributes") and cur.at("{", k=1):
            cv.attributes_block = self.attributes_block()
        seen: dict[str, SourceSpan] = {}
        while not cur.at("}"):
            if cur.at(EOF):
                cur.fail(f"unterminated classviews {name.text!r}", name)
            if cur.at_word("attributes") and cur.at("{", k=1):
                cur.fail("the attributes block must come first and appear at most once")
            view = self.view()
            if view.name is not None:
                if view.name in seen:
                    self.sink.error("MW201", f"duplicate view {view.name!r}", view.span,
                                    [(seen[view.name], "first defined here")])
                seen.setdefault(view.name, view.span)
            cv.views.append(view)
        end = cur.next()
        if not cur.at(EOF):
            cur.fail(f"unexpected {cur.current} after end of classviews")
        cv.span = first.span.to(end.span)
        self.sink.raise_if_errors()
        return cv

    def attributes_block(self) -> AttributesBlock:
        cur = self.cur
        start = cur.next()
        cur.expect("{")
        block = AttributesBlock()
        seen: dict[str, SourceSpan] = {}
        while not cur.at("}"):
            first = cur.current
            annotations = parse_annotations(cur)
            name = cur.ident("attribute name")
            semi = cur.expect(";")
            entry = AttributeEntry(name.text, annotations, first.span.to(semi.span))
            if entry.attribute_name in seen:
                self.sink.error("MW206", f"attribute {name.text!r} listed twice in attributes block",
                                entry.span, [(seen[name.text], "first listed here")])
            seen.setdefault(name.text, entry.span)
            block.entries.append(entry)
        end = cur.next()
        block.span = start.span.to(end.span)
        return block

    def view(self) -> ViewDef:
        cur = self.cur
        first = cur.current
        annotations = parse_annotations(cur)
        mod_tok = cur.current
        if mod_tok.kind != IDENT or mod_tok.text not in MODIFIER_WORDS:
            cur.fail(f"expected view modifier (editor, display or field), found {mod_tok}")
        cur.next()
        name = cur.accept(IDENT)
        open_brace = cur.expect("{")
        elements = []
        while not cur.at("}"):
            if cur.at(EOF):
                cur.fail("unterminated view", open_brace)
            elements.append(self.element())
        end = cur.next()
        span = first.span.to(end.span)
        if not elements:
            self.sink.error("MW021", "a view needs at least one element", span)
        return ViewDef(MODIFIER_WORDS[mod_tok.text], name.text if name else None, elements,
                       annotations, span)

    def element(self) -> ViewElement:
        cur = self.cur
        first = cur.current
        annotations = parse_annotations(cur)
        if cur.at_word("text") and cur.at(RAW, k=1):
            cur.next()
            raw = cur.next()
            return StaticText(raw.value, annotations, first.span.to(raw.span))
        if cur.at_word("include") and cur.at(IDENT, k=1):
            if annotations:
                cur.fail("annotations are not allowed on include", first)
            cur.next()
            target = cur.next()
            semi = cur.expect(";")
            return Include(target.text, first.span.to(semi.span))
        modifier = None
        if cur.current.kind == IDENT and cur.current.text in MODIFIER_WORDS and cur.at(IDENT, k=1):
            modifier = MODIFIER_WORDS[cur.next().text]
        name = cur.ident("attribute name")
        semi = cur.expect(";")
        return AttributeRef(name.text, annotations, modifier, first.span.to(semi.span))


def parse_classviews(source: str | bytes, file: str = "<input>") -> ClassviewsFile:
    """Parse a ``.cv`` file; raises ModelError carrying the diagnostics on failure."""
    return _Parser(Cursor(lex(source, file, raw_keywords={"text"}))).file()


def _annotation_lines(annotations, indent):
    return [indent + print_annotation(a) for a in annotations]


def _element_lines(el: ViewElement, indent: str) -> list[str]:
    if isinstance(el, Include):
        return [f"{indent}include {el.view_name};"]
    lines = _annotation_lines(el.annotations, indent)
    if isinstance(el, StaticText):
        lines.append(f"{indent}text {{{el.text}}}")
    else:
        prefix = f"{el.modifier_override.value} " if el.modifier_override else ""
        lines.append(f"{indent}{prefix}{el.name};")
    return lines


def print_classviews(cv: ClassviewsFile) -> str:
    lines = _annotation_lines(cv.annotations, "")
    lines.append(f"{cv.class_name} {{")
    blocks = []
    if cv.attributes_block is not None:
        block = ["  attributes {"]
        for entry in cv.attributes_block.entries:
            block += _annotation_lines(entry.annotations, "    ")
            block.append(f"    {entry.attribute_name};")
        block.append("  }")
        blocks.append(block)
    for view in cv.views:
        block = _annotation_lines(view.annotations, "  ")
        head = view.modifier.value + (f" {view.name}" if view.name else "")
        block.append(f"  {head} {{")
        for el in view.elements:
            block += _element_lines(el, "    ")
        block.append("  }")
        blocks.append(block)
    body = "\n\n".join("\n".join(b) for b in blocks)
    return "\n".join(lines) + "\n" + (body + "\n" if body else "") + "}\n"
