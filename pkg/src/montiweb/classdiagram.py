"""Class diagram frontend: classes, enums, associations and compositions."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

from .diagnostics import DiagnosticSink, ModelError, SourceSpan, error
from .lexer import EOF, IDENT, Cursor, lex

KEYWORDS = frozenset({"classdiagram", "class", "enum", "association", "composition"})

BASE_TYPES = ("MWString", "Email", "Number", "MWDate")


@dataclass(frozen=True)
class Cardinality:
    """Multiplicity ``[min, max]``; ``max is None`` means unbounded."""

    min: int = 1
    max: int | None = 1

    def __post_init__(self):
        if self.min < 0 or (self.max is not None and self.max < self.min):
            raise ValueError(f"invalid cardinality [{self.min}, {self.max}]")

    @property
    def unbounded(self) -> bool:
        return self.max is None

    def allows(self, count: int) -> bool:
        return count >= self.min and (self.max is None or count <= self.max)

    def __str__(self):
        if self.max is None:
            return "*" if self.min == 0 else f"{self.min}..*"
        if self.min == self.max:
            return str(self.min)
        return f"{self.min}..{self.max}"


EXACTLY_ONE = Cardinality(1, 1)
MANY = Cardinality(0, None)

_CARD_RE = re.compile(r"(?P<lo>\d+)(?:\.\.(?P<hi>\d+|\*))?|\*")


def parse_cardinality(text: str | None, span: SourceSpan | None = None) -> Cardinality:
    """Read the text between ``[`` and ``]``; ``None`` means the bracket is absent."""
    span = span or SourceSpan.point("<input>", 1, 1)
    if text is None:
        return EXACTLY_ONE
    text = "".join(text.split())
    m = _CARD_RE.fullmatch(text)
    if not m:
        raise ModelError([error("MW020", f"malformed cardinality [{text}]", span)])
    if m.group("lo") is None:
        return MANY
    lo = int(m.group("lo"))
    hi = m.group("hi")
    if hi is None:
        return Cardinality(lo, lo)
    if hi == "*":
        return Cardinality(lo, None)
    if int(hi) < lo:
        raise ModelError([error("MW102", f"cardinality upper bound {hi} is below lower bound {lo}",
                                span)])
    return Cardinality(lo, int(hi))


class RelationKind(enum.Enum):
    ASSOCIATION = "association"
    COMPOSITION = "composition"


@dataclass
class AttributeDef:
    type_name: str
    name: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class ClassDef:
    name: str
    attributes: list[AttributeDef] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class EnumDef:
    name: str
    literals: list[str]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class RelationDef:
    kind: RelationKind
    source_class: str
    target_class: str
    source_role: str | None = None
    target_role: str | None = None
    target_cardinality: Cardinality = EXACTLY_ONE
    directed: bool = True
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class ClassDiagram:
    name: str
    classes: list[ClassDef] = field(default_factory=list)
    enums: list[EnumDef] = field(default_factory=list)
    relations: list[RelationDef] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    @property
    def file(self) -> str:
        return self.span.file if self.span else "<input>"


class _Parser:
    def __init__(self, cur: Cursor):
        self.cur = cur
        self.sink = DiagnosticSink()

    def diagram(self) -> ClassDiagram:
        cur = self.cur
        start = cur.expect_word("classdiagram")
        name = cur.ident("diagram name")
        cur.expect("{")
        cd = ClassDiagram(name.text)
        seen: dict[str, SourceSpan] = {}
        while not cur.at("}"):
            tok = cur.current
            if tok.is_word("class"):
                decl = self.class_def()
                cd.classes.append(decl)
            elif tok.is_word("enum"):
                decl = self.enum_def()
                cd.enums.append(decl)
            elif tok.is_word("composition") or tok.is_word("association"):
                cd.relations.append(self.relation())
                continue
            elif tok.kind == EOF:
                cur.fail(f"unterminated classdiagram {name.text!r}", start)
            else:
                cur.fail(f"expected class, enum, association or composition, found {tok}")
            if decl.name in seen:
                self.sink.error("MW101", f"duplicate declaration of {decl.name!r}", decl.span,
                                [(seen[decl.name], "first declared here")])
            else:
                seen[decl.name] = decl.span
        end = cur.next()
        if not cur.at(EOF):
            cur.fail(f"unexpected {cur.current} after end of classdiagram")
        cd.span = start.span.to(end.span)
        self.sink.raise_if_errors()
        return cd

    def class_def(self) -> ClassDef:
        cur = self.cur
        start = cur.next()
        name = cur.ident("class name")
        cur.expect("{")
        decl = ClassDef(name.text)
        seen: dict[str, SourceSpan] = {}
        while not cur.at("}"):
            if cur.at(EOF):
                cur.fail(f"unterminated class {name.text!r}", start)
            type_tok = cur.ident("attribute type")
            attr_name = cur.ident("attribute name")
            semi = cur.expect(";")
            attr = AttributeDef(type_tok.text, attr_name.text, type_tok.span.to(semi.span))
            if attr.name in seen:
                self.sink.error("MW105", f"duplicate attribute {attr.name!r} in class {name.text!r}",
                                attr.span, [(seen[attr.name], "first declared here")])
            seen.setdefault(attr.name, attr.span)
            decl.attributes.append(attr)
        end = cur.next()
        decl.span = start.span.to(end.span)
        return decl

    def enum_def(self) -> EnumDef:
        cur = self.cur
        start = cur.next()
        name = cur.ident("enum name")
        cur.expect("{")
        literals = [cur.ident("enum literal")]
        while cur.accept(","):
            literals.append(cur.ident("enum literal"))
        cur.accept(";")
        end = cur.expect("}")
        seen = set()
        for lit in literals:
            if lit.text in seen:
                self.sink.error("MW106", f"duplicate literal {lit.text!r} in enum {name.text!r}",
                                lit.span)
            seen.add(lit.text)
        return EnumDef(name.text, [t.text for t in literals], start.span.to(end.span))

    def role(self) -> str | None:
        if self.cur.accept("("):
            role = self.cur.ident("role name")
            self.cur.expect(")")
            return role.text
        return None

    def relation(self) -> RelationDef:
        cur = self.cur
        kind_tok = cur.next()
        source = cur.ident("source class")
        source_role = self.role()
        if cur.at("["):
            cur.fail("cardinality is only allowed on the target side of a relation")
        if cur.accept("->"):
            directed = True
        elif cur.accept("--"):
            directed = False
        else:
            cur.fail(f"expected '->' or '--', found {cur.current}")
        target_role = self.role()
        target = cur.ident("target class")
        card = EXACTLY_ONE
        if cur.at("["):
            open_tok = cur.next()
            parts = []
            while not cur.at("]"):
                if cur.at(EOF) or cur.at(";"):
                    cur.fail("unterminated cardinality", open_tok)
                parts.append(cur.next())
            close = cur.next()
            card = parse_cardinality("".join(t.text for t in parts), open_tok.span.to(close.span))
        end = cur.expect(";")
        return RelationDef(RelationKind(kind_tok.text), source.text, target.text, source_role,
                           target_role, card, directed, kind_tok.span.to(end.span))


def parse_classdiagram(source: str | bytes, file: str = "<input>") -> ClassDiagram:
    """Parse a ``.cd`` file; raises ModelError carrying the diagnostics on failure."""
    return _Parser(Cursor(lex(source, file))).diagram()


def _relation_line(rel: RelationDef) -> str:
    parts = [rel.kind.value, rel.source_class]
    if rel.source_role:
        parts.append(f"({rel.source_role})")
    parts.append("->" if rel.directed else "--")
    if rel.target_role:
        parts.append(f"({rel.target_role})")
    parts.append(rel.target_class)
    if rel.target_cardinality != EXACTLY_ONE:
        parts.append(f"[{rel.target_cardinality}]")
    return " ".join(parts) + ";"


def print_classdiagram(cd: ClassDiagram) -> str:
    blocks = []
    for c in cd.classes:
        if not c.attributes:
            blocks.append([f"  class {c.name} {{}}"])
            continue
        lines = [f"  class {c.name} {{"]
        lines += [f"    {a.type_name} {a.name};" for a in c.attributes]
        lines.append("  }")
        blocks.append(lines)
    for e in cd.enums:
        blocks.append([f"  enum {e.name} {{{', '.join(e.literals)};}}"])
    for r in cd.relations:
        blocks.append(["  " + _relation_line(r)])
    body = "\n\n".join("\n".join(b) for b in blocks)
    if body:
        body += "\n"
    return f"classdiagram {cd.name} {{\n{body}}}\n"
