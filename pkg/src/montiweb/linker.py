"""Cross-model symbol tables and reference resolution.

Linking runs in a fixed order: class diagrams, then classviews, then
activities. Each stage only reads what earlier stages produced, so the
data-model part of the symbol table never depends on views or flows.
"""

from __future__ import annotations

import datetime as dt
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Union

from .activity import (ActionRef, ActivityDef, Compare, EnumLiteral, Final, Initial, IntLiteral,
                       OpaqueCode, ParamAttribute, StringLiteral, TransitionStmt, ViewCall,
                       guard_operands, print_guard)
from .annotations import Annotation
from .classdiagram import (BASE_TYPES, EXACTLY_ONE, Cardinality, ClassDiagram, RelationKind)
from .classviews import (AttributeRef, ClassviewsFile, Include, StaticText, ViewDef,
                         ViewModifier)
from .diagnostics import (Diagnostic, DiagnosticSink, SourceSpan, has_errors, sort_diagnostics,
                          warning)

PROJECT_SPAN = SourceSpan.point("<project>", 1, 1)

KNOWN_ANNOTATIONS = frozenset({"Required", "Length", "AsImage", "Captcha", "Warning"})
TEXT_TYPES = frozenset({"MWString", "Email"})


# -- resolved types and symbols ------------------------------------------------

@dataclass(frozen=True)
class BaseType:
    name: str

    kind = "base"


@dataclass(frozen=True)
class EnumRef:
    name: str
    literals: tuple[str, ...]

    kind = "enum"


@dataclass(frozen=True)
class ClassRef:
    name: str

    kind = "class"


ResolvedType = Union[BaseType, EnumRef, ClassRef]


@dataclass(frozen=True)
class ResolvedRelation:
    kind: RelationKind
    source: str
    target: str
    source_role: str
    target_role: str
    cardinality: Cardinality
    directed: bool
    synthetic: bool = False
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    @property
    def is_composition(self) -> bool:
        return self.kind is RelationKind.COMPOSITION


@dataclass(frozen=True)
class Role:
    """One navigable relation end, seen from the class that owns the field."""

    name: str
    owner: str
    target: str
    cardinality: Cardinality
    relation: ResolvedRelation

    kind = "role"

    @property
    def is_composition(self) -> bool:
        return self.relation.is_composition


@dataclass
class ClassSymbol:
    name: str
    attributes: dict[str, ResolvedType] = field(default_factory=dict)
    relations: list[ResolvedRelation] = field(default_factory=list)
    roles: dict[str, Role] = field(default_factory=dict)
    span: SourceSpan | None = None

    def member(self, name: str) -> ResolvedType | Role | None:
        """Roles win over attributes, so class-typed attributes bind as compositions."""
        return self.roles.get(name) or self.attributes.get(name)

    @property
    def compositions(self) -> list[Role]:
        return [r for r in self.roles.values() if r.is_composition]


@dataclass
class EnumSymbol:
    name: str
    literals: tuple[str, ...]
    span: SourceSpan | None = None


@dataclass
class FieldElement:
    name: str
    binding: ResolvedType | Role
    modifier: ViewModifier
    annotations: tuple[Annotation, ...]
    span: SourceSpan | None = None
    via: tuple[str, ...] = ()

    def annotation(self, name: str) -> Annotation | None:
        return next((a for a in self.annotations if a.name == name), None)


@dataclass
class TextElement:
    text: str
    annotations: tuple[Annotation, ...]
    span: SourceSpan | None = None
    via: tuple[str, ...] = ()

    @property
    def is_warning(self) -> bool:
        return any(a.name == "Warning" for a in self.annotations)


EffectiveElement = Union[FieldElement, TextElement]


@dataclass
class ViewSymbol:
    owner: str
    name: str
    modifier: ViewModifier
    elements: list[EffectiveElement]
    annotations: tuple[Annotation, ...] = ()
    span: SourceSpan | None = None

    @property
    def qualified_name(self) -> str:
        return f"{self.owner}.{self.name}"

    @property
    def has_captcha(self) -> bool:
        return any(a.name == "Captcha" for a in self.annotations)

    def fields(self) -> list[FieldElement]:
        return [e for e in self.elements if isinstance(e, FieldElement)]


@dataclass
class SymbolTable:
    classes: dict[str, ClassSymbol] = field(default_factory=dict)
    enums: dict[str, EnumSymbol] = field(default_factory=dict)
    views: dict[tuple[str, str], ViewSymbol] = field(default_factory=dict)
    activities: dict[str, ResolvedActivity] = field(default_factory=dict)

    def view(self, qualified: str) -> ViewSymbol | None:
        cls, _, name = qualified.partition(".")
        return self.views.get((cls, name))

    def data_model(self) -> dict:
        """Plain-data echo of the classes, enums and relations (no spans)."""
        classes = []
        relations = []
        for name in sorted(self.classes):
            sym = self.classes[name]
            classes.append({
                "name": name,
                "attributes": [{"name": a, "type": t.name, "kind": t.kind}
                               for a, t in sym.attributes.items()],
            })
            for rel in sym.relations:
                card = rel.cardinality
                relations.append({
                    "kind": rel.kind.value,
                    "source": rel.source,
                    "target": rel.target,
                    "source_role": rel.source_role,
                    "target_role": rel.target_role,
                    "directed": rel.directed,
                    "synthetic": rel.synthetic,
                    "cardinality": {"min": card.min,
                                    "max": "unbounded" if card.max is None else card.max},
                })
        enums = [{"name": n, "literals": list(self.enums[n].literals)} for n in sorted(self.enums)]
        return {"classes": classes, "enums": enums, "relations": relations}


def dump_data_model(table: SymbolTable) -> str:
    return json.dumps(table.data_model(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


@dataclass
class ResolvedAction:
    name: str
    definition: object
    view: ViewSymbol | None
    param_types: dict[str, str]

    @property
    def is_code(self) -> bool:
        return isinstance(self.definition.content, OpaqueCode)

    @property
    def call(self) -> ViewCall | None:
        content = self.definition.content
        return content if isinstance(content, ViewCall) else None


@dataclass
class OperandBinding:
    operand: object
    param: str
    class_name: str
    type: ResolvedType


@dataclass
class ResolvedActivity:
    definition: ActivityDef
    actions: dict[str, ResolvedAction] = field(default_factory=dict)
    outgoing: dict[str, TransitionStmt] = field(default_factory=dict)
    initial: TransitionStmt | None = None
    operand_bindings: list[OperandBinding] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.definition.name


@dataclass
class LinkedModel:
    table: SymbolTable
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def activities(self) -> dict[str, ResolvedActivity]:
        return self.table.activities

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.is_error]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if not d.is_error]

    @property
    def ok(self) -> bool:
        return not has_errors(self.diagnostics)

    def unbound_references(self) -> list[str]:
        """Every reference in the model lacking a binding, as readable strings."""
        missing = []
        table = self.table
        for view in table.views.values():
            for el in view.fields():
                if el.binding is None:
                    missing.append(f"{view.qualified_name}: {el.name}")
        for act in table.activities.values():
            names = {a.name for a in act.definition.actions}
            bound_ops = {id(b.operand) for b in act.operand_bindings}
            for a in act.definition.actions:
                ra = act.actions.get(a.name)
                if isinstance(a.content, ViewCall):
                    if ra is None or ra.view is None or \
                            table.views.get((a.content.class_name, a.content.view_name)) is None:
                        missing.append(f"{act.name}.{a.name}: view {a.content.qualified_name}")
            for stmt in act.definition.transitions:
                ends = list(stmt.sources) + [alt.target for alt in stmt.alternatives]
                for ep in ends:
                    if isinstance(ep, ActionRef) and ep.action not in names:
                        missing.append(f"{act.name}: endpoint {ep}")
                for alt in stmt.alternatives:
                    if alt.guard is None:
                        continue
                    for op in guard_operands(alt.guard):
                        if isinstance(op, ParamAttribute) and id(op) not in bound_ops:
                            missing.append(f"{act.name}: guard operand {op.param}.{op.attribute}")
                        if isinstance(op, EnumLiteral) and (
                                op.enum_name not in table.enums
                                or op.literal not in table.enums[op.enum_name].literals):
                            missing.append(f"{act.name}: enum literal {op.enum_name}.{op.literal}")
        return missing


def _by_file(items):
    return sorted(items, key=lambda x: (x.file, x.span.start_line if x.span else 0))


def _decapitalize(name: str) -> str:
    return name[:1].lower() + name[1:]


# -- stage 1: class diagrams ---------------------------------------------------

def build_symbol_table(diagrams: Iterable[ClassDiagram]) -> tuple[SymbolTable, list[Diagnostic]]:
    """Merge all class diagrams into one table and resolve attribute types."""
    sink = DiagnosticSink()
    table = SymbolTable()
    diagrams = _by_file(diagrams)
    declared: dict[str, SourceSpan] = {}

    for cd in diagrams:
        for decl in [*cd.classes, *cd.enums]:
            if decl.name in BASE_TYPES:
                sink.error("MW108", f"{decl.name!r} is a built-in base type and cannot be redeclared",
                           decl.span)
                continue
            if decl.name in declared:
                sink.error("MW104", f"{decl.name!r} is declared in more than one class diagram",
                           decl.span, [(declared[decl.name], "first declared here")])
                continue
            declared[decl.name] = decl.span
            if hasattr(decl, "literals"):
                table.enums[decl.name] = EnumSymbol(decl.name, tuple(decl.literals), decl.span)
            else:
                table.classes[decl.name] = ClassSymbol(decl.name, span=decl.span)

    relations: list[ResolvedRelation] = []
    for cd in diagrams:
        for decl in cd.classes:
            sym = table.classes.get(decl.name)
            if sym is None or sym.span is not decl.span:
                continue
            for attr in decl.attributes:
                t = attr.type_name
                if t in BASE_TYPES:
                    sym.attributes[attr.name] = BaseType(t)
                elif t in table.enums:
                    sym.attributes[attr.name] = EnumRef(t, table.enums[t].literals)
                elif t in table.classes:
                    sym.attributes[attr.name] = ClassRef(t)
                    relations.append(ResolvedRelation(
                        RelationKind.COMPOSITION, decl.name, t, _decapitalize(decl.name),
                        attr.name, EXACTLY_ONE, True, synthetic=True, span=attr.span))
                else:
                    sink.error("MW401", f"unknown type {t!r} for attribute "
                               f"{decl.name}.{attr.name}", attr.span)
        for rel in cd.relations:
            bad = [c for c in (rel.source_class, rel.target_class) if c not in table.classes]
            for c in bad:
                sink.error("MW401", f"relation refers to unknown class {c!r}", rel.span)
            if bad:
                continue
            if rel.kind is RelationKind.COMPOSITION and not rel.directed:
                sink.error("MW103", "a composition must be directed (use '->')", rel.span)
                continue
            relations.append(ResolvedRelation(
                rel.kind, rel.source_class, rel.target_class,
                rel.source_role or _decapitalize(rel.source_class),
                rel.target_role or _decapitalize(rel.target_class),
                rel.target_cardinality, rel.directed, span=rel.span))

    for rel in relations:
        table.classes[rel.source].relations.append(rel)
        ends = [Role(rel.target_role, rel.source, rel.target, rel.cardinality, rel)]
        if not rel.directed:
            ends.append(Role(rel.source_role, rel.target, rel.source, EXACTLY_ONE, rel))
        for role in ends:
            owner = table.classes[role.owner]
            clash = role.name in owner.roles or (
                role.name in owner.attributes and not rel.synthetic)
            if clash:
                sink.error("MW107", f"role {role.name!r} clashes with an existing member of "
                           f"class {role.owner!r}", rel.span)
                continue
            owner.roles[role.name] = role
    return table, sink.items


# -- stage 2: classviews ------------------------------------------------------

def _check_args(ann: Annotation, allowed: dict[str, type], sink: DiagnosticSink) -> bool:
    ok = True
    for key, value in ann.args:
        want = allowed.get(key)
        if want is None:
            sink.error("MW203", f"@{ann.name} has no argument {key!r}", ann.span)
            ok = False
        elif want is int and (isinstance(value, bool) or not isinstance(value, int)):
            sink.error("MW203", f"@{ann.name}({key}=...) expects an integer", ann.span)
            ok = False
        elif want is bool and not isinstance(value, bool):
            sink.error("MW203", f"@{ann.name}({key}=...) expects true or false", ann.span)
            ok = False
    return ok


def _check_annotation(ann: Annotation, target: str, binding, sink: DiagnosticSink):
    """Apply the annotation applicability table; ``target`` is view, text, field or file."""
    name = ann.name
    if name not in KNOWN_ANNOTATIONS:
        sink.warning("MW204", f"unknown annotation @{name} is ignored", ann.span)
        return
    placement = {"Captcha": "view", "Warning": "text"}.get(name, "field")
    if placement != target:
        where = {"view": "views", "text": "static text", "field": "attributes"}[placement]
        sink.error("MW203", f"@{name} can only be applied to {where}", ann.span)
        return
    if name in ("Captcha", "Warning", "Required"):
        _check_args(ann, {}, sink)
        return
    type_name = binding.name if isinstance(binding, BaseType) else None
    if type_name not in TEXT_TYPES:
        sink.error("MW203", f"@{name} only applies to MWString or Email attributes", ann.span)
        return
    if name == "AsImage":
        _check_args(ann, {"alt": bool}, sink)
        return
    if _check_args(ann, {"min": int, "max": int}, sink):
        lo, hi = ann.get("min"), ann.get("max")
        if lo is None and hi is None:
            sink.error("MW203", "@Length needs min, max or both", ann.span)
        elif (lo is not None and lo < 0) or (hi is not None and hi < 0):
            sink.error("MW203", "@Length bounds must be non-negative", ann.span)
        elif lo is not None and hi is not None and lo > hi:
            sink.error("MW203", f"@Length min {lo} exceeds max {hi}", ann.span)


def _include_cycles(views: dict[str, ViewDef]) -> dict[tuple[str, str], list[Include]]:
    """Map each cyclic include edge (from, to) to the include nodes forming its cycle."""
    graph = {name: [el for el in v.elements if isinstance(el, Include) and el.view_name in views]
             for name, v in views.items()}
    cyclic: dict[tuple[str, str], list[Include]] = {}

    def path_to(start, goal):
        # BFS returning the include nodes on a path start -> goal
        prev = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for inc in graph[node]:
                nxt = inc.view_name
                if nxt not in prev:
                    prev[nxt] = (node, inc)
                    if nxt == goal:
                        edges = []
                        cur = nxt
                        while prev[cur] is not None:
                            node_, inc_ = prev[cur]
                            edges.append(inc_)
                            cur = node_
                        return edges[::-1]
                    queue.append(nxt)
        return None

    for name in views:
        for inc in graph[name]:
            back = [] if inc.view_name == name else path_to(inc.view_name, name)
            if back is not None:
                cyclic[(name, inc.view_name)] = [inc, *back]
    return cyclic


def resolve_classviews(files: Iterable[ClassviewsFile], table: SymbolTable) -> list[Diagnostic]:
    """Bind view elements to class members, expand includes and add ViewSymbols to ``table``."""
    sink = DiagnosticSink()
    owners: dict[str, SourceSpan] = {}
    for cv in _by_file(files):
        if cv.class_name in owners:
            sink.error("MW205", f"class {cv.class_name!r} already has a classviews file", cv.span,
                       [(owners[cv.class_name], "first classviews file")])
            continue
        owners[cv.class_name] = cv.span
        cls = table.classes.get(cv.class_name)
        if cls is None:
            sink.error("MW403", f"classviews refer to unknown class {cv.class_name!r}", cv.span)
            continue
        _resolve_file(cv, cls, table, sink)
    return sink.items


def _resolve_file(cv: ClassviewsFile, cls: ClassSymbol, table: SymbolTable, sink: DiagnosticSink):
    for ann in cv.annotations:
        _check_annotation(ann, "file", None, sink)

    block: dict[str, tuple[Annotation, ...]] = {}
    if cv.attributes_block is not None:
        for entry in cv.attributes_block.entries:
            binding = cls.member(entry.attribute_name)
            if binding is None:
                sink.error("MW404", f"class {cls.name!r} has no attribute or role "
                           f"{entry.attribute_name!r}", entry.span)
                continue
            for ann in entry.annotations:
                _check_annotation(ann, "field", binding, sink)
            block[entry.attribute_name] = tuple(entry.annotations)

    named = {v.name: v for v in cv.views if v.name is not None}
    cyclic = _include_cycles(named)
    reported = set()
    for (src, dst), chain in sorted(cyclic.items()):
        key = frozenset(id(i) for i in chain)
        if key in reported:
            continue
        reported.add(key)
        first, *rest = chain
        sink.error("MW406", f"view {src!r} includes itself through {dst!r}", first.span,
                   [(inc.span, f"includes {inc.view_name!r}") for inc in rest])

    # element-level checks run once per view definition, not per expansion
    for view in cv.views:
        for ann in view.annotations:
            _check_annotation(ann, "view", None, sink)
        for el in view.elements:
            if isinstance(el, StaticText):
                for ann in el.annotations:
                    _check_annotation(ann, "text", None, sink)
            elif isinstance(el, AttributeRef):
                binding = cls.member(el.name)
                if binding is None:
                    sink.error("MW404", f"class {cls.name!r} has no attribute or role {el.name!r}",
                               el.span)
                    continue
                if el.modifier_override is ViewModifier.FIELD:
                    sink.error("MW207", "an element can only be overridden to editor or display",
                               el.span)
                for ann in el.annotations:
                    _check_annotation(ann, "field", binding, sink)
            elif el.view_name not in named:
                sink.error("MW405", f"included view {el.view_name!r} is not defined for class "
                           f"{cls.name!r}", el.span)
        if view.name is None:
            sink.warning("MW202", "anonymous view cannot be referenced", view.span)

    def expand(view: ViewDef, host: ViewModifier, stack: tuple[str, ...]) -> list[EffectiveElement]:
        via = stack[1:]
        out: list[EffectiveElement] = []
        for el in view.elements:
            if isinstance(el, StaticText):
                out.append(TextElement(el.text, tuple(el.annotations), el.span, via))
            elif isinstance(el, Include):
                target = named.get(el.view_name)
                if target is None or (view.name, el.view_name) in cyclic or el.view_name in stack:
                    continue
                out.extend(expand(target, host, stack + (el.view_name,)))
            else:
                binding = cls.member(el.name)
                if binding is None:
                    continue
                mod = el.modifier_override if el.modifier_override in (
                    ViewModifier.EDITOR, ViewModifier.DISPLAY) else host
                anns = block.get(el.name, ()) + tuple(el.annotations)
                out.append(FieldElement(el.name, binding, mod, anns, el.span, via))
        return out

    for name, view in named.items():
        elements = expand(view, view.modifier, (name,))
        table.views[(cls.name, name)] = ViewSymbol(
            cls.name, name, view.modifier, elements, tuple(view.annotations), view.span)


# -- stage 3: activities ------------------------------------------------------

_ORDER_OPS = frozenset({">=", "<=", ">", "<", "==", "!="})
_EQ_OPS = frozenset({"==", "!="})


def _is_iso_date(text: str) -> bool:
    try:
        return len(text) == 10 and dt.date.fromisoformat(text) is not None
    except ValueError:
        return False


class _ActivityResolver:
    def __init__(self, table: SymbolTable, sink: DiagnosticSink):
        self.table = table
        self.sink = sink

    def resolve(self, act: ActivityDef) -> ResolvedActivity:
        res = ResolvedActivity(act)
        for a in act.actions:
            res.actions[a.name] = self.action(act, a)
        self.transitions(act, res)
        return res

    def action(self, act: ActivityDef, a) -> ResolvedAction:
        sink = self.sink
        types = {}
        for p in a.inputs + a.outputs:
            if p.type_name not in self.table.classes:
                sink.error("MW401", f"parameter {p.name!r} has unknown class {p.type_name!r}", p.span)
            types[p.name] = p.type_name
        content = a.content
        if isinstance(content, OpaqueCode):
            sink.warning("MW303", f"code in action {a.name!r} is kept but never executed",
                         content.span)
            return ResolvedAction(a.name, a, None, types)
        view = self.table.views.get((content.class_name, content.view_name))
        if view is None:
            if content.class_name not in self.table.classes:
                why = f"class {content.class_name!r} does not exist"
            else:
                why = f"class {content.class_name!r} defines no view {content.view_name!r}"
            sink.error("MW402", f"unresolved view {content.qualified_name!r}: {why}", content.span)
            return ResolvedAction(a.name, a, None, types)
        if view.modifier is ViewModifier.FIELD:
            sink.error("MW402", f"{content.qualified_name!r} is a field view and can only be "
                       "included", content.span)
            return ResolvedAction(a.name, a, None, types)
        outs = {p.name: p.type_name for p in a.outputs}
        owner = view.owner
        if content.assign_to is not None:
            if view.modifier is ViewModifier.DISPLAY:
                sink.error("MW407", f"display view {content.qualified_name!r} returns no object",
                           content.span)
            elif content.assign_to not in types:
                sink.error("MW410", f"{content.assign_to!r} is not a parameter of action "
                           f"{a.name!r}", content.span)
            elif content.assign_to not in outs:
                sink.error("MW407", f"result of {content.qualified_name!r} must be assigned to an "
                           "out-parameter", content.span)
            elif outs[content.assign_to] != owner:
                sink.error("MW407", f"{content.qualified_name!r} returns {owner}, but "
                           f"{content.assign_to!r} is {outs[content.assign_to]}", content.span)
        if content.argument is not None:
            if content.argument not in types:
                sink.error("MW410", f"{content.argument!r} is not a parameter of action "
                           f"{a.name!r}", content.span)
            elif types[content.argument] != owner:
                sink.error("MW407", f"{content.qualified_name!r} takes a {owner}, but "
                           f"{content.argument!r} is {types[content.argument]}", content.span)
        return ResolvedAction(a.name, a, view, types)

    def transitions(self, act: ActivityDef, res: ResolvedActivity):
        sink = self.sink
        initial_stmts = [s for s in act.transitions if any(isinstance(e, Initial) for e in s.sources)]
        if len(initial_stmts) != 1:
            where = initial_stmts[1].span if len(initial_stmts) > 1 else act.span
            sink.error("MW304", f"activity {act.name!r} needs exactly one transition from initial, "
                       f"found {len(initial_stmts)}", where)
        if initial_stmts:
            res.initial = initial_stmts[0]
        if not any(isinstance(alt.target, Final) for s in act.transitions for alt in s.alternatives):
            sink.warning("MW305", f"activity {act.name!r} never reaches final", act.span)

        for stmt in act.transitions:
            scope: dict[str, str] = {}
            for src in stmt.sources:
                if not isinstance(src, ActionRef):
                    continue
                a = act.action(src.action)
                if a is None:
                    sink.error("MW410", f"unknown action {src.action!r}", src.span)
                    continue
                if src.action in res.outgoing:
                    sink.error("MW414", f"action {src.action!r} has more than one outgoing "
                               "transition statement", stmt.span,
                               [(res.outgoing[src.action].span, "first one here")])
                else:
                    res.outgoing[src.action] = stmt
                scope.update({p.name: p.type_name for p in a.inputs + a.outputs})
                if src.param is not None and src.param not in {p.name for p in a.outputs}:
                    sink.error("MW410", f"action {src.action!r} has no out-parameter "
                               f"{src.param!r}", src.span)
            for alt in stmt.alternatives:
                self.target(act, stmt, alt.target)
                if alt.guard is not None:
                    self.guard(alt.guard, scope, res)

        for a in act.actions:
            if a.name not in res.outgoing:
                sink.warning("MW415", f"action {a.name!r} has no outgoing transition", a.span)
        reachable = set()
        queue = deque([res.initial] if res.initial else [])
        while queue:
            stmt = queue.popleft()
            for alt in stmt.alternatives:
                t = alt.target
                if isinstance(t, ActionRef) and t.action not in reachable:
                    reachable.add(t.action)
                    if t.action in res.outgoing:
                        queue.append(res.outgoing[t.action])
        for a in act.actions:
            if a.name not in reachable:
                sink.warning("MW412", f"action {a.name!r} is unreachable from initial", a.span)

    def target(self, act, stmt, target):
        sink = self.sink
        if not isinstance(target, ActionRef):
            return
        a = act.action(target.action)
        if a is None:
            sink.error("MW410", f"unknown action {target.action!r}", target.span)
            return
        if target.param is None:
            return
        ins = {p.name: p.type_name for p in a.inputs}
        if target.param not in ins:
            sink.error("MW410", f"action {target.action!r} has no in-parameter {target.param!r}",
                       target.span)
            return
        for src in stmt.sources:
            if not isinstance(src, ActionRef) or src.param is None:
                sink.error("MW410", f"object flow into {target} needs a source object "
                           f"(write Action.param on the source side)", target.span)
                continue
            sa = act.action(src.action)
            outs = {p.name: p.type_name for p in sa.outputs} if sa else {}
            if src.param in outs and outs[src.param] != ins[target.param]:
                sink.error("MW407", f"object flow {src} ({outs[src.param]}) -> {target} "
                           f"({ins[target.param]}) has mismatched types", target.span)

    def operand_type(self, op, scope, res):
        """Return (category, detail) for a guard operand or None after reporting."""
        sink = self.sink
        if isinstance(op, IntLiteral):
            return ("Number", None)
        if isinstance(op, StringLiteral):
            return ("String", op.value)
        if isinstance(op, EnumLiteral):
            enum = self.table.enums.get(op.enum_name)
            if enum is None:
                sink.error("MW408", f"guard refers to {op.enum_name!r}, which is neither a "
                           "parameter in scope nor an enum", op.span)
                return None
            if op.literal not in enum.literals:
                sink.error("MW413", f"enum {op.enum_name!r} has no literal {op.literal!r}", op.span)
                return None
            return ("Enum", op.enum_name)
        if op.param not in scope:
            sink.error("MW408", f"guard refers to undeclared parameter {op.param!r}", op.span)
            return None
        cls = self.table.classes.get(scope[op.param])
        if cls is None:
            return None
        t = cls.attributes.get(op.attribute)
        if t is None:
            sink.error("MW404", f"class {cls.name!r} has no attribute {op.attribute!r}", op.span)
            return None
        res.operand_bindings.append(OperandBinding(op, op.param, cls.name, t))
        if isinstance(t, EnumRef):
            return ("Enum", t.name)
        if isinstance(t, ClassRef):
            return ("Class", t.name)
        return {"Number": ("Number", None), "MWDate": ("Date", None)}.get(t.name, ("Text", None))

    def guard(self, expr, scope, res):
        if not isinstance(expr, Compare):
            self.guard(expr.left, scope, res)
            self.guard(expr.right, scope, res)
            return
        lt = self.operand_type(expr.lhs, scope, res)
        rt = self.operand_type(expr.rhs, scope, res)
        if lt is None or rt is None:
            return
        cats = {lt[0], rt[0]}
        ok = False
        if "Class" in cats:
            ok = False
        elif cats == {"Number"} or cats == {"Date"}:
            ok = True
        elif cats == {"Date", "String"}:
            lit = lt[1] if lt[0] == "String" else rt[1]
            ok = _is_iso_date(lit)
        elif cats <= {"Text", "String"}:
            ok = expr.op in _EQ_OPS
        elif cats == {"Enum"}:
            ok = lt[1] == rt[1] and expr.op in _EQ_OPS
        if not ok:
            self.sink.error("MW409", f"guard comparison '{print_guard(expr)}' is not allowed "
                            "for these operand types", expr.span)


def resolve_activities(activities: Iterable[ActivityDef], table: SymbolTable) -> LinkedModel:
    """Bind view calls, endpoints and guards; adds ResolvedActivity entries to ``table``."""
    sink = DiagnosticSink()
    resolver = _ActivityResolver(table, sink)
    seen: dict[str, SourceSpan] = {}
    for act in _by_file(activities):
        if act.name in seen:
            sink.error("MW416", f"activity {act.name!r} is defined twice", act.span,
                       [(seen[act.name], "first defined here")])
            continue
        seen[act.name] = act.span
        table.activities[act.name] = resolver.resolve(act)
    return LinkedModel(table, sink.items)


def check_project(classdiagrams: Iterable[ClassDiagram] = (),
                  classviews: Iterable[ClassviewsFile] = (),
                  activities: Iterable[ActivityDef] = (),
                  extra: Iterable[Diagnostic] = ()) -> LinkedModel:
    """Run all three linking stages and collect every diagnostic.

    ``extra`` carries diagnostics produced earlier (for example parse errors)
    so that callers get one sorted report.
    """
    activities = list(activities)
    table, diags = build_symbol_table(classdiagrams)
    diags += resolve_classviews(classviews, table)
    model = resolve_activities(activities, table)
    diags += model.diagnostics
    if not activities:
        diags.append(warning("MW411", "project has no activities", PROJECT_SPAN))
    model.diagnostics = sort_diagnostics([*extra, *diags])
    return model
