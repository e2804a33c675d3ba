"""Activity diagram frontend: actions, view calls and guarded transitions."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

from .annotations import format_value
from .diagnostics import DiagnosticSink, SourceSpan
from .lexer import EOF, IDENT, INT, RAW, STRING, Cursor, lex

KEYWORDS = frozenset({"activity", "action", "in", "out", "view", "code", "initial", "final"})

COMPARE_OPS = (">=", "<=", ">", "<", "==", "!=")


@dataclass
class ParamDecl:
    type_name: str
    name: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class ViewCall:
    class_name: str
    view_name: str
    assign_to: str | None = None
    argument: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    @property
    def qualified_name(self) -> str:
        return f"{self.class_name}.{self.view_name}"


@dataclass
class OpaqueCode:
    text: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


ActionContent = Union[ViewCall, OpaqueCode]


@dataclass
class ActionDef:
    name: str
    content: ActionContent
    inputs: list[ParamDecl] = field(default_factory=list)
    outputs: list[ParamDecl] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def param(self, name: str) -> ParamDecl | None:
        return next((p for p in self.inputs + self.outputs if p.name == name), None)


# -- endpoints ---------------------------------------------------------------

@dataclass
class Initial:
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __str__(self):
        return "initial"


@dataclass
class Final:
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __str__(self):
        return "final"


@dataclass
class ActionRef:
    action: str
    param: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __str__(self):
        return self.action if self.param is None else f"{self.action}.{self.param}"


Endpoint = Union[Initial, Final, ActionRef]


# -- guards ------------------------------------------------------------------

@dataclass
class ParamAttribute:
    param: str
    attribute: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class IntLiteral:
    value: int
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class StringLiteral:
    value: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class EnumLiteral:
    enum_name: str
    literal: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


Operand = Union[ParamAttribute, IntLiteral, StringLiteral, EnumLiteral]


@dataclass
class Compare:
    op: str
    lhs: Operand
    rhs: Operand
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class And:
    left: GuardExpr
    right: GuardExpr


@dataclass
class Or:
    left: GuardExpr
    right: GuardExpr


GuardExpr = Union[Or, And, Compare]


@dataclass
class Alternative:
    target: Endpoint
    guard: GuardExpr | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class TransitionStmt:
    sources: list[Endpoint]
    alternatives: list[Alternative]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class ActivityDef:
    name: str
    actions: list[ActionDef] = field(default_factory=list)
    transitions: list[TransitionStmt] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    @property
    def file(self) -> str:
        return self.span.file if self.span else "<input>"

    def action(self, name: str) -> ActionDef | None:
        return next((a for a in self.actions if a.name == name), None)


def guard_operands(expr: GuardExpr):
    """Yield every operand of a guard, left to right."""
    if isinstance(expr, Compare):
        yield expr.lhs
        yield expr.rhs
    else:
        yield from guard_operands(expr.left)
        yield from guard_operands(expr.right)


def _map_operands(expr: GuardExpr, fn) -> GuardExpr:
    if isinstance(expr, Compare):
        return replace(expr, lhs=fn(expr.lhs), rhs=fn(expr.rhs))
    return type(expr)(_map_operands(expr.left, fn), _map_operands(expr.right, fn))


class _GuardParser:
    def __init__(self, cur: Cursor):
        self.cur = cur

    def disjunction(self) -> GuardExpr:
        expr = self.conjunction()
        while self.cur.accept("||"):
            expr = Or(expr, self.conjunction())
        return expr

    def conjunction(self) -> GuardExpr:
        expr = self.primary()
        while self.cur.accept("&&"):
            expr = And(expr, self.primary())
        return expr

    def primary(self) -> GuardExpr:
        if self.cur.accept("("):
            expr = self.disjunction()
            self.cur.expect(")")
            return expr
        lhs = self.operand()
        op = self.cur.current
        if op.kind not in COMPARE_OPS:
            self.cur.fail(f"expected comparison operator, found {op}")
        self.cur.next()
        rhs = self.operand()
        return Compare(op.text, lhs, rhs, _operand_span(lhs).to(_operand_span(rhs)))

    def operand(self) -> Operand:
        cur = self.cur
        tok = cur.current
        if tok.kind == INT:
            cur.next()
            return IntLiteral(tok.value, tok.span)
        if tok.kind == STRING:
            cur.next()
            return StringLiteral(tok.value, tok.span)
        if tok.kind == IDENT:
            cur.next()
            cur.expect(".", what="'.' (operands are written param.attribute or Enum.LITERAL)")
            attr = cur.ident("attribute name")
            return ParamAttribute(tok.text, attr.text, tok.span.to(attr.span))
        cur.fail(f"expected guard operand, found {tok}")


def _operand_span(op: Operand) -> SourceSpan:
    return op.span or SourceSpan.point("<input>", 1, 1)


def parse_guard(text: str, file: str = "<input>", params=None) -> GuardExpr:
    """Parse the interior of a ``[ ]`` guard.

    ``X.Y`` operands become ParamAttribute; when ``params`` is given, those
    whose head is not one of the named params become EnumLiteral instead.
    """
    cur = Cursor(lex(text, file))
    expr = _GuardParser(cur).disjunction()
    if not cur.at(EOF):
        cur.fail(f"unexpected {cur.current} in guard")
    if params is not None:
        expr = _classify(expr, set(params))
    return expr


def _classify(expr: GuardExpr, params: set[str]) -> GuardExpr:
    def fix(op):
        if isinstance(op, ParamAttribute) and op.param not in params:
            return EnumLiteral(op.param, op.attribute, op.span)
        return op
    return _map_operands(expr, fix)


class _Parser:
    def __init__(self, cur: Cursor):
        self.cur = cur
        self.sink = DiagnosticSink()

    def activity(self) -> ActivityDef:
        cur = self.cur
        start = cur.expect_word("activity")
        name = cur.ident("activity name")
        cur.expect("{")
        act = ActivityDef(name.text)
        seen: dict[str, SourceSpan] = {}
        while not cur.at("}"):
            if cur.at(EOF):
                cur.fail(f"unterminated activity {name.text!r}", start)
            if cur.at_word("action") and cur.at(IDENT, k=1):
                action = self.action()
                if action.name in seen:
                    self.sink.error("MW301", f"duplicate action {action.name!r}", action.span,
                                    [(seen[action.name], "first defined here")])
                seen.setdefault(action.name, action.span)
                act.actions.append(action)
            else:
                act.transitions.append(self.transition())
        end = cur.next()
        if not cur.at(EOF):
            cur.fail(f"unexpected {cur.current} after end of activity")
        act.span = start.span.to(end.span)
        params = {p.name for a in act.actions for p in a.inputs + a.outputs}
        for stmt in act.transitions:
            for alt in stmt.alternatives:
                if alt.guard is not None:
                    alt.guard = _classify(alt.guard, params)
        self.sink.raise_if_errors()
        return act

    def action(self) -> ActionDef:
        cur = self.cur
        start = cur.next()
        name = cur.ident("action name")
        cur.expect("{")
        inputs, outputs, content = [], [], None
        seen: dict[str, SourceSpan] = {}
        while not cur.at("}"):
            tok = cur.current
            if tok.is_word("in") or tok.is_word("out"):
                cur.next()
                cur.expect(":")
                type_tok = cur.ident("parameter type")
                pname = cur.ident("parameter name")
                semi = cur.expect(";")
                decl = ParamDecl(type_tok.text, pname.text, tok.span.to(semi.span))
                if decl.name in seen:
                    self.sink.error("MW306", f"duplicate parameter {decl.name!r} in action "
                                    f"{name.text!r}", decl.span, [(seen[decl.name], "first declared here")])
                seen.setdefault(decl.name, decl.span)
                (inputs if tok.text == "in" else outputs).append(decl)
                continue
            if tok.is_word("view"):
                new = self.view_call()
            elif tok.is_word("code") and cur.at(RAW, k=1):
                cur.next()
                raw = cur.next()
                new = OpaqueCode(raw.value, tok.span.to(raw.span))
            elif tok.kind == EOF:
                cur.fail(f"unterminated action {name.text!r}", start)
            else:
                cur.fail(f"expected in, out, view or code, found {tok}")
            if content is not None:
                cur.fail(f"action {name.text!r} already has content", tok)
            content = new
        end = cur.next()
        if content is None:
            cur.fail(f"action {name.text!r} has no view or code content", name)
        return ActionDef(name.text, content, inputs, outputs, start.span.to(end.span))

    def view_call(self) -> ViewCall:
        cur = self.cur
        start = cur.next()
        cur.expect(":")
        assign_to = None
        if cur.at(IDENT) and cur.at("=", k=1):
            assign_to = cur.next().text
            cur.next()
        cls = cur.ident("class name")
        cur.expect(".")
        view = cur.ident("view name")
        cur.expect("(")
        argument = None
        if cur.at(IDENT):
            argument = cur.next().text
            if cur.at(","):
                cur.fail("a view call takes at most one argument")
        cur.expect(")")
        semi = cur.expect(";")
        return ViewCall(cls.text, view.text, assign_to, argument, start.span.to(semi.span))

    def endpoint(self) -> Endpoint:
        cur = self.cur
        tok = cur.ident("action name, initial or final")
        if tok.text == "initial":
            return Initial(tok.span)
        if tok.text == "final":
            return Final(tok.span)
        if cur.accept("."):
            param = cur.ident("parameter name")
            return ActionRef(tok.text, param.text, tok.span.to(param.span))
        return ActionRef(tok.text, None, tok.span)

    def transition(self) -> TransitionStmt:
        cur = self.cur
        first = cur.current
        sources = [self.endpoint()]
        while cur.accept("|"):
            sources.append(self.endpoint())
        cur.expect("->")
        alternatives = [self.alternative()]
        while cur.accept("|"):
            alternatives.append(self.alternative())
        semi = cur.expect(";")
        for src in sources:
            if isinstance(src, Final):
                self.sink.error("MW302", "final cannot be the source of a transition", src.span)
        for alt in alternatives:
            if isinstance(alt.target, Initial):
                self.sink.error("MW302", "initial cannot be the target of a transition",
                                alt.target.span)
        return TransitionStmt(sources, alternatives, first.span.to(semi.span))

    def alternative(self) -> Alternative:
        cur = self.cur
        first = cur.current
        guard = None
        if cur.accept("["):
            guard = _GuardParser(cur).disjunction()
            cur.expect("]")
        target = self.endpoint()
        return Alternative(target, guard, first.span.to(target.span))


def parse_activity(source: str | bytes, file: str = "<input>") -> ActivityDef:
    """Parse a ``.ad`` file; raises ModelError carrying the diagnostics on failure."""
    return _Parser(Cursor(lex(source, file, raw_keywords={"code"}))).activity()


# -- printing ----------------------------------------------------------------

_PREC = {Or: 1, And: 2, Compare: 3}


def format_operand(op: Operand) -> str:
    if isinstance(op, ParamAttribute):
        return f"{op.param}.{op.attribute}"
    if isinstance(op, EnumLiteral):
        return f"{op.enum_name}.{op.literal}"
    if isinstance(op, IntLiteral):
        return str(op.value)
    return format_value(op.value)


def print_guard(expr: GuardExpr, context: int = 0) -> str:
    """Print a guard with the fewest parentheses that re-parse to the same tree."""
    prec = _PREC[type(expr)]
    if isinstance(expr, Compare):
        text = f"{format_operand(expr.lhs)} {expr.op} {format_operand(expr.rhs)}"
    else:
        sep = " || " if isinstance(expr, Or) else " && "
        text = print_guard(expr.left, prec) + sep + print_guard(expr.right, prec + 1)
    return f"({text})" if prec < context else text


def _alternative_text(alt: Alternative) -> str:
    if alt.guard is None:
        return str(alt.target)
    return f"[{print_guard(alt.guard)}] {alt.target}"


def print_transition(stmt: TransitionStmt, indent: str = "") -> str:
    head = " | ".join(str(s) for s in stmt.sources)
    first, *rest = stmt.alternatives
    lines = [f"{indent}{head} -> {_alternative_text(first)}"]
    pad = indent + " " * (len(head) + 2)
    lines += [f"{pad}| {_alternative_text(alt)}" for alt in rest]
    return "\n".join(lines) + ";"


def _content_line(content: ActionContent) -> str:
    if isinstance(content, OpaqueCode):
        return f"code {{{content.text}}}"
    call = f"{content.class_name}.{content.view_name}({content.argument or ''})"
    if content.assign_to:
        call = f"{content.assign_to} = {call}"
    return f"view : {call};"


def print_activity(act: ActivityDef) -> str:
    blocks = []
    for a in act.actions:
        lines = [f"  action {a.name} {{"]
        lines += [f"    in: {p.type_name} {p.name};" for p in a.inputs]
        lines += [f"    out: {p.type_name} {p.name};" for p in a.outputs]
        lines.append("    " + _content_line(a.content))
        lines.append("  }")
        blocks.append("\n".join(lines))
    if act.transitions:
        blocks.append("\n".join(print_transition(t, "  ") for t in act.transitions))
    body = "\n\n".join(blocks)
    return f"activity {act.name} {{\n" + (body + "\n" if body else "") + "}\n"
