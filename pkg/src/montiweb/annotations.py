"""The ``@Name(key=value, ...)`` annotation sublanguage."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .diagnostics import ModelError, SourceSpan, error
from .lexer import IDENT, INT, STRING, Cursor, lex

INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1

# bool is checked before int everywhere a value is inspected
AnnotationValue = Union[int, bool, str]


@dataclass(frozen=True)
class Annotation:
    name: str
    args: tuple[tuple[str, AnnotationValue], ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __eq__(self, other):
        # 1 == True in Python; keep the value variants apart
        if not isinstance(other, Annotation):
            return NotImplemented
        return (self.name == other.name
                and [(k, type(v), v) for k, v in self.args]
                == [(k, type(v), v) for k, v in other.args])

    def __hash__(self):
        return hash((self.name, tuple((k, type(v), v) for k, v in self.args)))

    def get(self, key: str, default=None):
        for k, v in self.args:
            if k == key:
                return v
        return default

    @property
    def keys(self) -> list[str]:
        return [k for k, _ in self.args]


def format_value(value: AnnotationValue) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    escaped = value.replace("\\", "\\\\").replace('"', '\\"') \
        .replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'


def print_annotation(annotation: Annotation) -> str:
    if not annotation.args:
        return f"@{annotation.name}"
    inner = ", ".join(f"{k}={format_value(v)}" for k, v in annotation.args)
    return f"@{annotation.name}({inner})"


def _bad(tok, message):
    raise ModelError([error("MW010", message, tok.span)])


def parse_annotation(cur: Cursor) -> Annotation:
    """Parse one annotation at the cursor, which must sit on ``@``."""
    at = cur.expect("@")
    name = cur.current
    if name.kind != IDENT:
        _bad(name, f"expected annotation name after '@', found {name}")
    cur.next()
    args: list[tuple[str, AnnotationValue]] = []
    end = name
    if cur.at("("):
        open_paren = cur.next()
        if not cur.at(")"):
            while True:
                key = cur.current
                if key.kind != IDENT:
                    _bad(key, f"expected argument name in @{name.text}, found {key}")
                cur.next()
                if not cur.at("="):
                    _bad(cur.current, f"expected '=' after {key.text!r} in @{name.text}")
                cur.next()
                args.append((key.text, _value(cur, name.text)))
                if any(k == key.text for k, _ in args[:-1]):
                    _bad(key, f"duplicate argument {key.text!r} in @{name.text}")
                if not cur.accept(","):
                    break
        if not cur.at(")"):
            _bad(cur.current if cur.current.kind != "EOF" else open_paren,
                 f"unclosed argument list of @{name.text}")
        end = cur.next()
    return Annotation(name.text, tuple(args), at.span.to(end.span))


def _value(cur: Cursor, owner: str) -> AnnotationValue:
    tok = cur.current
    if tok.kind == INT:
        if not INT64_MIN <= tok.value <= INT64_MAX:
            _bad(tok, f"integer {tok.text} out of 64-bit range")
        cur.next()
        return tok.value
    if tok.kind == STRING:
        cur.next()
        return tok.value
    if tok.kind == IDENT and tok.text in ("true", "false"):
        cur.next()
        return tok.text == "true"
    _bad(tok, f"expected integer, boolean or string value in @{owner}, found {tok}")


def parse_annotation_text(text: str, file: str = "<input>") -> Annotation:
    """Parse a standalone annotation such as ``@Length(min=3, max=30)``."""
    cur = Cursor(lex(text, file), syntax_code="MW010")
    ann = parse_annotation(cur)
    if not cur.at("EOF"):
        _bad(cur.current, f"unexpected {cur.current} after annotation")
    return ann


def parse_annotations(cur: Cursor) -> list[Annotation]:
    found = []
    while cur.at("@"):
        found.append(parse_annotation(cur))
    return found
