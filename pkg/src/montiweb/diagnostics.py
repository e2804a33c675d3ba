"""Source spans, diagnostics and their textual rendering."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

CODE_PATTERN = re.compile(r"MW[0-9]{3}")


@dataclass(frozen=True, order=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self):
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError(f"span start after end: {self!r}")

    @classmethod
    def point(cls, file: str, line: int, col: int) -> SourceSpan:
        return cls(file, line, col, line, col)

    def to(self, other: SourceSpan) -> SourceSpan:
        """Span covering from the start of self to the end of other."""
        return SourceSpan(self.file, self.start_line, self.start_col,
                          other.end_line, other.end_col)

    def __str__(self):
        return f"{self.file}:{self.start_line}:{self.start_col}"


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: SourceSpan
    related: tuple[tuple[SourceSpan, str], ...] = ()

    def __post_init__(self):
        if not CODE_PATTERN.fullmatch(self.code):
            raise ValueError(f"bad diagnostic code {self.code!r}")
        if not self.message:
            raise ValueError("diagnostic message must be non-empty")

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def sort_key(self):
        s = self.span
        return (s.file, s.start_line, s.start_col, self.code,
                self.severity.value, self.message, s.end_line, s.end_col,
                self.related)


def error(code: str, message: str, span: SourceSpan, related=()) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, span, tuple(related))


def warning(code: str, message: str, span: SourceSpan, related=()) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, span, tuple(related))


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=Diagnostic.sort_key)


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)


class MWError(Exception):
    """Base for every failure carrying an MWxxx code."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class ModelError(MWError):
    """Raised by the frontends when a file cannot be turned into an AST."""

    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = sort_diagnostics(diagnostics)
        first = self.diagnostics[0]
        super().__init__(first.code, first.message)

    @property
    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]


_RED = "\x1b[31;1m"
_YELLOW = "\x1b[33;1m"
_BOLD = "\x1b[1m"
_RESET = "\x1b[0m"


def _quote(span: SourceSpan, sources: Mapping[str, str]) -> list[str]:
    text = sources.get(span.file)
    if text is None:
        return []
    lines = text.splitlines()
    if not 1 <= span.start_line <= len(lines):
        return []
    line = lines[span.start_line - 1].expandtabs(1)
    if span.end_line == span.start_line:
        width = max(1, span.end_col - span.start_col)
    else:
        width = max(1, len(line) - span.start_col + 1)
    gutter = f"{span.start_line:>4} | "
    return [gutter + line,
            " " * (len(gutter) + span.start_col - 1) + "^" + "~" * (width - 1)]


def render_diagnostics(diags: Iterable[Diagnostic],
                       sources: Mapping[str, str] | None = None,
                       color: bool = False) -> str:
    """Render diagnostics as text blocks, one per diagnostic.

    Blocks are ordered by file, line, column and code, so rendering the
    same set twice gives identical output. ``sources`` maps file names to
    their text and enables the quoted source line with a caret marker.
    """
    sources = sources or {}
    blocks = []
    for d in sort_diagnostics(diags):
        label = f"{d.severity.value}[{d.code}]"
        if color:
            tint = _RED if d.is_error else _YELLOW
            label = f"{tint}{label}{_RESET}"
            head = f"{_BOLD}{d.span}:{_RESET} {label}: {d.message}"
        else:
            head = f"{d.span}: {label}: {d.message}"
        lines = [head, *_quote(d.span, sources)]
        for span, note in d.related:
            lines.append(f"  note: {span}: {note}")
            lines.extend("  " + q for q in _quote(span, sources))
        blocks.append("\n".join(lines) + "\n")
    return "".join(blocks)


@dataclass
class DiagnosticSink:
    """Accumulates diagnostics while a frontend or the linker runs."""

    items: list[Diagnostic] = field(default_factory=list)

    def error(self, code, message, span, related=()):
        self.items.append(error(code, message, span, related))

    def warning(self, code, message, span, related=()):
        self.items.append(warning(code, message, span, related))

    @property
    def has_errors(self) -> bool:
        return has_errors(self.items)

    def raise_if_errors(self):
        if self.has_errors:
            raise ModelError(self.items)
