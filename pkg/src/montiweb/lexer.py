"""Tokenizer shared by the class diagram, classviews and activity frontends.

Keywords are not reserved at this level: every word is an ``IDENT`` token
and each frontend decides contextually what it means.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import ModelError, SourceSpan, error

IDENT = "IDENT"
INT = "INT"
STRING = "STRING"
RAW = "RAW"
EOF = "EOF"

PUNCTUATION = (
    "->", "--", "..", "&&", "||", ">=", "<=", "==", "!=",
    "{", "}", "(", ")", "[", "]", ";", ",", ".", "=", "|", "@", ":", "*",
    ">", "<",
)

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: SourceSpan
    value: object = None

    def is_word(self, word: str) -> bool:
        return self.kind == IDENT and self.text == word

    def __str__(self):
        if self.kind == EOF:
            return "end of input"
        return repr(self.text)


def _is_ident_start(c: str) -> bool:
    return c == "_" or ("a" <= c <= "z") or ("A" <= c <= "Z")


def _is_ident_char(c: str) -> bool:
    return _is_ident_start(c) or c.isdigit() and c.isascii()


class _Scanner:
    def __init__(self, text: str, file: str, raw_keywords: frozenset[str]):
        self.text = text
        self.file = file
        self.raw_keywords = raw_keywords
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []

    def fail(self, code, message, line, col):
        span = SourceSpan(self.file, line, col, self.line, max(self.col, col)) \
            if self.line == line else SourceSpan.point(self.file, line, col)
        raise ModelError([error(code, message, span)])

    def peek(self, k=0) -> str:
        i = self.pos + k
        return self.text[i] if i < len(self.text) else ""

    def advance(self, n=1):
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def span_from(self, line, col) -> SourceSpan:
        return SourceSpan(self.file, line, col, self.line, self.col)

    def skip_trivia(self):
        while self.pos < len(self.text):
            c = self.peek()
            if c in " \t\r\n\f\v\ufeff":
                self.advance()
            elif c == "/" and self.peek(1) == "/":
                while self.pos < len(self.text) and self.peek() != "\n":
                    self.advance()
            elif c == "/" and self.peek(1) == "*":
                line, col = self.line, self.col
                end = self.text.find("*/", self.pos + 2)
                if end < 0:
                    self.fail("MW003", "unterminated block comment", line, col)
                self.advance(end + 2 - self.pos)
            else:
                break

    def run(self) -> list[Token]:
        while True:
            self.skip_trivia()
            if self.pos >= len(self.text):
                break
            line, col = self.line, self.col
            c = self.peek()
            if _is_ident_start(c):
                start = self.pos
                while self.pos < len(self.text) and _is_ident_char(self.peek()):
                    self.advance()
                word = self.text[start:self.pos]
                self.tokens.append(Token(IDENT, word, self.span_from(line, col)))
                if word in self.raw_keywords:
                    self.maybe_raw_block()
            elif c.isascii() and c.isdigit() or (c == "-" and self.peek(1).isascii()
                                                 and self.peek(1).isdigit()):
                start = self.pos
                self.advance()
                while self.peek().isascii() and self.peek().isdigit():
                    self.advance()
                lexeme = self.text[start:self.pos]
                self.tokens.append(Token(INT, lexeme, self.span_from(line, col), int(lexeme)))
            elif c == '"':
                self.string(line, col, self.pos)
            else:
                for p in PUNCTUATION:
                    if self.text.startswith(p, self.pos):
                        self.advance(len(p))
                        self.tokens.append(Token(p, p, self.span_from(line, col)))
                        break
                else:
                    self.fail("MW001", f"unexpected character {c!r}", line, col)
        end = SourceSpan.point(self.file, self.line, self.col)
        self.tokens.append(Token(EOF, "", end))
        return self.tokens

    def string(self, line, col, start):
        self.advance()
        chars = []
        while True:
            c = self.peek()
            if c == "" or c == "\n":
                self.fail("MW002", "unterminated string literal", line, col)
            if c == '"':
                self.advance()
                break
            if c == "\\":
                esc = self.peek(1)
                if esc not in _ESCAPES:
                    self.fail("MW002", f"invalid escape sequence \\{esc}", self.line, self.col)
                chars.append(_ESCAPES[esc])
                self.advance(2)
                continue
            chars.append(c)
            self.advance()
        span = self.span_from(line, col)
        self.tokens.append(Token(STRING, self.text[start:self.pos], span, "".join(chars)))

    def maybe_raw_block(self):
        # Raw blocks: `text { ... }` / `code { ... }`, captured brace-balanced.
        i = self.pos
        while i < len(self.text) and self.text[i] in " \t\r\n":
            i += 1
        if i >= len(self.text) or self.text[i] != "{":
            return
        self.advance(i - self.pos)
        line, col = self.line, self.col
        depth = 0
        start = self.pos + 1
        while True:
            if self.pos >= len(self.text):
                self.fail("MW005", "unterminated raw block", line, col)
            c = self.peek()
            if c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    interior = self.text[start:self.pos]
                    self.advance()
                    break
            self.advance()
        self.tokens.append(Token(RAW, interior, self.span_from(line, col), interior.strip()))


def lex(source: str | bytes, file: str = "<input>",
        raw_keywords: frozenset[str] | set[str] = frozenset()) -> list[Token]:
    """Tokenize ``source``; raises ModelError with an MW00x diagnostic on bad input."""
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            line = source[:exc.start].count(b"\n") + 1
            raise ModelError([error("MW004", "input is not valid UTF-8",
                                    SourceSpan.point(file, line, 1))]) from None
    return _Scanner(source, file, frozenset(raw_keywords)).run()


class Cursor:
    """Token stream with one-token lookahead used by the recursive descent parsers."""

    def __init__(self, tokens: list[Token], syntax_code: str = "MW020"):
        self.tokens = tokens
        self.i = 0
        self.syntax_code = syntax_code

    @property
    def current(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != EOF:
            self.i += 1
        return tok

    def at(self, kind: str, text: str | None = None, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == kind and (text is None or tok.text == text)

    def at_word(self, word: str, k: int = 0) -> bool:
        return self.at(IDENT, word, k)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        if self.at(kind, text):
            return self.next()
        return None

    def fail(self, message: str, tok: Token | None = None, code: str | None = None):
        tok = tok or self.current
        raise ModelError([error(code or self.syntax_code, message, tok.span)])

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        if self.at(kind, text):
            return self.next()
        wanted = what or (repr(text) if text else kind.lower() if kind.isalpha() else repr(kind))
        self.fail(f"expected {wanted}, found {self.current}")

    def expect_word(self, word: str) -> Token:
        return self.expect(IDENT, word)

    def ident(self, what: str = "identifier") -> Token:
        return self.expect(IDENT, what=what)
