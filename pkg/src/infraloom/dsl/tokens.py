"""Tokenizer for the annotated declaration language.

The language is a fixed, Kotlin-flavored subset: top-level declarations
(``fun``/``val``/``object``) with ``@Name(...)`` annotations. Function and
object bodies are not interpreted: a brace-balanced body is emitted as one
``BODY_TEXT`` token, verbatim. Likewise the remainder of the line after a
``val``'s ``=`` becomes a single ``BODY_TEXT`` token, so initializers stay
uninterpreted text.

The tokenizer is total: any input either tokenizes or raises one of
``UnterminatedString``, ``UnterminatedComment``, ``UnbalancedBrace``,
``InvalidCharacter``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto

from .errors import InvalidCharacter, UnbalancedBrace, UnterminatedComment, UnterminatedString


class TokenKind(Enum):
    AT = auto()
    IDENT = auto()
    STRING_LIT = auto()
    INT_LIT = auto()
    LPAREN = auto()
    RPAREN = auto()
    LBRACE = auto()
    RBRACE = auto()
    COMMA = auto()
    COLON = auto()
    EQUALS = auto()
    KW_FUN = auto()
    KW_VAL = auto()
    KW_OBJECT = auto()
    KW_RETURN = auto()
    DOT = auto()
    BODY_TEXT = auto()


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int  # 1-based
    col: int  # 1-based


KEYWORDS = {
    "fun": TokenKind.KW_FUN,
    "val": TokenKind.KW_VAL,
    "object": TokenKind.KW_OBJECT,
    "return": TokenKind.KW_RETURN,
}

_PUNCT = {
    "@": TokenKind.AT,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    ",": TokenKind.COMMA,
    ":": TokenKind.COLON,
    ".": TokenKind.DOT,
}


def _is_ident_start(c: str) -> bool:
    return c.isascii() and (c.isalpha() or c == "_")


def _is_ident_char(c: str) -> bool:
    return c.isascii() and (c.isalnum() or c == "_")


class _Scanner:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def at_end(self) -> bool:
        return self.pos >= len(self.src)

    def peek(self, offset: int = 0) -> str:
        idx = self.pos + offset
        return self.src[idx] if idx < len(self.src) else ""

    def advance(self) -> str:
        c = self.src[self.pos]
        self.pos += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return c

    # Skips over a quoted string, resolving nothing. Used wherever a string
    # may occur inside uninterpreted text (bodies, initializers).
    def skip_string_raw(self) -> None:
        start_line = self.line
        self.advance()  # opening quote
        while not self.at_end():
            c = self.peek()
            if c == "\n":
                raise UnterminatedString(start_line)
            if c == "\\" and self.peek(1) != "":
                self.advance()
                self.advance()
                continue
            self.advance()
            if c == '"':
                return
        raise UnterminatedString(start_line)

    def skip_line_comment(self) -> None:
        while not self.at_end() and self.peek() != "\n":
            self.advance()

    def skip_block_comment(self) -> None:
        start_line = self.line
        self.advance()  # '/'
        self.advance()  # '*'
        while not self.at_end():
            if self.peek() == "*" and self.peek(1) == "/":
                self.advance()
                self.advance()
                return
            self.advance()
        raise UnterminatedComment(start_line)


def tokenize(source: str) -> list[Token]:
    """Tokenize ``source`` into a flat token list.

    CRLF line endings are normalized to LF first. Whitespace and comments
    are skipped; everything else becomes a token. Concatenating token texts
    (strings re-quoted) together with the skipped whitespace and comments
    reconstructs the input.
    """
    source = source.replace("\r\n", "\n")
    s = _Scanner(source)
    tokens: list[Token] = []

    while not s.at_end():
        c = s.peek()
        line, col = s.line, s.col

        if c in " \t\n":
            s.advance()
            continue
        if c == "/" and s.peek(1) == "/":
            s.skip_line_comment()
            continue
        if c == "/" and s.peek(1) == "*":
            s.skip_block_comment()
            continue
        if c == '"':
            tokens.append(_scan_string(s))
            continue
        if c == "{":
            tokens.append(_scan_body(s))
            continue
        if c == "}":
            raise UnbalancedBrace(line)
        if c == "=":
            s.advance()
            tokens.append(Token(TokenKind.EQUALS, "=", line, col))
            init = _scan_initializer(s)
            if init is not None:
                tokens.append(init)
            continue
        if c.isdigit():
            start = s.pos
            while not s.at_end() and s.peek().isdigit():
                s.advance()
            tokens.append(Token(TokenKind.INT_LIT, source[start : s.pos], line, col))
            continue
        if _is_ident_start(c):
            start = s.pos
            while not s.at_end() and _is_ident_char(s.peek()):
                s.advance()
            text = source[start : s.pos]
            tokens.append(Token(KEYWORDS.get(text, TokenKind.IDENT), text, line, col))
            continue
        if c in _PUNCT:
            s.advance()
            tokens.append(Token(_PUNCT[c], c, line, col))
            continue
        raise InvalidCharacter(c, line, col)

    return tokens


def _scan_string(s: _Scanner) -> Token:
    """Scan a double-quoted string literal, resolving \\" and \\\\ escapes."""
    line, col = s.line, s.col
    s.advance()  # opening quote
    out: list[str] = []
    while not s.at_end():
        c = s.peek()
        if c == "\n":
            raise UnterminatedString(line)
        if c == "\\":
            nxt = s.peek(1)
            if nxt in ('"', "\\"):
                s.advance()
                s.advance()
                out.append(nxt)
                continue
            # Unknown escapes are kept verbatim; the subset defines only \" and \\.
            s.advance()
            out.append(c)
            continue
        s.advance()
        if c == '"':
            return Token(TokenKind.STRING_LIT, "".join(out), line, col)
        out.append(c)
    raise UnterminatedString(line)


def _scan_body(s: _Scanner) -> Token:
    """Scan a brace-balanced body, nesting respected, into one BODY_TEXT token.

    The token text is the verbatim source slice including the outer braces.
    Braces inside strings or comments do not count toward the balance.
    """
    line, col = s.line, s.col
    start = s.pos
    depth = 0
    while not s.at_end():
        c = s.peek()
        if c == '"':
            s.skip_string_raw()
            continue
        if c == "/" and s.peek(1) == "/":
            s.skip_line_comment()
            continue
        if c == "/" and s.peek(1) == "*":
            s.skip_block_comment()
            continue
        s.advance()
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return Token(TokenKind.BODY_TEXT, s.src[start : s.pos], line, col)
    raise UnbalancedBrace(line)


def _scan_initializer(s: _Scanner) -> Token | None:
    """Capture the rest of the line after ``=`` as raw initializer text.

    A ``//`` comment outside a string ends the capture. Returns None when
    nothing but whitespace remains on the line.
    """
    while not s.at_end() and s.peek() in " \t":
        s.advance()
    line, col = s.line, s.col
    start = s.pos
    while not s.at_end() and s.peek() != "\n":
        c = s.peek()
        if c == '"':
            s.skip_string_raw()
            continue
        if c == "/" and s.peek(1) == "/":
            break
        s.advance()
    text = s.src[start : s.pos].rstrip()
    if not text:
        return None
    return Token(TokenKind.BODY_TEXT, text, line, col)
