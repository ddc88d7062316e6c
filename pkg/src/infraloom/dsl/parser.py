"""Parser for the annotated declaration language.

Grammar:

    file       := {decl}
    decl       := {annotation} (fun | val | object)
    annotation := '@' Ident '(' args? ')'
    fun        := 'fun' Ident '(' params? ')' [':' Type] body
    val        := 'val' Ident '=' restOfLine
    object     := 'object' Ident body

Bodies and initializers are uninterpreted text; the only analysis applied
to them is a lexical scan for identifier references (``body_refs``), which
feeds the permission closure. This is reference extraction, not name
resolution: it may over-approximate, never under-approximate.

The first parse error aborts the file; deployment code must never be
generated from a partially understood source.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    ArityMismatch,
    DslError,
    MalformedInitializer,
    ParseError,
    UnknownAnnotation,
)
from .tokens import KEYWORDS, Token, TokenKind, tokenize

# Supported annotations and their argument arity.
ANNOTATIONS = {"Get": 1, "Post": 1, "StaticGet": 2, "DynamoDBTable": 2}
ROUTING_ANNOTATIONS = {"Get", "Post", "StaticGet"}


class ArgKind(Enum):
    STRING = "string"
    INT = "int"
    IDENT = "ident"


@dataclass(frozen=True)
class AnnotationArg:
    kind: ArgKind
    value: str | int

    def render(self) -> str:
        if self.kind is ArgKind.STRING:
            escaped = str(self.value).replace("\\", "\\\\").replace('"', '\\"')
            return f'"{escaped}"'
        return str(self.value)


@dataclass(frozen=True)
class Annotation:
    name: str
    args: tuple[AnnotationArg, ...]
    file: str = "<source>"
    line: int = 0

    def render(self) -> str:
        return f"@{self.name}({', '.join(a.render() for a in self.args)})"


class DeclKind(Enum):
    FUNCTION = "fun"
    VALUE = "val"
    OBJECT = "object"


@dataclass(frozen=True)
class Declaration:
    kind: DeclKind
    name: str
    annotations: tuple[Annotation, ...] = ()
    params: tuple[tuple[str, str], ...] = ()  # (name, typeName), functions only
    return_type: str | None = None  # functions only; None means Unit
    initializer: str | None = None  # values only
    body_refs: frozenset[str] = frozenset()
    file: str = "<source>"
    line: int = 0

    def annotation(self, name: str) -> Annotation | None:
        for ann in self.annotations:
            if ann.name == name:
                return ann
        return None


@dataclass(frozen=True)
class SourceFile:
    path: str
    declarations: tuple[Declaration, ...] = field(default=())


def parse_file(source: str, path: str = "<source>") -> SourceFile:
    """Parse ``source`` into a SourceFile of top-level declarations."""
    try:
        tokens = tokenize(source)
    except DslError as err:
        err.file = path
        raise
    return _Parser(tokens, path).parse()


class _Parser:
    def __init__(self, tokens: list[Token], path: str):
        self.tokens = tokens
        self.path = path
        self.pos = 0

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, expected: str) -> ParseError:
        tok = self.peek()
        if tok is None:
            last_line = self.tokens[-1].line if self.tokens else 1
            return ParseError(expected, "end of file", last_line, self.path)
        return ParseError(expected, f"{tok.text!r}", tok.line, self.path)

    def expect(self, kind: TokenKind, expected: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not kind:
            raise self.error(expected)
        return self.advance()

    def parse(self) -> SourceFile:
        decls: list[Declaration] = []
        names: set[str] = set()
        while not self.at_end():
            decl = self.parse_decl()
            if decl.name in names:
                raise ParseError(
                    "a unique declaration name", f"duplicate {decl.name!r}", decl.line, self.path
                )
            names.add(decl.name)
            decls.append(decl)
        return SourceFile(path=self.path, declarations=tuple(decls))

    def parse_decl(self) -> Declaration:
        annotations: list[Annotation] = []
        while (tok := self.peek()) is not None and tok.kind is TokenKind.AT:
            annotations.append(self.parse_annotation())

        routing = [a.name for a in annotations if a.name in ROUTING_ANNOTATIONS]
        if len(routing) > 1:
            raise ParseError(
                "at most one routing annotation per declaration",
                f"@{routing[0]} and @{routing[1]}",
                annotations[0].line,
                self.path,
            )

        tok = self.peek()
        if tok is None:
            raise self.error("a declaration (fun, val, or object)")
        if tok.kind is TokenKind.KW_FUN:
            return self.parse_fun(annotations)
        if tok.kind is TokenKind.KW_VAL:
            return self.parse_val(annotations)
        if tok.kind is TokenKind.KW_OBJECT:
            return self.parse_object(annotations)
        raise self.error("a declaration (fun, val, or object)")

    def parse_annotation(self) -> Annotation:
        at = self.expect(TokenKind.AT, "'@'")
        name_tok = self.expect(TokenKind.IDENT, "annotation name")
        name = name_tok.text
        if name not in ANNOTATIONS:
            raise UnknownAnnotation(name, name_tok.line, self.path)
        self.expect(TokenKind.LPAREN, "'('")
        args: list[AnnotationArg] = []
        tok = self.peek()
        if tok is not None and tok.kind is not TokenKind.RPAREN:
            args.append(self.parse_arg())
            while (tok := self.peek()) is not None and tok.kind is TokenKind.COMMA:
                self.advance()
                args.append(self.parse_arg())
        self.expect(TokenKind.RPAREN, "')'")
        if len(args) != ANNOTATIONS[name]:
            raise ArityMismatch(name, ANNOTATIONS[name], len(args), at.line, self.path)
        return Annotation(name=name, args=tuple(args), file=self.path, line=at.line)

    def parse_arg(self) -> AnnotationArg:
        tok = self.peek()
        if tok is None:
            raise self.error("an annotation argument")
        if tok.kind is TokenKind.STRING_LIT:
            self.advance()
            return AnnotationArg(ArgKind.STRING, tok.text)
        if tok.kind is TokenKind.INT_LIT:
            self.advance()
            return AnnotationArg(ArgKind.INT, int(tok.text))
        if tok.kind is TokenKind.IDENT:
            # Bare identifiers may be dotted paths, e.g. MimeType.CSS.
            parts = [self.advance().text]
            while (nxt := self.peek()) is not None and nxt.kind is TokenKind.DOT:
                self.advance()
                parts.append(self.expect(TokenKind.IDENT, "identifier after '.'").text)
            return AnnotationArg(ArgKind.IDENT, ".".join(parts))
        raise self.error("an annotation argument")

    def parse_fun(self, annotations: list[Annotation]) -> Declaration:
        kw = self.advance()
        name = self.expect(TokenKind.IDENT, "function name").text
        self.expect(TokenKind.LPAREN, "'('")
        params: list[tuple[str, str]] = []
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.IDENT:
            params.append(self.parse_param())
            while (tok := self.peek()) is not None and tok.kind is TokenKind.COMMA:
                self.advance()
                params.append(self.parse_param())
        self.expect(TokenKind.RPAREN, "')'")
        seen_params = [p for p, _ in params]
        if len(seen_params) != len(set(seen_params)):
            raise ParseError("unique parameter names", f"duplicates in {name}", kw.line, self.path)
        return_type: str | None = None
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.COLON:
            self.advance()
            return_type = self.expect(TokenKind.IDENT, "return type").text
        body = self.expect(TokenKind.BODY_TEXT, "function body")
        excluded = {name} | {p for p, _ in params}
        return Declaration(
            kind=DeclKind.FUNCTION,
            name=name,
            annotations=tuple(annotations),
            params=tuple(params),
            return_type=return_type,
            body_refs=frozenset(extract_identifiers(body.text) - excluded),
            file=self.path,
            line=kw.line,
        )

    def parse_param(self) -> tuple[str, str]:
        name = self.expect(TokenKind.IDENT, "parameter name").text
        self.expect(TokenKind.COLON, "':'")
        type_name = self.expect(TokenKind.IDENT, "parameter type").text
        return (name, type_name)

    def parse_val(self, annotations: list[Annotation]) -> Declaration:
        kw = self.advance()
        name = self.expect(TokenKind.IDENT, "value name").text
        self.expect(TokenKind.EQUALS, "'='")
        init = self.expect(TokenKind.BODY_TEXT, "initializer expression")
        return Declaration(
            kind=DeclKind.VALUE,
            name=name,
            annotations=tuple(annotations),
            initializer=init.text,
            body_refs=frozenset(extract_identifiers(init.text) - {name}),
            file=self.path,
            line=kw.line,
        )

    def parse_object(self, annotations: list[Annotation]) -> Declaration:
        kw = self.advance()
        name = self.expect(TokenKind.IDENT, "object name").text
        body = self.expect(TokenKind.BODY_TEXT, "object body")
        return Declaration(
            kind=DeclKind.OBJECT,
            name=name,
            annotations=tuple(annotations),
            body_refs=frozenset(extract_identifiers(body.text) - {name}),
            file=self.path,
            line=kw.line,
        )


def extract_identifiers(text: str) -> set[str]:
    """Collect every identifier occurring in uninterpreted body text.

    Identifiers inside string literals and comments are ignored; language
    keywords are excluded. Purely lexical, by design.
    """
    out: set[str] = set()
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == '"':
            i += 1
            while i < n and text[i] != '"':
                if text[i] == "\\" and i + 1 < n:
                    i += 1
                i += 1
            i += 1
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "*":
            i += 2
            while i + 1 < n and not (text[i] == "*" and text[i + 1] == "/"):
                i += 1
            i += 2
            continue
        if _ident_start(c):
            start = i
            while i < n and _ident_char(text[i]):
                i += 1
            word = text[start:i]
            if word not in KEYWORDS:
                out.add(word)
            continue
        if c.isdigit():
            # Consume the whole alphanumeric run so "123abc" yields nothing.
            while i < n and _ident_char(text[i]):
                i += 1
            continue
        i += 1
    return out


def _ident_start(c: str) -> bool:
    return c.isascii() and (c.isalpha() or c == "_")


def _ident_char(c: str) -> bool:
    return c.isascii() and (c.isalnum() or c == "_")


_FILE_INITIALIZER = re.compile(r'^File\(\s*"((?:[^"\\]|\\.)*)"\s*\)$')


def extract_static_path(decl: Declaration) -> str:
    """Return the relative path inside a ``File("<path>")`` initializer."""
    if decl.kind is not DeclKind.VALUE or decl.initializer is None:
        raise MalformedInitializer(decl.initializer or "<no initializer>", decl.line, decl.file)
    match = _FILE_INITIALIZER.match(decl.initializer.strip())
    if match is None:
        raise MalformedInitializer(decl.initializer, decl.line, decl.file)
    return match.group(1).replace('\\"', '"').replace("\\\\", "\\")
