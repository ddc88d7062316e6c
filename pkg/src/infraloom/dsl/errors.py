"""Errors raised by the declaration-language front end."""

from __future__ import annotations


class DslError(Exception):
    """Base class for tokenizer and parser errors.

    Carries enough location information to print ``file:line`` diagnostics.
    ``file`` is filled in by the parser; bare tokenizer calls leave the
    placeholder.
    """

    def __init__(self, message: str, line: int = 0, col: int | None = None, file: str = "<source>"):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.file = file

    def __str__(self) -> str:
        loc = f"{self.file}:{self.line}"
        if self.col is not None:
            loc += f":{self.col}"
        return f"{loc}: {self.message}"


class UnterminatedString(DslError):
    def __init__(self, line: int, file: str = "<source>"):
        super().__init__("unterminated string literal", line=line, file=file)


class UnterminatedComment(DslError):
    def __init__(self, line: int, file: str = "<source>"):
        super().__init__("unterminated block comment", line=line, file=file)


class UnbalancedBrace(DslError):
    def __init__(self, line: int, file: str = "<source>"):
        super().__init__("unbalanced brace", line=line, file=file)


class InvalidCharacter(DslError):
    def __init__(self, char: str, line: int, col: int, file: str = "<source>"):
        super().__init__(f"invalid character {char!r}", line=line, col=col, file=file)
        self.char = char


class ParseError(DslError):
    def __init__(self, expected: str, found: str, line: int, file: str = "<source>"):
        super().__init__(f"expected {expected}, found {found}", line=line, file=file)
        self.expected = expected
        self.found = found


class UnknownAnnotation(DslError):
    def __init__(self, name: str, line: int, file: str = "<source>"):
        super().__init__(f"unknown annotation @{name}", line=line, file=file)
        self.name = name


class ArityMismatch(DslError):
    def __init__(self, name: str, expected: int, got: int, line: int, file: str = "<source>"):
        super().__init__(
            f"annotation @{name} takes {expected} argument(s), got {got}", line=line, file=file
        )
        self.name = name


class MalformedInitializer(DslError):
    def __init__(self, text: str, line: int = 0, file: str = "<source>"):
        super().__init__(f"initializer does not match File(\"<path>\"): {text!r}", line=line, file=file)
        self.text = text
