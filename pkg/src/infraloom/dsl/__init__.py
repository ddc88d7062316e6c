"""Front end for the annotated declaration language (``.kls`` files)."""

from .errors import (
    ArityMismatch,
    DslError,
    InvalidCharacter,
    MalformedInitializer,
    ParseError,
    UnbalancedBrace,
    UnknownAnnotation,
    UnterminatedComment,
    UnterminatedString,
)
from .parser import (
    ANNOTATIONS,
    Annotation,
    AnnotationArg,
    ArgKind,
    Declaration,
    DeclKind,
    SourceFile,
    extract_identifiers,
    extract_static_path,
    parse_file,
)
from .tokens import Token, TokenKind, tokenize

__all__ = [
    "ANNOTATIONS",
    "Annotation",
    "AnnotationArg",
    "ArgKind",
    "ArityMismatch",
    "Declaration",
    "DeclKind",
    "DslError",
    "InvalidCharacter",
    "MalformedInitializer",
    "ParseError",
    "SourceFile",
    "Token",
    "TokenKind",
    "UnbalancedBrace",
    "UnknownAnnotation",
    "UnterminatedComment",
    "UnterminatedString",
    "extract_identifiers",
    "extract_static_path",
    "parse_file",
    "tokenize",
]
