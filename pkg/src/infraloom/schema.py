"""Cloud-agnostic serverless schema: the pipeline's intermediate model.

A Schema captures everything deployment and runtime need to agree on:
dynamic HTTP routes, static file routes, permission grants, and the
warming configuration. It is built from parsed source files, validated,
and then consumed unchanged by both the Terraform synthesizer and the
local dispatcher.

Schema values are immutable after construction and safe to share.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from enum import Enum

from .config import ProjectConfig
from .dsl import (
    ArgKind,
    Declaration,
    DeclKind,
    MalformedInitializer,
    SourceFile,
    extract_static_path,
)

PRIMITIVE_TYPES = ("Int", "Long", "Float", "Double", "Boolean", "String")
UNIT_TYPE = "Unit"
GRANT_MODES = ("Read", "Write", "ReadWrite")
SERVICE_DYNAMODB = "DynamoDB"


class MimeType(Enum):
    """Supported static-file MIME identifiers; values are content types."""

    CSS = "text/css"
    HTML = "text/html"
    JS = "application/javascript"
    PNG = "image/png"
    JPEG = "image/jpeg"
    JSON = "application/json"
    TXT = "text/plain"
    BIN = "application/octet-stream"


class InvalidPath(Exception):
    def __init__(self, raw: str, reason: str):
        super().__init__(f"invalid path {raw!r}: {reason}")
        self.raw = raw
        self.reason = reason


_LITERAL_SEGMENT = re.compile(r"^[A-Za-z0-9._-]+$")
_PARAM_SEGMENT = re.compile(r"^\{[A-Za-z_][A-Za-z0-9_]*\}$")


def normalize_path(raw: str) -> str:
    """Normalize a URI path: leading '/', no trailing '/', no empty segments.

    Paths are taken literally (no percent-decoding). Each segment must match
    [A-Za-z0-9._-]+ unless the whole segment is a ``{param}`` placeholder.
    """
    if not raw:
        raise InvalidPath(raw, "empty path")
    segments = [part for part in raw.split("/") if part != ""]
    for segment in segments:
        if not (_LITERAL_SEGMENT.match(segment) or _PARAM_SEGMENT.match(segment)):
            raise InvalidPath(raw, f"bad segment {segment!r}")
    return "/" + "/".join(segments)


def path_segments(path: str) -> tuple[str, ...]:
    """Segments of a normalized path; the root path has none."""
    return () if path == "/" else tuple(path[1:].split("/"))


def path_param_names(path: str) -> list[str]:
    """Names of ``{param}`` segments, in order, duplicates preserved."""
    return [seg[1:-1] for seg in path_segments(path) if seg.startswith("{")]


@dataclass(frozen=True)
class DynamicRoute:
    method: str  # GET | POST
    path: str  # normalized
    handler_file: str
    handler_name: str
    params: tuple[tuple[str, str], ...] = ()
    return_type: str = UNIT_TYPE


@dataclass(frozen=True)
class StaticRoute:
    path: str  # normalized
    mime: MimeType
    source_file: str
    origin_file: str = ""
    origin_name: str = ""


@dataclass(frozen=True)
class PermissionGrant:
    entity_file: str
    entity_name: str
    service: str
    resource_name: str
    mode: str  # Read | Write | ReadWrite


@dataclass(frozen=True)
class WarmingConfig:
    enabled: bool = True
    period_minutes: int = 5


@dataclass(frozen=True)
class Schema:
    app_name: str
    dynamic_routes: tuple[DynamicRoute, ...] = ()
    static_routes: tuple[StaticRoute, ...] = ()
    grants: tuple[PermissionGrant, ...] = ()
    warming: WarmingConfig = WarmingConfig()
    files: tuple[SourceFile, ...] = ()

    def declaration(self, file: str, name: str) -> Declaration | None:
        for sf in self.files:
            if sf.path == file:
                for decl in sf.declarations:
                    if decl.name == name:
                        return decl
        return None


class SchemaErrorKind(Enum):
    DUPLICATE_ROUTE = "DuplicateRoute"
    UNKNOWN_MIME = "UnknownMime"
    EMPTY_STATIC_SOURCE = "EmptyStaticSource"
    UNRESOLVED_HANDLER = "UnresolvedHandler"
    UNSUPPORTED_PARAM_TYPE = "UnsupportedParamType"
    PATH_PARAM_MISMATCH = "PathParamMismatch"
    INVALID_PATH = "InvalidPath"
    MALFORMED_INITIALIZER = "MalformedInitializer"
    INVALID_GRANT = "InvalidGrant"
    INVALID_WARMING = "InvalidWarming"


@dataclass(frozen=True)
class SchemaError:
    kind: SchemaErrorKind
    message: str
    file: str = ""
    line: int = 0

    def __str__(self) -> str:
        loc = f"{self.file}:{self.line}: " if self.file else ""
        return f"{loc}{self.kind.value}: {self.message}"


class SchemaValidationError(Exception):
    """Raised by build_schema when the schema does not validate."""

    def __init__(self, errors: list[SchemaError]):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = errors


def resolve_mime(identifier: str) -> MimeType:
    """Map a bare or dotted MIME identifier (``MimeType.CSS`` or ``CSS``)."""
    name = identifier.rsplit(".", 1)[-1]
    try:
        return MimeType[name]
    except KeyError:
        raise KeyError(identifier) from None


def build_schema(files: list[SourceFile], config: ProjectConfig) -> Schema:
    """Build a validated Schema from parsed files plus project config.

    Routes are sorted, so the result does not depend on file order. Raises
    SchemaValidationError carrying every construction and validation error.
    """
    errors: list[SchemaError] = []
    dynamic: list[DynamicRoute] = []
    static: list[StaticRoute] = []
    grants: dict[tuple[str, str, str, str], str] = {}

    for sf in sorted(files, key=lambda f: f.path):
        for decl in sf.declarations:
            for ann in decl.annotations:
                if ann.name in ("Get", "Post"):
                    route = _build_dynamic(sf, decl, ann, errors)
                    if route is not None:
                        dynamic.append(route)
                elif ann.name == "StaticGet":
                    route = _build_static(sf, decl, ann, errors)
                    if route is not None:
                        static.append(route)
                elif ann.name == "DynamoDBTable":
                    _collect_grant(sf, decl, ann, grants, errors)

    schema = Schema(
        app_name=config.app_name,
        dynamic_routes=tuple(sorted(dynamic, key=lambda r: (r.method, r.path))),
        static_routes=tuple(sorted(static, key=lambda r: r.path)),
        grants=tuple(
            PermissionGrant(entity_file=k[0], entity_name=k[1], service=k[2], resource_name=k[3], mode=mode)
            for k, mode in sorted(grants.items())
        ),
        warming=WarmingConfig(
            enabled=config.warming_enabled, period_minutes=config.warming_period_minutes
        ),
        files=tuple(sorted(files, key=lambda f: f.path)),
    )
    errors.extend(validate_schema(schema))
    if errors:
        raise SchemaValidationError(errors)
    return schema


def _build_dynamic(
    sf: SourceFile, decl: Declaration, ann, errors: list[SchemaError]
) -> DynamicRoute | None:
    if ann.args[0].kind is not ArgKind.STRING:
        errors.append(
            SchemaError(
                SchemaErrorKind.INVALID_PATH,
                f"@{ann.name} path must be a string literal",
                sf.path,
                decl.line,
            )
        )
        return None
    try:
        path = normalize_path(str(ann.args[0].value))
    except InvalidPath as err:
        errors.append(SchemaError(SchemaErrorKind.INVALID_PATH, str(err), sf.path, decl.line))
        return None
    return DynamicRoute(
        method=ann.name.upper(),
        path=path,
        handler_file=sf.path,
        handler_name=decl.name,
        params=decl.params,
        return_type=decl.return_type or UNIT_TYPE,
    )


def _build_static(
    sf: SourceFile, decl: Declaration, ann, errors: list[SchemaError]
) -> StaticRoute | None:
    ok = True
    path = ""
    if ann.args[0].kind is not ArgKind.STRING:
        errors.append(
            SchemaError(
                SchemaErrorKind.INVALID_PATH,
                "@StaticGet path must be a string literal",
                sf.path,
                decl.line,
            )
        )
        ok = False
    else:
        try:
            path = normalize_path(str(ann.args[0].value))
        except InvalidPath as err:
            errors.append(SchemaError(SchemaErrorKind.INVALID_PATH, str(err), sf.path, decl.line))
            ok = False

    mime: MimeType | None = None
    if ann.args[1].kind is not ArgKind.IDENT:
        errors.append(
            SchemaError(
                SchemaErrorKind.UNKNOWN_MIME,
                "@StaticGet MIME argument must be an identifier",
                sf.path,
                decl.line,
            )
        )
        ok = False
    else:
        try:
            mime = resolve_mime(str(ann.args[1].value))
        except KeyError:
            errors.append(
                SchemaError(
                    SchemaErrorKind.UNKNOWN_MIME,
                    f"unknown MIME identifier {ann.args[1].value!r}",
                    sf.path,
                    decl.line,
                )
            )
            ok = False

    try:
        source = extract_static_path(decl)
    except MalformedInitializer as err:
        errors.append(
            SchemaError(SchemaErrorKind.MALFORMED_INITIALIZER, err.message, sf.path, decl.line)
        )
        return None
    if not ok or mime is None:
        return None
    return StaticRoute(
        path=path, mime=mime, source_file=source, origin_file=sf.path, origin_name=decl.name
    )


def _collect_grant(
    sf: SourceFile,
    decl: Declaration,
    ann,
    grants: dict[tuple[str, str, str, str], str],
    errors: list[SchemaError],
) -> None:
    if ann.args[0].kind is not ArgKind.STRING:
        errors.append(
            SchemaError(
                SchemaErrorKind.INVALID_GRANT,
                "@DynamoDBTable table name must be a string literal",
                sf.path,
                decl.line,
            )
        )
        return
    if ann.args[1].kind is not ArgKind.IDENT or str(ann.args[1].value) not in GRANT_MODES:
        errors.append(
            SchemaError(
                SchemaErrorKind.INVALID_GRANT,
                f"@DynamoDBTable mode must be one of {', '.join(GRANT_MODES)}",
                sf.path,
                decl.line,
            )
        )
        return
    key = (sf.path, decl.name, SERVICE_DYNAMODB, str(ann.args[0].value))
    mode = str(ann.args[1].value)
    # One grant per (entity, service, resource): repeated annotations merge.
    existing = grants.get(key)
    if existing is not None and existing != mode:
        mode = "ReadWrite"
    grants[key] = mode


def validate_schema(schema: Schema) -> list[SchemaError]:
    """Check every schema invariant; an empty result means valid."""
    errors: list[SchemaError] = []

    def locate(file: str, name: str) -> int:
        decl = schema.declaration(file, name)
        return decl.line if decl is not None else 0

    seen_routes: set[tuple[str, str]] = set()
    for route in schema.dynamic_routes:
        key = (route.method, route.path)
        line = locate(route.handler_file, route.handler_name)
        if key in seen_routes:
            errors.append(
                SchemaError(
                    SchemaErrorKind.DUPLICATE_ROUTE,
                    f"duplicate route {route.method} {route.path}",
                    route.handler_file,
                    line,
                )
            )
        seen_routes.add(key)

        decl = schema.declaration(route.handler_file, route.handler_name)
        if decl is None or decl.kind is not DeclKind.FUNCTION:
            errors.append(
                SchemaError(
                    SchemaErrorKind.UNRESOLVED_HANDLER,
                    f"handler {route.handler_name!r} does not resolve to a function"
                    f" in {route.handler_file}",
                    route.handler_file,
                    line,
                )
            )

        param_names = [name for name, _ in route.params]
        for name, type_name in route.params:
            if type_name not in PRIMITIVE_TYPES:
                errors.append(
                    SchemaError(
                        SchemaErrorKind.UNSUPPORTED_PARAM_TYPE,
                        f"parameter {name!r} has unsupported type {type_name!r}",
                        route.handler_file,
                        line,
                    )
                )
        if route.return_type not in PRIMITIVE_TYPES and route.return_type != UNIT_TYPE:
            errors.append(
                SchemaError(
                    SchemaErrorKind.UNSUPPORTED_PARAM_TYPE,
                    f"return type {route.return_type!r} is not a primitive or Unit",
                    route.handler_file,
                    line,
                )
            )

        placeholders = path_param_names(route.path)
        if len(placeholders) != len(set(placeholders)):
            errors.append(
                SchemaError(
                    SchemaErrorKind.PATH_PARAM_MISMATCH,
                    f"duplicate path parameter in {route.path}",
                    route.handler_file,
                    line,
                )
            )
        for placeholder in placeholders:
            if placeholder not in param_names:
                errors.append(
                    SchemaError(
                        SchemaErrorKind.PATH_PARAM_MISMATCH,
                        f"path parameter {{{placeholder}}} of {route.path} is not a"
                        f" parameter of {route.handler_name}",
                        route.handler_file,
                        line,
                    )
                )

    dynamic_get_paths = {r.path for r in schema.dynamic_routes if r.method == "GET"}
    seen_static: set[str] = set()
    for sroute in schema.static_routes:
        line = locate(sroute.origin_file, sroute.origin_name)
        if sroute.path in seen_static or sroute.path in dynamic_get_paths:
            errors.append(
                SchemaError(
                    SchemaErrorKind.DUPLICATE_ROUTE,
                    f"duplicate route GET {sroute.path}",
                    sroute.origin_file,
                    line,
                )
            )
        seen_static.add(sroute.path)
        if not sroute.source_file:
            errors.append(
                SchemaError(
                    SchemaErrorKind.EMPTY_STATIC_SOURCE,
                    f"static route {sroute.path} has an empty source file",
                    sroute.origin_file,
                    line,
                )
            )

    for grant in schema.grants:
        line = locate(grant.entity_file, grant.entity_name)
        if not grant.resource_name:
            errors.append(
                SchemaError(
                    SchemaErrorKind.INVALID_GRANT,
                    f"grant on {grant.entity_name!r} has an empty resource name",
                    grant.entity_file,
                    line,
                )
            )
        if grant.mode not in GRANT_MODES:
            errors.append(
                SchemaError(
                    SchemaErrorKind.INVALID_GRANT,
                    f"grant on {grant.entity_name!r} has unknown mode {grant.mode!r}",
                    grant.entity_file,
                    line,
                )
            )
        if grant.service != SERVICE_DYNAMODB:
            errors.append(
                SchemaError(
                    SchemaErrorKind.INVALID_GRANT,
                    f"grant on {grant.entity_name!r} has unknown service {grant.service!r}",
                    grant.entity_file,
                    line,
                )
            )

    if schema.warming.period_minutes < 1:
        errors.append(
            SchemaError(SchemaErrorKind.INVALID_WARMING, "warming period must be >= 1 minute")
        )
    return errors


# ---------------------------------------------------------------------------
# Canonical serialization (schema.json): sorted keys, LF, no extra whitespace.


def schema_to_dict(schema: Schema) -> dict:
    return {
        "app_name": schema.app_name,
        "dynamic_routes": [
            {
                "method": r.method,
                "path": r.path,
                "handler": {"file": r.handler_file, "name": r.handler_name},
                "params": [[n, t] for n, t in r.params],
                "return_type": r.return_type,
            }
            for r in schema.dynamic_routes
        ],
        "static_routes": [
            {
                "path": r.path,
                "mime": r.mime.name,
                "source_file": r.source_file,
                "origin": {"file": r.origin_file, "name": r.origin_name},
            }
            for r in schema.static_routes
        ],
        "grants": [
            {
                "entity": {"file": g.entity_file, "name": g.entity_name},
                "service": g.service,
                "resource_name": g.resource_name,
                "mode": g.mode,
            }
            for g in schema.grants
        ],
        "warming": {
            "enabled": schema.warming.enabled,
            "period_minutes": schema.warming.period_minutes,
        },
        "files": [
            {
                "path": sf.path,
                "declarations": [
                    {
                        "kind": d.kind.value,
                        "name": d.name,
                        "line": d.line,
                        "params": [[n, t] for n, t in d.params],
                        "return_type": d.return_type,
                        "initializer": d.initializer,
                        "body_refs": sorted(d.body_refs),
                    }
                    for d in sf.declarations
                ],
            }
            for sf in schema.files
        ],
    }


def schema_from_dict(data: dict) -> Schema:
    """Rebuild a Schema from its serialized form (annotations are not kept)."""
    return Schema(
        app_name=data["app_name"],
        dynamic_routes=tuple(
            DynamicRoute(
                method=r["method"],
                path=r["path"],
                handler_file=r["handler"]["file"],
                handler_name=r["handler"]["name"],
                params=tuple((n, t) for n, t in r["params"]),
                return_type=r["return_type"],
            )
            for r in data["dynamic_routes"]
        ),
        static_routes=tuple(
            StaticRoute(
                path=r["path"],
                mime=MimeType[r["mime"]],
                source_file=r["source_file"],
                origin_file=r["origin"]["file"],
                origin_name=r["origin"]["name"],
            )
            for r in data["static_routes"]
        ),
        grants=tuple(
            PermissionGrant(
                entity_file=g["entity"]["file"],
                entity_name=g["entity"]["name"],
                service=g["service"],
                resource_name=g["resource_name"],
                mode=g["mode"],
            )
            for g in data["grants"]
        ),
        warming=WarmingConfig(
            enabled=data["warming"]["enabled"],
            period_minutes=data["warming"]["period_minutes"],
        ),
        files=tuple(
            SourceFile(
                path=sf["path"],
                declarations=tuple(
                    Declaration(
                        kind=DeclKind(d["kind"]),
                        name=d["name"],
                        line=d["line"],
                        params=tuple((n, t) for n, t in d["params"]),
                        return_type=d["return_type"],
                        initializer=d["initializer"],
                        body_refs=frozenset(d["body_refs"]),
                        file=sf["path"],
                    )
                    for d in sf["declarations"]
                ),
            )
            for sf in data["files"]
        ),
    )


def canonical_schema_json(schema: Schema) -> str:
    return json.dumps(schema_to_dict(schema), sort_keys=True, separators=(",", ":")) + "\n"


def schema_digest(schema: Schema) -> str:
    return hashlib.sha256(canonical_schema_json(schema).encode("utf-8")).hexdigest()
