"""Schema building, validation, path normalization, and serialization."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infraloom.config import ProjectConfig
from infraloom.dsl import parse_file
from infraloom.schema import (
    DynamicRoute,
    InvalidPath,
    MimeType,
    Schema,
    SchemaErrorKind,
    SchemaValidationError,
    WarmingConfig,
    build_schema,
    canonical_schema_json,
    normalize_path,
    schema_digest,
    schema_from_dict,
    schema_to_dict,
    validate_schema,
)

from oracles import normalize_path_oracle, random_valid_schema

HELLO_ROUTE_SOURCE = '@Get("/")\nfun root(): String {\n    return "Hello world!"\n}\n'
STATIC_ROUTE_SOURCE = '@StaticGet("/style.css", MimeType.CSS)\nval style = File("css/style.css")\n'


def _config(**overrides) -> ProjectConfig:
    values = {"app_name": "test-app"}
    values.update(overrides)
    return ProjectConfig(**values)


# -- normalize_path ---------------------------------------------------------


def test_root_is_fixed_point():
    assert normalize_path("/") == "/"


def test_collapse_and_strip():
    assert normalize_path("//a//b/") == "/a/b"


def test_param_segment_preserved():
    # Expected value computed with the independent segment-list normalizer.
    assert normalize_path_oracle("/u/{id}") == "/u/{id}"
    assert normalize_path("/u/{id}") == "/u/{id}"


def test_normalize_agrees_with_oracle():
    rng = random.Random(11)
    pieces = ["a", "b", "file.css", "x-y_z", "{id}", "{p}"]
    for _ in range(500):
        raw = "/".join(rng.choices(pieces, k=rng.randint(1, 4)))
        raw = rng.choice(["", "/"]) + raw + rng.choice(["", "/", "//"])
        if not raw:
            continue
        assert normalize_path(raw) == normalize_path_oracle(raw)


def test_rejects_bad_segments():
    for bad in ["/a b", "/a?b", "/{9bad}", "/{x", "/sp%20ace"]:
        with pytest.raises(InvalidPath):
            normalize_path(bad)
    with pytest.raises(InvalidPath):
        normalize_path("")


@settings(max_examples=200, deadline=None)
@given(
    st.lists(
        st.sampled_from(["a", "b9", "c.d", "x-1", "{id}", "{name}"]), min_size=0, max_size=5
    ),
    st.sampled_from(["", "/"]),
    st.sampled_from(["", "/", "///"]),
)
def test_normalize_idempotent(segments, prefix, suffix):
    raw = prefix + "/".join(segments) + suffix
    if not raw:
        raw = "/"
    normalized = normalize_path(raw)
    assert normalize_path(normalized) == normalized


# -- build_schema -----------------------------------------------------------


def test_build_from_hello_route():
    files = [parse_file(HELLO_ROUTE_SOURCE, "app.kls")]
    schema = build_schema(files, _config())
    assert len(schema.dynamic_routes) == 1
    route = schema.dynamic_routes[0]
    assert (route.method, route.path) == ("GET", "/")
    assert (route.handler_file, route.handler_name) == ("app.kls", "root")
    assert route.params == ()
    assert route.return_type == "String"
    assert schema.static_routes == ()
    assert schema.grants == ()


def test_build_from_static_route():
    files = [parse_file(STATIC_ROUTE_SOURCE, "site.kls")]
    schema = build_schema(files, _config())
    assert len(schema.static_routes) == 1
    sroute = schema.static_routes[0]
    assert sroute.path == "/style.css"
    assert sroute.mime is MimeType.CSS
    assert sroute.source_file == "css/style.css"


def test_build_empty():
    schema = build_schema([], _config(warming_enabled=False, warming_period_minutes=3))
    assert schema.dynamic_routes == ()
    assert schema.static_routes == ()
    assert schema.warming == WarmingConfig(enabled=False, period_minutes=3)


def test_build_order_stable():
    file_a = parse_file(HELLO_ROUTE_SOURCE, "a.kls")
    file_b = parse_file(STATIC_ROUTE_SOURCE, "b.kls")
    assert build_schema([file_a, file_b], _config()) == build_schema([file_b, file_a], _config())


def test_grant_modes_merge():
    source = '@DynamoDBTable("t", Read)\n@DynamoDBTable("t", Write)\nobject S { }\n'
    schema = build_schema([parse_file(source, "s.kls")], _config())
    assert len(schema.grants) == 1
    assert schema.grants[0].mode == "ReadWrite"


def _kinds(errors) -> set[SchemaErrorKind]:
    return {e.kind for e in errors}


def _build_errors(source: str, path: str = "x.kls") -> list:
    with pytest.raises(SchemaValidationError) as exc:
        build_schema([parse_file(source, path)], _config())
    return exc.value.errors


def test_duplicate_route_reported():
    errors = _build_errors('@Get("/")\nfun a() {}\n@Get("/")\nfun b() {}')
    assert SchemaErrorKind.DUPLICATE_ROUTE in _kinds(errors)
    assert any("DuplicateRoute" in str(e) for e in errors)


def test_unknown_mime_reported():
    errors = _build_errors('@StaticGet("/x.css", MimeType.WOFF)\nval v = File("x")')
    assert SchemaErrorKind.UNKNOWN_MIME in _kinds(errors)


def test_empty_static_source_reported():
    errors = _build_errors('@StaticGet("/x.css", MimeType.CSS)\nval v = File("")')
    assert SchemaErrorKind.EMPTY_STATIC_SOURCE in _kinds(errors)


def test_malformed_initializer_reported():
    errors = _build_errors('@StaticGet("/x.css", MimeType.CSS)\nval v = Files("x")')
    assert SchemaErrorKind.MALFORMED_INITIALIZER in _kinds(errors)


def test_static_annotation_on_function_reported():
    errors = _build_errors('@StaticGet("/x.css", MimeType.CSS)\nfun f(): String { return "x" }')
    assert SchemaErrorKind.MALFORMED_INITIALIZER in _kinds(errors)


def test_routing_annotation_on_value_is_unresolved_handler():
    errors = _build_errors('@Get("/v")\nval v = Thing()')
    assert SchemaErrorKind.UNRESOLVED_HANDLER in _kinds(errors)


def test_unsupported_param_type_reported():
    errors = _build_errors('@Get("/x")\nfun f(a: Widget) { }')
    assert SchemaErrorKind.UNSUPPORTED_PARAM_TYPE in _kinds(errors)


def test_path_param_mismatch_reported():
    errors = _build_errors('@Get("/u/{id}")\nfun f() { }')
    assert SchemaErrorKind.PATH_PARAM_MISMATCH in _kinds(errors)


def test_duplicate_path_param_reported():
    errors = _build_errors('@Get("/u/{id}/{id}")\nfun f(id: Int) { }')
    assert SchemaErrorKind.PATH_PARAM_MISMATCH in _kinds(errors)


def test_static_colliding_with_dynamic_get():
    source = (
        '@Get("/style.css")\nfun css(): String { return "x" }\n'
        '@StaticGet("/style.css", MimeType.CSS)\nval v = File("a.css")'
    )
    errors = _build_errors(source)
    assert SchemaErrorKind.DUPLICATE_ROUTE in _kinds(errors)


def test_invalid_grant_mode_reported():
    errors = _build_errors('@DynamoDBTable("t", Admin)\nobject S { }')
    assert SchemaErrorKind.INVALID_GRANT in _kinds(errors)


def test_invalid_path_reported():
    errors = _build_errors('@Get("/a b")\nfun f() { }')
    assert SchemaErrorKind.INVALID_PATH in _kinds(errors)


def test_errors_carry_provenance():
    errors = _build_errors('fun a() {}\n@Get("/u/{id}")\nfun f() { }', path="prov.kls")
    assert all(e.file == "prov.kls" for e in errors)
    assert any(e.line == 3 for e in errors)


def test_valid_static_route_has_no_errors():
    files = [parse_file(STATIC_ROUTE_SOURCE, "site.kls")]
    schema = build_schema(files, _config())
    assert validate_schema(schema) == []


def test_validate_direct_schema_duplicate():
    route = DynamicRoute(method="GET", path="/", handler_file="f", handler_name="h")
    schema = Schema(app_name="x", dynamic_routes=(route, route))
    kinds = _kinds(validate_schema(schema))
    assert SchemaErrorKind.DUPLICATE_ROUTE in kinds


# -- serialization ----------------------------------------------------------


def test_canonical_json_round_trip():
    files = [parse_file(HELLO_ROUTE_SOURCE, "a.kls"), parse_file(STATIC_ROUTE_SOURCE, "b.kls")]
    schema = build_schema(files, _config())
    rebuilt = schema_from_dict(schema_to_dict(schema))
    assert canonical_schema_json(rebuilt) == canonical_schema_json(schema)
    assert rebuilt.dynamic_routes == schema.dynamic_routes
    assert rebuilt.static_routes == schema.static_routes


def test_canonical_json_shape():
    schema = build_schema([parse_file(HELLO_ROUTE_SOURCE, "a.kls")], _config())
    text = canonical_schema_json(schema)
    assert text.endswith("\n")
    assert "\r" not in text
    assert ": " not in text  # no insignificant whitespace
    assert len(schema_digest(schema)) == 64


def test_random_valid_schemas_validate():
    rng = random.Random(2024)
    for _ in range(100):
        schema = random_valid_schema(rng)
        assert validate_schema(schema) == []
