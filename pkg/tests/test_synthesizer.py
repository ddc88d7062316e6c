"""Resource graph synthesis, dependency detection, ordering, rendering."""

import random

import pytest

from infraloom.config import ProjectConfig
from infraloom.dsl import parse_file
from infraloom.runtime.dispatch import load_dispatch_table
from infraloom.schema import build_schema
from infraloom.synthesizer import (
    CyclicDependency,
    Group,
    HclBlock,
    HclList,
    HclRef,
    MalformedInterpolation,
    ProviderConfig,
    ResourceGraph,
    TfResource,
    UnsupportedProvider,
    detect_dependencies,
    order_resources,
    render_hcl,
    synthesize,
)

from oracles import all_dags, is_valid_topo_order, random_dag, random_valid_schema

PROVIDER = ProviderConfig(region="eu-west-1", bucket="fixture-bucket")


def _schema(*sources: tuple[str, str], warming: bool = True):
    config = ProjectConfig(app_name="hello-world", warming_enabled=warming)
    return build_schema([parse_file(text, path) for text, path in sources], config)


HELLO_ROUTE_SOURCE = '@Get("/")\nfun root(): String {\n    return "Hello world!"\n}\n'
STATIC_ROUTE_SOURCE = '@StaticGet("/style.css", MimeType.CSS)\nval style = File("css/style.css")\n'


# -- detect_dependencies ----------------------------------------------------


def _res(attrs, rtype="aws_lambda_function", name="app", group=Group.LAMBDA):
    return TfResource(type=rtype, name=name, group=group, attributes=tuple(attrs))


def test_detect_simple_ref():
    res = _res([("rest_api_id", HclRef("aws_api_gateway_rest_api", "app", "id"))])
    assert detect_dependencies(res) == {("aws_api_gateway_rest_api", "app")}


def test_detect_no_refs():
    assert detect_dependencies(_res([("runtime", "java11"), ("timeout", 30)])) == set()


def test_detect_nested_duplicate_refs_dedup():
    # Oracle: a manual scan over the serialized value tree finds the same
    # single target twice; the result is a singleton set.
    block = HclBlock(
        attrs=(
            ("a", HclRef("aws_iam_role", "app", "arn")),
            ("b", "${aws_iam_role.app.id}/suffix"),
        )
    )
    res = _res([("nested", block)])
    assert detect_dependencies(res) == {("aws_iam_role", "app")}


def test_detect_ref_inside_string():
    res = _res([("source_arn", "${aws_api_gateway_rest_api.app.execution_arn}/*/*")])
    assert detect_dependencies(res) == {("aws_api_gateway_rest_api", "app")}


def test_detect_depends_on_entries():
    res = _res([("depends_on", HclList(("aws_api_gateway_integration.m1",)))])
    assert detect_dependencies(res) == {("aws_api_gateway_integration", "m1")}


def test_detect_malformed():
    with pytest.raises(MalformedInterpolation):
        detect_dependencies(_res([("x", "${two.parts}")]))
    with pytest.raises(MalformedInterpolation):
        detect_dependencies(_res([("x", "${unterminated")]))
    with pytest.raises(MalformedInterpolation):
        detect_dependencies(_res([("depends_on", HclList(("garbage",)))]))


# -- order_resources --------------------------------------------------------


def _plain(rtype: str, name: str, group=Group.IAM, deps=()):
    attrs = tuple((f"ref{i}", HclRef(t, n, "id")) for i, (t, n) in enumerate(deps))
    return TfResource(type=rtype, name=name, group=group, attributes=attrs)


def test_role_before_policy():
    role = _plain("aws_iam_role", "app")
    policy = _plain("aws_iam_role_policy", "app", deps=[("aws_iam_role", "app")])
    graph = ResourceGraph([policy, role])
    ordered = order_resources(graph)
    assert [r.type for r in ordered] == ["aws_iam_role", "aws_iam_role_policy"]
    # Brute force: every valid topological order places the role first.
    edges = graph.edges()
    keys = [(r.type, r.name) for r in graph.resources]
    from oracles import all_topo_orders

    for order in all_topo_orders(keys, edges):
        assert order[0] == ("aws_iam_role", "app")


def test_empty_graph():
    assert order_resources(ResourceGraph()) == []


def test_lexicographic_tie_break():
    a = _plain("aws_lambda_function", "a_fn", Group.LAMBDA)
    b = _plain("aws_lambda_function", "b_fn", Group.LAMBDA)
    ordered = order_resources(ResourceGraph([b, a]))
    assert [r.name for r in ordered] == ["a_fn", "b_fn"]


def test_group_order_fixed():
    resources = [
        _plain("aws_s3_bucket_object", "o", Group.S3),
        _plain("provider", "aws", Group.PROVIDER),
        _plain("aws_cloudwatch_event_rule", "r", Group.CLOUDWATCH),
        _plain("aws_iam_role", "i", Group.IAM),
        _plain("aws_api_gateway_rest_api", "g", Group.API_GATEWAY),
        _plain("aws_lambda_function", "l", Group.LAMBDA),
    ]
    ordered = order_resources(ResourceGraph(resources))
    assert [r.group for r in ordered] == list(Group)


def test_cycle_detected():
    a = _plain("aws_iam_role", "a", deps=[("aws_iam_role", "b")])
    b = _plain("aws_iam_role", "b", deps=[("aws_iam_role", "a")])
    with pytest.raises(CyclicDependency) as exc:
        order_resources(ResourceGraph([a, b]))
    assert "aws_iam_role.a" in str(exc.value)


def _graph_from_edge_map(edges: dict[int, set[int]]) -> ResourceGraph:
    resources = []
    for node, deps in edges.items():
        resources.append(
            _plain("aws_iam_role", f"n{node}", deps=[("aws_iam_role", f"n{d}") for d in sorted(deps)])
        )
    return ResourceGraph(resources)


def test_topological_soundness_exhaustive_small():
    """Every labeled DAG on up to 4 nodes, validated by brute force."""
    checked = 0
    for n in range(1, 5):
        for edges in all_dags(n):
            graph = _graph_from_edge_map(edges)
            ordered = [(r.type, r.name) for r in order_resources(graph)]
            assert sorted(ordered) == sorted((r.type, r.name) for r in graph.resources)
            assert is_valid_topo_order(ordered, graph.edges())
            checked += 1
    assert checked == 572  # 1 + 3 + 25 + 543 labeled DAGs on 1..4 nodes


def test_topological_soundness_randomized_larger():
    rng = random.Random(31337)
    for _ in range(300):
        edges = random_dag(rng, rng.randint(5, 12))
        graph = _graph_from_edge_map(edges)
        ordered = [(r.type, r.name) for r in order_resources(graph)]
        assert is_valid_topo_order(ordered, graph.edges())
        assert sorted(ordered) == sorted((r.type, r.name) for r in graph.resources)


# -- synthesize -------------------------------------------------------------


def test_synthesize_hello_resource_set():
    graph = synthesize(_schema((HELLO_ROUTE_SOURCE, "app.kls")), PROVIDER)
    types = sorted(r.type for r in graph.resources)
    # The contracted 8 + 3 warming resources, plus the provider block.
    assert types == sorted(
        [
            "provider",
            "aws_iam_role",
            "aws_iam_role_policy",
            "aws_lambda_function",
            "aws_lambda_permission",
            "aws_lambda_permission",
            "aws_api_gateway_rest_api",
            "aws_api_gateway_method",
            "aws_api_gateway_integration",
            "aws_api_gateway_deployment",
            "aws_cloudwatch_event_rule",
            "aws_cloudwatch_event_target",
        ]
    )
    assert len(graph) == 12


def test_synthesize_warming_disabled():
    graph = synthesize(_schema((HELLO_ROUTE_SOURCE, "app.kls"), warming=False), PROVIDER)
    assert not any(r.group is Group.CLOUDWATCH for r in graph.resources)
    assert len(graph) == 9


def test_synthesize_static_route():
    graph = synthesize(_schema((STATIC_ROUTE_SOURCE, "site.kls")), PROVIDER)
    objects = [r for r in graph.resources if r.type == "aws_s3_bucket_object"]
    assert len(objects) == 1
    attrs = dict(objects[0].attributes)
    assert attrs["key"] == "style.css"
    assert attrs["content_type"] == "text/css"
    assert attrs["bucket"] == "fixture-bucket"


def test_synthesize_empty_schema_scaffolding():
    graph = synthesize(_schema(warming=False), PROVIDER)
    types = {r.type for r in graph.resources}
    assert types == {
        "provider",
        "aws_iam_role",
        "aws_iam_role_policy",
        "aws_lambda_function",
        "aws_lambda_permission",
        "aws_api_gateway_rest_api",
        "aws_api_gateway_deployment",
    }
    text = render_hcl(order_resources(graph))
    assert text.startswith("# ---- Provider ----")


def test_synthesize_gateway_hierarchy():
    source = (
        '@Get("/api/users/{id}")\nfun show(id: Long): String { return "x" }\n'
        '@Get("/api/users")\nfun index(): String { return "y" }\n'
    )
    graph = synthesize(_schema((source, "api.kls")), PROVIDER)
    resources = [r for r in graph.resources if r.type == "aws_api_gateway_resource"]
    parts = sorted(dict(r.attributes)["path_part"] for r in resources)
    assert parts == ["api", "users", "{id}"]


def test_unsupported_provider():
    with pytest.raises(UnsupportedProvider):
        synthesize(_schema(), ProviderConfig(name="azure"))


def test_referential_closure_on_random_schemas():
    """>= 200 random valid schemas: every reference resolves in-graph."""
    rng = random.Random(5150)
    for _ in range(200):
        schema = random_valid_schema(rng)
        graph = synthesize(schema, PROVIDER)
        keys = {(r.type, r.name) for r in graph.resources}
        for resource in graph.resources:
            for dep in detect_dependencies(resource):
                assert dep in keys, (resource.address, dep)


def test_validation_completeness_on_random_schemas():
    """Valid schemas synthesize and load into the dispatcher without error."""
    rng = random.Random(616)
    for _ in range(100):
        schema = random_valid_schema(rng)
        graph = synthesize(schema, PROVIDER)
        assert render_hcl(order_resources(graph))  # renders without raising
        handlers = {r.handler_name: (lambda **kw: "ok") for r in schema.dynamic_routes}
        load_dispatch_table(schema, handlers)


def test_name_collisions_deduplicated():
    source = (
        '@Get("/a-b")\nfun one(): String { return "1" }\n'
        '@Get("/a_b")\nfun two(): String { return "2" }\n'
    )
    graph = synthesize(_schema((source, "x.kls")), PROVIDER)
    names = [r.name for r in graph.resources if r.type == "aws_api_gateway_resource"]
    assert len(names) == len(set(names)) == 2


# -- render_hcl -------------------------------------------------------------


def test_alignment_contract():
    res = TfResource(
        type="aws_lambda_function",
        name="app",
        group=Group.LAMBDA,
        attributes=(("runtime", "java11"), ("timeout", 30)),
    )
    text = render_hcl([res])
    assert '  runtime = "java11"' in text
    assert "  timeout = 30" in text
    # Equal-width keys put both '=' in the same column.
    lines = [l for l in text.splitlines() if "=" in l]
    assert len({line.index("=") for line in lines}) == 1


def test_alignment_pads_shorter_keys():
    res = TfResource(
        type="aws_lambda_function",
        name="app",
        group=Group.LAMBDA,
        attributes=(("function_name", "x"), ("timeout", 30)),
    )
    lines = [l for l in render_hcl([res]).splitlines() if "=" in l]
    assert len({line.index("=") for line in lines}) == 1


def test_render_empty():
    assert render_hcl([]) == ""


def test_render_nested_block():
    res = TfResource(
        type="aws_lambda_function",
        name="app",
        group=Group.LAMBDA,
        attributes=(
            ("function_name", "x"),
            ("environment", HclBlock(attrs=(("variables_file", "env.json"), ("mode", "fast")))),
        ),
    )
    text = render_hcl([res])
    assert "  environment {\n" in text
    assert '    variables_file = "env.json"' in text
    assert '    mode           = "fast"' in text


def test_render_escapes_string_metacharacters():
    res = TfResource(
        type="aws_lambda_function",
        name="app",
        group=Group.LAMBDA,
        attributes=(("note", 'say "hi"\nback\\slash'),),
    )
    text = render_hcl([res])
    assert '"say \\"hi\\"\\nback\\\\slash"' in text


def test_render_deterministic():
    schema = _schema((HELLO_ROUTE_SOURCE, "a.kls"), (STATIC_ROUTE_SOURCE, "b.kls"))
    first = render_hcl(order_resources(synthesize(schema, PROVIDER)))
    second = render_hcl(order_resources(synthesize(schema, PROVIDER)))
    assert first == second


def test_render_group_headers_once_per_group():
    schema = _schema((HELLO_ROUTE_SOURCE, "a.kls"))
    text = render_hcl(order_resources(synthesize(schema, PROVIDER)))
    for group in ("Provider", "Iam", "Lambda", "ApiGateway", "CloudWatch"):
        assert text.count(f"# ---- {group} ----") == 1
    assert "# ---- S3 ----" not in text


def test_expansion_linear_in_route_count():
    """Line count grows linearly as routes are added."""
    counts = []
    for n in (2, 4, 6):
        source = "".join(
            f'@Get("/r{i}")\nfun h{i}(): String {{ return "x" }}\n' for i in range(n)
        )
        schema = _schema((source, "x.kls"))
        text = render_hcl(order_resources(synthesize(schema, PROVIDER)))
        counts.append(len(text.splitlines()))
    assert counts[1] - counts[0] == counts[2] - counts[1]
    assert counts[1] - counts[0] >= 2 * 20  # >= 20 lines per added annotation
