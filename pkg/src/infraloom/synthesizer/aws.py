"""AWS mapping: Schema -> provider resource graph.

The whole application deploys as a single dispatcher Lambda; API Gateway
routes every dynamic path to it, static routes become S3 bucket objects in
a pre-existing bucket, and warming (when enabled) is a CloudWatch event
rule firing a warming event into the same function every N minutes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from posixpath import join as posix_join

from ..permissions import derive_policy, policy_statements_json
from ..schema import Schema, path_segments
from .resources import (
    Group,
    HclHeredoc,
    HclList,
    HclRef,
    ResourceGraph,
    TfResource,
    UnsupportedProvider,
)

LOG_STATEMENT = {
    "Action": ["logs:CreateLogGroup", "logs:CreateLogStream", "logs:PutLogEvents"],
    "Effect": "Allow",
    "Resource": "arn:aws:logs:*:*:*",
}

ASSUME_ROLE_POLICY = {
    "Statement": [
        {
            "Action": "sts:AssumeRole",
            "Effect": "Allow",
            "Principal": {"Service": "lambda.amazonaws.com"},
        }
    ],
    "Version": "2012-10-17",
}


@dataclass(frozen=True)
class ProviderConfig:
    name: str = "aws"
    region: str = "us-east-1"
    bucket: str = ""
    static_dir: str = "static"
    bundle_file: str = "bundle.zip"


def synthesize(schema: Schema, provider: ProviderConfig) -> ResourceGraph:
    """Emit the provider resource graph for a validated schema."""
    if provider.name != "aws":
        raise UnsupportedProvider(provider.name)

    base = _sanitize(schema.app_name)
    graph = ResourceGraph()

    graph.add(
        TfResource(
            type="provider",
            name="aws",
            group=Group.PROVIDER,
            attributes=(("region", provider.region),),
        )
    )

    graph.add(
        TfResource(
            type="aws_iam_role",
            name=base,
            group=Group.IAM,
            attributes=(
                ("name", f"{schema.app_name}-dispatcher"),
                ("assume_role_policy", HclHeredoc(json.dumps(ASSUME_ROLE_POLICY, indent=2, sort_keys=True))),
            ),
        )
    )
    policy = {
        "Statement": policy_statements_json(derive_policy(schema)) + [LOG_STATEMENT],
        "Version": "2012-10-17",
    }
    graph.add(
        TfResource(
            type="aws_iam_role_policy",
            name=base,
            group=Group.IAM,
            attributes=(
                ("name", f"{schema.app_name}-dispatcher"),
                ("role", HclRef("aws_iam_role", base, "id")),
                ("policy", HclHeredoc(json.dumps(policy, indent=2, sort_keys=True))),
            ),
        )
    )

    graph.add(
        TfResource(
            type="aws_lambda_function",
            name=base,
            group=Group.LAMBDA,
            attributes=(
                ("function_name", schema.app_name),
                ("filename", provider.bundle_file),
                ("handler", "dispatcher.Dispatcher::handle"),
                ("runtime", "java11"),
                ("memory_size", 3072),
                ("timeout", 30),
                ("role", HclRef("aws_iam_role", base, "arn")),
            ),
        )
    )
    graph.add(
        TfResource(
            type="aws_lambda_permission",
            name=f"{base}_invoke",
            group=Group.LAMBDA,
            attributes=(
                ("statement_id", "AllowAPIGatewayInvoke"),
                ("action", "lambda:InvokeFunction"),
                ("function_name", HclRef("aws_lambda_function", base, "function_name")),
                ("principal", "apigateway.amazonaws.com"),
                ("source_arn", f"${{aws_api_gateway_rest_api.{base}.execution_arn}}/*/*"),
            ),
        )
    )

    graph.add(
        TfResource(
            type="aws_api_gateway_rest_api",
            name=base,
            group=Group.API_GATEWAY,
            attributes=(("name", schema.app_name),),
        )
    )
    resource_names = _gateway_path_resources(schema, base, graph)

    integration_addresses: list[str] = []
    used_names = set(resource_names.values())
    for route in schema.dynamic_routes:
        slug = _unique(f"{base}_{route.method.lower()}_{_slug(route.path)}", used_names)
        segments = path_segments(route.path)
        if segments:
            parent = resource_names[segments]
            resource_id = HclRef("aws_api_gateway_resource", parent, "id")
        else:
            resource_id = HclRef("aws_api_gateway_rest_api", base, "root_resource_id")
        graph.add(
            TfResource(
                type="aws_api_gateway_method",
                name=slug,
                group=Group.API_GATEWAY,
                attributes=(
                    ("rest_api_id", HclRef("aws_api_gateway_rest_api", base, "id")),
                    ("resource_id", resource_id),
                    ("http_method", route.method),
                    ("authorization", "NONE"),
                ),
            )
        )
        graph.add(
            TfResource(
                type="aws_api_gateway_integration",
                name=slug,
                group=Group.API_GATEWAY,
                attributes=(
                    ("rest_api_id", HclRef("aws_api_gateway_rest_api", base, "id")),
                    ("resource_id", resource_id),
                    ("http_method", HclRef("aws_api_gateway_method", slug, "http_method")),
                    ("integration_http_method", "POST"),
                    ("type", "AWS_PROXY"),
                    ("uri", HclRef("aws_lambda_function", base, "invoke_arn")),
                ),
            )
        )
        integration_addresses.append(f"aws_api_gateway_integration.{slug}")

    deployment_attrs: list[tuple[str, object]] = [
        ("rest_api_id", HclRef("aws_api_gateway_rest_api", base, "id")),
        ("stage_name", "prod"),
    ]
    if integration_addresses:
        deployment_attrs.append(("depends_on", HclList(tuple(sorted(integration_addresses)))))
    graph.add(
        TfResource(
            type="aws_api_gateway_deployment",
            name=base,
            group=Group.API_GATEWAY,
            attributes=tuple(deployment_attrs),
        )
    )

    static_names: set[str] = set()
    for sroute in schema.static_routes:
        name = _unique(f"{base}_static_{_slug(sroute.path)}", static_names)
        graph.add(
            TfResource(
                type="aws_s3_bucket_object",
                name=name,
                group=Group.S3,
                attributes=(
                    ("bucket", provider.bucket),
                    ("key", sroute.path.lstrip("/")),
                    ("source", posix_join(provider.static_dir, sroute.source_file)),
                    ("content_type", sroute.mime.value),
                ),
            )
        )

    if schema.warming.enabled:
        minutes = schema.warming.period_minutes
        unit = "minute" if minutes == 1 else "minutes"
        graph.add(
            TfResource(
                type="aws_cloudwatch_event_rule",
                name=f"{base}_warming",
                group=Group.CLOUDWATCH,
                attributes=(
                    ("name", f"{schema.app_name}-warming"),
                    ("schedule_expression", f"rate({minutes} {unit})"),
                ),
            )
        )
        graph.add(
            TfResource(
                type="aws_cloudwatch_event_target",
                name=f"{base}_warming",
                group=Group.CLOUDWATCH,
                attributes=(
                    ("rule", HclRef("aws_cloudwatch_event_rule", f"{base}_warming", "name")),
                    ("target_id", "warming"),
                    ("arn", HclRef("aws_lambda_function", base, "arn")),
                    ("input", '{"type": "warming", "sequence": 0}'),
                ),
            )
        )
        graph.add(
            TfResource(
                type="aws_lambda_permission",
                name=f"{base}_warming",
                group=Group.LAMBDA,
                attributes=(
                    ("statement_id", "AllowCloudWatchWarming"),
                    ("action", "lambda:InvokeFunction"),
                    ("function_name", HclRef("aws_lambda_function", base, "function_name")),
                    ("principal", "events.amazonaws.com"),
                    ("source_arn", HclRef("aws_cloudwatch_event_rule", f"{base}_warming", "arn")),
                ),
            )
        )
    return graph


def _gateway_path_resources(
    schema: Schema, base: str, graph: ResourceGraph
) -> dict[tuple[str, ...], str]:
    """One aws_api_gateway_resource per distinct non-root path prefix."""
    prefixes: set[tuple[str, ...]] = set()
    for route in schema.dynamic_routes:
        segments = path_segments(route.path)
        for i in range(1, len(segments) + 1):
            prefixes.add(segments[:i])

    names: dict[tuple[str, ...], str] = {}
    used: set[str] = set()
    for prefix in sorted(prefixes):
        names[prefix] = _unique(f"{base}_{_slug('/' + '/'.join(prefix))}", used)
    for prefix in sorted(prefixes):
        if len(prefix) == 1:
            parent_id = HclRef("aws_api_gateway_rest_api", base, "root_resource_id")
        else:
            parent_id = HclRef("aws_api_gateway_resource", names[prefix[:-1]], "id")
        graph.add(
            TfResource(
                type="aws_api_gateway_resource",
                name=names[prefix],
                group=Group.API_GATEWAY,
                attributes=(
                    ("rest_api_id", HclRef("aws_api_gateway_rest_api", base, "id")),
                    ("parent_id", parent_id),
                    ("path_part", prefix[-1]),
                ),
            )
        )
    return names


def _sanitize(name: str) -> str:
    cleaned = re.sub(r"[^a-z0-9_]", "_", name.lower())
    return cleaned if cleaned else "app"


def _slug(path: str) -> str:
    if path == "/":
        return "root"
    segments = [re.sub(r"[^a-z0-9]", "_", seg.strip("{}").lower()) for seg in path_segments(path)]
    return "_".join(segments)


def _unique(candidate: str, used: set[str]) -> str:
    name = candidate
    counter = 2
    while name in used:
        name = f"{candidate}_{counter}"
        counter += 1
    used.add(name)
    return name
