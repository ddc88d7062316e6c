"""Least-privilege policy derivation from reachable permission grants.

A handler is entitled to exactly the grants attached to declarations it can
reach through identifier references. Reachability is lexical (body_refs
from the parser), not a real call graph, so it may over-approximate; that
direction is safe, since it can only grant extra permissions relative to
true usage, never drop required ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .dsl import SourceFile
from .schema import Schema

READ_ACTIONS = (
    "dynamodb:BatchGetItem",
    "dynamodb:GetItem",
    "dynamodb:Query",
    "dynamodb:Scan",
)
WRITE_ACTIONS = (
    "dynamodb:BatchWriteItem",
    "dynamodb:DeleteItem",
    "dynamodb:PutItem",
    "dynamodb:UpdateItem",
)
MODE_ACTIONS: dict[str, tuple[str, ...]] = {
    "Read": READ_ACTIONS,
    "Write": WRITE_ACTIONS,
    "ReadWrite": tuple(sorted(READ_ACTIONS + WRITE_ACTIONS)),
}


class UnknownDeclaration(Exception):
    def __init__(self, name: str):
        super().__init__(f"unknown declaration {name!r}")
        self.name = name


@dataclass(frozen=True)
class PolicyStatement:
    service: str
    actions: tuple[str, ...]  # sorted, nonempty
    resource_pattern: str


@dataclass(frozen=True)
class PolicyDocument:
    statements: tuple[PolicyStatement, ...] = ()  # sorted by (service, resource)


EMPTY_POLICY = PolicyDocument()


def reference_closure(root: str, files: list[SourceFile] | tuple[SourceFile, ...]) -> set[str]:
    """Declarations reachable from ``root`` through body references.

    Least fixpoint of "A's body_refs contains B's name", root included.
    Only names that resolve to actual declarations are members, so the
    result is always a subset of the declared names. Terminates on cycles.
    """
    refs_by_name: dict[str, set[str]] = {}
    for sf in files:
        for decl in sf.declarations:
            refs_by_name.setdefault(decl.name, set()).update(decl.body_refs)
    if root not in refs_by_name:
        raise UnknownDeclaration(root)

    closure = {root}
    frontier = [root]
    while frontier:
        current = frontier.pop()
        for ref in refs_by_name[current]:
            if ref in refs_by_name and ref not in closure:
                closure.add(ref)
                frontier.append(ref)
    return closure


def derive_policy(schema: Schema) -> PolicyDocument:
    """Merge the grants reachable from every dynamic route handler."""
    reachable: set[str] = set()
    for route in schema.dynamic_routes:
        reachable |= reference_closure(route.handler_name, schema.files)

    merged: dict[tuple[str, str], set[str]] = {}
    for grant in schema.grants:
        if grant.entity_name not in reachable:
            continue
        key = (grant.service, grant.resource_name)
        merged.setdefault(key, set()).update(MODE_ACTIONS[grant.mode])

    return PolicyDocument(
        statements=tuple(
            PolicyStatement(service=service, actions=tuple(sorted(actions)), resource_pattern=resource)
            for (service, resource), actions in sorted(merged.items())
        )
    )


def merge_policies(a: PolicyDocument, b: PolicyDocument) -> PolicyDocument:
    """Union of two documents; shared (service, resource) keys union actions."""
    merged: dict[tuple[str, str], set[str]] = {}
    for doc in (a, b):
        for stmt in doc.statements:
            key = (stmt.service, stmt.resource_pattern)
            merged.setdefault(key, set()).update(stmt.actions)
    return PolicyDocument(
        statements=tuple(
            PolicyStatement(service=service, actions=tuple(sorted(actions)), resource_pattern=resource)
            for (service, resource), actions in sorted(merged.items())
        )
    )


def table_arn_pattern(table_name: str) -> str:
    return f"arn:aws:dynamodb:*:*:table/{table_name}"


def policy_statements_json(doc: PolicyDocument) -> list[dict]:
    return [
        {
            "Action": list(stmt.actions),
            "Effect": "Allow",
            "Resource": table_arn_pattern(stmt.resource_pattern),
        }
        for stmt in doc.statements
    ]


def render_policy_text(doc: PolicyDocument) -> str:
    """Render a PolicyDocument as provider policy JSON for inspection."""
    document = {"Statement": policy_statements_json(doc), "Version": "2012-10-17"}
    return json.dumps(document, indent=2, sort_keys=True) + "\n"
