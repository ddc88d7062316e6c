"""Provider-level resource model for deterministic HCL generation.

Resources carry ordered attribute lists whose values are a small HCL value
tree. Dependencies between resources are recovered lexically from classic
``${type.name.attr}`` interpolation references (the 0.11-era syntax was
chosen precisely because it keeps dependency detection lexical), plus the
literal ``"type.name"`` entries of ``depends_on`` lists.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union


class Group(Enum):
    PROVIDER = "Provider"
    IAM = "Iam"
    LAMBDA = "Lambda"
    API_GATEWAY = "ApiGateway"
    S3 = "S3"
    CLOUDWATCH = "CloudWatch"


GROUP_ORDER = tuple(Group)


@dataclass(frozen=True)
class HclRef:
    """Interpolation reference ``${type.name.attr}``."""

    target_type: str
    target_name: str
    attr: str

    @property
    def expr(self) -> str:
        return f"{self.target_type}.{self.target_name}.{self.attr}"


@dataclass(frozen=True)
class HclBlock:
    attrs: tuple[tuple[str, "HclValue"], ...]


@dataclass(frozen=True)
class HclList:
    items: tuple["HclValue", ...]


@dataclass(frozen=True)
class HclHeredoc:
    text: str
    tag: str = "EOF"


HclValue = Union[str, int, float, bool, HclRef, HclBlock, HclList, HclHeredoc]

_NAME_RE = re.compile(r"^[a-z0-9_]+$")
_REF_PART_RE = re.compile(r"^[A-Za-z0-9_-]+$")


class SynthesisError(Exception):
    pass


class UnsupportedProvider(SynthesisError):
    def __init__(self, name: str):
        super().__init__(f"unsupported provider {name!r}; only 'aws' is implemented")
        self.name = name


class MalformedInterpolation(SynthesisError):
    def __init__(self, text: str):
        super().__init__(f"malformed interpolation reference {text!r}")
        self.text = text


class CyclicDependency(SynthesisError):
    def __init__(self, cycle: list[str]):
        super().__init__("resource dependency cycle: " + " -> ".join(cycle))
        self.cycle = cycle


@dataclass(frozen=True)
class TfResource:
    type: str
    name: str
    group: Group
    attributes: tuple[tuple[str, HclValue], ...] = ()

    def __post_init__(self):
        if not _NAME_RE.match(self.name):
            raise ValueError(f"resource name {self.name!r} must match [a-z0-9_]+")

    @property
    def address(self) -> str:
        return f"{self.type}.{self.name}"


class ResourceGraph:
    """A set of resources with edges derived from interpolation references."""

    def __init__(self, resources: Iterable[TfResource] = ()):
        self._by_key: dict[tuple[str, str], TfResource] = {}
        for resource in resources:
            self.add(resource)

    def add(self, resource: TfResource) -> None:
        key = (resource.type, resource.name)
        if key in self._by_key:
            raise ValueError(f"duplicate resource {resource.address}")
        self._by_key[key] = resource

    @property
    def resources(self) -> list[TfResource]:
        return list(self._by_key.values())

    def __len__(self) -> int:
        return len(self._by_key)

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self._by_key

    def edges(self) -> dict[tuple[str, str], set[tuple[str, str]]]:
        """Map each resource key to the keys it depends on."""
        return {
            key: detect_dependencies(resource) for key, resource in self._by_key.items()
        }


def detect_dependencies(resource: TfResource) -> set[tuple[str, str]]:
    """All dependency targets referenced by a resource, deduplicated.

    Covers ``${type.name.attr}`` interpolations anywhere in the (nested)
    attribute values, including inside plain strings, and the string
    entries of a ``depends_on`` list.
    """
    deps: set[tuple[str, str]] = set()

    def scan_text(text: str) -> None:
        idx = 0
        while (start := text.find("${", idx)) != -1:
            end = text.find("}", start)
            if end == -1:
                raise MalformedInterpolation(text[start:])
            deps.add(_parse_ref(text[start + 2 : end]))
            idx = end + 1

    def walk(value: HclValue) -> None:
        if isinstance(value, HclRef):
            deps.add((value.target_type, value.target_name))
        elif isinstance(value, (str, HclHeredoc)):
            scan_text(value if isinstance(value, str) else value.text)
        elif isinstance(value, HclBlock):
            for _, inner in value.attrs:
                walk(inner)
        elif isinstance(value, HclList):
            for item in value.items:
                walk(item)

    for key, value in resource.attributes:
        if key == "depends_on" and isinstance(value, HclList):
            for item in value.items:
                if not isinstance(item, str):
                    raise MalformedInterpolation(repr(item))
                parts = item.split(".")
                if len(parts) != 2 or not all(_REF_PART_RE.match(p) for p in parts):
                    raise MalformedInterpolation(item)
                deps.add((parts[0], parts[1]))
            continue
        walk(value)
    return deps


def _parse_ref(expr: str) -> tuple[str, str]:
    parts = expr.split(".")
    if len(parts) < 3 or not all(_REF_PART_RE.match(p) for p in parts):
        raise MalformedInterpolation("${" + expr + "}")
    return (parts[0], parts[1])


def order_resources(graph: ResourceGraph) -> list[TfResource]:
    """Emit resources group by group, dependencies first within each group.

    Groups follow the fixed GROUP_ORDER; within a group, resources are in
    topological order with respect to intra-group edges, ties broken by
    ascending (type, name). The result is a permutation of the input.
    """
    edges = graph.edges()
    _check_acyclic(edges)

    by_group: dict[Group, list[TfResource]] = {g: [] for g in GROUP_ORDER}
    for resource in graph.resources:
        by_group[resource.group].append(resource)

    ordered: list[TfResource] = []
    for group in GROUP_ORDER:
        members = {(r.type, r.name): r for r in by_group[group]}
        # Kahn's algorithm with a heap so ties come out in (type, name) order.
        remaining_deps = {
            key: {dep for dep in edges[key] if dep in members and dep != key}
            for key in members
        }
        dependents: dict[tuple[str, str], set[tuple[str, str]]] = {k: set() for k in members}
        for key, deps in remaining_deps.items():
            for dep in deps:
                dependents[dep].add(key)
        ready = [key for key, deps in remaining_deps.items() if not deps]
        heapq.heapify(ready)
        emitted = 0
        while ready:
            key = heapq.heappop(ready)
            ordered.append(members[key])
            emitted += 1
            for dependent in sorted(dependents[key]):
                remaining_deps[dependent].discard(key)
                if not remaining_deps[dependent]:
                    heapq.heappush(ready, dependent)
        if emitted != len(members):
            # Unreachable when the global check passed, kept as a safeguard.
            stuck = sorted(k for k, deps in remaining_deps.items() if deps)
            raise CyclicDependency([f"{t}.{n}" for t, n in stuck])
    return ordered


def _check_acyclic(edges: dict[tuple[str, str], set[tuple[str, str]]]) -> None:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {key: WHITE for key in edges}
    stack_path: list[tuple[str, str]] = []

    def visit(node: tuple[str, str]) -> None:
        color[node] = GRAY
        stack_path.append(node)
        for dep in sorted(edges[node]):
            if dep not in color:
                continue  # dangling reference; not a node of this graph
            if color[dep] == GRAY:
                cycle = stack_path[stack_path.index(dep) :] + [dep]
                raise CyclicDependency([f"{t}.{n}" for t, n in cycle])
            if color[dep] == WHITE:
                visit(dep)
        stack_path.pop()
        color[node] = BLACK

    for key in sorted(edges):
        if color[key] == WHITE:
            visit(key)
