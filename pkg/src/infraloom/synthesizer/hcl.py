"""Deterministic pretty printer for the resource model.

Formatting contract: two-space indentation, attributes in insertion order,
``=`` aligned per block to the longest key, one blank line between
resources, and a ``# ---- <group> ----`` comment line before each group.
Equal input yields byte-identical output.
"""

from __future__ import annotations

from .resources import Group, HclBlock, HclHeredoc, HclList, HclRef, HclValue, TfResource

INDENT = "  "


def render_hcl(ordered: list[TfResource]) -> str:
    """Render resources (already ordered) as canonical HCL text."""
    if not ordered:
        return ""
    chunks: list[str] = []
    current_group: Group | None = None
    blocks: list[str] = []
    for resource in ordered:
        if resource.group is not current_group:
            if blocks:
                chunks.append("\n\n".join(blocks))
            blocks = [f"# ---- {resource.group.value} ----"]
            current_group = resource.group
        blocks.append(_render_resource(resource))
    chunks.append("\n\n".join(blocks))
    return "\n\n".join(chunks) + "\n"


def _render_resource(resource: TfResource) -> str:
    if resource.type == "provider":
        header = f'provider "{resource.name}" {{'
    else:
        header = f'resource "{resource.type}" "{resource.name}" {{'
    lines = [header]
    lines.extend(_render_attrs(resource.attributes, depth=1))
    lines.append("}")
    return "\n".join(lines)


def _render_attrs(attrs: tuple[tuple[str, HclValue], ...], depth: int) -> list[str]:
    pad = INDENT * depth
    plain_keys = [key for key, value in attrs if not isinstance(value, HclBlock)]
    width = max((len(k) for k in plain_keys), default=0)
    lines: list[str] = []
    for key, value in attrs:
        if isinstance(value, HclBlock):
            lines.append(f"{pad}{key} {{")
            lines.extend(_render_attrs(value.attrs, depth + 1))
            lines.append(f"{pad}}}")
        elif isinstance(value, HclHeredoc):
            lines.append(f"{pad}{key.ljust(width)} = <<{value.tag}")
            lines.extend(value.text.splitlines())
            lines.append(value.tag)
        else:
            lines.append(f"{pad}{key.ljust(width)} = {_render_value(value)}")
    return lines


def _render_value(value: HclValue) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, HclRef):
        return f'"${{{value.expr}}}"'
    if isinstance(value, HclList):
        return "[" + ", ".join(_render_value(item) for item in value.items) + "]"
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{escaped}"'
    raise TypeError(f"cannot render {value!r} as an HCL value")
