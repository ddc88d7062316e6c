"""Schema -> Terraform HCL synthesis."""

from .aws import ProviderConfig, synthesize
from .hcl import render_hcl
from .resources import (
    CyclicDependency,
    Group,
    HclBlock,
    HclHeredoc,
    HclList,
    HclRef,
    HclValue,
    MalformedInterpolation,
    ResourceGraph,
    SynthesisError,
    TfResource,
    UnsupportedProvider,
    detect_dependencies,
    order_resources,
)

__all__ = [
    "CyclicDependency",
    "Group",
    "HclBlock",
    "HclHeredoc",
    "HclList",
    "HclRef",
    "HclValue",
    "MalformedInterpolation",
    "ProviderConfig",
    "ResourceGraph",
    "SynthesisError",
    "TfResource",
    "UnsupportedProvider",
    "detect_dependencies",
    "order_resources",
    "render_hcl",
    "synthesize",
]
