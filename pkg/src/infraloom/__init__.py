"""infraloom: an annotation-driven serverless toolchain.

Parses a small annotated declaration language, builds a cloud-agnostic
serverless schema, synthesizes deterministic Terraform HCL, and runs the
same schema in a local emulator with warming and warm-pool simulation.
"""

__version__ = "0.1.0"
