"""Command-line entry point for the whole pipeline.

    infraloom synth    --config project.conf
    infraloom bundle   --config project.conf
    infraloom deploy   --config project.conf [--dry-run | --apply]
    infraloom serve    --config project.conf [--port N] [--stubs file] [--batch]
    infraloom simulate --config project.conf --workload workload.csv
    infraloom estimate --config project.conf --pricing pricing.conf

Exit codes: 0 success; 1 parse/validation errors; 2 I/O errors (unreadable
config, port in use); 3 no terraform binary; 4 terraform reported failure.
Diagnostics go to stderr, machine-readable output to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

from .bundle import MissingStaticFile, build_bundle
from .config import ConfigError, ProjectConfig, load_config, parse_key_values
from .dsl import DslError, SourceFile, parse_file
from .permissions import derive_policy, render_policy_text
from .runtime.cost import CostParams, estimate_cost, warming_invocations_per_month
from .runtime.dispatch import load_dispatch_table
from .runtime.server import EmulatorServer, process_event_lines
from .runtime.simulator import InvalidWorkload, WarmPoolState, read_workload_csv, simulate_warm_pool
from .schema import Schema, SchemaValidationError, build_schema, canonical_schema_json, schema_digest
from .synthesizer import ProviderConfig, SynthesisError, order_resources, render_hcl, synthesize

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_NO_TERRAFORM = 3
EXIT_TERRAFORM_FAILED = 4

TERRAFORM_ENV_VAR = "INFRALOOM_TERRAFORM"


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _load_config_checked(config_path: str) -> ProjectConfig | int:
    try:
        return load_config(config_path)
    except OSError as err:
        _err(f"cannot read config {config_path}: {err}")
        return EXIT_IO
    except ConfigError as err:
        _err(f"invalid config {config_path}: {err}")
        return EXIT_INVALID


def _collect_sources(config: ProjectConfig) -> list[tuple[Path, str]]:
    """All .kls files under the source dirs as (fs path, project-relative id)."""
    found: dict[str, Path] = {}
    for source_dir in config.source_dirs:
        root = config.resolve(source_dir)
        if not root.is_dir():
            continue
        for path in sorted(root.rglob("*.kls")):
            try:
                rel = path.relative_to(config.root).as_posix()
            except ValueError:  # source dir outside the project root
                rel = path.as_posix()
            found[rel] = path
    return [(found[rel], rel) for rel in sorted(found)]


def _parse_project(config: ProjectConfig) -> list[SourceFile] | int:
    files: list[SourceFile] = []
    errors: list[str] = []
    for fs_path, rel in _collect_sources(config):
        try:
            text = fs_path.read_text(encoding="utf-8-sig")  # tolerate a BOM
        except OSError as err:
            _err(f"cannot read {rel}: {err}")
            return EXIT_IO
        except UnicodeDecodeError as err:
            errors.append(f"{rel}: not valid UTF-8: {err}")
            continue
        try:
            files.append(parse_file(text, rel))
        except DslError as err:
            errors.append(str(err))
    if errors:
        for message in errors:
            _err(message)
        return EXIT_INVALID
    return files


def _build_project_schema(config: ProjectConfig) -> Schema | int:
    files = _parse_project(config)
    if isinstance(files, int):
        return files
    try:
        return build_schema(files, config)
    except SchemaValidationError as err:
        for schema_error in err.errors:
            _err(str(schema_error))
        return EXIT_INVALID


def cmd_synth(config_path: str) -> int:
    """Parse, validate, synthesize; write main.tf, policy.txt, schema.json."""
    config = _load_config_checked(config_path)
    if isinstance(config, int):
        return config
    schema = _build_project_schema(config)
    if isinstance(schema, int):
        return schema

    provider = ProviderConfig(
        name=config.provider,
        region=config.region,
        bucket=config.bucket,
        static_dir=config.static_dir,
    )
    try:
        graph = synthesize(schema, provider)
        hcl_text = render_hcl(order_resources(graph))
    except SynthesisError as err:
        _err(str(err))
        return EXIT_INVALID

    out = config.out_path
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "main.tf").write_bytes(hcl_text.encode("utf-8"))
        (out / "policy.txt").write_bytes(render_policy_text(derive_policy(schema)).encode("utf-8"))
        (out / "schema.json").write_bytes(canonical_schema_json(schema).encode("utf-8"))
    except OSError as err:
        _err(f"cannot write outputs to {out}: {err}")
        return EXIT_IO
    _err(f"synthesized {len(graph)} resources into {out / 'main.tf'}")
    return EXIT_OK


def cmd_bundle(config_path: str) -> int:
    """Write bundle.zip (statics + schema.json) and manifest.json."""
    config = _load_config_checked(config_path)
    if isinstance(config, int):
        return config
    schema = _build_project_schema(config)
    if isinstance(schema, int):
        return schema

    static_root = config.resolve(config.static_dir)
    statics = [
        (route.path.lstrip("/"), route.source_file, static_root / route.source_file)
        for route in schema.static_routes
    ]
    try:
        manifest = build_bundle(
            config.out_path,
            canonical_schema_json(schema),
            schema_digest(schema),
            statics,
        )
    except MissingStaticFile as err:
        _err(str(err))
        return EXIT_INVALID
    except OSError as err:
        _err(f"cannot write bundle: {err}")
        return EXIT_IO
    _err(f"bundled {len(manifest.entries)} entries into {config.out_path / 'bundle.zip'}")
    return EXIT_OK


def _find_terraform() -> str | None:
    override = os.environ.get(TERRAFORM_ENV_VAR)
    if override:
        return override if Path(override).is_file() else None
    return shutil.which("terraform")


def cmd_deploy(config_path: str, dry_run: bool = True) -> int:
    """Hand the generated code to an external terraform binary.

    The binary is located (env override first), never downloaded. Dry run
    validates; --apply runs init+apply.
    """
    config = _load_config_checked(config_path)
    if isinstance(config, int):
        return config
    out = config.out_path
    if not (out / "main.tf").is_file():
        _err(f"{out / 'main.tf'} not found; run 'infraloom synth' first")
        return EXIT_INVALID

    terraform = _find_terraform()
    if terraform is None:
        _err(
            "no terraform binary found: install terraform and put it on PATH, "
            f"or point {TERRAFORM_ENV_VAR} at the binary"
        )
        return EXIT_NO_TERRAFORM

    def run(*args: str) -> int:
        proc = subprocess.run([terraform, *args], cwd=out, capture_output=True, text=True)
        if proc.stdout:
            _err(proc.stdout.rstrip())
        if proc.stderr:
            _err(proc.stderr.rstrip())
        return proc.returncode

    if not (out / ".terraform").is_dir():
        if run("init", "-backend=false", "-input=false") != 0:
            _err("terraform init failed")
            return EXIT_TERRAFORM_FAILED
    if dry_run:
        if run("validate") != 0:
            return EXIT_TERRAFORM_FAILED
        _err("terraform validate passed")
        return EXIT_OK
    if run("apply", "-auto-approve", "-input=false") != 0:
        return EXIT_TERRAFORM_FAILED
    return EXIT_OK


def _load_stub_map(stubs_path: str | None) -> dict[str, str] | int:
    if stubs_path is None:
        return {}
    try:
        text = Path(stubs_path).read_text(encoding="utf-8")
    except OSError as err:
        _err(f"cannot read stubs file {stubs_path}: {err}")
        return EXIT_IO
    try:
        return parse_key_values(text)
    except ConfigError as err:
        _err(f"invalid stubs file {stubs_path}: {err}")
        return EXIT_INVALID


def build_table_from_config(config: ProjectConfig, stub_map: dict[str, str]):
    """Dispatch table with demo stubs: each route echoes its handler name,
    unless the stub map binds the name to a fixed response string."""
    schema = _build_project_schema(config)
    if isinstance(schema, int):
        return schema

    def make_stub(name: str):
        if name in stub_map:
            return lambda **_kwargs: stub_map[name]
        return lambda **_kwargs: name

    handlers = {r.handler_name: make_stub(r.handler_name) for r in schema.dynamic_routes}
    return load_dispatch_table(
        schema, handlers, static_root=config.resolve(config.static_dir)
    )


def cmd_serve(config_path: str, port: int, stubs_path: str | None = None, batch: bool = False) -> int:
    """Serve the schema locally over HTTP, or process NDJSON events (--batch)."""
    config = _load_config_checked(config_path)
    if isinstance(config, int):
        return config
    stub_map = _load_stub_map(stubs_path)
    if isinstance(stub_map, int):
        return stub_map
    table = build_table_from_config(config, stub_map)
    if isinstance(table, int):
        return table

    if batch:
        for line in process_event_lines(table, sys.stdin):
            print(line)
        return EXIT_OK

    try:
        server = EmulatorServer(table, port=port)
    except OSError as err:
        _err(f"cannot bind port {port}: {err}")
        return EXIT_IO
    _err(f"serving on http://127.0.0.1:{server.port}/ (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_simulate(config_path: str, workload_path: str) -> int:
    """Run the warm-pool simulator over a CSV workload; metrics to stdout."""
    config = _load_config_checked(config_path)
    if isinstance(config, int):
        return config
    try:
        with open(workload_path, encoding="utf-8") as fh:
            workload = read_workload_csv(fh)
    except OSError as err:
        _err(f"cannot read workload {workload_path}: {err}")
        return EXIT_IO
    except InvalidWorkload as err:
        _err(f"malformed workload: {err}")
        return EXIT_INVALID

    state = WarmPoolState(
        max_instances=config.max_instances,
        expiry_minutes=config.expiry_minutes,
        cold_start_ms=config.cold_start_ms,
        service_time_ms=config.service_time_ms,
        warm_pool_target=config.warm_pool_target,
    )
    schema = _build_project_schema(config)
    if isinstance(schema, int):
        return schema
    try:
        metrics = simulate_warm_pool(workload, state, schema.warming)
    except InvalidWorkload as err:
        _err(f"malformed workload: {err}")
        return EXIT_INVALID
    print(json.dumps(metrics.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_estimate(config_path: str, pricing_path: str) -> int:
    """Estimate the monthly bill from a pricing file; JSON to stdout."""
    config = _load_config_checked(config_path)
    if isinstance(config, int):
        return config
    try:
        text = Path(pricing_path).read_text(encoding="utf-8")
    except OSError as err:
        _err(f"cannot read pricing file {pricing_path}: {err}")
        return EXIT_IO
    try:
        raw = parse_key_values(text)
        warming = warming_invocations_per_month(
            config.warming_period_minutes, config.warming_enabled
        )
        params = CostParams(
            price_per_request=float(raw.get("price_per_request", 0.0)),
            price_per_gb_second=float(raw.get("price_per_gb_second", 0.0)),
            memory_gb=float(raw.get("memory_gb", 3.0)),
            requests_per_month=float(raw.get("requests_per_month", 0.0)),
            avg_duration_ms=float(raw.get("avg_duration_ms", 0.0)),
            warming_per_month=float(raw.get("warming_per_month", warming)),
        )
        cost = estimate_cost(params)
    except (ConfigError, ValueError) as err:
        _err(f"invalid pricing file {pricing_path}: {err}")
        return EXIT_INVALID
    print(json.dumps({"monthly_cost": cost, "warming_per_month": params.warming_per_month}, sort_keys=True))
    return EXIT_OK


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infraloom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the project config file")
        return p

    add("synth", "generate deployment code from the project sources")
    add("bundle", "package static files and the schema snapshot")
    deploy = add("deploy", "hand generated code to an external terraform binary")
    mode = deploy.add_mutually_exclusive_group()
    mode.add_argument("--dry-run", action="store_true", default=True, help="validate only (default)")
    mode.add_argument("--apply", action="store_true", help="run terraform init+apply")
    serve = add("serve", "run the local HTTP emulator with stub handlers")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--stubs", help="stub-mapping file: handlerName = response text")
    serve.add_argument("--batch", action="store_true", help="read NDJSON events from stdin")
    simulate = add("simulate", "run the warm-pool simulator over a workload CSV")
    simulate.add_argument("--workload", required=True, help="CSV of arrival_ms,concurrency")
    estimate = add("estimate", "estimate monthly cost from a pricing file")
    estimate.add_argument("--pricing", required=True, help="key = value pricing file")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    if args.command == "synth":
        return cmd_synth(args.config)
    if args.command == "bundle":
        return cmd_bundle(args.config)
    if args.command == "deploy":
        return cmd_deploy(args.config, dry_run=not args.apply)
    if args.command == "serve":
        return cmd_serve(args.config, args.port, args.stubs, args.batch)
    if args.command == "simulate":
        return cmd_simulate(args.config, args.workload)
    if args.command == "estimate":
        return cmd_estimate(args.config, args.pricing)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
