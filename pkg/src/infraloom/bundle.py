"""Deterministic application bundle: static files plus the schema snapshot.

The bundle is a reproducible zip (stored entries, fixed timestamps, sorted
names) accompanied by a manifest listing every entry with its sha256 and
the digest of the canonical schema serialization. Rebundling an unchanged
project is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import zipfile
from dataclasses import dataclass
from pathlib import Path

_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


class MissingStaticFile(Exception):
    def __init__(self, path: str):
        super().__init__(f"static file not found: {path}")
        self.path = path


@dataclass(frozen=True)
class ManifestEntry:
    logical_name: str
    source_path: str
    sha256: str


@dataclass(frozen=True)
class BundleManifest:
    entries: tuple[ManifestEntry, ...]  # sorted by logical_name
    schema_digest: str


def manifest_to_json(manifest: BundleManifest) -> str:
    data = {
        "entries": [
            {"logical_name": e.logical_name, "source_path": e.source_path, "sha256": e.sha256}
            for e in manifest.entries
        ],
        "schema_digest": manifest.schema_digest,
    }
    return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"


def build_bundle(
    out_dir: Path,
    schema_json: str,
    schema_digest: str,
    statics: list[tuple[str, str, Path]],
) -> BundleManifest:
    """Write ``bundle.zip`` and ``manifest.json`` under ``out_dir``.

    ``statics`` rows are (logical_name, source_path_as_configured,
    filesystem_path). Raises MissingStaticFile when a source is absent.
    """
    contents: list[tuple[str, str, bytes]] = [
        ("schema.json", "schema.json", schema_json.encode("utf-8"))
    ]
    for logical_name, source_path, fs_path in statics:
        if not fs_path.is_file():
            raise MissingStaticFile(source_path)
        contents.append((logical_name, source_path, fs_path.read_bytes()))
    contents.sort(key=lambda row: row[0])

    out_dir.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(out_dir / "bundle.zip", "w", zipfile.ZIP_STORED) as zf:
        for logical_name, _, payload in contents:
            info = zipfile.ZipInfo(filename=logical_name, date_time=_ZIP_EPOCH)
            info.external_attr = 0o644 << 16
            zf.writestr(info, payload)

    manifest = BundleManifest(
        entries=tuple(
            ManifestEntry(
                logical_name=logical_name,
                source_path=source_path,
                sha256=hashlib.sha256(payload).hexdigest(),
            )
            for logical_name, source_path, payload in contents
        ),
        schema_digest=schema_digest,
    )
    (out_dir / "manifest.json").write_bytes(manifest_to_json(manifest).encode("utf-8"))
    return manifest
