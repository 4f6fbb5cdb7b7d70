"""Deterministic result serialization: CSV, JSON and run manifests.

CSV files have exactly one header row, '.' decimals and LF endings; JSON
payloads are emitted with sorted keys and floats normalized to 12
significant digits, so identical results give byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

SCHEMA_PATH = Path(__file__).parent / "data" / "report_schema.json"


def _fmt_float(value: float) -> str:
    text = f"{value:.12g}"
    return text


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt_float(value)
    return str(value)


def write_csv(path, header: list[str], rows) -> None:
    """Write rows of scalars as CSV with a single header row."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def _normalize(value):
    if isinstance(value, float):
        return float(_fmt_float(value))
    if isinstance(value, dict):
        return {k: _normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    return value


def json_report(kind: str, data: dict) -> dict:
    return {"schema_version": 1, "kind": kind, "data": _normalize(data)}


def dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_json(path, payload: dict) -> None:
    Path(path).write_bytes(dump_json(payload).encode("utf-8"))


def validate_report(payload: dict) -> None:
    """Check a report against the bundled JSON schema (needs jsonschema)."""
    import jsonschema

    schema = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
    jsonschema.validate(payload, schema)


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    config_path: str
    seed: int
    version: str
    wall_time_s: float
    outputs: tuple[str, ...]

    def payload(self) -> dict:
        return json_report("run_manifest", {
            "subcommand": self.subcommand,
            "config_path": self.config_path,
            "seed": self.seed,
            "toolkit_version": self.version,
            "wall_time_s": self.wall_time_s,
            "outputs": list(self.outputs),
        })


def write_manifest(manifest: RunManifest, out_dir) -> Path:
    path = Path(out_dir) / "manifest.json"
    write_json(path, manifest.payload())
    return path
