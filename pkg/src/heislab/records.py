"""Run records: canonical configuration text, hash, and the JSON sidecar.

Every command writes its outputs plus a ``run_record.json`` describing
what produced them.  The configuration is serialized as sorted
``key=value`` lines and hashed, so identical inputs hash identically
regardless of flag order.  The record's ``wall_time_s`` field is the
only part expected to differ between reruns; byte-level comparisons
should drop it (all other output files are exactly reproducible).
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

from . import __version__
from .errors import ValidationError


def format_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def canonical_config(command: str, params: dict) -> str:
    lines = [f"command={command}"]
    for key in sorted(params):
        lines.append(f"{key}={format_value(params[key])}")
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> tuple[str, dict]:
    """Parse canonical key=value text back to (command, params).

    '#' starts a comment and blank lines are skipped.  Values come back
    as strings, which is their canonical form, so parse and re-serialize
    is an exact round trip on comment-free canonical text.
    """
    command = None
    params: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValidationError(f"config line without '=': {raw!r}")
        key, val = key.strip(), val.strip()
        if key == "command":
            command = val
        else:
            params[key] = val
    if command is None:
        raise ValidationError("config is missing the command line")
    return command, params


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def write_run_record(out_dir, command: str, params: dict, outputs: list, t0: float) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text = canonical_config(command, params)
    record = {
        "command": command,
        "config": {k: format_value(v) for k, v in sorted(params.items())},
        "config_hash": config_hash(text),
        "outputs": sorted(str(o) for o in outputs),
        "version": __version__,
        "wall_time_s": round(time.monotonic() - t0, 6),
    }
    path = out_dir / "run_record.json"
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
