"""CSV/JSON artifact emission with reproducible config hashing.

Every artifact carries the hash of the experiment configuration that produced
it.  Comment lines (leading '#') hold metadata and are excluded from the
reproducibility contract: two runs with the same config and seed produce
byte-identical files apart from those lines.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path


def canonical_config(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_config(config).encode()).hexdigest()[:16]


def format_float(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path: str | Path, rows: list[dict], config: dict) -> str:
    """Write rows with a hashed-config comment header; returns the hash."""
    digest = config_hash(config)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"# config_hash={digest}\n")
        fh.write(f"# generated={time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
        if rows:
            cols = list(rows[0].keys())
            fh.write(",".join(cols) + "\n")
            for row in rows:
                fh.write(",".join(format_float(row[c]) for c in cols) + "\n")
    return digest


def write_json(path: str | Path, payload: dict, config: dict) -> str:
    digest = config_hash(config)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"config_hash": digest, "config": config, **payload}
    with open(path, "w") as fh:
        json.dump(body, fh, indent=2, default=format_float)
        fh.write("\n")
    return digest


def hash_csv_body(path: str | Path) -> str:
    """Hash of a CSV file ignoring comment lines; the reproducibility check."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for line in fh:
            if not line.startswith(b"#"):
                h.update(line)
    return h.hexdigest()
