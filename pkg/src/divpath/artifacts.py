"""Deterministic artifact files and the content-hash manifest."""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import IntegrityError

MANIFEST = "manifest.json"
FLOAT_FORMAT = "%.12g"


def write_csv(df: pd.DataFrame, path) -> Path:
    path = Path(path)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_csv(path, **kw) -> pd.DataFrame:
    """Read an artifact CSV keeping country and product codes as strings."""
    dtype = {"country": str, "product": str, "p": str, "p2": str}
    dtype.update(kw.pop("dtype", {}))
    return pd.read_csv(path, dtype=dtype, keep_default_na=False, na_values=[""], **kw)


def clean_json(obj):
    """Plain JSON types, floats rounded to 12 significant digits, non-finite as null."""
    if isinstance(obj, dict):
        return {str(k): clean_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean_json(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(f"{x:.12g}") if math.isfinite(x) else None
    if obj is None or isinstance(obj, str):
        return obj
    if obj is pd.NA:
        return None
    return str(obj)


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(clean_json(obj), sort_keys=True, indent=2) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def read_manifest(out_dir) -> dict:
    path = Path(out_dir) / MANIFEST
    if not path.is_file():
        raise IntegrityError(f"no {MANIFEST} in {out_dir}")
    return read_json(path)


def update_manifest(out_dir, stage: str, files, config: dict, inputs: dict | None = None) -> dict:
    """Record the hashes of ``files`` (names inside ``out_dir``) under ``stage``.

    A manifest written for a different configuration is discarded first, so
    every recorded hash belongs to the current settings.
    """
    out_dir = Path(out_dir)
    path = out_dir / MANIFEST
    manifest = read_json(path) if path.is_file() else {}
    if manifest.get("config") != clean_json(config):
        manifest = {}
    manifest["config"] = config
    manifest.setdefault("stages", {})
    manifest.setdefault("inputs", {})
    if inputs is not None:
        manifest["inputs"] = inputs
    manifest["stages"][stage] = {name: sha256_file(out_dir / name) for name in sorted(files)}
    write_json(manifest, path)
    return manifest


def verify_manifest(out_dir) -> dict:
    """Check every recorded hash; raises :class:`IntegrityError` on a mismatch.

    Returns the manifest. Missing files also count as corruption.
    """
    out_dir = Path(out_dir)
    manifest = read_manifest(out_dir)
    if "stages" not in manifest or "config" not in manifest:
        raise IntegrityError("incomplete manifest: missing 'stages' or 'config'")
    bad = []
    for stage, files in sorted(manifest["stages"].items()):
        for name, digest in sorted(files.items()):
            p = out_dir / name
            if not p.is_file():
                bad.append(f"{stage}/{name}: missing")
            elif sha256_file(p) != digest:
                bad.append(f"{stage}/{name}: hash mismatch")
    if bad:
        raise IntegrityError("artifact integrity check failed: " + "; ".join(bad))
    return manifest
