"""CSV/JSON writers and run manifests."""
from __future__ import annotations

import csv
import hashlib
import json
import os
import time

from .. import __version__
from .config import canonical_json

TOOL = "bandlab"


def fmt(v):
    """17 significant digits for floats so values round-trip exactly."""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "%.17g" % v
    if hasattr(v, "dtype") and v.dtype.kind == "f":
        return "%.17g" % float(v)
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def write_manifest(out_dir, command, cfg, seeds, files, seconds):
    """Manifest with hashes of the config and every output file.

    ``manifest_hash`` covers everything except timing, so identical inputs
    give identical hashes.
    """
    body = {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "config_hash": cfg.config_hash(),
        "base_seed": cfg.run.baseSeed,
        "seeds": [int(s) for s in seeds],
        "files": [{"name": os.path.basename(f), "sha256": file_sha256(f)} for f in files],
    }
    body["manifest_hash"] = hashlib.sha256(canonical_json(body).encode()).hexdigest()
    body["timing"] = {"seconds": seconds}
    path = os.path.join(out_dir, f"{command}.manifest.json")
    write_json(path, body)
    return path
