"""Experiment configuration: one JSON document, validated with field paths."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field

from ..errors import ConfigurationError
from ..torus import DistributionSpec, ProfileSpec

U64 = 2**64

# fields that change how a run executes but never what it computes
EXECUTION_ONLY = (("run", "threads"), ("outputs", "directory"))


@dataclass(frozen=True)
class ModelBlock:
    d: int
    L: int
    W: int
    profile: ProfileSpec = field(default_factory=ProfileSpec)
    dist: DistributionSpec = field(default_factory=DistributionSpec)


@dataclass(frozen=True)
class SpectralBlock:
    E: tuple
    eta: tuple
    kappa: float = 0.05
    gamma: float = 0.1


@dataclass(frozen=True)
class RunBlock:
    samples: int
    baseSeed: int
    threads: int = 1


@dataclass(frozen=True)
class OutputBlock:
    directory: str = "out"
    formats: tuple = ("csv", "json")


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelBlock
    spectral: SpectralBlock
    run: RunBlock
    outputs: OutputBlock
    extras: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def block(self, name):
        return self.extras.get(name, {})

    def config_hash(self):
        return config_hash(self.raw)


def _get(doc, path):
    cur = doc
    for key in path.split("."):
        if not isinstance(cur, dict) or key not in cur:
            raise ConfigurationError(path, "missing required field")
        cur = cur[key]
    return cur


def _opt(doc, path, default):
    try:
        return _get(doc, path)
    except ConfigurationError:
        return default


def _int(doc, path, lo=None, hi=None, default=None):
    v = _get(doc, path) if default is None else _opt(doc, path, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigurationError(path, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigurationError(path, f"must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigurationError(path, f"must be <= {hi}, got {v}")
    return v


def _float_list(doc, path, positive=False):
    v = _get(doc, path)
    if not isinstance(v, list):
        v = [v]
    if not v:
        raise ConfigurationError(path, "list must be non-empty")
    out = []
    for k, x in enumerate(v):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ConfigurationError(f"{path}[{k}]", f"expected a number, got {x!r}")
        if positive and not x > 0:
            raise ConfigurationError(f"{path}[{k}]", f"must be positive, got {x}")
        out.append(float(x))
    return tuple(out)


def parse_config(doc):
    """Validate a configuration document and build an ``ExperimentConfig``."""
    if not isinstance(doc, dict):
        raise ConfigurationError("<root>", "configuration must be a JSON object")
    d = _int(doc, "model.d", 1, 3)
    L = _int(doc, "model.L", 1)
    W = _int(doc, "model.W", 1)
    if W > L:
        raise ConfigurationError("model.W", f"W = {W} exceeds L = {L}")
    try:
        pd = _opt(doc, "model.profile", {})
        profile = ProfileSpec.from_dict(pd) if pd else ProfileSpec()
    except (ValueError, TypeError, KeyError, AttributeError) as exc:
        raise ConfigurationError("model.profile", str(exc)) from exc
    try:
        dd = _opt(doc, "model.dist", {})
        dist = DistributionSpec.from_dict(dd) if dd else DistributionSpec()
    except (ValueError, TypeError, KeyError, AttributeError) as exc:
        raise ConfigurationError("model.dist", str(exc)) from exc
    spectral = SpectralBlock(
        E=_float_list(doc, "spectral.E"),
        eta=_float_list(doc, "spectral.eta", positive=True),
        kappa=float(_opt(doc, "spectral.kappa", 0.05)),
        gamma=float(_opt(doc, "spectral.gamma", 0.1)),
    )
    if not 0 < spectral.kappa < 2:
        raise ConfigurationError("spectral.kappa", "must lie in (0, 2)")
    run = RunBlock(
        samples=_int(doc, "run.samples", 1),
        baseSeed=_int(doc, "run.baseSeed", 0, U64 - 1),
        threads=_int(doc, "run.threads", 1, 256, default=1),
    )
    outputs = OutputBlock(
        directory=str(_opt(doc, "outputs.directory", "out")),
        formats=tuple(_opt(doc, "outputs.formats", ["csv", "json"])),
    )
    extras = {k: v for k, v in doc.items() if k not in ("model", "spectral", "run", "outputs")}
    for k, v in extras.items():
        if not isinstance(v, dict):
            raise ConfigurationError(k, "block must be a JSON object")
    return ExperimentConfig(
        model=ModelBlock(d=d, L=L, W=W, profile=profile, dist=dist),
        spectral=spectral, run=run, outputs=outputs, extras=extras, raw=copy.deepcopy(doc),
    )


def load_config(path, overrides=(), seed=None, threads=None):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError("<root>", f"invalid JSON: {exc}") from exc
    for item in overrides:
        apply_override(doc, item)
    if seed is not None:
        doc.setdefault("run", {})["baseSeed"] = int(seed)
    if threads is not None:
        doc.setdefault("run", {})["threads"] = int(threads)
    return parse_config(doc)


def apply_override(doc, item):
    """Apply ``dotted.key=value``; the value is parsed as JSON when possible."""
    if "=" not in item:
        raise ConfigurationError(item, "override must look like key=value")
    key, text = item.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    parts = key.strip().split(".")
    cur = doc
    for p in parts[:-1]:
        nxt = cur.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigurationError(key, f"{p} is not a block")
        cur = nxt
    cur[parts[-1]] = value
    return doc


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(doc):
    doc = copy.deepcopy(doc)
    for block, key in EXECUTION_ONLY:
        doc.get(block, {}).pop(key, None)
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def to_dict(cfg):
    out = {
        "model": {
            "d": cfg.model.d, "L": cfg.model.L, "W": cfg.model.W,
            "profile": cfg.model.profile.to_dict(), "dist": cfg.model.dist.to_dict(),
        },
        "spectral": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg.spectral).items()},
        "run": asdict(cfg.run),
        "outputs": {"directory": cfg.outputs.directory, "formats": list(cfg.outputs.formats)},
    }
    out.update(copy.deepcopy(cfg.extras))
    return out
