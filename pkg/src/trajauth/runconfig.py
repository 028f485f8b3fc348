"""Run configuration: a YAML file with nested sections, overridable from flags.

Example::

    corpus: data/corpus.npz        # or a manifest, or leave out and use synthetic
    synthetic: {users: 4, seed: 0}
    grid: small                    # small | full | [[40, 30], [90, 60]]
    variants: [WESHKA, li]
    seed: 0
    workers: 2
    preset: desk
    train: {epochs: 30, batch_size: 32, lr: 1.0e-4, lambda: 0.5, stride: 4}
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .config import GRIDS, PRESETS, T_DEVICE, expand_variant
from .errors import ConfigError

_TOP = {"corpus", "synthetic", "grid", "variants", "seed", "workers", "preset", "train", "users"}
_TRAIN = {"epochs", "batch_size", "lr", "lambda", "stride"}
_SYNTH = {"users", "seed"}


@dataclass
class TrainOverrides:
    epochs: int | None = None
    batch_size: int | None = None
    lr: float | None = None
    lam: float = 0.5
    stride: int | None = None


@dataclass
class RunConfig:
    corpus: str | None = None
    synthetic_users: int | None = None
    synthetic_seed: int = 0
    grid: tuple[tuple[int, int], ...] = GRIDS["small"]
    variants: tuple[str, ...] = ("3Dfrom2D_WESHKA",)
    seed: int = 0
    workers: int | None = None
    preset: str = "desk"
    users: tuple[str, ...] | None = None
    train: TrainOverrides = field(default_factory=TrainOverrides)

    def digest(self) -> str:
        """Hash of everything that can change results (worker count cannot)."""
        d = asdict(self)
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_yaml(self) -> str:
        # worker count is left out so reruns on other machines compare byte-equal
        doc = {
            "corpus": self.corpus,
            "synthetic": None if self.synthetic_users is None else {"users": self.synthetic_users, "seed": self.synthetic_seed},
            "grid": [list(g) for g in self.grid],
            "variants": list(self.variants),
            "seed": self.seed,
            "preset": self.preset,
            "users": None if self.users is None else list(self.users),
            "train": {
                "epochs": self.train.epochs, "batch_size": self.train.batch_size, "lr": self.train.lr,
                "lambda": self.train.lam, "stride": self.train.stride,
            },
        }
        return yaml.safe_dump(doc, sort_keys=False)


def _int(v, path, minimum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}: expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {v}")
    return v


def _float(v, path, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{path}: must be > 0, got {v}")
    if not positive and v < 0:
        raise ConfigError(f"{path}: must be >= 0, got {v}")
    return float(v)


def _unknown(d: dict, allowed: set, path: str):
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"{path}.{extra[0]}: unknown field")


def parse_grid(v, path="config.grid") -> tuple[tuple[int, int], ...]:
    if isinstance(v, str):
        if v not in GRIDS:
            raise ConfigError(f"{path}: expected one of {sorted(GRIDS)} or a list of [w, w_in], got {v!r}")
        return GRIDS[v]
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{path}: expected a grid name or a non-empty list of [w, w_in]")
    out = []
    for i, item in enumerate(v):
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ConfigError(f"{path}[{i}]: expected [w, w_in], got {item!r}")
        w, w_in = _int(item[0], f"{path}[{i}][0]", 2), _int(item[1], f"{path}[{i}][1]", 1)
        if w_in >= w:
            raise ConfigError(f"{path}[{i}]: w_in ({w_in}) must be smaller than w ({w})")
        if w > T_DEVICE:
            raise ConfigError(f"{path}[{i}]: w ({w}) exceeds the trial length {T_DEVICE}")
        out.append((w, w_in))
    return tuple(out)


def from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config: expected a mapping at top level")
    _unknown(doc, _TOP, "config")
    cfg = RunConfig()
    if doc.get("corpus") is not None:
        if not isinstance(doc["corpus"], str):
            raise ConfigError(f"config.corpus: expected a path string, got {doc['corpus']!r}")
        cfg.corpus = doc["corpus"]
    syn = doc.get("synthetic")
    if syn is not None:
        if not isinstance(syn, dict):
            raise ConfigError("config.synthetic: expected a mapping with users and seed")
        _unknown(syn, _SYNTH, "config.synthetic")
        cfg.synthetic_users = _int(syn.get("users"), "config.synthetic.users", 2)
        cfg.synthetic_seed = _int(syn.get("seed", 0), "config.synthetic.seed", 0)
    if "grid" in doc:
        cfg.grid = parse_grid(doc["grid"])
    if "variants" in doc:
        vs = doc["variants"]
        if not isinstance(vs, list) or not vs:
            raise ConfigError("config.variants: expected a non-empty list")
        names = []
        for i, v in enumerate(vs):
            try:
                names.append(expand_variant(str(v)))
            except ConfigError as exc:
                raise ConfigError(f"config.variants[{i}]: {exc}") from None
        cfg.variants = tuple(names)
    if "seed" in doc:
        cfg.seed = _int(doc["seed"], "config.seed", 0)
    if doc.get("workers") is not None:
        cfg.workers = _int(doc["workers"], "config.workers", 1)
    if "preset" in doc:
        if doc["preset"] not in PRESETS:
            raise ConfigError(f"config.preset: expected one of {sorted(PRESETS)}, got {doc['preset']!r}")
        cfg.preset = doc["preset"]
    if doc.get("users") is not None:
        if not isinstance(doc["users"], list):
            raise ConfigError("config.users: expected a list of user ids")
        cfg.users = tuple(str(u) for u in doc["users"])
    tr = doc.get("train")
    if tr is not None:
        if not isinstance(tr, dict):
            raise ConfigError("config.train: expected a mapping")
        _unknown(tr, _TRAIN, "config.train")
        t = cfg.train
        if tr.get("epochs") is not None:
            t.epochs = _int(tr["epochs"], "config.train.epochs", 1)
        if tr.get("batch_size") is not None:
            t.batch_size = _int(tr["batch_size"], "config.train.batch_size", 1)
        if tr.get("lr") is not None:
            t.lr = _float(tr["lr"], "config.train.lr", positive=True)
        if tr.get("lambda") is not None:
            t.lam = _float(tr["lambda"], "config.train.lambda")
        if tr.get("stride") is not None:
            t.stride = _int(tr["stride"], "config.train.stride", 1)
    return cfg


def load_run_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from None
    return from_dict(doc or {})
