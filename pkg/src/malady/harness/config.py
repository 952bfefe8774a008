"""
Experiment configuration
========================

An :class:`ExperimentConfig` mirrors the JSON accepted by ``malady run``::

    {
      "dataset": {"synthetic": {"clusters": 6, "points_per_cluster": 400,
                                "std": 0.25, "seed": 0}},
      "kernel": {"kind": "gaussian", "k_neighbors": 20},
      "bounds": {"mode": "exact"},
      "concave": {"kind": "none"},
      "schedule": {"epsilon0": 1e-7, "epsilon_min": 1e-6, "alpha": 4.0},
      "steps": 100,
      "budget": {"initial_per_class": 3, "total": 106},
      "acquisition": "malady",
      "seeds": [0, 1, 2],
      "output": "results"
    }

A file dataset is ``{"path": ..., "format": "csv", "label_column": "last"}``.
Unknown keys anywhere raise :class:`ConfigError`.  True class sizes for
``exact`` and ``flexible`` bounds come from the dataset labels.
"""
import copy
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..active import ALBudget
from ..auction import AuctionSchedule
from ..dynamics import ClassBoundsSpec, ConcaveTermSpec
from ..errors import ConfigError, MaladyError
from ..graph import KernelSpec
from .datasets import SyntheticBlobsSpec

ACQUISITIONS = ("malady", "random")


@dataclass(frozen=True)
class SyntheticDataset:
    blobs: SyntheticBlobsSpec = SyntheticBlobsSpec()
    seed: int = 0


@dataclass(frozen=True)
class FileDataset:
    path: str
    format: str = "csv"
    label_column: object = "last"


def _build(cls, data, where, **override):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(cls) if f.init}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    kwargs = {**data, **override}
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (MaladyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _dataset_from_dict(data):
    if not isinstance(data, dict):
        raise ConfigError("dataset: expected an object")
    if "synthetic" in data:
        if set(data) != {"synthetic"}:
            raise ConfigError("dataset: 'synthetic' excludes other keys")
        syn = dict(data["synthetic"]) if isinstance(data["synthetic"], dict) else None
        if syn is None:
            raise ConfigError("dataset.synthetic: expected an object")
        seed = syn.pop("seed", 0)
        return SyntheticDataset(_build(SyntheticBlobsSpec, syn, "dataset.synthetic"), int(seed))
    ds = _build(FileDataset, data, "dataset")
    if ds.format not in ("csv", "binary"):
        raise ConfigError(f"dataset.format: unknown format {ds.format!r}")
    if ds.format == "binary":
        raise ConfigError("dataset: binary files carry no labels; experiments need labels")
    lc = ds.label_column
    if lc != "last" and not (isinstance(lc, int) and not isinstance(lc, bool)):
        raise ConfigError("dataset.label_column must be 'last' or an integer")
    return ds


def _dataset_to_dict(ds):
    if isinstance(ds, SyntheticDataset):
        return {"synthetic": {**dataclasses.asdict(ds.blobs), "seed": ds.seed}}
    return dataclasses.asdict(ds)


@dataclass(frozen=True)
class BoundsConfig:
    """Bounds mode and slack; true sizes are filled in from the labels."""

    mode: str = "exact"
    slack: float = 0.0

    def __post_init__(self):
        if self.mode not in ("exact", "flexible", "none"):
            raise ConfigError(f"unknown bounds mode {self.mode!r}")
        if not 0 <= self.slack <= 1:
            raise ConfigError("slack must lie in [0, 1]")

    def resolve(self, labels):
        sizes = None if self.mode == "none" else np.bincount(labels)
        return ClassBoundsSpec(self.mode, sizes, self.slack)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment's results."""

    dataset: object
    kernel: KernelSpec = KernelSpec("gaussian", 20)
    bounds: BoundsConfig = None
    concave: ConcaveTermSpec = field(default_factory=ConcaveTermSpec)
    schedule: AuctionSchedule = AuctionSchedule()
    steps: int = 100
    budget: ALBudget = ALBudget(3, 106)
    acquisition: str = "malady"
    seeds: tuple = (0,)
    output: str = "results"

    def __post_init__(self):
        if self.acquisition not in ACQUISITIONS:
            raise ConfigError(f"acquisition must be one of {ACQUISITIONS}")
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds:
            raise ConfigError("seeds must be nonempty")
        if len(set(seeds)) != len(seeds):
            raise ConfigError("seeds must be distinct")
        object.__setattr__(self, "seeds", seeds)
        if not isinstance(self.steps, int) or self.steps < 0:
            raise ConfigError("steps must be a nonnegative integer")
        if self.bounds is None:
            object.__setattr__(self, "bounds", BoundsConfig())

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        if "dataset" not in data:
            raise ConfigError("config needs a dataset")
        kw = {"dataset": _dataset_from_dict(data["dataset"])}
        if "kernel" in data:
            kw["kernel"] = _build(KernelSpec, data["kernel"], "kernel")
        if "bounds" in data:
            b = data["bounds"]
            if isinstance(b, dict) and "sizes" in b:
                raise ConfigError("bounds: sizes are taken from the dataset labels")
            kw["bounds"] = _build(BoundsConfig, b, "bounds")
        if "concave" in data:
            c = data["concave"]
            if isinstance(c, dict) and c.get("R") is not None:
                c = {**c, "R": np.asarray(c["R"], dtype=np.float64)}
            kw["concave"] = _build(ConcaveTermSpec, c, "concave")
        if "schedule" in data:
            kw["schedule"] = _build(AuctionSchedule, data["schedule"], "schedule")
        if "budget" in data:
            kw["budget"] = _build(ALBudget, data["budget"], "budget")
        for key in ("steps", "acquisition", "seeds", "output"):
            if key in data:
                kw[key] = data[key]
        if "seeds" in kw and not isinstance(kw["seeds"], list):
            raise ConfigError("seeds must be a list of integers")
        return cls(**kw)

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self):
        R = self.concave.R
        return {
            "dataset": _dataset_to_dict(self.dataset),
            "kernel": dataclasses.asdict(self.kernel),
            "bounds": {"mode": self.bounds.mode, "slack": self.bounds.slack},
            "concave": {"kind": self.concave.kind, "gamma": self.concave.gamma,
                        "R": None if R is None else np.asarray(R).tolist()},
            "schedule": dataclasses.asdict(self.schedule),
            "steps": self.steps,
            "budget": dataclasses.asdict(self.budget),
            "acquisition": self.acquisition,
            "seeds": list(self.seeds),
            "output": self.output,
        }

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def config_hash(config):
    """12 hex digits of SHA-256 over the canonical config, output path excluded."""
    data = copy.deepcopy(config.to_dict())
    data.pop("output")
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]
