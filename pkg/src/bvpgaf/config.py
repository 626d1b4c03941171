"""Run configuration read from a TOML file and overridden by CLI flags."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ParameterError
from .windowing import WindowSpec

RAW_SWEEP = ((512, 128), (512, 200), (256, 128))
GAF_SWEEP = ((200, 50), (150, 30), (512, 128))

DEFAULTS: dict = {
    "seed": 0,
    "out": "bvpgaf-out",
    "deterministic": False,
    "input": {
        "manifest": None,
        "synthetic": True,
        "duration_s": 120.0,
        "sample_rate_hz": 64.0,
        "baseline_wander": 0.0,
        "sessions_per_condition": 1,
    },
    "windowing": {"specs": [[512, 128]], "rescale_scope": "window"},
    "encoding": {"kind": "gadf", "paa_size": 64},
    "stationarity": {"alpha": 0.05, "adf_regression": "c", "adf_max_lag": None, "kpss_lags": None,
                     "baseline_wander": None},
    "anova": {"scores": None, "alpha": 0.05},
    "train": {
        "variants": ["raw1d", "gaf2d"],
        "epochs": 30,
        "batch_size": 32,
        "learning_rate": 0.001,
        "split": [0.70, 0.15, 0.15],
        "split_mode": "window",
        "standardize": True,
        "patience": None,
        "jobs": 1,
        "archives": None,
        "raw1d": {"specs": [list(s) for s in RAW_SWEEP]},
        "gaf2d": {"specs": [list(s) for s in GAF_SWEEP]},
    },
}


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise ParameterError(f"unknown config key {path}{k}")
        if isinstance(base[k], dict) and isinstance(v, dict):
            out[k] = _merge(base[k], v, f"{path}{k}.")
        else:
            out[k] = v
    return out


@dataclass
class RunConfig:
    """Resolved settings for one CLI invocation."""

    data: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))
    base_dir: Path = Path(".")

    def __getitem__(self, key):
        return self.data[key]

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def out(self) -> Path:
        return Path(self.data["out"])

    @property
    def deterministic(self) -> bool:
        return bool(self.data["deterministic"])

    def resolve(self, p: str | None) -> Path | None:
        if p is None:
            return None
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    def specs(self, variant: str | None = None) -> list[WindowSpec]:
        raw = None
        if variant is not None:
            raw = self.data["train"][variant]["specs"]
        if raw is None:
            raw = self.data["windowing"]["specs"]
        if not raw:
            raise ParameterError("window spec list is empty")
        return [WindowSpec(int(p), int(j)) for p, j in raw]

    def hash(self) -> str:
        """Stable digest of every setting that can change outputs."""
        d = copy.deepcopy(self.data)
        d.pop("out", None)
        d["train"].pop("jobs", None)  # parallelism never changes results
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def validate(self) -> None:
        manifest = self.data["input"]["manifest"]
        if manifest is not None and not self.resolve(manifest).exists():
            raise ParameterError(f"manifest {manifest} does not exist")
        scores = self.data["anova"]["scores"]
        if scores not in (None, "demo") and not self.resolve(scores).exists():
            raise ParameterError(f"score table {scores} does not exist")
        for v in self.data["train"]["variants"]:
            if v not in ("raw1d", "gaf2d"):
                raise ParameterError(f"unknown model variant {v!r}")


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    data = copy.deepcopy(DEFAULTS)
    base = Path(".")
    if path is not None:
        path = Path(path)
        with open(path, "rb") as fh:
            data = _merge(data, tomllib.load(fh))
        base = path.parent
    if overrides:
        data = _merge(data, overrides)
    cfg = RunConfig(data, base)
    cfg.validate()
    return cfg
