"""Experiment configuration: one TOML file per experiment.

Example::

    [experiment]
    name = "circle-psgd"
    problem = "circle"
    algorithm = "psgd"          # psgd | kw | sfw | mab
    iters = 10000
    replications = 20
    master_seed = 20240501

    [schedule]
    kind = "power"              # power | staged | halving | theorem5b
    a = 1.0
    u = 1.0
    gamma = 1.0

    [algorithm_params]
    batch = 10

    [problem_params]
    sigma = 1.0

    [fit]
    t_min = 100
    quantity = "gap"
"""

from __future__ import annotations

import os
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..algorithms import KwConfig, MabConfig, PsgdConfig, SfwConfig
from ..core import PowerLaw, Staged, staged_schedule_b
from ..problems import BENCHMARKS

OUT_ENV = "SHARPSA_OUT"
ALGORITHMS = ("psgd", "kw", "sfw", "mab")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    problem: str
    algorithm: str = "psgd"
    iters: int = 1000
    replications: int = 1
    master_seed: int = 0
    name: Optional[str] = None
    problem_params: dict = field(default_factory=dict)
    algorithm_params: dict = field(default_factory=dict)
    schedule: dict = field(default_factory=lambda: {"kind": "power", "a": 1.0, "u": 1.0, "gamma": 1.0})
    output_dir: Optional[str] = None
    threads: int = 1
    thin: bool = False
    write_trajectories: bool = True
    fit_t_min: float = 100.0
    fit_quantity: str = "gap"
    max_failure_rate: float = 0.05

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.problem not in BENCHMARKS:
            raise ConfigError(f"unknown problem {self.problem!r}; known: {', '.join(sorted(BENCHMARKS))}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if int(self.iters) < 1:
            raise ConfigError("iters must be at least 1")
        if int(self.replications) < 1:
            raise ConfigError("replications must be at least 1")
        if int(self.threads) < 1:
            raise ConfigError("threads must be at least 1")
        if self.fit_quantity not in ("gap", "dist"):
            raise ConfigError("fit quantity must be 'gap' or 'dist'")
        self.iters = int(self.iters)
        self.replications = int(self.replications)
        self.threads = int(self.threads)
        try:
            self.build_algorithm()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid algorithm or schedule settings: {exc}") from exc

    @property
    def label(self) -> str:
        return self.name or f"{self.problem}-{self.algorithm}"

    def resolved_output_dir(self) -> Path:
        if self.output_dir:
            return Path(self.output_dir)
        return Path(os.environ.get(OUT_ENV, "runs")) / self.label

    def build_schedule(self):
        return build_schedule(self.schedule)

    def build_algorithm(self):
        schedule = self.build_schedule()
        p = dict(self.algorithm_params)
        if self.algorithm == "psgd":
            return PsgdConfig(schedule, batch=int(p.pop("batch", 1)), **p)
        if self.algorithm == "kw":
            return KwConfig(schedule, **p)
        if self.algorithm == "sfw":
            if "batch" in p:
                p["batch_rule"] = int(p.pop("batch"))
            return SfwConfig(schedule, **p)
        return MabConfig(schedule, **p)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)


def build_schedule(spec: dict):
    spec = dict(spec)
    kind = spec.pop("kind", "power")
    try:
        if kind == "power":
            return PowerLaw(float(spec.get("a", 1.0)), float(spec.get("u", 1.0)), float(spec.get("gamma", 1.0)))
        if kind == "staged":
            return Staged(tuple(spec["rates"]), tuple(spec["lengths"]))
        if kind == "halving":
            # alpha0 divided by ``factor`` every ``every`` steps, for ``stages`` stages
            alpha0 = float(spec["alpha0"])
            factor = float(spec.get("factor", 2.0))
            stages = int(spec["stages"])
            every = int(spec["every"])
            return Staged(tuple(alpha0 / factor**s for s in range(stages)), (every,) * stages)
        if kind == "theorem5b":
            return staged_schedule_b(float(spec["a"]), int(spec["stages"]))
    except KeyError as exc:
        raise ConfigError(f"schedule kind {kind!r} needs key {exc.args[0]!r}") from None
    raise ConfigError(f"unknown schedule kind {kind!r}")


_SECTION_KEYS = {
    "experiment": {
        "name", "problem", "algorithm", "iters", "replications", "master_seed",
        "output_dir", "threads", "thin", "write_trajectories", "max_failure_rate",
    },
}


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(raw, source=str(path))


def config_from_dict(raw: dict, source: str = "<dict>") -> ExperimentConfig:
    unknown = set(raw) - {"experiment", "schedule", "algorithm_params", "problem_params", "fit"}
    if unknown:
        raise ConfigError(f"{source}: unknown sections {sorted(unknown)}")
    exp = dict(raw.get("experiment", {}))
    bad = set(exp) - _SECTION_KEYS["experiment"]
    if bad:
        raise ConfigError(f"{source}: unknown [experiment] keys {sorted(bad)}")
    if "problem" not in exp:
        raise ConfigError(f"{source}: [experiment] needs a problem")
    fit = dict(raw.get("fit", {}))
    bad = set(fit) - {"t_min", "quantity"}
    if bad:
        raise ConfigError(f"{source}: unknown [fit] keys {sorted(bad)}")
    kwargs = dict(exp)
    if "schedule" in raw:
        kwargs["schedule"] = dict(raw["schedule"])
    kwargs["algorithm_params"] = dict(raw.get("algorithm_params", {}))
    kwargs["problem_params"] = dict(raw.get("problem_params", {}))
    if "t_min" in fit:
        kwargs["fit_t_min"] = float(fit["t_min"])
    if "quantity" in fit:
        kwargs["fit_quantity"] = fit["quantity"]
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
