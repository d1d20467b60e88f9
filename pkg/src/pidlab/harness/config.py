"""Flat ``key = value`` experiment configs.

Recognised keys (all optional except ``experiment``)::

    experiment   registered experiment name (see ``pidlab list``)
    seed         unsigned integer, default 0
    n_tokens     tokens per instance, default 8
    dim          value dimension, default 4
    depth        layers for stacked-network experiments, default 12
    trials       independent trials, default 10
    lambda_p     proportional gain, default 0.8
    lambda_i     integral gain, default 0.5
    lambda_d     derivative gain, default 0.05
    beta         reference scale in (0, 1], default 0.1
    t_end        integration horizon, default 200
    dt           integrator step, default 1e-3
    output_dir   where results.csv / summary.txt go, default ./results

Lines starting with ``#`` or ``;`` are comments.  Unknown keys are an error.
"""

import configparser
from dataclasses import dataclass, fields, replace
from pathlib import Path

from ..dynamics import PIDGains
from ..errors import InvalidInputError

_SECTION = "experiment-config"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int = 0
    n_tokens: int = 8
    dim: int = 4
    depth: int = 12
    trials: int = 10
    lambda_p: float = 0.8
    lambda_i: float = 0.5
    lambda_d: float = 0.05
    beta: float = 0.1
    t_end: float = 200.0
    dt: float = 1e-3
    output_dir: Path = Path("results")

    def __post_init__(self):
        from .experiments import REGISTRY

        if self.experiment not in REGISTRY:
            raise InvalidInputError(
                f"unknown experiment {self.experiment!r}; registered: {', '.join(REGISTRY)}"
            )
        if self.seed < 0:
            raise InvalidInputError("seed must be unsigned")
        for name in ("n_tokens", "dim", "depth", "trials"):
            if getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must be >= 1")
        if not self.dt > 0 or not self.t_end >= self.dt:
            raise InvalidInputError("need dt > 0 and t_end >= dt")
        self.gains  # validates gain ranges

    @property
    def gains(self):
        return PIDGains(self.lambda_p, self.lambda_i, self.lambda_d, self.beta)

    def with_overrides(self, seed=None, output_dir=None):
        changes = {}
        if seed is not None:
            changes["seed"] = seed
        if output_dir is not None:
            changes["output_dir"] = Path(output_dir)
        return replace(self, **changes)


_CASTS = {int: int, float: float, str: str, Path: Path}


def parse_config(text):
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    try:
        parser.read_string(f"[{_SECTION}]\n{text}")
    except configparser.Error as exc:
        raise InvalidInputError(f"malformed config: {exc}") from exc
    raw = dict(parser[_SECTION])
    known = {f.name: f.type for f in fields(ExperimentConfig)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise InvalidInputError(f"unknown config keys: {', '.join(unknown)}")
    if "experiment" not in raw:
        raise InvalidInputError("config must name an experiment")
    values = {}
    for key, value in raw.items():
        cast = _CASTS[known[key]]
        try:
            values[key] = cast(value.strip())
        except ValueError as exc:
            raise InvalidInputError(f"bad value for {key}: {value!r}") from exc
    return ExperimentConfig(**values)


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
