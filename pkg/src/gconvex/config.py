"""INI-style experiment configuration.

Every key has a default, so an empty file is a valid config.  Values given
on the command line (``--set section.key=value`` and the named flags)
override the file.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .manifold import MetricField, make_metric

DEFAULTS = {
    "metric": {"kind": "conformal-test", "dim": "2", "coefficient": "1.0", "radius": "inf"},
    "solver": {"bvp_tolerance": "1e-10", "ode_steps": "100", "fd_step": "1e-5"},
    "simplex": {"points": ""},
    "geodesic": {"p": "", "q": ""},
    "barycenter": {"t": "", "h": "1.0"},
    "hull": {"h": "0.25", "resolution": "4"},
    "lemma": {"h": "0.25", "eta": "0.2", "grid_angular": "16", "grid_radial": "8",
              "bisect": "false", "bisect_iterations": "8"},
    "jacobian": {"n_simplexes": "20", "dims": "1,2,3", "tolerance": "1e-6"},
    "convexity": {"function": "sqnorm", "n_pairs": "500", "n_t": "20", "radius": "0.5",
                  "tolerance": "1e-9"},
    "bound": {"function": "sqnorm"},
    "lipschitz": {"function": "sqnorm", "center": "", "radius": "0.3", "n_pairs": "500"},
    "star": {"demo": "witness", "kind": "f", "tag": "d1", "p_max": "10", "point": "0 1",
             "a": "1/2 1", "b": "1/2 2", "t": "1/4", "sequence": "0,1,1,0", "horizon": "10000"},
    "run": {"seed": ""},
}

DEFAULT_SIMPLICES = {
    1: [[1.0], [-1.0]],
    2: [[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
    3: [[1.0, 1.0, 1.0], [-1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, -1.0]],
}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def _vector(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.replace(",", " ").split()])


def _points(text: str) -> np.ndarray:
    return np.array([_vector(row) for row in text.split(";") if row.strip()])


@dataclass
class ExperimentConfig:
    parser: configparser.ConfigParser
    metric: MetricField
    bvp_tolerance: float
    ode_steps: int
    fd_step: float
    seed: int | None

    @property
    def dim(self) -> int:
        return self.metric.dim

    def get(self, section, key) -> str:
        return self.parser.get(section, key)

    def getfloat(self, section, key) -> float:
        try:
            return float(self.parser.get(section, key))
        except ValueError as exc:
            raise ConfigError(f"{section}.{key} must be a number") from exc

    def getint(self, section, key) -> int:
        try:
            return int(self.parser.get(section, key))
        except ValueError as exc:
            raise ConfigError(f"{section}.{key} must be an integer") from exc

    def getbool(self, section, key) -> bool:
        try:
            return self.parser.getboolean(section, key)
        except ValueError as exc:
            raise ConfigError(f"{section}.{key} must be a boolean") from exc

    def vector(self, section, key, default=None) -> np.ndarray:
        text = self.get(section, key).strip()
        if not text:
            if default is None:
                raise ConfigError(f"{section}.{key} is required")
            return np.asarray(default, dtype=float)
        try:
            v = _vector(text)
        except ValueError as exc:
            raise ConfigError(f"{section}.{key} is not a vector: {text!r}") from exc
        if v.shape != (self.dim,):
            raise ConfigError(f"{section}.{key} has dimension {len(v)}, metric has {self.dim}")
        return v

    def simplex_points(self) -> np.ndarray:
        text = self.get("simplex", "points").strip()
        if not text:
            if self.dim not in DEFAULT_SIMPLICES:
                raise ConfigError("simplex.points is required for this dimension")
            return np.array(DEFAULT_SIMPLICES[self.dim])
        try:
            pts = _points(text)
        except ValueError as exc:
            raise ConfigError(f"simplex.points is malformed: {text!r}") from exc
        if pts.shape != (self.dim + 1, self.dim):
            raise ConfigError(f"simplex needs {self.dim + 1} points of dimension {self.dim}")
        return pts

    def star_point(self, key):
        parts = self.get("star", key).split()
        try:
            return Fraction(parts[0]), int(parts[1])
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"star.{key} must read 'x branch'") from exc


def load_config(path=None, overrides=()) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    parser.read_dict(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override must read section.key=value, got {item!r}")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, name, value.strip())
    return _build(parser)


def _build(parser) -> ExperimentConfig:
    cfg = ExperimentConfig(parser, None, 0.0, 0, 0.0, None)
    dim = cfg.getint("metric", "dim")
    kind = cfg.get("metric", "kind")
    if dim < 1:
        raise ConfigError("metric.dim must be positive")
    radius = cfg.getfloat("metric", "radius")
    try:
        cfg.metric = make_metric(kind, dim, coefficient=cfg.getfloat("metric", "coefficient"),
                                 radius=radius)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.bvp_tolerance = cfg.getfloat("solver", "bvp_tolerance")
    cfg.ode_steps = cfg.getint("solver", "ode_steps")
    cfg.fd_step = cfg.getfloat("solver", "fd_step")
    if not (cfg.bvp_tolerance > 0 and cfg.fd_step > 0 and cfg.ode_steps > 0):
        raise ConfigError("solver tolerances and step counts must be positive")
    if not math.isfinite(cfg.bvp_tolerance):
        raise ConfigError("solver.bvp_tolerance must be finite")
    seed = parser.get("run", "seed").strip()
    if seed:
        try:
            cfg.seed = int(seed)
        except ValueError as exc:
            raise ConfigError("run.seed must be an integer") from exc
    return cfg
