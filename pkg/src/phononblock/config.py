"""Flat ``key = value`` run configuration files and the bundled presets.

A config file is a list of ``key = value`` lines; ``#`` starts a comment.
System parameters are in units of gamma, temperatures in units of T0,
and only the feasibility keys carry SI units.  List values are comma
separated.  A bundled preset can be named instead of a path
(``fig2`` ... ``fig7``, ``feasibility``).
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .fock import FockBasis
from .lindblad import SystemParams, thermal_occupancy

__all__ = [
    "Axis",
    "SweepSpec",
    "RunConfig",
    "load_config",
    "parse_config",
    "preset_names",
    "SWEEP_AXES",
    "SWEEP_OUTPUTS",
]

SWEEP_AXES = ("delta", "coupling_j", "kerr_u", "drive_f", "temperature")
SWEEP_OUTPUTS = ("g2_zero", "mean_phonon", "distribution", "residual")

_FLOAT_KEYS = {
    "delta", "coupling_j", "kerr_u", "drive_f", "gamma", "temperature", "n_th",
    "axis1_min", "axis1_max", "axis2_min", "axis2_max",
    "t_min", "t_max", "f_min", "f_max", "tau_max", "tau_step",
    "width_d", "length_l", "youngs_e", "density_rho",
    "gamma_si", "temperature_k", "coupling_si",
}
_INT_KEYS = {
    "n1_max", "n2_max", "mode", "branch",
    "axis1_points", "axis2_points", "t_points", "f_points",
}
_STR_KEYS = {
    "command", "axis1", "axis2", "axis1_spacing", "axis2_spacing",
    "t_spacing", "f_spacing",
}
_LIST_KEYS = {"temperatures", "outputs"}
_BOOL_KEYS = {"include_zero"}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | _LIST_KEYS | _BOOL_KEYS
_SECTION = "run"


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    n_points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.n_points < 2:
            raise ConfigError(f"axis {self.name!r} needs at least 2 points")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.spacing == "log" and not (self.start > 0 and self.stop > 0):
            raise ConfigError(f"log axis {self.name!r} needs positive endpoints")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError(f"axis {self.name!r} has non-finite endpoints")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.n_points)
        return np.linspace(self.start, self.stop, self.n_points)

    def cell(self) -> float:
        """Grid spacing (in log10 units for a log axis)."""
        if self.spacing == "log":
            return abs(math.log10(self.stop / self.start)) / (self.n_points - 1)
        return abs(self.stop - self.start) / (self.n_points - 1)


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    axis2: Axis
    fixed: SystemParams
    truncation: tuple[int, int] = (10, 10)
    outputs: tuple[str, ...] = ("g2_zero", "mean_phonon", "residual")

    def __post_init__(self):
        if self.axis1.name == self.axis2.name:
            raise ConfigError("the two sweep axes must differ")
        for ax in (self.axis1, self.axis2):
            if ax.name not in SWEEP_AXES:
                raise ConfigError(f"cannot sweep {ax.name!r}; choose from {SWEEP_AXES}")
        bad = set(self.outputs) - set(SWEEP_OUTPUTS)
        if bad:
            raise ConfigError(f"unknown outputs {sorted(bad)}")

    def points(self):
        """Grid points in axis-major order (axis1 slow, axis2 fast)."""
        for a in self.axis1.values():
            for b in self.axis2.values():
                yield float(a), float(b)


@dataclass(frozen=True)
class RunConfig:
    """Parsed config: the raw values plus typed accessors."""

    values: dict = field(default_factory=dict)
    source: str = "<string>"

    def __contains__(self, key):
        return key in self.values

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, key):
        if key not in self.values:
            raise ConfigError(f"missing required key {key!r} in {self.source}")
        return self.values[key]

    def check_command(self, command: str) -> None:
        declared = self.values.get("command")
        if declared is not None and declared != command:
            raise ConfigError(f"{self.source} is a {declared!r} config, not {command!r}")

    @property
    def basis(self) -> FockBasis:
        try:
            return FockBasis(self.get("n1_max", 10), self.get("n2_max", 10))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def mode(self) -> int:
        mode = self.get("mode", 1)
        if mode not in (1, 2):
            raise ConfigError("mode must be 1 or 2")
        return mode

    def n_th(self) -> float:
        if "n_th" in self.values and "temperature" in self.values:
            raise ConfigError("give either n_th or temperature, not both")
        if "n_th" in self.values:
            return self.values["n_th"]
        t = self.get("temperature", 0.0)
        if t < 0:
            raise ConfigError("temperature must be non-negative")
        return thermal_occupancy(t)

    def system_params(self, **overrides) -> SystemParams:
        kw = dict(
            delta=self.get("delta", 0.0),
            coupling_j=self.get("coupling_j", 0.0),
            kerr_u=self.get("kerr_u", 0.0),
            drive_f=self.get("drive_f", 0.0),
            gamma=self.get("gamma", 1.0),
            n_th=self.n_th(),
        )
        kw.update(overrides)
        try:
            return SystemParams(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{self.source}: {exc}") from None

    def axis(self, prefix: str, name: str | None = None) -> Axis:
        """Axis from ``<prefix>_min``, ``_max``, ``_points``, ``_spacing``."""
        return Axis(
            name or self.require(prefix),
            self.require(f"{prefix}_min"),
            self.require(f"{prefix}_max"),
            self.require(f"{prefix}_points"),
            self.get(f"{prefix}_spacing", "linear"),
        )

    def sweep_spec(self) -> SweepSpec:
        outputs = tuple(self.get("outputs", ("g2_zero", "mean_phonon", "residual")))
        return SweepSpec(
            self.axis("axis1"),
            self.axis("axis2"),
            self.system_params(),
            (self.basis.n1_max, self.basis.n2_max),
            outputs,
        )

    def temperatures(self) -> list[float]:
        temps = self.get("temperatures", [self.get("temperature", 0.0)])
        if any(t < 0 for t in temps):
            raise ConfigError("temperatures must be non-negative")
        return [float(t) for t in temps]


def _convert(key: str, raw: str):
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key in _LIST_KEYS:
            items = [s.strip() for s in raw.split(",") if s.strip()]
            return [float(s) for s in items] if key == "temperatures" else items
        if key in _BOOL_KEYS:
            low = raw.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            return low in ("true", "yes", "1")
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from None


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",),
        interpolation=None,
    )
    try:
        parser.read_string(f"[{_SECTION}]\n" + text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {source}: {exc}") from None
    values = {}
    for key, raw in parser.items(_SECTION):
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r} in {source}")
        values[key] = _convert(key, raw.strip())
    return RunConfig(values, source)


def preset_names() -> list[str]:
    folder = resources.files("phononblock") / "presets"
    return sorted(p.name[:-4] for p in folder.iterdir() if p.name.endswith(".cfg"))


def load_config(path_or_preset: str | Path) -> RunConfig:
    """Read a config file, falling back to a bundled preset of that name."""
    path = Path(path_or_preset)
    if path.is_file():
        return parse_config(path.read_text(), str(path))
    name = str(path_or_preset)
    if name in preset_names():
        text = (resources.files("phononblock") / "presets" / f"{name}.cfg").read_text()
        return parse_config(text, f"preset:{name}")
    raise ConfigError(f"no config file or preset named {name!r}")
