"""Experiment configuration: INI files with one flat section per concern.

Grids are written as ``linspace(start, stop, num)``, ``arange(start, stop,
step)`` or a comma-separated list. Drive lists use ``rabi:detuning`` pairs
separated by semicolons.
"""
from __future__ import annotations

import configparser
import re
from importlib import resources
from pathlib import Path

import numpy as np

from .dressing import LaserDrive
from .errors import ConfigError
from .pairpotential import ForsterTwoChannel, PerfectBlockade, VanDerWaals

__all__ = ["ExperimentConfig", "load_config", "parse_grid", "SCENARIOS"]

SCENARIOS = {
    "jcurve": "fig2c",
    "scan": "fig2b",
    "rabi": "fig3",
    "bell": "fig4",
    "lifetime": "lifetime",
    "recapture": "recapture",
}

# run-environment keys: they never change results, so they stay out of summaries
ENVIRONMENT_KEYS = {("run", "out"), ("run", "threads")}

_GRID_RE = re.compile(r"^\s*(linspace|arange)\s*\(([^)]*)\)\s*$")


def parse_grid(text: str, path: str) -> np.ndarray:
    text = text.strip()
    m = _GRID_RE.match(text)
    try:
        if m:
            args = [float(a) for a in m.group(2).split(",")]
            if m.group(1) == "linspace":
                if len(args) != 3:
                    raise ValueError("linspace takes (start, stop, num)")
                grid = np.linspace(args[0], args[1], int(args[2]))
            else:
                if len(args) != 3:
                    raise ValueError("arange takes (start, stop, step)")
                grid = np.arange(*args)
        elif text == "":
            grid = np.array([])
        else:
            grid = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        raise ConfigError(f"{path}: cannot parse grid {text!r} ({exc})") from None
    if grid.size == 0:
        raise ConfigError(f"{path}: grid is empty")
    return grid


class ExperimentConfig:
    """Typed accessors over a parsed INI file; errors carry ``section.key`` paths."""

    def __init__(self, parser: configparser.ConfigParser, source: str):
        self._p = parser
        self.source = source

    # raw access -----------------------------------------------------------
    def has(self, section, key):
        return self._p.has_option(section, key)

    def get(self, section, key, default=None):
        if not self._p.has_option(section, key):
            if default is None:
                raise ConfigError(f"{section}.{key}: missing required field")
            return default
        return self._p.get(section, key)

    def set(self, section, key, value):
        if not self._p.has_section(section):
            self._p.add_section(section)
        self._p.set(section, key, str(value))

    def float(self, section, key, default=None, minimum=None):
        raw = self.get(section, key, None if default is None else str(default))
        try:
            val = float(raw)
        except ValueError:
            raise ConfigError(f"{section}.{key}: expected a number, got {raw!r}") from None
        if minimum is not None and val < minimum:
            raise ConfigError(f"{section}.{key}: must be >= {minimum}, got {val}")
        return val

    def int(self, section, key, default=None, minimum=None):
        val = self.float(section, key, default, minimum)
        if val != int(val):
            raise ConfigError(f"{section}.{key}: expected an integer, got {val}")
        return int(val)

    def bool(self, section, key, default=False):
        raw = self.get(section, key, "true" if default else "false").strip().lower()
        if raw in ("1", "true", "yes", "on"):
            return True
        if raw in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{section}.{key}: expected a boolean, got {raw!r}")

    def grid(self, section, key):
        return parse_grid(self.get(section, key), f"{section}.{key}")

    # domain objects -------------------------------------------------------
    @property
    def seed(self) -> int:
        if not self.has("run", "seed"):
            raise ConfigError("run.seed: a seed is mandatory for stochastic runs")
        return self.int("run", "seed", minimum=0)

    @property
    def threads(self) -> int:
        return self.int("run", "threads", 1, minimum=1)

    @property
    def strict(self) -> bool:
        return self.bool("run", "strict", False)

    def drive(self, section="drive") -> LaserDrive:
        try:
            return LaserDrive(self.float(section, "rabi_freq"), self.float(section, "detuning"),
                              self.float(section, "wavelength", 319.0))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{section}: {exc}") from None

    def drive_list(self, section, key):
        raw = self.get(section, key)
        drives = []
        for item in raw.split(";"):
            if not item.strip():
                continue
            try:
                rabi, det = (float(v) for v in item.split(":"))
                drives.append(LaserDrive(rabi, det))
            except ValueError:
                raise ConfigError(f"{section}.{key}: bad drive {item.strip()!r}; "
                                  "expected rabi:detuning") from None
        if not drives:
            raise ConfigError(f"{section}.{key}: no drives given")
        return drives

    def pair_model(self):
        model = self.get("pair", "model", "vdw").strip().lower()
        try:
            if model in ("perfect", "perfect_blockade"):
                return PerfectBlockade()
            if model in ("vdw", "van_der_waals"):
                return VanDerWaals(self.float("pair", "c6", 1e5))
            if model == "forster":
                return ForsterTwoChannel(self.float("pair", "c3", 3e3),
                                         self.float("pair", "forster_defect", 100.0))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"pair: {exc}") from None
        raise ConfigError(f"pair.model: unknown model {model!r} (perfect, vdw, forster)")

    def as_dict(self, include_environment=False):
        out = {}
        for section in self._p.sections():
            items = {}
            for key, val in self._p.items(section):
                if not include_environment and (section, key) in ENVIRONMENT_KEYS:
                    continue
                items[key] = val
            out[section] = items
        return out


def _scenario_text(name: str) -> str:
    return resources.files("rydress").joinpath("configs", f"{name}.ini").read_text()


def load_config(path_or_name: str | None, subcommand: str | None = None) -> ExperimentConfig:
    """Load an INI file, or a shipped scenario by name (``fig2b``, ``fig3`` ...)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";;"))
    if path_or_name is None:
        if subcommand is None:
            raise ConfigError("config: no file given and no default scenario")
        path_or_name = SCENARIOS[subcommand]
    p = Path(path_or_name)
    try:
        if p.is_file():
            parser.read_string(p.read_text(), source=str(p))
            source = str(p)
        else:
            try:
                text = _scenario_text(path_or_name)
            except FileNotFoundError:
                raise ConfigError(f"config: no such file or scenario {path_or_name!r}") from None
            parser.read_string(text, source=path_or_name)
            source = f"scenario:{path_or_name}"
    except configparser.Error as exc:
        raise ConfigError(f"config: {exc}") from None
    return ExperimentConfig(parser, source)
