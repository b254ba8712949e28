"""Experiment configuration: key-value text files and defaults.

Config files are plain text with one dotted key per line::

    # two counter-injected packets, oscillating well
    model.mass_ratio = 0.067
    grid.x_min = -700
    grid.x_max = 700
    grid.dx = 0.05
    potential.v_b = 0.4
    packet.energy = 0.073

All lengths are nm, energies eV, times fs, frequencies rad/fs.  Unknown
keys are rejected.  Setting ``potential.v_b = 0`` removes the structure
entirely (free propagation); a positive barrier height is required
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import Grid1D, PhysicalModel, PotentialSpec, WavePacketSpec
from .propagation import PropagationConfig

#: canonical keys, their types, and default values
DEFAULTS = {
    "model.mass_ratio": (float, 0.067),
    "grid.x_min": (float, -700.0),
    "grid.x_max": (float, 700.0),
    "grid.dx": (float, 0.05),
    "potential.v_b": (float, 0.4),
    "potential.barrier_width": (float, 1.0),
    "potential.well_width": (float, 5.2),
    "potential.well_center": (float, 0.0),
    "potential.osc_amplitude": (float, 0.2),
    "potential.osc_frequency": (float, 0.0),
    "potential.osc_sign": (int, 1),
    "potential.osc_phase": (float, 0.0),
    "packet.x0": (float, -175.0),
    "packet.sigma": (float, 50.0),
    "packet.energy": (float, 0.073),
    "propagation.dt": (float, 0.1),
    "propagation.max_time": (float, 3000.0),
    "propagation.settle_threshold": (float, 1e-6),
    "propagation.settle_window": (float, 20.0),
    "propagation.barrier_margin": (float, 2.0),
    "occupation.f_a": (float, 1.0),
    "occupation.f_b": (float, 1.0),
    "sweep.e_min": (float, 0.05),
    "sweep.e_max": (float, 0.12),
    "sweep.n_energies": (int, 29),
    "sweep.w_min": (float, -8e-4),
    "sweep.w_max": (float, 8e-4),
    "sweep.n_frequencies": (int, 33),
    "oracle.stride": (int, 4),
}


def parse_config_text(text: str) -> dict:
    """Parse key = value lines into a raw {key: value} dict."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        typ, _ = DEFAULTS[key]
        try:
            values[key] = typ(float(val)) if typ is int else typ(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    return values


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully built experiment: model, grid, potential, packet, stepping."""

    model: PhysicalModel
    grid: Grid1D
    potential: PotentialSpec | None
    packet: WavePacketSpec
    propagation: PropagationConfig
    f_a: float
    f_b: float
    sweep_energies: np.ndarray
    sweep_frequencies: np.ndarray
    oracle_stride: int
    raw: dict


def build_experiment(values: dict | None = None) -> ExperimentConfig:
    """Turn a raw key dict (missing keys take defaults) into objects."""
    raw = {k: d for k, (_, d) in DEFAULTS.items()}
    if values:
        for k in values:
            if k not in DEFAULTS:
                raise ConfigError(f"unknown key {k!r}")
        raw.update(values)

    model = PhysicalModel(mass_ratio=raw["model.mass_ratio"])
    grid = Grid1D.from_spacing(raw["grid.x_min"], raw["grid.x_max"], raw["grid.dx"])

    if raw["potential.v_b"] == 0.0:
        potential = None
    else:
        potential = PotentialSpec(
            barrier_height=raw["potential.v_b"],
            barrier_width=raw["potential.barrier_width"],
            well_width=raw["potential.well_width"],
            well_center=raw["potential.well_center"],
            osc_amplitude=raw["potential.osc_amplitude"],
            osc_angular_frequency=raw["potential.osc_frequency"],
            osc_sign=raw["potential.osc_sign"],
            osc_phase=raw["potential.osc_phase"],
        )

    x0 = raw["packet.x0"]
    if x0 == 0.0:
        raise ConfigError("packet.x0 must be nonzero (injection at the center)")
    packet = WavePacketSpec(
        x0=x0,
        sigma=raw["packet.sigma"],
        energy=raw["packet.energy"],
        direction=1 if x0 < 0 else -1,
    )
    if potential is not None:
        standoff = abs(x0 - potential.well_center)
        needed = potential.structure_half_width + 3.0 * packet.sigma
        if standoff < needed:
            raise ConfigError(
                f"|x0 - well_center| = {standoff} nm is closer than 3 sigma "
                f"+ structure half width = {needed} nm"
            )

    prop = PropagationConfig(
        dt=raw["propagation.dt"],
        max_time=raw["propagation.max_time"],
        settle_threshold=raw["propagation.settle_threshold"],
        settle_window=raw["propagation.settle_window"],
        barrier_margin=raw["propagation.barrier_margin"],
    )

    for name in ("f_a", "f_b"):
        f = raw[f"occupation.{name}"]
        if not (0.0 <= f <= 1.0):
            raise ConfigError(f"occupation.{name} must lie in [0, 1], got {f}")

    if raw["sweep.n_energies"] < 1 or raw["sweep.n_frequencies"] < 1:
        raise ConfigError("sweep point counts must be >= 1")
    if raw["sweep.n_energies"] > 1 and not raw["sweep.e_min"] < raw["sweep.e_max"]:
        raise ConfigError("sweep.e_min must be < sweep.e_max")
    if raw["sweep.n_frequencies"] > 1 and not raw["sweep.w_min"] < raw["sweep.w_max"]:
        raise ConfigError("sweep.w_min must be < sweep.w_max")
    energies = np.linspace(
        raw["sweep.e_min"], raw["sweep.e_max"], raw["sweep.n_energies"]
    )
    frequencies = np.linspace(
        raw["sweep.w_min"], raw["sweep.w_max"], raw["sweep.n_frequencies"]
    )
    if np.any(energies <= 0):
        raise ConfigError("sweep energies must be positive")

    stride = raw["oracle.stride"]
    if stride < 1:
        raise ConfigError(f"oracle.stride must be >= 1, got {stride}")

    return ExperimentConfig(
        model=model,
        grid=grid,
        potential=potential,
        packet=packet,
        propagation=prop,
        f_a=raw["occupation.f_a"],
        f_b=raw["occupation.f_b"],
        sweep_energies=energies,
        sweep_frequencies=frequencies,
        oracle_stride=stride,
        raw=raw,
    )


def load_config(path) -> ExperimentConfig:
    """Read and build a config file; defaults fill the missing keys."""
    text = Path(path).read_text()
    return build_experiment(parse_config_text(text))


def default_config() -> ExperimentConfig:
    """The built-in default experiment (static run at 0.073 eV)."""
    return build_experiment({})


def config_lines(cfg: ExperimentConfig) -> list[str]:
    """Canonical 'key = value' lines echoing the full configuration."""
    out = []
    for key in DEFAULTS:
        v = cfg.raw[key]
        out.append(f"{key} = {v!r}" if isinstance(v, float) else f"{key} = {v}")
    return out


def write_default_config(path):
    """Write a fully commented default config file."""
    cfg = default_config()
    lines = ["# dbnoise experiment configuration (units: eV, nm, fs, rad/fs)"]
    lines += config_lines(cfg)
    Path(path).write_text("\n".join(lines) + "\n")
