"""Flat key=value run configuration with lossless round-tripping."""

from __future__ import annotations

import configparser
import dataclasses
import math
import os
from dataclasses import dataclass, field, fields

from .binder import BinderParams
from .errors import ConfigError
from .flow import FluidProps
from .grid import Grid
from .phase import PhaseParams


@dataclass
class SimConfig:
    # grid
    nx: int = 64
    ny: int = 64
    lx: float = 1.0
    ly: float = 1.0
    periodic_x: bool = False
    boundary_rule: str = "noflux"
    # phase
    sigma: float = 1.0
    epsilon: float = 0.0          # 0 -> resolved to 6*max(dx, dy)
    mobility: float = 1.0
    kappa: float = 0.0
    theta_deg: float = 90.0
    l_y: float = 0.0              # film height; 0 -> ly
    v_e_override: float = math.nan
    # fluids
    rho_air: float = 1.225
    rho_solvent: float = 997.0
    mu_air: float = 1.72e-5
    mu_solvent: float = 1.0e-3
    g: float = 9.81
    fx: float = 0.0
    # binder
    diffusivity: float = 0.0
    solid_affinity: float = 0.9
    deposition_enabled: bool = True
    c0: float = 0.01
    # structure
    source: str = "none"          # none | mask | packing | walls
    mask_path: str = ""
    seed: int = 0
    mean_diameter: float = 0.0
    diameter_cv: float = 0.3
    target_chi: float = 0.46
    wall_cells: int = 8
    fill_height: float = 0.0      # 0 -> l_y
    init: str = "fill"            # fill | circle
    circle_x: float = 0.5
    circle_y: float = 0.5
    circle_r: float = 0.25
    # time
    dt: float = 0.0               # 0 -> auto from stability bounds
    flow_interval: int = 1        # update the flow every N phase steps
    safety: float = 0.9
    t_end: float = 1.0
    snapshot_interval: float = 0.0  # 0 -> t_end / 10
    time_scale: float = 1.0       # multiplies t for dimensionless reporting
    # stopping
    stop_on_dryout: bool = True
    stop_on_breakthrough: bool = False
    breakthrough_grace: float = 0.1
    # sample the binder-gradient diagnostic when solvent loss first crosses
    # this fraction, so runs with different stop states stay comparable
    measure_loss: float = float("nan")  # NaN -> disabled
    # output
    out_dir: str = "out"
    write_vtk: bool = False
    # sweep units (per-multiplier base values; 0 = axis unavailable)
    kappa_unit: float = 0.0
    mu_unit: float = 0.0
    sigma_unit: float = 0.0

    SECTIONS = {
        "grid": ["nx", "ny", "lx", "ly", "periodic_x", "boundary_rule"],
        "phase": ["sigma", "epsilon", "mobility", "kappa", "theta_deg", "l_y",
                  "v_e_override"],
        "fluids": ["rho_air", "rho_solvent", "mu_air", "mu_solvent", "g", "fx"],
        "binder": ["diffusivity", "solid_affinity", "deposition_enabled", "c0"],
        "structure": ["source", "mask_path", "seed", "mean_diameter",
                      "diameter_cv", "target_chi", "wall_cells", "fill_height",
                      "init", "circle_x", "circle_y", "circle_r"],
        "time": ["dt", "flow_interval", "safety", "t_end", "snapshot_interval",
                 "time_scale"],
        "stop": ["stop_on_dryout", "stop_on_breakthrough", "breakthrough_grace",
                 "measure_loss"],
        "output": ["out_dir", "write_vtk"],
        "sweep": ["kappa_unit", "mu_unit", "sigma_unit"],
    }

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.nx < 4 or self.ny < 4:
            raise ConfigError("grid must be at least 4x4")
        if self.lx <= 0 or self.ly <= 0:
            raise ConfigError("domain extents must be positive")
        if self.source not in ("none", "mask", "packing", "walls"):
            raise ConfigError(f"unknown structure source {self.source!r}")
        if self.init not in ("fill", "circle"):
            raise ConfigError(f"unknown init {self.init!r}")
        if self.source == "mask" and not os.path.isfile(self.mask_path):
            raise ConfigError(f"mask file not found: {self.mask_path!r}")
        if self.t_end <= 0:
            raise ConfigError("t_end must be positive")
        if not 0 < self.safety <= 1:
            raise ConfigError("safety must lie in (0, 1]")
        if self.flow_interval < 1:
            raise ConfigError("flow_interval must be at least 1")
        if not math.isnan(self.measure_loss) and not 0.0 < self.measure_loss < 1.0:
            raise ConfigError("measure_loss must lie in (0, 1)")

    # resolved values -----------------------------------------------------
    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    def resolved_epsilon(self) -> float:
        # Six cells across the interface: thinner profiles pin to the grid and
        # under-run the imposed evaporation speed.
        return self.epsilon if self.epsilon > 0 else 6.0 * max(self.dx, self.dy)

    def resolved_l_y(self) -> float:
        return self.l_y if self.l_y > 0 else self.ly

    def resolved_fill_height(self) -> float:
        return self.fill_height if self.fill_height > 0 else self.resolved_l_y()

    def grid(self) -> Grid:
        return Grid(self.nx, self.ny, self.dx, self.dy, periodic_x=self.periodic_x)

    def phase_params(self) -> PhaseParams:
        override = None if math.isnan(self.v_e_override) else self.v_e_override
        return PhaseParams(
            sigma=self.sigma,
            epsilon=self.resolved_epsilon(),
            mobility=self.mobility,
            kappa=self.kappa,
            theta_deg=self.theta_deg,
            l_y=self.resolved_l_y(),
            v_e_override=override,
        )

    def fluid_props(self) -> FluidProps:
        return FluidProps(
            rho_air=self.rho_air, rho_solvent=self.rho_solvent,
            mu_air=self.mu_air, mu_solvent=self.mu_solvent,
            g=self.g, fx=self.fx,
        )

    def binder_params(self) -> BinderParams:
        return BinderParams(
            diffusivity=self.diffusivity,
            solid_affinity=self.solid_affinity,
            deposition_enabled=self.deposition_enabled,
        )

    # serialization -------------------------------------------------------
    def to_file(self, path: str):
        cp = configparser.ConfigParser()
        cp.optionxform = str
        for section, names in self.SECTIONS.items():
            cp[section] = {n: _fmt(getattr(self, n)) for n in names}
        with open(path, "w") as fh:
            cp.write(fh)

    @classmethod
    def from_file(cls, path: str, base: "SimConfig | None" = None) -> "SimConfig":
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path!r}")
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path!r}: {exc}") from exc
        values = dataclasses.asdict(base) if base is not None else {}
        types = {f.name: f.type for f in fields(cls)}
        known = {n for names in cls.SECTIONS.values() for n in names}
        for section in cp.sections():
            for key, raw in cp[section].items():
                if key not in known:
                    raise ConfigError(f"unknown config key [{section}] {key}")
                values[key] = _parse(raw, types[key], key)
        try:
            return cls(**values)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    def replace(self, **kwargs) -> "SimConfig":
        return dataclasses.replace(self, **kwargs)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(raw: str, type_name, key: str):
    t = type_name if isinstance(type_name, str) else getattr(type_name, "__name__", "")
    raw = raw.strip()
    try:
        if t == "bool":
            if raw.lower() in ("true", "1", "yes", "on"):
                return True
            if raw.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if t == "int":
            return int(raw)
        if t == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
