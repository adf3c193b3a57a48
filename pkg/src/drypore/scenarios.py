"""Preset configurations for the validation and drying setups."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import SimConfig
from .structure import CoatingData, compute_kappa

SCALE = 5.0e4  # desk-scale acceleration triple: kappa x, mu /, D x

# coating recipes behind the two packing presets
COATINGS = {
    "fine": dict(rho_solid=2062.0, chi_solid=0.465, M_S=79.5e-3, rho_solvent=997.0),
    "coarse": dict(rho_solid=2062.0, chi_solid=0.549, M_S=78.4e-3, rho_solvent=997.0),
}
MEAN_DIAMETERS = {"fine": 6.0e-6, "coarse": 12.0e-6}


@dataclass
class Scenario:
    name: str
    config: SimConfig
    notes: dict = field(default_factory=dict)


def bubble_rise(nx: int = 64, ny: int = 128) -> Scenario:
    g = 0.98
    radius = 0.25
    t_scale = math.sqrt(g / radius)
    cfg = SimConfig(
        nx=nx, ny=ny, lx=1.0, ly=2.0,
        sigma=1.96, mobility=1.0, kappa=0.0, theta_deg=90.0, l_y=2.0,
        rho_air=1000.0, rho_solvent=1.0, mu_air=10.0, mu_solvent=0.1, g=g,
        diffusivity=0.0, deposition_enabled=False, c0=0.01,
        source="none", init="circle", circle_x=0.5, circle_y=0.5, circle_r=radius,
        t_end=2.83 / t_scale, time_scale=t_scale, flow_interval=4,
        stop_on_dryout=False, out_dir="out/bubble",
    )
    return Scenario("bubble", cfg, {"t_star_end": 2.83, "radius": radius})


def evaporating_capillary(Pe: float, nx: int = 112, ny: int = 112) -> Scenario:
    if Pe <= 0:
        raise ValueError("Pe must be positive")
    l = 56.0e-6
    kappa = 9200.0
    fill = 0.85 * l
    diff = kappa * fill**2 / Pe
    cfg = SimConfig(
        nx=nx, ny=ny, lx=l, ly=l,
        sigma=1.72e-5, mobility=100.0, kappa=kappa, theta_deg=90.0, l_y=fill,
        rho_air=1.225, rho_solvent=997.0, mu_air=1.72e-5, mu_solvent=1.0e-3,
        g=9.81,
        diffusivity=diff, solid_affinity=0.9, deposition_enabled=True, c0=0.01,
        source="walls", wall_cells=max(2, nx // 14), fill_height=fill, init="fill",
        t_end=0.92 / kappa, time_scale=kappa, flow_interval=10,
        stop_on_dryout=True, out_dir=f"out/capillary-pe{Pe:g}",
    )
    return Scenario(f"capillary-pe{Pe:g}", cfg, {"Pe": Pe})


def electrode_drying(
    preset: str,
    k_viscosity: float = 10.0,
    k_evap: float = 9.0,
    k_surf: float = 1.0,
    theta_deg: float = 90.0,
    seed: int = 1,
    full_scale: bool = False,
) -> Scenario:
    if preset not in COATINGS:
        raise ValueError(f"unknown preset {preset!r}")
    nx, ny = (608, 448) if full_scale else (192, 144)
    lx, ly = 55.0e-6, 40.07e-6
    fill = 37.5e-6
    coating = COATINGS[preset]
    kappa_unit = compute_kappa(CoatingData(r_dot=1.0e-3, **coating)) * SCALE
    kappa = k_evap * kappa_unit
    mu_unit = 1.0 / SCALE
    sigma_unit = 72.4e-3
    cfg = SimConfig(
        nx=nx, ny=ny, lx=lx, ly=ly,
        sigma=k_surf * sigma_unit, mobility=10.0, kappa=kappa,
        theta_deg=theta_deg, l_y=fill,
        rho_air=1.225, rho_solvent=997.0,
        mu_air=1.72e-5 / SCALE, mu_solvent=k_viscosity * mu_unit, g=9.81,
        diffusivity=1.12e-16 * SCALE, solid_affinity=0.9,
        deposition_enabled=True, c0=0.01,
        source="packing", seed=seed, mean_diameter=MEAN_DIAMETERS[preset],
        diameter_cv=0.3, target_chi=0.46, fill_height=fill, init="fill",
        # eight cells across the interface: at electrode evaporation speeds a
        # six-cell profile pins to the lattice and the recession rate stops
        # scaling with k_evap; the wider profile also loosens the phase dt
        epsilon=8.0 * max(lx / nx, ly / ny),
        t_end=1.5 / kappa, time_scale=kappa, flow_interval=20,
        stop_on_dryout=True, stop_on_breakthrough=True,
        # sample m at a fixed drying progress so parameter studies compare
        # like states regardless of where each run terminates
        measure_loss=0.25,
        out_dir=f"out/electrode-{preset}",
        kappa_unit=kappa_unit, mu_unit=mu_unit, sigma_unit=sigma_unit,
    )
    notes = {"preset": preset, "k_viscosity": k_viscosity, "k_evap": k_evap,
             "k_surf": k_surf, "theta_deg": theta_deg, "scale": SCALE}
    return Scenario(f"electrode-{preset}", cfg, notes)


def by_name(name: str, full_scale: bool = False) -> Scenario:
    if name == "bubble":
        return bubble_rise()
    if name.startswith("capillary-pe"):
        return evaporating_capillary(float(name[len("capillary-pe"):]))
    if name == "capillary":
        return evaporating_capillary(12.5)
    if name.startswith("electrode-"):
        return electrode_drying(name[len("electrode-"):], full_scale=full_scale)
    raise ValueError(f"unknown scenario {name!r}")
