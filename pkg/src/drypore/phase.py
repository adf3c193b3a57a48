"""Evolution of the normalized solvent fraction.

The solvent/air interface follows a counter-term Allen-Cahn equation: the
double-well and gradient terms maintain a tanh profile of width ~epsilon,
the curvature counter term removes motion by mean curvature (surface
tension acts through the momentum balance instead), a diffuse wetting
source imposes the equilibrium contact angle at solid surfaces, and a
recession source of strength v_e = kappa * l_y models evaporation. All
terms are weighted so the equation is valid across the diffuse solid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .backend import kernels
from .errors import StabilityViolation
from .grid import Grid, ScalarField, VectorField, pad

# below H_MIN the cell is treated as solid: the phase field is frozen and
# velocities are zeroed; H_DIV floors the 1/h division so the diffuse-solid
# band cannot amplify the explicit dynamics beyond a factor 1/H_DIV
H_MIN = 1e-2
H_DIV = 0.25


def h_interp(phi):
    """Cubic interpolation weight phi^2 (3 - 2 phi)."""
    return phi * phi * (3.0 - 2.0 * phi)


def dh_interp(phi):
    """Derivative 6 phi (1 - phi) of the cubic weight."""
    return 6.0 * phi * (1.0 - phi)


def g_min_for(grid: Grid) -> float:
    """Gradient-magnitude floor below which unit normals are treated as zero."""
    return 1e-8 / max(grid.dx, grid.dy)


@dataclass(frozen=True)
class PhaseParams:
    sigma: float          # fluid-fluid surface energy density [N/m]
    epsilon: float        # diffuse interface width parameter [m]
    mobility: float       # Allen-Cahn mobility, simulation units
    kappa: float          # evaporation factor [1/s]
    theta_deg: float      # equilibrium contact angle [deg]
    l_y: float            # film height used for v_e = kappa * l_y [m]
    v_e_override: float | None = None

    def __post_init__(self):
        if self.sigma < 0 or self.mobility < 0 or self.kappa < 0:
            raise ValueError("sigma, mobility and kappa must be non-negative")
        if self.epsilon <= 0 or self.l_y <= 0:
            raise ValueError("epsilon and l_y must be positive")
        if not 0.0 < self.theta_deg < 180.0:
            raise ValueError("contact angle must lie strictly between 0 and 180 deg")


@dataclass
class PhaseState:
    phi_solid: ScalarField
    phi_tilde: ScalarField
    params: PhaseParams

    def __post_init__(self):
        g = self.phi_tilde.grid
        if self.params.epsilon < 4.0 * max(g.dx, g.dy):
            raise ValueError(
                "epsilon must resolve the interface with at least 4 cells"
            )
        ps = self.phi_solid.values
        if ps.min() < -1e-12 or ps.max() > 1.0 + 1e-12:
            raise ValueError("phi_solid must lie in [0, 1]")

    @property
    def grid(self) -> Grid:
        return self.phi_tilde.grid

    def fluid_fraction_values(self):
        return 1.0 - self.phi_solid.values

    def h_fs(self):
        return h_interp(self.fluid_fraction_values())


def fluid_fraction(state: PhaseState) -> ScalarField:
    """phi_f = 1 - phi_s (summation constraint)."""
    return ScalarField(state.grid, state.fluid_fraction_values())


def doublewell_term(phi_tilde: ScalarField, params: PhaseParams) -> ScalarField:
    """Bulk term (36 sigma / epsilon) (2 phi^3 - 3 phi^2 + phi)."""
    p = phi_tilde.values
    coef = 36.0 * params.sigma / params.epsilon
    return ScalarField(phi_tilde.grid, coef * (2.0 * p**3 - 3.0 * p**2 + p))


def curvature_counter_term(phi_tilde: ScalarField, rule: str = "noflux") -> ScalarField:
    """||grad phi|| div(n); zero where the gradient is below the floor."""
    g = phi_tilde.grid
    out = kernels.curvature_gradnorm(
        pad(phi_tilde.values, rule), g.dx, g.dy, g_min_for(g)
    )
    return ScalarField(g, out)


def wetting_coefficient(params: PhaseParams) -> float:
    """Solid surface-energy difference sigma_2s - sigma_1s = sigma cos(theta)."""
    return params.sigma * math.cos(math.radians(params.theta_deg))


def wetting_term(
    phi_tilde: ScalarField, phi_solid: ScalarField, params: PhaseParams,
    rule: str = "noflux",
) -> ScalarField:
    """Diffuse wetting source -dh_fs ||grad phi_f|| (sigma_2s - sigma_1s) dh_ff."""
    g = phi_tilde.grid
    phi_f = 1.0 - phi_solid.values
    grad_f = kernels.norm_grad(pad(phi_f, rule), g.dx, g.dy)
    out = (
        -dh_interp(phi_f)
        * grad_f
        * wetting_coefficient(params)
        * dh_interp(phi_tilde.values)
    )
    return ScalarField(g, out)


def evaporation_velocity(params: PhaseParams) -> float:
    """Uniform interface recession speed v_e = kappa * l_y [m/s]."""
    if params.v_e_override is not None:
        return params.v_e_override
    return params.kappa * params.l_y


def phase_dt_bound(state: PhaseState) -> float:
    """Explicit-Euler bound from interface diffusion and bulk relaxation rates."""
    p = state.params
    g = state.grid
    d_ac = p.mobility * p.sigma * p.epsilon
    rate = 4.0 * d_ac * (1.0 / g.dx**2 + 1.0 / g.dy**2)
    rate += 36.0 * p.mobility * p.sigma / p.epsilon
    rate /= H_DIV
    if rate <= 0.0:
        return math.inf
    return 1.0 / rate


def advective_dt_bound(grid: Grid, velocity: VectorField | None) -> float:
    if velocity is None:
        return math.inf
    umax = velocity.max_abs()
    if umax <= 0.0:
        return math.inf
    return 0.5 * min(grid.dx, grid.dy) / umax


def step_phase(
    state: PhaseState, velocity: VectorField | None, dt: float,
    rule: str = "noflux",
) -> PhaseState:
    """Explicit Euler update of the solvent fraction; result clamped to [0, 1]."""
    bound = min(phase_dt_bound(state), advective_dt_bound(state.grid, velocity))
    if dt > bound * (1.0 + 1e-12):
        raise StabilityViolation(dt, bound, "phase-field")

    g = state.grid
    p = state.params
    phi = state.phi_tilde.values
    phi_p = pad(phi, rule)
    phi_f = state.fluid_fraction_values()
    hfs = h_interp(phi_f)
    hfs_p = pad(hfs, rule)

    alpha = p.sigma * p.epsilon
    gmin = g_min_for(g)

    lap_w = kernels.div_w_grad(phi_p, hfs_p, g.dx, g.dy)
    cct = kernels.curvature_gradnorm(phi_p, g.dx, g.dy, gmin)
    bulk = 36.0 * p.sigma / p.epsilon * (2.0 * phi**3 - 3.0 * phi**2 + phi)
    gnorm = kernels.norm_grad(phi_p, g.dx, g.dy)

    rhs = p.mobility * (alpha * (lap_w - hfs * cct) - hfs * bulk)
    if p.sigma > 0.0 and np.any(state.phi_solid.values > 0.0):
        wet = wetting_term(state.phi_tilde, state.phi_solid, p, rule)
        rhs -= p.mobility * wet.values
    v_e = evaporation_velocity(p)
    if v_e != 0.0:
        rhs -= hfs * v_e * gnorm

    active = hfs >= H_MIN
    dphi = np.where(active, rhs / np.maximum(hfs, H_DIV), 0.0)
    if velocity is not None:
        adv = kernels.upwind_advect(phi_p, velocity.u, velocity.v, g.dx, g.dy)
        dphi = dphi - np.where(active, adv, 0.0)

    new = np.clip(phi + dt * dphi, 0.0, 1.0)
    return replace(state, phi_tilde=ScalarField(g, new))
