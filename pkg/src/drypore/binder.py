"""Binder transport, evaporative deposition and mass bookkeeping.

The binder lives in the solvent as a concentration c and on surfaces as a
deposited amount c_a. Each step runs four sub-steps: (1) advect/diffuse
the solvent-weighted concentration cI and account for the change of the
solvent indicator I, (2) measure the global deficit against the initial
inventory, (3) convert the deficit produced by evaporation into surface
deposition through a localized interface weight, and (4) apply a Lagrange
multiplier correction so that

    integral(c I) + integral((1 - I) c_a) = const

holds exactly (to round-off) at every step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .backend import kernels
from .errors import ConservationUnreachable, StabilityViolation
from .grid import ScalarField, integrate, pad
from .phase import PhaseState

I_MIN = 1e-4


@dataclass(frozen=True)
class BinderParams:
    diffusivity: float
    solid_affinity: float = 0.9   # f in the deposition weight
    deposition_enabled: bool = True

    def __post_init__(self):
        if self.diffusivity < 0:
            raise ValueError("diffusivity must be non-negative")
        if not 0.0 <= self.solid_affinity <= 1.0:
            raise ValueError("solid_affinity must lie in [0, 1]")


@dataclass
class BinderState:
    concentration: ScalarField    # c, per unit solvent
    deposited: ScalarField        # c_a, surface accumulation
    indicator: ScalarField        # I, solvent indicator of the previous step
    params: BinderParams
    total0: float                 # conserved inventory

    @classmethod
    def uniform(cls, phi: PhaseState, c0: float, params: BinderParams):
        grid = phi.grid
        ind = indicator(phi)
        conc = ScalarField.full(grid, c0)
        dep = ScalarField.zeros(grid)
        tot = integrate(ScalarField(grid, conc.values * ind.values))
        return cls(conc, dep, ind, params, tot)

    def total_mass(self) -> float:
        ci = self.concentration.values * self.indicator.values
        dep = (1.0 - self.indicator.values) * self.deposited.values
        return integrate(ScalarField(self.concentration.grid, ci + dep))


def indicator(phi: PhaseState) -> ScalarField:
    """Solvent indicator I = phi~ * h(phi_f): one in bulk solvent, zero in air/solid."""
    return ScalarField(phi.grid, phi.phi_tilde.values * phi.h_fs())


def binder_dt_bound(params: BinderParams, grid) -> float:
    if params.diffusivity == 0.0:
        return np.inf
    return 1.0 / (4.0 * params.diffusivity * (1.0 / grid.dx**2 + 1.0 / grid.dy**2))


def transport_substep(
    state: BinderState, ind_new: ScalarField, velocity, dt: float, rule: str = "noflux"
) -> ScalarField:
    """Advection/diffusion of cI plus the indicator-change source; returns (cI)*."""
    g = state.concentration.grid
    c = state.concentration.values
    i_old = state.indicator.values
    cp = pad(c, rule)
    ip = pad(i_old, rule)

    adv = kernels.upwind_advect(cp, velocity.u, velocity.v, g.dx, g.dy) * i_old
    diff = state.params.diffusivity * kernels.div_w_grad(cp, ip, g.dx, g.dy)
    ci_star = c * i_old + dt * (diff - adv) + c * (ind_new.values - i_old)
    return ScalarField(g, ci_star)


def mass_deficit(state: BinderState, ci_star: ScalarField) -> float:
    dep = (1.0 - state.indicator.values) * state.deposited.values
    current = integrate(ci_star) + integrate(ScalarField(ci_star.grid, dep))
    return state.total0 - current


def deposition_weight(phi: PhaseState, f: float) -> ScalarField:
    p = phi.phi_tilde.values
    w = p * (1.0 - p) * (f * phi.phi_solid.values + (1.0 - f))
    return ScalarField(phi.grid, w)


def step_binder(
    state: BinderState, phi: PhaseState, velocity, dt: float, rule: str = "noflux"
) -> BinderState:
    """One full binder step; conserves the total inventory exactly."""
    g = state.concentration.grid
    bound = binder_dt_bound(state.params, g)
    if dt > bound * (1.0 + 1e-12):
        raise StabilityViolation(dt, bound, "binder diffusion")

    ind_new = indicator(phi)
    ci_star = transport_substep(state, ind_new, velocity, dt, rule)
    i_new = ind_new.values
    # drop the (tiny) content of cells that fell below the indicator floor
    # up front so the Lagrange correction restores it through live cells
    ci = np.where(i_new >= I_MIN, np.clip(ci_star.values, 0.0, None), 0.0)

    dep = state.deposited.values.copy()

    if state.params.deposition_enabled:
        deficit = state.total0 - (
            integrate(ScalarField(g, ci))
            + integrate(ScalarField(g, (1.0 - state.indicator.values) * dep))
        )
        w_d = deposition_weight(phi, state.params.solid_affinity).values
        denom = integrate(ScalarField(g, (1.0 - i_new) * w_d))
        if denom > 0.0:
            dep = dep + w_d * (deficit / denom)
            dep = np.clip(dep, 0.0, None)

    # Lagrange correction on cI against the remaining deficit
    p = phi.phi_tilde.values
    w_c = np.where(i_new >= I_MIN, p * (1.0 - p), 0.0)
    deficit = state.total0 - (
        integrate(ScalarField(g, ci))
        + integrate(ScalarField(g, (1.0 - i_new) * dep))
    )
    for _ in range(8):
        denom = integrate(ScalarField(g, w_c))
        if denom <= 0.0:
            break
        ci = ci + w_c * (deficit / denom)
        neg = ci < 0.0
        if not np.any(neg):
            deficit = 0.0
            break
        # floor negatives and push the residual back through the positive support
        w_c = np.where(neg, 0.0, w_c)
        ci = np.clip(ci, 0.0, None)
        deficit = state.total0 - (
            integrate(ScalarField(g, ci))
            + integrate(ScalarField(g, (1.0 - i_new) * dep))
        )
    scale = max(abs(state.total0), 1.0)
    if abs(deficit) > 1e-9 * scale:
        raise ConservationUnreachable(deficit)

    conc = np.where(i_new >= I_MIN, ci / np.where(i_new >= I_MIN, i_new, 1.0), 0.0)
    return replace(
        state,
        concentration=ScalarField(g, conc),
        deposited=ScalarField(g, dep),
        indicator=ScalarField(g, i_new.copy()),
    )


def interpolated_concentration(state: BinderState) -> ScalarField:
    """Field view combining dissolved and deposited binder, c I + (1-I) c_a."""
    vals = (
        state.concentration.values * state.indicator.values
        + (1.0 - state.indicator.values) * state.deposited.values
    )
    return ScalarField(state.concentration.grid, vals)
