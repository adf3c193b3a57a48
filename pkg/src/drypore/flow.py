"""Two-phase incompressible flow across the diffuse solid.

Explicit momentum predictor in conservative form (upwind advection,
variable-coefficient viscous stress, gravity, capillary forcing), followed
by a Chorin-style pressure projection. The projection solves the
variable-coefficient Poisson problem div((h/rho) grad p) = div(h u*)/dt
with a conjugate gradient preconditioned by a cached sparse LU
factorization (refreshed lazily as the coefficients drift) and corrects
u = u* - (dt/rho) grad p, so that div(h u) vanishes to the solver
tolerance after every step. Velocities are hard-zeroed wherever the
fluid weight h falls below H_MIN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .backend import kernels
from .errors import NoConvergence, StabilityViolation
from .grid import Grid, ScalarField, VectorField, pad
from .phase import H_DIV, H_MIN, PhaseState, doublewell_term, wetting_term

PROJECTION_RTOL = 1e-8

# CG iterations allowed against a stale LU preconditioner before it is
# rebuilt from the current coefficients. Balances the cost of a refactor
# against the extra iterations a drifting operator demands.
_LAG_ITERS = 12


def _assemble_poisson(bx, by, dx, dy, periodic_x):
    """Sparse matrix for -div(beta grad p) matching the kernel stencil."""
    inv_dx2 = 1.0 / (dx * dx)
    inv_dy2 = 1.0 / (dy * dy)
    ny, nx = bx.shape[0], by.shape[1]
    idx = np.arange(ny * nx).reshape(ny, nx)

    cw = bx[:, :-1] * inv_dx2
    ce = bx[:, 1:] * inv_dx2
    cs = by[:-1, :] * inv_dy2
    cn = by[1:, :] * inv_dy2

    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [(cw + ce + cs + cn).ravel()]

    west = np.roll(idx, 1, axis=1) if periodic_x else idx[:, :-1]
    east = np.roll(idx, -1, axis=1) if periodic_x else idx[:, 1:]
    cw_o = cw if periodic_x else cw[:, 1:]
    ce_o = ce if periodic_x else ce[:, :-1]
    here_w = idx if periodic_x else idx[:, 1:]
    here_e = idx if periodic_x else idx[:, :-1]
    rows += [here_w.ravel(), here_e.ravel(), idx[1:, :].ravel(), idx[:-1, :].ravel()]
    cols += [west.ravel(), east.ravel(), idx[:-1, :].ravel(), idx[1:, :].ravel()]
    vals += [-cw_o.ravel(), -ce_o.ravel(), -cs[1:, :].ravel(), -cn[:-1, :].ravel()]

    a = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ny * nx, ny * nx),
    )
    return a.tocsr()


def _pcg(a, lu, b, x0, tol_max, maxiter):
    """CG on the singular operator a, preconditioned by the (shifted) LU."""
    x = x0.copy()
    r = b - a @ x
    res = float(np.max(np.abs(r)))
    if res < tol_max:
        return x, 0, res, True
    z = lu.solve(r)
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, maxiter + 1):
        ap = a @ p
        pap = float(p @ ap)
        if pap <= 0.0:
            break
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        res = float(np.max(np.abs(r)))
        if res < tol_max:
            return x, it, res, True
        z = lu.solve(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, maxiter, res, False


class _ProjectionSolver:
    """Poisson solves for the projection, reusing one LU across calls.

    The operator is singular (pure Neumann, possibly with decoupled
    pockets), so the factorization adds a small diagonal shift; used only
    as a preconditioner it leaves the CG answer untouched.
    """

    def __init__(self):
        self._lu = None
        self._key = None

    def _refactor(self, a):
        d = a.diagonal()
        dmax = float(d.max())
        shift = np.where(d > 0.0, 1e-8 * dmax, 1.0) if dmax > 0.0 else np.ones_like(d)
        self._lu = splu((a + sparse.diags(shift)).tocsc())

    def solve(self, b, bx, by, dx, dy, x0, tol_max, maxiter, periodic_x):
        a = _assemble_poisson(bx, by, dx, dy, periodic_x)
        key = (b.shape, periodic_x)
        if self._lu is None or self._key != key:
            self._refactor(a)
            self._key = key
        budget = min(_LAG_ITERS, maxiter)
        x, it, res, ok = _pcg(a, self._lu, b.ravel(), x0.ravel(), tol_max, budget)
        if not ok and maxiter > budget:
            self._refactor(a)
            x, it2, res, ok = _pcg(a, self._lu, b.ravel(), x, tol_max, maxiter - budget)
            it += it2
        return x.reshape(b.shape), it, res, ok


_projection_solver = _ProjectionSolver()


@dataclass(frozen=True)
class FluidProps:
    rho_air: float
    rho_solvent: float
    mu_air: float
    mu_solvent: float
    g: float = 9.81          # gravity magnitude, acting in -y
    fx: float = 0.0          # extra body force per unit mass in +x

    def __post_init__(self):
        if min(self.rho_air, self.rho_solvent) <= 0:
            raise ValueError("densities must be positive")
        if min(self.mu_air, self.mu_solvent) <= 0:
            raise ValueError("viscosities must be positive")


@dataclass
class FlowState:
    velocity: VectorField
    pressure: ScalarField
    props: FluidProps

    @classmethod
    def quiescent(cls, grid: Grid, props: FluidProps):
        return cls(VectorField.zeros(grid), ScalarField.zeros(grid), props)


def interpolate_density(phi_tilde: ScalarField, props: FluidProps) -> ScalarField:
    p = phi_tilde.values
    return ScalarField(phi_tilde.grid, p * props.rho_solvent + (1.0 - p) * props.rho_air)


def interpolate_viscosity(phi_tilde: ScalarField, props: FluidProps) -> ScalarField:
    p = phi_tilde.values
    return ScalarField(phi_tilde.grid, p * props.mu_solvent + (1.0 - p) * props.mu_air)


def _pad_x(c, periodic):
    return np.pad(c, ((0, 0), (1, 1)), mode="wrap" if periodic else "edge")


def _to_u_faces(c, periodic):
    cp = _pad_x(c, periodic)
    return 0.5 * (cp[:, 1:] + cp[:, :-1])


def _to_v_faces(c):
    cp = np.pad(c, ((1, 1), (0, 0)), mode="edge")
    return 0.5 * (cp[1:, :] + cp[:-1, :])


def _to_corners(c, periodic):
    """Average a cell array to the (ny+1, nx+1) corner points."""
    cp = np.pad(_pad_x(c, periodic), ((1, 1), (0, 0)), mode="edge")
    return 0.25 * (cp[:-1, :-1] + cp[1:, :-1] + cp[:-1, 1:] + cp[1:, 1:])


def chemical_potential(phi: PhaseState, rule: str = "noflux") -> ScalarField:
    """Phi = bulk - alpha div(h grad phi)/h plus the wetting contribution.

    The h-weighted operator keeps Phi near zero across the diffuse solid
    band, where a bare laplacian of the clamped phase field would inject
    enormous spurious capillary forces.
    """
    g = phi.grid
    p = phi.params
    alpha = p.sigma * p.epsilon
    hfs = phi.h_fs()
    lap_w = kernels.div_w_grad(pad(phi.phi_tilde.values, rule), pad(hfs, rule),
                               g.dx, g.dy)
    active = hfs >= H_MIN
    denom = np.maximum(hfs, H_DIV)
    pot = doublewell_term(phi.phi_tilde, p).values - np.where(
        active, alpha * lap_w / denom, 0.0
    )
    if p.sigma > 0.0 and np.any(phi.phi_solid.values > 0.0):
        wet = wetting_term(phi.phi_tilde, phi.phi_solid, p, rule)
        pot = pot + np.where(active, wet.values / denom, 0.0)
    return ScalarField(g, pot)


def capillary_force(phi: PhaseState, rule: str = "noflux") -> VectorField:
    """Capillary body force K = -phi grad(Phi) on faces, fluid-weighted by h."""
    g = phi.grid
    pot = chemical_potential(phi, rule).values
    per = g.periodic_x
    hfs = phi.h_fs()
    wu = _to_u_faces(phi.phi_tilde.values * hfs, per)
    wv = _to_v_faces(phi.phi_tilde.values * hfs)

    ku = np.zeros((g.ny, g.nx + 1))
    kv = np.zeros((g.ny + 1, g.nx))
    if per:
        pp = _pad_x(pot, True)
        ku[:, :] = -wu * (pp[:, 1:] - pp[:, :-1]) / g.dx
        ku[:, -1] = ku[:, 0]
    else:
        ku[:, 1:-1] = -wu[:, 1:-1] * (pot[:, 1:] - pot[:, :-1]) / g.dx
    kv[1:-1, :] = -wv[1:-1, :] * (pot[1:, :] - pot[:-1, :]) / g.dy
    return VectorField(g, ku, kv)


def flow_dt_bound(flow: FlowState, phi: PhaseState) -> float:
    g = phi.grid
    rho = interpolate_density(phi.phi_tilde, flow.props).values
    mu = interpolate_viscosity(phi.phi_tilde, flow.props).values
    nu_max = float(np.max(mu / rho))
    bound = math.inf
    if nu_max > 0:
        bound = 1.0 / (4.0 * nu_max * (1.0 / g.dx**2 + 1.0 / g.dy**2))
    umax = flow.velocity.max_abs()
    if umax > 0:
        bound = min(bound, 0.5 * min(g.dx, g.dy) / umax)
    return bound


def momentum_predictor(flow: FlowState, phi: PhaseState, dt: float) -> VectorField:
    """Explicit update of the h-weighted momentum; returns unprojected u*."""
    bound = flow_dt_bound(flow, phi)
    if dt > bound * (1.0 + 1e-12):
        raise StabilityViolation(dt, bound, "momentum CFL/viscous")

    g = phi.grid
    per = g.periodic_x
    props = flow.props
    u = flow.velocity.u
    v = flow.velocity.v

    rho_c = interpolate_density(phi.phi_tilde, props).values
    mu_c = interpolate_viscosity(phi.phi_tilde, props).values
    h_c = phi.h_fs()
    rhoh_c = rho_c * h_c
    w_c = h_c * mu_c

    rho_u = _to_u_faces(rho_c, per)
    rho_v = _to_v_faces(rho_c)
    h_u = _to_u_faces(h_c, per)
    h_v = _to_v_faces(h_c)
    rhoh_corner = _to_corners(rhoh_c, per)
    w_corner = _to_corners(w_c, per)

    cap = capillary_force(phi)
    # u div(mu grad h): keep only the dissipative part -- the positive lobe
    # inside the diffuse-solid band acts as unbounded linear growth ~s/(rho h)
    # and destabilizes the explicit update
    s_c = np.minimum(kernels.div_w_grad(pad(h_c), pad(mu_c), g.dx, g.dy), 0.0)

    # ---- u momentum -----------------------------------------------------
    # x-advection flux rho h u u at cell centers
    uc = 0.5 * (u[:, 1:] + u[:, :-1])
    fx_c = rhoh_c * uc * np.where(uc > 0.0, u[:, :-1], u[:, 1:])
    fx_p = _pad_x(fx_c, per)
    adv_u = (fx_p[:, 1:] - fx_p[:, :-1]) / g.dx

    # y-advection flux rho h v u at corners; no-slip ghosts above/below
    u_gy = np.vstack([-u[:1, :], u, -u[-1:, :]])
    vpx = _pad_x(v, per)
    v_corner = 0.5 * (vpx[:, 1:] + vpx[:, :-1])
    u_upw = np.where(v_corner > 0.0, u_gy[:-1, :], u_gy[1:, :])
    fy = rhoh_corner * v_corner * u_upw
    adv_u += (fy[1:, :] - fy[:-1, :]) / g.dy

    # viscous div(h mu grad u)
    gx_c = (u[:, 1:] - u[:, :-1]) / g.dx
    wx = _pad_x(w_c * gx_c, per)
    visc_u = (wx[:, 1:] - wx[:, :-1]) / g.dx
    dudy = (u_gy[1:, :] - u_gy[:-1, :]) / g.dy
    wy = w_corner * dudy
    visc_u += (wy[1:, :] - wy[:-1, :]) / g.dy

    s_u = _to_u_faces(s_c, per)
    force_u = rho_u * h_u * props.fx + h_u * cap.u

    mom_u = rho_u * h_u * u + dt * (-adv_u + visc_u + s_u * u + force_u)
    u_star = np.where(h_u >= H_MIN, mom_u / np.where(h_u >= H_MIN, rho_u * h_u, 1.0), 0.0)

    # ---- v momentum -----------------------------------------------------
    vc = 0.5 * (v[1:, :] + v[:-1, :])
    fy_c = rhoh_c * vc * np.where(vc > 0.0, v[:-1, :], v[1:, :])
    fy_p = np.pad(fy_c, ((1, 1), (0, 0)), mode="edge")
    adv_v = (fy_p[1:, :] - fy_p[:-1, :]) / g.dy

    if per:
        v_gx = np.hstack([v[:, -1:], v, v[:, :1]])
    else:
        v_gx = np.hstack([-v[:, :1], v, -v[:, -1:]])
    upy = np.pad(u, ((1, 1), (0, 0)), mode="edge")
    u_corner = 0.5 * (upy[1:, :] + upy[:-1, :])
    v_upw = np.where(u_corner > 0.0, v_gx[:, :-1], v_gx[:, 1:])
    fx = rhoh_corner * u_corner * v_upw
    adv_v += (fx[:, 1:] - fx[:, :-1]) / g.dx

    gy_c = (v[1:, :] - v[:-1, :]) / g.dy
    wyv = np.pad(w_c * gy_c, ((1, 1), (0, 0)), mode="edge")
    visc_v = (wyv[1:, :] - wyv[:-1, :]) / g.dy
    dvdx = (v_gx[:, 1:] - v_gx[:, :-1]) / g.dx
    wxv = w_corner * dvdx
    visc_v += (wxv[:, 1:] - wxv[:, :-1]) / g.dx

    s_v = _to_v_faces(s_c)
    force_v = rho_v * h_v * (-props.g) + h_v * cap.v

    mom_v = rho_v * h_v * v + dt * (-adv_v + visc_v + s_v * v + force_v)
    v_star = np.where(h_v >= H_MIN, mom_v / np.where(h_v >= H_MIN, rho_v * h_v, 1.0), 0.0)

    # wall faces
    if per:
        u_star[:, -1] = u_star[:, 0]
    else:
        u_star[:, 0] = 0.0
        u_star[:, -1] = 0.0
    v_star[0, :] = 0.0
    v_star[-1, :] = 0.0
    return VectorField(g, u_star, v_star)


def pressure_projection(
    u_star: VectorField, phi: PhaseState, rho: ScalarField, dt: float,
    p_guess: ScalarField | None = None, rtol: float = PROJECTION_RTOL,
) -> tuple[VectorField, ScalarField]:
    """Project u* onto the div(h u) = 0 constraint; returns (u, p)."""
    g = phi.grid
    per = g.periodic_x
    h_c = phi.h_fs()
    h_u = _to_u_faces(h_c, per)
    h_v = _to_v_faces(h_c)
    rho_u = _to_u_faces(rho.values, per)
    rho_v = _to_v_faces(rho.values)

    b_div = kernels.div_faces(h_u * u_star.u, h_v * u_star.v, g.dx, g.dy)
    char = float(np.max(np.abs(b_div)))
    if char == 0.0:
        p0 = p_guess.values.copy() if p_guess is not None else np.zeros((g.ny, g.nx))
        return u_star.copy(), ScalarField(g, p0 - p0.mean())

    bx = np.where(h_u >= H_MIN, h_u / rho_u, 0.0)
    by = np.where(h_v >= H_MIN, h_v / rho_v, 0.0)
    if not per:
        bx[:, 0] = 0.0
        bx[:, -1] = 0.0
    by[0, :] = 0.0
    by[-1, :] = 0.0

    rhs = -(b_div / dt)
    x0 = p_guess.values.copy() if p_guess is not None else np.zeros((g.ny, g.nx))
    tol_cg = rtol * char / dt
    maxiter = 10 * g.nx * g.ny
    p, iters, res, ok = _projection_solver.solve(
        rhs, bx, by, g.dx, g.dy, x0, tol_cg, maxiter, per
    )
    if not ok:
        raise NoConvergence(iters, res * dt)

    u = u_star.u.copy()
    v = u_star.v.copy()
    if per:
        pp = _pad_x(p, True)
        u -= dt / rho_u * (pp[:, 1:] - pp[:, :-1]) / g.dx
        u[:, -1] = u[:, 0]
    else:
        u[:, 1:-1] -= dt / rho_u[:, 1:-1] * (p[:, 1:] - p[:, :-1]) / g.dx
    v[1:-1, :] -= dt / rho_v[1:-1, :] * (p[1:, :] - p[:-1, :]) / g.dy

    u[h_u < H_MIN] = 0.0
    v[h_v < H_MIN] = 0.0
    p = p - p.mean()
    return VectorField(g, u, v), ScalarField(g, p)


def step_flow(flow: FlowState, phi: PhaseState, dt: float) -> FlowState:
    """Property interpolation, predictor and projection for one time step."""
    u_star = momentum_predictor(flow, phi, dt)
    rho = interpolate_density(phi.phi_tilde, flow.props)
    vel, p = pressure_projection(u_star, phi, rho, dt, p_guess=flow.pressure)
    return FlowState(vel, p, flow.props)
