"""Time-loop orchestration, snapshot output and sweeps."""

from __future__ import annotations

import csv
import json
import math
import os
import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import analysis, phase as phase_mod
from .binder import BinderState, binder_dt_bound, interpolated_concentration
from .config import SimConfig
from .errors import ConfigError, DryporeError
from .flow import FlowState, flow_dt_bound, step_flow
from .grid import ScalarField, integrate
from .phase import PhaseState, advective_dt_bound, phase_dt_bound, step_phase
from .structure import Microstructure, generate_packing, initialize_state, load_mask
from .binder import step_binder

DRYOUT_FRACTION = 1e-4


@dataclass
class RunManifest:
    config: dict
    records: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    termination: str = ""
    wallclock: float = 0.0
    provenance: dict = field(default_factory=dict)
    error: str = ""

    def write(self, out_dir: str):
        path = os.path.join(out_dir, "manifest.json")
        with open(path, "w") as fh:
            json.dump(
                {
                    "config": self.config,
                    "provenance": self.provenance,
                    "records": self.records,
                    "diagnostics": self.diagnostics,
                    "termination": self.termination,
                    "wallclock": self.wallclock,
                    "error": self.error,
                },
                fh,
                indent=1,
            )


def build_microstructure(cfg: SimConfig) -> Microstructure:
    grid = cfg.grid()
    eps = cfg.resolved_epsilon()
    if cfg.source == "mask":
        return load_mask(cfg.mask_path, grid, eps)
    if cfg.source == "packing":
        return generate_packing(
            cfg.seed, grid, cfg.mean_diameter, cfg.diameter_cv, cfg.target_chi, eps
        )
    if cfg.source == "walls":
        mask = np.zeros((grid.ny, grid.nx), dtype=bool)
        w = cfg.wall_cells
        mask[:, :w] = True
        mask[:, grid.nx - w :] = True
        from .structure import _measure_chi, _smooth

        phi = _smooth(mask, grid, eps)
        return Microstructure(
            ScalarField(grid, phi), _measure_chi(phi),
            {"kind": "walls", "wall_cells": w},
        )
    return Microstructure(
        ScalarField.zeros(grid), 0.0, {"kind": "none"}
    )


def build_initial(cfg: SimConfig):
    micro = build_microstructure(cfg)
    params = cfg.phase_params()
    phase, binder = initialize_state(
        micro, params, cfg.c0, cfg.binder_params(), cfg.resolved_fill_height()
    )
    if cfg.init == "circle":
        grid = cfg.grid()
        xm, ym = grid.cell_mesh()
        r = np.hypot(xm - cfg.circle_x, ym - cfg.circle_y)
        vals = 0.5 * (1.0 - np.tanh(3.0 * (r - cfg.circle_r) / params.epsilon))
        phase = PhaseState(phase.phi_solid, ScalarField(grid, vals), params)
        binder = BinderState.uniform(phase, cfg.c0, cfg.binder_params())
    flow = FlowState.quiescent(cfg.grid(), cfg.fluid_props())
    return micro, phase, flow, binder


def compute_dt(cfg: SimConfig, phase: PhaseState, flow: FlowState, remaining: float):
    if cfg.dt > 0:
        return min(cfg.dt, remaining)
    bound = min(
        phase_dt_bound(phase),
        flow_dt_bound(flow, phase),
        binder_dt_bound(cfg.binder_params(), phase.grid),
    )
    v_e = phase_mod.evaporation_velocity(phase.params)
    umax = flow.velocity.max_abs() + v_e
    if umax > 0:
        bound = min(bound, 0.5 * min(phase.grid.dx, phase.grid.dy) / umax)
    return min(cfg.safety * bound, remaining)


def write_snapshot_csv(path: str, name: str, f: ScalarField, t: float):
    g = f.grid
    xs = g.x_centers()
    ys = g.y_centers()
    xg, yg = np.meshgrid(xs, ys)
    rows = np.column_stack([xg.ravel(), yg.ravel(), f.values.ravel()])
    with open(path, "w", newline="") as fh:
        fh.write(f"# field={name} time={t!r} nx={g.nx} ny={g.ny}\n")
        fh.write("x,y,value\n")
        np.savetxt(fh, rows, fmt="%.17g", delimiter=",")


def write_snapshot_vtk(path: str, name: str, f: ScalarField, t: float):
    g = f.grid
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 2.0\n")
        fh.write(f"{name} t={t!r}\n")
        fh.write("ASCII\nDATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {g.nx} {g.ny} 1\n")
        fh.write(f"ORIGIN {g.origin[0]} {g.origin[1]} 0\n")
        fh.write(f"SPACING {g.dx} {g.dy} 1\n")
        fh.write(f"POINT_DATA {g.nx * g.ny}\n")
        fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
        for j in range(g.ny):
            for i in range(g.nx):
                fh.write(f"{f.values[j, i]!r}\n")


def _snapshot(cfg, out_dir, index, t, phase, flow, binder):
    fields = {
        "phi_tilde": phase.phi_tilde,
        "concentration": interpolated_concentration(binder),
        "deposited": binder.deposited,
        "pressure": flow.pressure,
    }
    for name, f in fields.items():
        write_snapshot_csv(
            os.path.join(out_dir, f"snap_{index:04d}_{name}.csv"), name, f, t
        )
        if cfg.write_vtk:
            write_snapshot_vtk(
                os.path.join(out_dir, f"snap_{index:04d}_{name}.vtk"), name, f, t
            )


def _record(t, phase, flow, binder, breakthrough):
    g = phase.grid
    phi_total = integrate(phase.phi_tilde)
    com_y = None
    if phi_total > 0:
        ys = g.y_centers()
        weighted = ScalarField(g, phase.phi_tilde.values * ys[:, None])
        com_y = integrate(weighted) / phi_total
    return {
        "t": t,
        "t_hat": None,
        "phi_total": phi_total,
        "phi_com_y": com_y,
        "binder_total": binder.total_mass(),
        "umax": flow.velocity.max_abs(),
        "breakthrough": breakthrough,
    }


def run(cfg: SimConfig, progress=None) -> RunManifest:
    t0_wall = _time.perf_counter()
    out_dir = cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    micro, phase, flow, binder = build_initial(cfg)
    manifest = RunManifest(config=cfg.as_dict(), provenance=micro.provenance)

    rule = cfg.boundary_rule
    snap_dt = cfg.snapshot_interval if cfg.snapshot_interval > 0 else cfg.t_end / 10.0
    t = 0.0
    step = 0
    snap_index = 0
    next_snap = snap_dt
    phi_total0 = integrate(phase.phi_tilde)
    profile0 = analysis.x_average(interpolated_concentration(binder), 0.0)
    t_breakthrough = None
    termination = "t_end"

    pore_bottom = phase.phi_solid.values[0, :] < 0.5
    loss_mark = None  # (m, t_hat, loss) at the measure_loss crossing
    _snapshot(cfg, out_dir, snap_index, t, phase, flow, binder)
    snap_index += 1
    manifest.records.append(_record(t, phase, flow, binder, False))

    try:
        flow_acc = 0.0
        while t < cfg.t_end * (1.0 - 1e-12):
            dt = compute_dt(cfg, phase, flow, cfg.t_end - t)
            phase = step_phase(phase, flow.velocity, dt, rule)
            flow_acc += dt
            if step % cfg.flow_interval == 0:
                # the flow is quasi-steady on the phase time step; advance it
                # by the accumulated interval, capped by its own bounds
                fdt = min(flow_acc, cfg.safety * flow_dt_bound(flow, phase))
                flow = step_flow(flow, phase, fdt)
                flow_acc = 0.0
            binder = step_binder(binder, phase, flow.velocity, dt, rule)
            t += dt
            step += 1

            if t_breakthrough is None and np.any(pore_bottom) and np.any(
                phase.phi_tilde.values[0, pore_bottom] < 0.5
            ):
                t_breakthrough = t

            if loss_mark is None and not math.isnan(cfg.measure_loss):
                loss = 1.0 - integrate(phase.phi_tilde) / phi_total0
                if loss >= cfg.measure_loss:
                    prof = analysis.x_average(interpolated_concentration(binder), t)
                    try:
                        ratio = analysis.binder_ratio(prof, profile0, 1e-3 * cfg.c0)
                        m_now = analysis.gradient_slope(ratio, cfg.resolved_l_y())
                    except DryporeError:
                        m_now = None
                    loss_mark = (m_now, t * cfg.time_scale, loss)

            if t >= next_snap * (1.0 - 1e-12):
                _snapshot(cfg, out_dir, snap_index, t, phase, flow, binder)
                snap_index += 1
                next_snap += snap_dt
                manifest.records.append(
                    _record(t, phase, flow, binder, t_breakthrough is not None)
                )
                if progress is not None:
                    progress(t, step)

            if cfg.stop_on_dryout and integrate(phase.phi_tilde) < (
                DRYOUT_FRACTION * phi_total0
            ):
                termination = "dryout"
                break
            if (
                cfg.stop_on_breakthrough
                and t_breakthrough is not None
                and t >= t_breakthrough * (1.0 + cfg.breakthrough_grace)
            ):
                termination = "breakthrough"
                break
    except DryporeError as exc:
        manifest.error = f"{type(exc).__name__}: {exc}"
        manifest.termination = "error"
        manifest.wallclock = _time.perf_counter() - t0_wall
        manifest.write(out_dir)
        raise

    if manifest.records[-1]["t"] < t * (1.0 - 1e-12):
        _snapshot(cfg, out_dir, snap_index, t, phase, flow, binder)
        manifest.records.append(
            _record(t, phase, flow, binder, t_breakthrough is not None)
        )
    for rec in manifest.records:
        rec["t_hat"] = rec["t"] * cfg.time_scale

    # final diagnostics
    diag = analysis.Diagnostics()
    profile_end = analysis.x_average(interpolated_concentration(binder), t)
    try:
        ratio = analysis.binder_ratio(profile_end, profile0, 1e-3 * cfg.c0)
        diag.m = analysis.gradient_slope(ratio, cfg.resolved_l_y())
    except DryporeError:
        diag.m = None
    if t_breakthrough is not None:
        diag.t_breakthrough = t_breakthrough * cfg.time_scale
    if cfg.sigma > 0:
        try:
            diag.Ca, diag.Pe = analysis.dimensionless_numbers(
                cfg.mu_solvent, cfg.sigma, cfg.kappa, cfg.resolved_l_y(),
                cfg.diffusivity,
            )
        except ZeroDivisionError:
            pass
    manifest.diagnostics = diag.as_dict()
    manifest.diagnostics["steps"] = step
    if loss_mark is not None:
        manifest.diagnostics["m_at_loss"] = loss_mark[0]
        manifest.diagnostics["t_hat_at_loss"] = loss_mark[1]
        manifest.diagnostics["loss_at_measure"] = loss_mark[2]
    manifest.termination = termination
    manifest.wallclock = _time.perf_counter() - t0_wall
    manifest.write(out_dir)
    return manifest


# sweep axes: name -> (config field update from value)
def _axis_k_evap(cfg, v):
    if cfg.kappa_unit <= 0:
        raise ConfigError("k_evap axis needs kappa_unit in the config")
    return cfg.replace(kappa=v * cfg.kappa_unit, t_end=1.5 / (v * cfg.kappa_unit),
                       time_scale=v * cfg.kappa_unit)


def _axis_k_viscosity(cfg, v):
    if cfg.mu_unit <= 0:
        raise ConfigError("k_viscosity axis needs mu_unit in the config")
    return cfg.replace(mu_solvent=v * cfg.mu_unit)


def _axis_k_surf(cfg, v):
    if cfg.sigma_unit <= 0:
        raise ConfigError("k_surf axis needs sigma_unit in the config")
    return cfg.replace(sigma=v * cfg.sigma_unit)


SWEEP_AXES = {
    "k_evap": _axis_k_evap,
    "k_viscosity": _axis_k_viscosity,
    "k_surf": _axis_k_surf,
    "theta": lambda cfg, v: cfg.replace(theta_deg=v),
    "seed": lambda cfg, v: cfg.replace(seed=int(v)),
    "kappa": lambda cfg, v: cfg.replace(kappa=v),
}


def sweep(cfg: SimConfig, axis: str, values, progress=None) -> list:
    if axis not in SWEEP_AXES:
        raise ConfigError(
            f"unknown sweep axis {axis!r}; known: {sorted(SWEEP_AXES)}"
        )
    base_out = cfg.out_dir
    os.makedirs(base_out, exist_ok=True)
    results = []
    rows = []
    for v in values:
        sub = SWEEP_AXES[axis](cfg, v)
        sub = sub.replace(out_dir=os.path.join(base_out, f"{axis}_{v:g}"))
        try:
            manifest = run(sub, progress=progress)
            results.append(manifest)
            rows.append(
                [v, manifest.diagnostics.get("m"),
                 manifest.diagnostics.get("t_breakthrough"), ""]
            )
        except DryporeError as exc:
            results.append(None)
            rows.append([v, None, None, f"{type(exc).__name__}: {exc}"])
    with open(os.path.join(base_out, "sweep.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["value", "m", "t_breakthrough", "error"])
        w.writerows(rows)
    return results
