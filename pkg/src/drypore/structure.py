"""Microstructure ingestion and generation.

Segmented electrode masks arrive as binary PGM (P5) images; synthetic
desk-scale stand-ins are built by random sequential adsorption of
non-overlapping circles with lognormal diameters. Both paths end in the
same diffuse-solid representation: a signed-distance tanh profile with
the interface width shared with the fluid phase field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .binder import BinderParams, BinderState
from .errors import DimensionMismatch, MalformedFile, PackingFailed
from .grid import Grid, ScalarField
from .phase import PhaseParams, PhaseState


@dataclass(frozen=True)
class CoatingData:
    rho_solid: float      # kg/m^3
    chi_solid: float      # solid volume fraction
    M_S: float            # dry area weight, kg/m^2
    rho_solvent: float    # kg/m^3
    r_dot: float          # evaporation rate, kg/m^2/s

    def __post_init__(self):
        if min(self.rho_solid, self.M_S, self.rho_solvent) <= 0:
            raise ValueError("coating data must be positive")
        if not 0.0 < self.chi_solid < 1.0:
            raise ValueError("chi_solid must lie in (0, 1)")
        if self.r_dot < 0:
            raise ValueError("r_dot must be non-negative")


def compute_kappa(data: CoatingData) -> float:
    """Evaporation factor kappa [1/s] from the coating recipe."""
    return data.rho_solid * data.chi_solid / (data.rho_solvent * data.M_S) * data.r_dot


@dataclass
class Microstructure:
    phi_solid: ScalarField
    measured_chi: float
    provenance: dict

    def __post_init__(self):
        v = self.phi_solid.values
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("phi_solid out of [0, 1]")


def _smooth(mask: np.ndarray, grid: Grid, epsilon: float) -> np.ndarray:
    """Binary mask -> diffuse solid field via signed-distance tanh profile."""
    solid = mask.astype(bool)
    if solid.all():
        return np.ones(mask.shape)
    if not solid.any():
        return np.zeros(mask.shape)
    sampling = (grid.dy, grid.dx)
    d_out = ndimage.distance_transform_edt(~solid, sampling=sampling)
    d_in = ndimage.distance_transform_edt(solid, sampling=sampling)
    d = d_out - d_in  # positive outside the solid
    return 0.5 * (1.0 - np.tanh(3.0 * d / epsilon))


def _measure_chi(phi_solid: np.ndarray) -> float:
    return float(np.mean(phi_solid))


def load_mask(path: str, grid: Grid, epsilon: float) -> Microstructure:
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    i = 0
    while len(tokens) < 4 and i < len(data):
        # PGM header tokens with '#' comments allowed
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < len(data) and not data[i : i + 1].isspace():
            i += 1
        if i > start:
            tokens.append(data[start:i])
    if len(tokens) < 4 or tokens[0] != b"P5":
        raise MalformedFile(f"{path}: not a binary PGM (P5) file")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise MalformedFile(f"{path}: bad PGM header") from exc
    if maxval != 255:
        raise MalformedFile(f"{path}: expected 8-bit PGM, maxval={maxval}")
    if (width, height) != (grid.nx, grid.ny):
        raise DimensionMismatch(
            f"mask is {width}x{height}, grid is {grid.nx}x{grid.ny}"
        )
    body = data[i + 1 :]
    if len(body) < width * height:
        raise MalformedFile(f"{path}: truncated pixel data")
    pixels = np.frombuffer(body, dtype=np.uint8, count=width * height)
    mask = pixels.reshape(height, width) >= 128
    phi = _smooth(mask, grid, epsilon)
    return Microstructure(
        ScalarField(grid, phi), _measure_chi(phi), {"kind": "mask", "path": str(path)}
    )


def generate_packing(
    seed: int,
    grid: Grid,
    mean_diameter: float,
    diameter_cv: float,
    target_chi: float,
    epsilon: float,
    max_attempts: int = 20000,
) -> Microstructure:
    """RSA circle packing with lognormal diameters, smoothed to a diffuse field."""
    if not 0.2 < target_chi < 0.65:
        raise ValueError("target_chi must lie in (0.2, 0.65)")
    rng = np.random.default_rng(seed)
    mask = np.zeros((grid.ny, grid.nx), dtype=bool)
    xs = grid.x_centers()
    ys = grid.y_centers()
    xm, ym = np.meshgrid(xs, ys)

    # lognormal with the requested mean and coefficient of variation
    s2 = math.log(1.0 + diameter_cv**2)
    mu = math.log(mean_diameter) - 0.5 * s2
    sdev = math.sqrt(s2)

    gap = max(grid.dx, grid.dy)
    top_clear = grid.origin[1] + grid.ly - 2.0 * grid.dy
    centers = []  # (x, y, r)
    chi = 0.0
    tol = 0.02
    for _ in range(max_attempts):
        if chi >= target_chi - tol:
            break
        d = float(rng.lognormal(mu, sdev))
        r = 0.5 * d
        if 2.0 * r >= grid.ly:
            continue
        cx = grid.origin[0] + rng.uniform(0.0, grid.lx)
        cy = grid.origin[1] + rng.uniform(r, grid.ly - r)
        if cy + r > top_clear:
            continue
        ok = True
        for (px, py, pr) in centers:
            ddx = abs(cx - px)
            if grid.periodic_x:
                ddx = min(ddx, grid.lx - ddx)
            if math.hypot(ddx, cy - py) < r + pr + gap:
                ok = False
                break
        if not ok:
            continue
        centers.append((cx, cy, r))
        ddx = np.abs(xm - cx)
        if grid.periodic_x:
            ddx = np.minimum(ddx, grid.lx - ddx)
        mask |= ddx**2 + (ym - cy) ** 2 <= r**2
        chi = float(np.mean(mask))
    if chi < target_chi - tol:
        raise PackingFailed(target_chi, chi)

    phi = _smooth(mask, grid, epsilon)
    prov = {
        "kind": "packing",
        "seed": int(seed),
        "mean_diameter": mean_diameter,
        "diameter_cv": diameter_cv,
        "target_chi": target_chi,
        "n_particles": len(centers),
    }
    return Microstructure(ScalarField(grid, phi), _measure_chi(phi), prov)


def initialize_state(
    micro: Microstructure,
    params: PhaseParams,
    c0: float,
    binder_params: BinderParams | None = None,
    fill_height: float | None = None,
) -> tuple[PhaseState, BinderState]:
    """Solvent fills the pore space up to the wet-film height; binder uniform."""
    grid = micro.phi_solid.grid
    if fill_height is None:
        fill_height = params.l_y
    ys = grid.y_centers()
    cap = 0.5 * (1.0 - np.tanh(3.0 * (ys - fill_height) / params.epsilon))
    phi_tilde = np.broadcast_to(cap[:, None], (grid.ny, grid.nx)).copy()
    phase = PhaseState(micro.phi_solid.copy(), ScalarField(grid, phi_tilde), params)
    if binder_params is None:
        binder_params = BinderParams(diffusivity=0.0)
    binder = BinderState.uniform(phase, c0, binder_params)
    return phase, binder
