"""Run diagnostics: profiles, binder gradient, breakthrough time, Ca and Pe."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFit, EmptyProfile
from .grid import ScalarField


@dataclass
class ProfileSeries:
    y: np.ndarray
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.y.shape != self.values.shape:
            raise ValueError("y and values must have matching shapes")
        if self.y.size > 1 and not np.all(np.diff(self.y) > 0):
            raise ValueError("y must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile values must be finite")


@dataclass
class Diagnostics:
    m: float | None = None
    t_breakthrough: float | None = None
    Ca: float | None = None
    Pe: float | None = None

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "t_breakthrough": self.t_breakthrough,
            "Ca": self.Ca,
            "Pe": self.Pe,
        }


def x_average(field: ScalarField, time: float = 0.0) -> ProfileSeries:
    g = field.grid
    vals = field.values.sum(axis=1) / g.nx
    return ProfileSeries(g.y_centers(), vals, time)


def binder_ratio(
    p_end: ProfileSeries, p_0: ProfileSeries, threshold: float
) -> ProfileSeries:
    if p_end.y.shape != p_0.y.shape or not np.allclose(p_end.y, p_0.y):
        raise ValueError("profiles live on different y-grids")
    above = np.nonzero(p_end.values > threshold)[0]
    if above.size == 0:
        raise EmptyProfile("no row exceeds the truncation threshold")
    last = above[-1]
    keep = p_0.values[: last + 1] > threshold
    if not np.any(keep):
        raise EmptyProfile("no reference row exceeds the truncation threshold")
    y = p_end.y[: last + 1][keep]
    r = p_end.values[: last + 1][keep] / p_0.values[: last + 1][keep]
    return ProfileSeries(y, r, p_end.time)


def gradient_slope(profile: ProfileSeries, l_y_film: float) -> float:
    """Least-squares slope of the ratio profile against y / l_y_film."""
    if profile.y.size < 3:
        raise DegenerateFit("need at least 3 points for a slope")
    yhat = profile.y / l_y_film
    if np.ptp(yhat) == 0.0:
        raise DegenerateFit("all y values identical")
    slope, _ = np.polyfit(yhat, profile.values, 1)
    return float(slope)


def breakthrough_time(
    times, phi_tilde_history, phi_solid: ScalarField
) -> float | None:
    """First time air (phi~ < 0.5) appears in a pore cell of the bottom row."""
    pore = phi_solid.values[0, :] < 0.5
    if not np.any(pore):
        return None
    for t, phi in zip(times, phi_tilde_history):
        vals = phi.values if isinstance(phi, ScalarField) else np.asarray(phi)
        if np.any(vals[0, pore] < 0.5):
            return float(t)
    return None


def dimensionless_numbers(
    mu_solvent: float, sigma: float, kappa: float, l_y: float, diffusivity: float
) -> tuple[float, float]:
    """Capillary number with u = kappa*l_y, and evaporative Peclet number."""
    if sigma <= 0:
        raise ZeroDivisionError("sigma must be positive for Ca")
    u_bar = kappa * l_y
    ca = mu_solvent * u_bar / sigma
    if kappa == 0.0:
        return ca, 0.0
    if diffusivity <= 0:
        raise ZeroDivisionError("diffusivity must be positive for Pe")
    pe = kappa * l_y**2 / diffusivity
    return ca, pe
