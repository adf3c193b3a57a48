import numpy as np
import pytest

from drypore.analysis import (
    Diagnostics, ProfileSeries, binder_ratio, breakthrough_time,
    dimensionless_numbers, gradient_slope, x_average,
)
from drypore.errors import DegenerateFit, EmptyProfile
from drypore.grid import Grid, ScalarField


def test_profile_validation():
    with pytest.raises(ValueError):
        ProfileSeries([0.0, 1.0], [1.0])
    with pytest.raises(ValueError):
        ProfileSeries([0.0, 1.0, 0.5], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        ProfileSeries([0.0, 1.0], [1.0, np.nan])


def test_diagnostics_dict():
    d = Diagnostics(m=1.5, t_breakthrough=None, Ca=0.1, Pe=3.0)
    assert d.as_dict() == {"m": 1.5, "t_breakthrough": None, "Ca": 0.1, "Pe": 3.0}


def test_x_average_of_linear_field():
    g = Grid(8, 16, 0.125, 0.125)
    vals = g.y_centers()[:, None] * np.ones((g.ny, g.nx))
    prof = x_average(ScalarField(g, vals), time=2.0)
    assert prof.time == 2.0
    assert np.allclose(prof.values, g.y_centers())


def test_binder_ratio_truncates_and_divides():
    y = np.linspace(0.05, 0.95, 10)
    p0 = ProfileSeries(y, np.full(10, 2.0))
    end_vals = np.where(y < 0.6, 4.0, 0.0)
    p_end = ProfileSeries(y, end_vals, time=1.0)
    r = binder_ratio(p_end, p0, threshold=0.1)
    assert r.y.max() < 0.6
    assert np.allclose(r.values, 2.0)
    assert r.time == 1.0


def test_binder_ratio_skips_empty_reference_rows():
    y = np.linspace(0.05, 0.95, 10)
    ref = np.where(y < 0.5, 2.0, 0.0)
    end = np.where(y < 0.7, 1.0, 0.0)
    r = binder_ratio(ProfileSeries(y, end), ProfileSeries(y, ref), threshold=0.1)
    assert np.all(r.y < 0.5)


def test_binder_ratio_errors():
    y = np.linspace(0.0, 1.0, 5)
    zero = ProfileSeries(y, np.zeros(5))
    one = ProfileSeries(y, np.ones(5))
    with pytest.raises(EmptyProfile):
        binder_ratio(zero, one, threshold=0.1)
    with pytest.raises(EmptyProfile):
        binder_ratio(one, zero, threshold=0.1)
    with pytest.raises(ValueError):
        binder_ratio(one, ProfileSeries(y + 0.5, np.ones(5)), threshold=0.1)


def test_gradient_slope_linear_profile():
    y = np.linspace(0.1, 0.9, 9)
    l_y = 2.0
    prof = ProfileSeries(y, 1.0 + 3.0 * y / l_y)
    assert gradient_slope(prof, l_y) == pytest.approx(3.0)


def test_gradient_slope_degenerate():
    with pytest.raises(DegenerateFit):
        gradient_slope(ProfileSeries([0.0, 1.0], [1.0, 2.0]), 1.0)


def test_breakthrough_detection():
    g = Grid(4, 4, 0.25, 0.25)
    solid = np.zeros((4, 4))
    solid[0, :2] = 1.0   # two solid cells in the bottom row
    wet = np.ones((4, 4))
    dry = wet.copy()
    dry[0, 3] = 0.2      # air reaches a pore cell in the bottom row
    times = [0.0, 1.0, 2.0]
    hist = [wet, wet, dry]
    assert breakthrough_time(times, hist, ScalarField(g, solid)) == 2.0
    assert breakthrough_time(times, [wet] * 3, ScalarField(g, solid)) is None
    all_solid = ScalarField(g, np.ones((4, 4)))
    assert breakthrough_time(times, hist, all_solid) is None


def test_breakthrough_ignores_solid_cells():
    g = Grid(4, 4, 0.25, 0.25)
    solid = np.zeros((4, 4))
    solid[0, 0] = 1.0
    frame = np.ones((4, 4))
    frame[0, 0] = 0.0    # dry only inside the solid cell
    assert breakthrough_time([0.0], [frame], ScalarField(g, solid)) is None


def test_dimensionless_numbers():
    ca, pe = dimensionless_numbers(
        mu_solvent=2.0, sigma=4.0, kappa=3.0, l_y=0.5, diffusivity=0.25
    )
    assert ca == pytest.approx(2.0 * 3.0 * 0.5 / 4.0)
    assert pe == pytest.approx(3.0 * 0.25 / 0.25)
    ca0, pe0 = dimensionless_numbers(2.0, 4.0, 0.0, 0.5, 0.25)
    assert pe0 == 0.0
    with pytest.raises(ZeroDivisionError):
        dimensionless_numbers(2.0, 0.0, 3.0, 0.5, 0.25)
    with pytest.raises(ZeroDivisionError):
        dimensionless_numbers(2.0, 4.0, 3.0, 0.5, 0.0)
