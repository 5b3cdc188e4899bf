import math
import warnings

import numpy as np
import pytest

from porelbm.boundaries import DriveSpec
from porelbm.driver import (RunConfig, measure_permeability, peak_position, porous_region_velocity,
                            relative_change, reynolds, run_to_steady)
from porelbm.geometry import channel_geometry, sphere_in_box
from porelbm.lattice import NumericalInstability, set_relaxation_from_magic
from porelbm.profiles import ProfileData


def channel_cfg(h=16, nu=1 / 6, g=1e-6, **kw):
    geom = channel_geometry((1, 1, h))
    drive = DriveSpec("body_force", (g, 0.0, 0.0))
    return RunConfig(geom, set_relaxation_from_magic(nu, 3 / 16), drive, "sbb", **kw)


def test_relative_change():
    a = np.array([1.0, 2.0])
    assert relative_change(a, a) == 0.0
    assert relative_change(np.array([1.0, 2.1]), a) == pytest.approx(0.1 / 2.1)
    assert relative_change(np.zeros(2), np.zeros(2)) == 0.0
    assert relative_change(np.zeros(2), a) == math.inf


def test_config_validation():
    with pytest.raises(ValueError):
        channel_cfg(tol=0.0)
    with pytest.raises(ValueError):
        channel_cfg(max_steps=0)
    with pytest.raises(ValueError):
        RunConfig(channel_geometry((1, 1, 4)), set_relaxation_from_magic(0.1, 0.25), scheme="bgk")


def test_channel_reaches_parabola():
    res = run_to_steady(channel_cfg(tol=1e-12, check_interval=500))
    assert res.stats.converged
    z = res.profile.z
    exact = 1e-6 / (2 / 6) * z * (16 - z)
    assert np.abs(res.profile.u_superficial / exact - 1).max() < 1e-8
    assert res.profile.meta["G"] == 1e-6 and res.profile.meta["steps"] == res.stats.steps


def test_unconverged_is_flagged():
    res = run_to_steady(channel_cfg(tol=1e-12, check_interval=10, max_steps=30))
    assert not res.stats.converged and res.stats.steps == 30
    assert res.profile.meta["converged"] == 0


def test_warm_start_converges_at_once():
    cfg = channel_cfg(tol=1e-12, check_interval=500)
    first = run_to_steady(cfg)
    again = run_to_steady(cfg, first.field)
    assert again.stats.converged and again.stats.steps == 500


def test_runaway_drive_raises():
    with pytest.raises(NumericalInstability):
        run_to_steady(channel_cfg(g=5e-2, check_interval=50, max_steps=5000))


def test_channel_permeability_is_exact():
    h = 16
    res = run_to_steady(channel_cfg(h, tol=1e-12, check_interval=500))
    z = np.arange(h) + 0.5
    k_exact = np.mean(z * (h - z)) / 2.0  # mu U / G for the cell-averaged parabola
    assert measure_permeability(res.profile, 1 / 6, 1e-6) == pytest.approx(k_exact, rel=1e-8)


def test_permeability_window_checks():
    prof = ProfileData(np.arange(4) + 0.5, np.ones(4), None, np.array([0.4, 0.4, 0.8, 1.0]))
    with pytest.raises(ValueError):
        measure_permeability(prof, 0.1, 0.0)
    with pytest.raises(ValueError):
        measure_permeability(prof, 0.1, 1e-6, (10, 20))
    with pytest.warns(UserWarning, match="plateau"):
        measure_permeability(prof, 0.1, 1e-6)
    assert measure_permeability(prof, 0.1, 1e-6, (0, 2)) == pytest.approx(1e5)


def test_reynolds_and_porous_velocity():
    prof = ProfileData(np.arange(4) + 0.5, [0.1, 0.2, 0.5, 1.0], None, [0.4, 0.5, 1.0, 1.0])
    assert reynolds(prof, 8, 0.1) == pytest.approx(80.0)
    assert porous_region_velocity(prof) == pytest.approx(0.15)


@pytest.mark.slow
def test_dilute_sphere_array_permeability():
    # simple cubic array: drag of a sphere with the first periodic correction
    a, n = 3.0, 20
    geom = sphere_in_box(n, 2 * a)
    drive = DriveSpec("body_force", (1e-6, 0.0, 0.0), (True, True, True), 0)
    cfg = RunConfig(geom, set_relaxation_from_magic(0.5, 0.25), drive, "cli", 1e-7, 250, 50_000)
    res = run_to_steady(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        k = measure_permeability(res.profile, 0.5, 1e-6)
    c = (4.0 / 3.0) * math.pi * a ** 3 / n ** 3
    k_ref = (1 - c) * n ** 3 / (6 * math.pi * a) * (1 - 1.7601 * c ** (1 / 3))
    assert abs(k / k_ref - 1) < 0.15


def test_peak_position_sub_cell():
    z = np.arange(10) + 0.5
    prof = ProfileData(z, -(z - 6.3) ** 2 + 50.0)
    assert peak_position(prof) == pytest.approx(6.3, abs=1e-12)
    edge = ProfileData(z, z.copy())
    assert peak_position(edge) == z[-1]
