import numpy as np
import pytest
from hypothesis import given, strategies as st

from porelbm.boundaries import (BoundaryLink, DriveMode, DriveSpec, LinkSet, apply_cli, apply_sbb,
                                cli_coefficient, find_links, resolve_drive)
from porelbm.lattice import E, OPP, W


def test_cli_coefficient_values():
    assert cli_coefficient(0.5) == 0.0
    assert cli_coefficient(0.25) == pytest.approx(1.0 / 3.0)
    assert cli_coefficient(1.0) == pytest.approx(-1.0 / 3.0)


@given(st.floats(0.01, 1.0))
def test_cli_coefficient_bounded(q):
    assert -1.0 / 3.0 - 1e-15 <= cli_coefficient(q) < 1.0


def test_sbb_reflects_population(rng):
    f = rng.normal(size=(19, 3, 3, 3))
    out = np.zeros_like(f)
    apply_sbb(f, out, BoundaryLink((1, 1, 1), 5, 0.5))
    assert out[OPP[5], 1, 1, 1] == f[5, 1, 1, 1]


def test_cli_at_half_equals_sbb(rng):
    f = rng.normal(size=(19, 4, 4, 4))
    a, b = np.zeros_like(f), np.zeros_like(f)
    link = BoundaryLink((2, 2, 2), 3, 0.5, (1, 2, 2))
    apply_sbb(f, a, link)
    assert apply_cli(f, b, link)
    assert np.array_equal(a, b)


def test_cli_interpolates(rng):
    f = rng.normal(size=(19, 4, 4, 4))
    out = np.zeros_like(f)
    k = 1
    link = BoundaryLink((2, 1, 1), k, 0.25, (1, 1, 1))
    apply_cli(f, out, link)
    c = 1.0 / 3.0
    expect = c * f[k, 1, 1, 1] - c * f[OPP[k], 2, 1, 1] + f[k, 2, 1, 1]
    assert out[OPP[k], 2, 1, 1] == pytest.approx(expect, rel=1e-15)


def test_cli_fallback_without_second_node(rng):
    f = rng.normal(size=(19, 2, 2, 2))
    out = np.zeros_like(f)
    assert not apply_cli(f, out, BoundaryLink((0, 0, 0), 1, 0.3, None))
    assert out[OPP[1], 0, 0, 0] == f[1, 0, 0, 0]


def test_invalid_q_rejected():
    with pytest.raises(ValueError):
        BoundaryLink((0, 0, 0), 1, 0.0)
    with pytest.raises(ValueError):
        LinkSet([0], [1], [1.5], [-1], (1, 1, 1))


def test_channel_links():
    flags = np.zeros((1, 1, 6), dtype=np.uint8)
    links = find_links(flags, (True, True, False))
    # five directions point down out of the bottom plane, five up out of the top plane
    assert len(links) == 10
    assert np.all(links.q == 0.5)
    assert links.fallback_count == 0
    thin = find_links(np.zeros((1, 1, 1), dtype=np.uint8), (True, True, False))
    assert thin.fallback_count == len(thin) == 10


def test_linkset_kernels_match_reference(rng):
    flags = np.zeros((3, 3, 5), dtype=np.uint8)
    flags[1, 1, 2] = 1
    q_of = lambda cells, k, nb: rng.uniform(0.1, 1.0, size=len(cells))
    links = find_links(flags, (True, True, False), q_of)
    src = rng.normal(size=(19, flags.size))
    for scheme in ("sbb", "cli"):
        links.use(scheme)
        dst = np.zeros_like(src)
        links.apply(src, dst)
        ref = np.zeros((19,) + flags.shape)
        for lk in links.links():
            view = src.reshape((19,) + flags.shape)
            (apply_sbb if scheme == "sbb" else apply_cli)(view, ref, lk)
        assert np.allclose(dst, ref.reshape(19, -1), atol=1e-15)


def test_moving_wall_term():
    flags = np.zeros((1, 1, 4), dtype=np.uint8)
    links = find_links(flags, (True, True, False)).use("sbb")
    links.set_wall_velocity((0.01, 0.0, 0.0))
    expect = -2.0 * W[links.k] * (E[links.k] @ np.array([0.01, 0.0, 0.0])) * 3.0
    assert np.allclose(links.wall_term, expect)


def test_pressure_drive_conversion():
    # pressure difference of 1e-6 over a 200-cell period
    spec = DriveSpec(DriveMode.PRESSURE_GRADIENT_AS_FORCE, (1e-6, 0.0, 0.0), (True, True, False), 0)
    assert resolve_drive(spec, 200) == pytest.approx((5e-9, 0.0, 0.0), abs=1e-24)
    body = DriveSpec("body_force", (1e-6, 0.0, 0.0))
    assert resolve_drive(body) == (1e-6, 0.0, 0.0)


def test_pressure_drive_needs_periodic_axis():
    with pytest.raises(ValueError):
        DriveSpec("pressure_gradient", (1e-6, 0, 0), (False, True, False), 0)
    with pytest.raises(ValueError):
        DriveSpec("body_force", (np.nan, 0, 0))
