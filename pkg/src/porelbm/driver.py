"""Pore-scale runs: iterate to steady state, planar averages, permeability, sweeps."""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .boundaries import DriveMode, DriveSpec, resolve_drive
from .geometry import SpherePack, VoxelGeometry, voxelize
from .lattice import (LatticeField, FluidParams, NumericalInstability, check_stability, collide,
                      set_relaxation_from_magic, stream)
from .profiles import ProfileData, l2_distance, planar_average

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    geometry: VoxelGeometry
    fluid: FluidParams
    drive: DriveSpec = field(default_factory=DriveSpec)
    scheme: str = "cli"
    tol: float = 1e-8
    check_interval: int = 1000
    max_steps: int = 200_000
    source: str = "generated"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.check_interval < 1:
            raise ValueError(f"check_interval must be >= 1, got {self.check_interval}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.scheme not in ("sbb", "cli"):
            raise ValueError(f"unknown boundary scheme {self.scheme!r}")

    @property
    def body_force(self) -> tuple:
        axis = self.drive.stream_axis
        return resolve_drive(self.drive, self.geometry.dims[axis])


@dataclass
class RunStats:
    steps: int = 0
    converged: bool = False
    change: float = float("inf")
    wall_time: float = 0.0
    cells: int = 0
    fallback_links: int = 0
    boundary_links: int = 0

    @property
    def mlups(self) -> float:
        return self.cells * self.steps / self.wall_time / 1e6 if self.wall_time > 0 else 0.0

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["mlups"] = self.mlups
        return d


@dataclass
class RunResult:
    field: LatticeField
    profile: ProfileData
    stats: RunStats


def relative_change(new: np.ndarray, old: np.ndarray) -> float:
    scale = np.abs(new).max(initial=0.0)
    diff = np.abs(new - old).max(initial=0.0)
    if scale == 0.0:
        return 0.0 if diff == 0.0 else float("inf")
    return float(diff / scale)


def iterate_to_steady(advance, measure, tol, interval, max_steps, stats: RunStats):
    """Call ``advance(n)`` in blocks until the profile from ``measure()`` settles.

    ``measure`` returns ``(profile, velocity_field)``; the velocity field feeds
    the stability guard.  Returns the last profile.
    """
    prof, _ = measure()
    old = prof.u_superficial.copy()
    t0 = time.perf_counter()
    while stats.steps < max_steps:
        n = min(interval, max_steps - stats.steps)
        advance(n)
        stats.steps += n
        prof, u = measure()
        check_stability(u)
        stats.change = relative_change(prof.u_superficial, old)
        old = prof.u_superficial.copy()
        if stats.change < tol:
            stats.converged = True
            break
    stats.wall_time += time.perf_counter() - t0
    return prof


def dns_profile(fld: LatticeField, force, axis=0, meta=None) -> tuple:
    _, u = fld.density_velocity(force)
    sup, intr, eps = planar_average(u[axis], fld.fluid)
    prof = ProfileData(np.arange(fld.dims[2]) + 0.5, sup, intr, eps,
                       {"height": float(fld.dims[2]), **(meta or {})})
    return prof, u


def run_to_steady(cfg: RunConfig, fld: LatticeField | None = None) -> RunResult:
    """Collide-stream until the planar profile stops changing.

    The stop rule is ``max|U_new - U_old| / max|U_new| < tol`` between checks
    ``check_interval`` steps apart.  Hitting ``max_steps`` leaves
    ``stats.converged`` False.  ``fld`` warm-starts from an existing state.
    """
    geom = cfg.geometry
    g = cfg.body_force
    params = cfg.fluid.with_force(g)
    links = geom.links.use(cfg.scheme)
    if fld is None:
        fld = LatticeField(geom.flags, geom.periodic)
        fld.fill_equilibrium()
    if not fld.fluid.any():
        raise ValueError("geometry has no fluid cells")
    stats = RunStats(cells=fld.ncells, fallback_links=links.fallback_count if cfg.scheme == "cli" else 0,
                     boundary_links=len(links))
    axis = cfg.drive.stream_axis
    meta = {"nu": params.nu, "lambda": params.lambda_magic, "G": g[axis], "scheme": cfg.scheme}

    def advance(n):
        for _ in range(n):
            collide(fld, params)
            stream(fld, links)

    def measure():
        return dns_profile(fld, g, axis, meta)

    prof = iterate_to_steady(advance, measure, cfg.tol, cfg.check_interval, cfg.max_steps, stats)
    if not np.isfinite(fld.buf).all():
        raise NumericalInstability("non-finite populations")
    prof.meta.update(steps=stats.steps, converged=int(stats.converged))
    if not stats.converged:
        log.warning("not converged after %d steps (change %.3g)", stats.steps, stats.change)
    return RunResult(fld, prof, stats)


def measure_permeability(profile: ProfileData, mu: float, force: float, window=None) -> float:
    """``k = mu * mean(U_superficial) / G`` over ``window = (z0, z1)`` (whole profile by default)."""
    if force == 0:
        raise ValueError("permeability needs a non-zero drive")
    z0, z1 = (-np.inf, np.inf) if window is None else window
    sel = profile.window(z0, z1)
    if not sel.any():
        raise ValueError(f"window {window} contains no planes")
    eps = profile.epsilon[sel]
    spread = (eps.max() - eps.min()) / eps.mean() if eps.mean() > 0 else np.inf
    if spread > 0.02:
        warnings.warn(f"porosity varies by {spread:.1%} in the permeability window; "
                      "not a plateau", stacklevel=2)
    return float(mu * profile.u_superficial[sel].mean() / force)


def reynolds(profile: ProfileData, diameter: float, nu: float) -> float:
    return profile.u_max * diameter / nu


# --------------------------------------------------------------------------
# sweeps

@dataclass
class SweepPoint:
    diameter: float
    nu: float
    force: float
    reynolds: float
    profile: ProfileData
    stats: RunStats


def _drive_x(g) -> DriveSpec:
    return DriveSpec(DriveMode.BODY_FORCE, (float(g), 0.0, 0.0), (True, True, False), 0)


def _calibrated_run(geom, nu, lam, diameter, re_target, g_guess, scheme, tol, interval,
                    max_steps, rtol=0.02, max_iter=4, fld=None):
    """Adjust the body force until ``U_max D / nu`` hits ``re_target`` within ``rtol``."""
    g = g_guess
    res = None
    for _ in range(max_iter):
        cfg = RunConfig(geom, set_relaxation_from_magic(nu, lam), _drive_x(g), scheme, tol,
                        interval, max_steps)
        res = run_to_steady(cfg, fld)
        fld = res.field
        re = reynolds(res.profile, diameter, nu)
        log.info("D=%g nu=%g G=%.4g -> Re_D=%.4g", diameter, nu, g, re)
        if abs(re / re_target - 1.0) < rtol or re <= 0:
            break
        # U_max grows a little slower than G once inertia matters; the ratio step is safe
        g *= re_target / re
    return g, re, res


def grid_study(base: SpherePack, base_diameter: float, diameters=(8, 16, 32), re_target=2.0,
               nu_per_diameter=0.025, lam=3 / 16, scheme="cli", tol=1e-7, interval=500,
               max_steps=100_000, g_guess=None):
    """Run the same packing scaled to each diameter at a common ``Re_D``.

    The viscosity grows with ``D`` so the velocity scale stays fixed, and the
    dimensionless drive ``G D^3 / nu^2`` is calibrated once on the coarsest
    grid.  Returns the sweep points and the L2 distances between successive
    normalized profiles.
    """
    points = []
    gstar = None
    for d in sorted(diameters):
        f = d / base_diameter
        pack = base.scaled(f)
        dims = tuple(int(round(b)) for b in pack.box)
        geom = voxelize(pack, dims, (True, True, False))
        nu = nu_per_diameter * d
        if gstar is None:
            guess = g_guess or 8.0 * nu * re_target * nu / d / dims[2] ** 2
            g, re, res = _calibrated_run(geom, nu, lam, d, re_target, guess, scheme, tol,
                                         interval, max_steps)
            gstar = g * d ** 3 / nu ** 2
        else:
            g = gstar * nu ** 2 / d ** 3
            cfg = RunConfig(geom, set_relaxation_from_magic(nu, lam), _drive_x(g), scheme, tol,
                            interval, max_steps)
            res = run_to_steady(cfg)
            re = reynolds(res.profile, d, nu)
        res.profile.meta.update(diameter=d, Re_D=re)
        points.append(SweepPoint(d, nu, g, re, res.profile, res.stats))
    dist = [l2_distance(a.profile, b.profile) for a, b in zip(points, points[1:])]
    return points, dist


def re_sweep(geom: VoxelGeometry, re_list, diameter, nu, lam=3 / 16, scheme="cli", tol=1e-8,
             interval=1000, max_steps=200_000, rtol=0.02):
    """Steady profiles at each target ``Re_D`` with fixed viscosity and diameter."""
    points = []
    g = 8.0 * nu * min(re_list) * nu / diameter / geom.dims[2] ** 2
    fld = None
    for target in re_list:
        if points:
            # Stokes scaling from the previous point
            g = points[-1].force * target / points[-1].reynolds
        g, re, res = _calibrated_run(geom, nu, lam, diameter, target, g, scheme, tol, interval,
                                     max_steps, rtol=rtol, fld=fld)
        fld = res.field
        res.profile.meta.update(diameter=diameter, Re_D=re)
        points.append(SweepPoint(diameter, nu, g, re, res.profile, res.stats))
    return points


def porous_region_velocity(profile: ProfileData, eps_max=0.9) -> float:
    """Normalized superficial velocity averaged over planes with porosity below ``eps_max``."""
    sel = profile.epsilon < eps_max
    if not sel.any():
        raise ValueError("profile has no porous planes")
    return float(profile.u_normalized[sel].mean())


def peak_position(profile: ProfileData) -> float:
    """Height of the velocity maximum, refined below one plane by a parabola through the peak."""
    u = profile.u_superficial
    i = profile.argmax
    if i == 0 or i == len(u) - 1:
        return float(profile.z[i])
    a, b, c = u[i - 1], u[i], u[i + 1]
    curv = a - 2.0 * b + c
    if curv >= 0:
        return float(profile.z[i])
    dz = profile.z[i + 1] - profile.z[i]
    return float(profile.z[i] + 0.5 * dz * (a - c) / curv)
