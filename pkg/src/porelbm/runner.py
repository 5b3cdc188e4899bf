"""One entry point per scenario kind, plus the SBB/CLI throughput benchmark."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass

import numba
import numpy as np

from . import driver, glbm, interface
from .boundaries import DriveSpec
from .config import Scenario
from .geometry import (SpherePack, bed_channel_pack, channel_geometry, geometry_from_flags,
                       load_voxels, sphere_in_box, voxelize)
from .io import Results, comparison_table
from .lattice import LatticeField, check_stability, collide, set_relaxation_from_magic, stream
from .profiles import ProfileData

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# helpers

def _fluid(scn):
    return set_relaxation_from_magic(scn["fluid"]["nu"], scn["fluid"]["lambda"])


def _run_cfg(scn, geom, drive):
    r = scn["run"]
    return driver.RunConfig(geom, _fluid(scn), drive, r["scheme"], r["tol"], r["check_interval"],
                            r["max_steps"])


def _drive(scn, periodic=(True, True, False)):
    d = scn["drive"]
    return DriveSpec(d["mode"], (d["magnitude"], 0.0, 0.0), periodic, 0)


def pack_geometry(scn: Scenario):
    """Voxel geometry from a voxel file, a sphere list, or a fresh deposition."""
    p = scn["packing"]
    if p["voxel_file"]:
        flags, periodic = load_voxels(p["voxel_file"])
        return geometry_from_flags(flags, periodic), None
    if p["pack_file"]:
        pack = SpherePack.from_csv(p["pack_file"])
    else:
        pack = bed_channel_pack(p["diameter"], p["box"], p["bed_height"], p["r_spread"], scn.seed,
                                p["offset_plate"])
    dims = tuple(int(round(b)) for b in pack.box)
    return voxelize(pack, dims, (True, True, False)), pack


def _stats_report(stats, prefix=""):
    return {f"{prefix}steps": stats.steps, f"{prefix}change": stats.change,
            f"{prefix}wall_time_s": stats.wall_time, f"{prefix}mlups": stats.mlups}


def _bed_analysis(prof: ProfileData, nu, g) -> dict:
    """Interface position and bed permeability of a DNS profile, when it has a bed."""
    out = {}
    try:
        z_exact, z_app = interface.interface_position_candidates(prof)
        plateau, _, _ = interface.default_windows(prof, z_exact)
        out.update(interface_z_exact=z_exact, interface_z_apparent=z_app,
                   plateau_window=plateau,
                   permeability=driver.measure_permeability(prof, nu, g, plateau))
    except (ValueError, interface.FitError) as exc:
        log.info("no bed analysis: %s", exc)
    return out


# --------------------------------------------------------------------------
# scenario kinds

def run_poiseuille(scn: Scenario) -> Results:
    c = scn["channel"]
    geom = channel_geometry((c["length"], c["width"], c["height"]))
    cfg = _run_cfg(scn, geom, _drive(scn))
    res = driver.run_to_steady(cfg)
    prof = res.profile
    g = cfg.body_force[0]
    h = float(c["height"])
    exact = g / (2.0 * cfg.fluid.nu) * prof.z * (h - prof.z)
    rel = float(np.abs(prof.u_superficial - exact).max() / np.abs(exact).max())
    cols = comparison_table(prof.z, {"lbm": prof}, {"U_analytic": (exact, "lu/step")})
    report = {"body_force": g, "u_max": prof.u_max, "max_relative_error": rel,
              **_stats_report(res.stats)}
    _, u = res.field.density_velocity(cfg.body_force)
    return Results({"profile": prof}, {"comparison": cols}, report,
                   {"field": (geom.flags, u)}, res.stats.converged)


def run_couette_porous(scn: Scenario) -> Results:
    c = scn["couette"]
    visc = c["viscosity"]
    visc = visc if visc in ("plain", "rescaled") else float(visc)
    case = glbm.CouetteCase(c["height"], c["porosity"], c["darcy"], c["reynolds"],
                            scn["fluid"]["nu"], visc, scn["fluid"]["lambda"])
    r = scn["run"]
    prof, ref, stats = glbm.run_couette(case, r["tol"], r["check_interval"], r["max_steps"])
    cols = comparison_table(prof.z, {"glbm": prof, "analytic": ref})
    report = {"lid_velocity": case.u0, "permeability": case.K, "nu_eff": case.nu_eff,
              "relative_l2": glbm.relative_l2(prof.u_superficial, ref.u_superficial),
              **_stats_report(stats)}
    return Results({"profile": prof}, {"comparison": cols}, report, {}, stats.converged)


def run_sphere_pack_dns(scn: Scenario) -> Results:
    geom, pack = pack_geometry(scn)
    cfg = _run_cfg(scn, geom, _drive(scn, geom.periodic))
    res = driver.run_to_steady(cfg)
    prof = res.profile
    g = cfg.body_force[0]
    nu = cfg.fluid.nu
    prof.meta.update(seed=scn.seed)
    d = scn["packing"]["diameter"]
    report = {"dims": geom.dims, "spheres": len(pack) if pack is not None else 0,
              "porosity": float(geom.porosity.mean()), "body_force": g, "u_max": prof.u_max,
              "Re_D": driver.reynolds(prof, d, nu), "boundary_links": res.stats.boundary_links,
              "fallback_links": res.stats.fallback_links, **_stats_report(res.stats)}
    report.update(_bed_analysis(prof, nu, g))
    _, u = res.field.density_velocity(cfg.body_force)
    return Results({"profile": prof}, {}, report, {"field": (geom.flags, u)}, res.stats.converged)


def run_grid_study(scn: Scenario) -> Results:
    p, gs, r = scn["packing"], scn["grid"], scn["run"]
    d0 = min(gs["diameters"])
    base = bed_channel_pack(d0, p["box"], p["bed_height"], p["r_spread"], scn.seed,
                            p["offset_plate"])
    points, dist = driver.grid_study(base, d0, gs["diameters"], gs["reynolds"],
                                     gs["nu_per_diameter"], gs["lambda"], r["scheme"], r["tol"],
                                     r["check_interval"], r["max_steps"])
    profiles = {f"D{pt.diameter:g}": pt.profile for pt in points}
    report = {"diameters": tuple(pt.diameter for pt in points),
              "Re_D": tuple(pt.reynolds for pt in points),
              "body_force": tuple(pt.force for pt in points),
              "l2_distance_successive": tuple(dist),
              "steps": tuple(pt.stats.steps for pt in points),
              "wall_time_s": sum(pt.stats.wall_time for pt in points)}
    return Results(profiles, {}, report, {}, all(pt.stats.converged for pt in points))


def run_re_sweep(scn: Scenario) -> Results:
    geom, _ = pack_geometry(scn)
    r = scn["run"]
    d = scn["packing"]["diameter"]
    points = driver.re_sweep(geom, scn["sweep"]["reynolds"], d, scn["fluid"]["nu"],
                             scn["fluid"]["lambda"], r["scheme"], r["tol"], r["check_interval"],
                             r["max_steps"])
    profiles = {f"Re{t:g}": pt.profile for t, pt in zip(scn["sweep"]["reynolds"], points)}
    report = {"Re_D": tuple(pt.reynolds for pt in points),
              "body_force": tuple(pt.force for pt in points),
              "z_argmax": tuple(float(pt.profile.z[pt.profile.argmax]) for pt in points),
              "z_peak": tuple(driver.peak_position(pt.profile) for pt in points),
              "porous_velocity_normalized": tuple(driver.porous_region_velocity(pt.profile)
                                                  for pt in points),
              "steps": tuple(pt.stats.steps for pt in points)}
    return Results(profiles, {}, report, {}, all(pt.stats.converged for pt in points))


def run_glbm_rev(scn: Scenario) -> Results:
    g_cfg, r = scn["glbm"], scn["run"]
    dns = ProfileData.from_csv(g_cfg["profile"])
    if dns.u_max <= 0:
        raise ValueError(f"{g_cfg['profile']}: DNS profile has no positive velocity")
    # the comparison is only meaningful at the viscosity and drive of the DNS
    nu = float(dns.meta.get("nu", scn["fluid"]["nu"]))
    force = g_cfg["force"] if g_cfg["force"] is not None else dns.meta.get("G")
    if force is None:
        raise ValueError("drive not recorded in the profile; set [glbm] force")
    window = g_cfg["window"]
    if window is None:
        z_exact, _ = interface.interface_position_candidates(dns)
        window, _, _ = interface.default_windows(dns, z_exact)
    cmp = glbm.compare_with_dns(dns, g_cfg["diameter"], nu, float(force), tuple(window),
                                g_cfg["variants"], scn["fluid"]["lambda"], r["tol"],
                                r["check_interval"], r["max_steps"])
    cols = comparison_table(dns.z, {"dns": dns, **cmp.profiles},
                            {"epsilon": (dns.epsilon, "1"),
                             "K": (np.where(np.isfinite(cmp.permeability), cmp.permeability,
                                            np.nan), "lu^2")})
    report = {"nu": nu, "body_force": float(force), "window": tuple(window),
              "k_plateau": cmp.k_plateau}
    report.update({f"rmse_{k}": v for k, v in cmp.rmse.items()})
    converged = all(p.meta.get("converged", 1) for p in cmp.profiles.values())
    return Results(dict(cmp.profiles), {"comparison": cols}, report, {}, bool(converged))


def run_two_domain(scn: Scenario) -> Results:
    t = scn["two_domain"]
    cfg = interface.TwoDomainConfig(t["h_f"], t["h_p"], t["mu"], t["k"], t["force"],
                                    interface.Condition(t["condition"]), t["J"], t["alpha"],
                                    t["beta"], t["porosity"])
    z = np.linspace(-t["h_p"], t["h_f"], t["points"])
    prof = interface.solve_two_domain(cfg, z)
    report = {"condition": t["condition"], "u_slip": prof.meta["u_slip"],
              "u_darcy": cfg.u_darcy, "u_max": prof.u_max,
              "z_max": float(z[prof.argmax]), "decay_rate": cfg.decay_rate}
    return Results({"profile": prof}, {}, report, {}, True)


def model_profiles(dns: ProfileData, fit: interface.InterfaceFit) -> dict:
    """Two-domain models with the extracted coefficients on the DNS grid."""
    zi = fit.interface_z
    h_f = dns.height - zi
    h_p = zi
    out = {}
    for cond, ok in ((interface.Condition.BJ, math.isfinite(fit.alpha) and fit.alpha > 0),
                     (interface.Condition.OTW, math.isfinite(fit.beta))):
        if not ok or h_p <= 0 or h_f <= 0:
            continue
        cfg = interface.TwoDomainConfig(h_f, h_p, fit.mu, fit.k, fit.u_darcy * fit.mu / fit.k,
                                        cond, fit.mu_eff / fit.mu,
                                        fit.alpha if math.isfinite(fit.alpha) else 1.0,
                                        fit.beta, min(max(fit.eps_mean, 1e-3), 1.0))
        out[cond.value] = interface.solve_two_domain(cfg, dns.z - zi)
    return out


def run_extract_params(scn: Scenario) -> Results:
    e = scn["extract"]
    prof = ProfileData.from_csv(e["profile"])
    try:
        z_exact, z_app = interface.interface_position_candidates(prof)
    except ValueError:
        if e["interface_z"] is None:
            raise
        z_exact = z_app = math.nan
    zi = e["interface_z"] if e["interface_z"] is not None else z_exact
    fit = interface.extract_interface_params(prof, zi, e["nu"], e["force"])
    report = {"interface_z_exact": z_exact, "interface_z_apparent": z_app}
    report.update(fit.as_dict())
    models = model_profiles(prof, fit)
    cols = comparison_table(prof.z, {"dns": prof, **models})
    return Results({}, {"comparison": cols}, report, {}, True)


# --------------------------------------------------------------------------
# benchmark

class BenchError(ValueError):
    pass


@dataclass
class BenchReport:
    cells: int
    fluid_fraction: float
    steps: int
    wall_time: float
    scheme: str
    threads: int

    @property
    def mlups(self) -> float:
        return self.cells * self.steps / self.wall_time / 1e6

    def __post_init__(self):
        if not (self.wall_time > 0 and self.steps > 0 and self.cells > 0):
            raise BenchError("benchmark needs positive cells, steps and wall time")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["mlups"] = self.mlups
        return d


def bench_geometry(size, diameter):
    """Periodic cube with one centred sphere."""
    if diameter <= 0:
        return channel_geometry((size, size, size), (True, True, True))
    return sphere_in_box(size, diameter)


def run_bench(scn: Scenario, geom=None):
    """Time the SBB and CLI solvers on the same geometry; returns ``(sbb, cli)`` reports.

    Both solvers advance in alternating single steps (ABBA order) so slow
    drifts of the machine hit them equally.  The cost ratio is the median of
    the ratios within adjacent pairs; the wall times are ``steps`` times the
    geometric mean of the two median step times, split by that ratio.
    Warm-up steps (including compilation) are untimed, and geometry setup
    happens before any clock starts.
    """
    b = scn["bench"]
    if geom is None:
        geom = bench_geometry(b["size"], b["diameter"])
    params = _fluid(scn).with_force((1e-6, 0.0, 0.0))
    everything = np.ones(len(geom.links), dtype=bool)
    # one shared field: both schemes see the same memory layout and page placement
    fld = LatticeField(geom.flags, geom.periodic)
    fld.fill_equilibrium()
    runs = {s: geom.links.subset(everything).use(s) for s in ("sbb", "cli")}

    def advance(scheme, n):
        links = runs[scheme]
        for _ in range(n):
            collide(fld, params)
            stream(fld, links)

    for scheme in runs:
        advance(scheme, max(1, b["warmup"]))
    steps = b["steps"]
    block = 1  # interleave single steps; step-to-step jitter is several percent
    per_step = {"sbb": [], "cli": []}
    order = ["sbb", "cli"]
    res = time.get_clock_info("perf_counter").resolution
    ratios = []
    done = 0
    while done < steps:
        n = min(block, steps - done)
        pair = {}
        for scheme in order:
            t0 = time.perf_counter()
            advance(scheme, n)
            t = time.perf_counter() - t0
            if t < 100 * res:
                raise BenchError(f"{scheme} block of {n} steps took {t:.3g} s, too close to "
                                 "the clock resolution; raise [bench] steps or size")
            pair[scheme] = t / n
            per_step[scheme].append(t / n)
        ratios.append(pair["cli"] / pair["sbb"])
        order.reverse()  # ABBA order cancels linear drift
        done += n
    # medians are robust against other processes stealing the core; pairing
    # cancels load changes slower than one step
    level = steps * math.sqrt(float(np.median(per_step["sbb"])) * float(np.median(per_step["cli"])))
    r = float(np.median(ratios))
    elapsed = {"sbb": level / math.sqrt(r), "cli": level * math.sqrt(r)}
    _, u = fld.density_velocity(params.force)
    check_stability(u)
    cells = geom.flags.size
    frac = float(fld.fluid.mean())
    threads = numba.get_num_threads()
    return tuple(BenchReport(cells, frac, steps, elapsed[s], s, threads) for s in ("sbb", "cli"))


def slowdown(sbb: BenchReport, cli: BenchReport) -> float:
    return 1.0 - cli.mlups / sbb.mlups


def run_bench_scenario(scn: Scenario) -> Results:
    sbb, cli = run_bench(scn)
    report = {f"sbb_{k}": v for k, v in sbb.as_dict().items()}
    report.update({f"cli_{k}": v for k, v in cli.as_dict().items()})
    report["slowdown"] = slowdown(sbb, cli)
    return Results({}, {}, report, {}, True)


RUNNERS = {
    "poiseuille": run_poiseuille,
    "couette_porous": run_couette_porous,
    "sphere_pack_dns": run_sphere_pack_dns,
    "grid_study": run_grid_study,
    "re_sweep": run_re_sweep,
    "glbm_rev": run_glbm_rev,
    "two_domain_analytic": run_two_domain,
    "extract_params": run_extract_params,
    "bench": run_bench_scenario,
}


def run_scenario(scn: Scenario) -> Results:
    return RUNNERS[scn.kind](scn)
