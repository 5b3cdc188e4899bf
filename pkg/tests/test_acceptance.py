"""Acceptance criteria, one test each, at their stated tolerances.

Every test records a one-line verdict that is printed in the pytest terminal
summary, so ``pytest tests/test_acceptance.py`` ends with a pass/fail table.
Run directly with ``python tests/test_acceptance.py``.
"""
import contextlib
import sys
import time
import warnings

import numpy as np
import pytest

from conftest import ACCEPTANCE
from porelbm.boundaries import DriveSpec, find_links
from porelbm.config import parse_text
from porelbm.driver import (RunConfig, grid_study, measure_permeability, peak_position,
                            porous_region_velocity, re_sweep, run_to_steady)
from porelbm.geometry import bed_channel_pack, channel_geometry, sphere_in_box, voxelize
from porelbm.glbm import CouetteCase, relative_l2, run_couette
from porelbm.interface import (TwoDomainConfig, extract_interface_params, fit_exponentials,
                               solve_two_domain, two_domain_coefficients)
from porelbm.lattice import E, LatticeField, collide, set_relaxation_from_magic
from porelbm.runner import run_bench, run_scenario, slowdown

slow = pytest.mark.slow


class Verdict:
    def __init__(self, num):
        self.num = num
        self.parts = []
        self.ok = True

    def check(self, ok, text):
        self.parts.append(text)
        self.ok &= bool(ok)


@contextlib.contextmanager
def criterion(num):
    v = Verdict(num)
    try:
        yield v
    except Exception as exc:
        v.ok = False
        v.parts.append(f"error: {type(exc).__name__}: {exc}")
        raise
    finally:
        ACCEPTANCE[num] = (v.ok, "; ".join(v.parts))
        print(f"criterion {num}: {'PASS' if v.ok else 'FAIL'}  {'; '.join(v.parts)}")
    assert v.ok, "; ".join(v.parts)


def _channel(nu, g, h=32, lam=3 / 16, tol=1e-12, interval=500, max_steps=500_000):
    geom = channel_geometry((1, 1, h))
    cfg = RunConfig(geom, set_relaxation_from_magic(nu, lam),
                    DriveSpec("body_force", (g, 0.0, 0.0)), "sbb", tol, interval, max_steps)
    return run_to_steady(cfg)


def test_1_poiseuille_exactness():
    with criterion(1) as v:
        nu, g, h = 1 / 6, 1e-6, 32
        t0 = time.perf_counter()
        res = _channel(nu, g, h)
        dt = time.perf_counter() - t0
        z = res.profile.z
        exact = g / (2 * nu) * z * (h - z)
        err = float(np.abs(res.profile.u_superficial / exact - 1).max())
        v.check(err <= 1e-8, f"max rel error {err:.2e} (<= 1e-8)")
        v.check(dt < 10, f"runtime {dt:.2f} s (< 10 s)")


@slow
def test_2_viscosity_independence():
    with criterion(2) as v:
        prof = {}
        for nu in (1 / 60, 1 / 6, 0.4):
            # same velocity scale for every viscosity
            res = _channel(nu, 1e-6 * nu * 6, tol=1e-14, interval=1000, max_steps=2_000_000)
            prof[nu] = res.profile.u_normalized
        d = max(float(np.abs(prof[a] - prof[1 / 6]).max()) for a in (1 / 60, 0.4))
        v.check(d <= 1e-10, f"channel normalized-profile spread {d:.2e} (<= 1e-10)")

        n, a = 16, 4.0
        geom = sphere_in_box(n, 2 * a)
        k = {}
        for nu in (1 / 60, 1 / 6):
            g = 1e-6 * nu * 6
            drive = DriveSpec("body_force", (g, 0.0, 0.0), (True, True, True), 0)
            cfg = RunConfig(geom, set_relaxation_from_magic(nu, 0.25), drive, "cli", 1e-11,
                            500, 1_000_000)
            res = run_to_steady(cfg)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                k[nu] = measure_permeability(res.profile, nu, g)
        rel = abs(k[1 / 60] / k[1 / 6] - 1)
        v.check(rel <= 1e-3, f"sphere-array permeability spread {rel:.2e} (<= 1e-3)")


def test_3_cli_equals_sbb_at_half():
    with criterion(3) as v:
        rng = np.random.default_rng(3)
        flags = np.zeros((4, 4, 8), dtype=np.uint8)
        links = find_links(flags, (True, True, False))
        assert np.all(links.q == 0.5) and links.fallback_count == 0
        links.set_wall_velocity((0.01, -0.02, 0.0))
        worst = 0.0
        states = 10_000
        for _ in range(states):
            src = rng.normal(size=(19, flags.size))
            a = np.zeros_like(src)
            b = np.zeros_like(src)
            links.use("sbb").apply(src, a)
            links.use("cli").apply(src, b)
            worst = max(worst, float(np.abs(a - b).max()))
        v.check(worst <= 1e-15, f"max link difference {worst:.1e} over {states} states "
                                f"x {len(links)} links (<= 1e-15)")


@slow
def test_4_couette_over_porous_layer():
    with criterion(4) as v:
        t0 = time.perf_counter()
        for label, visc in (("J=1", "plain"), ("J=1/eps", "rescaled")):
            prof, ref, stats = run_couette(CouetteCase(64, 0.4, 1.2e-4, 0.1, viscosity=visc),
                                           tol=1e-11)
            err = relative_l2(prof.u_superficial, ref.u_superficial)
            v.check(stats.converged and err <= 0.01, f"{label} rel L2 {err:.2e} (<= 1e-2)")
        dt = time.perf_counter() - t0
        v.check(dt < 120, f"runtime {dt:.1f} s (< 120 s)")


def test_5_analytic_identities():
    with criterion(5) as v:
        base = dict(h_f=1.0, h_p=1.0, mu=0.1, k=1e-4, G=1e-5)
        z = np.linspace(-1, 1, 2001)
        d = 0.0
        for J in (1.0, 2.5):
            br = solve_two_domain(TwoDomainConfig(**base, condition="br", J=J), z)
            otw = solve_two_domain(TwoDomainConfig(**base, condition="otw", J=J, beta=0.0), z)
            d = max(d, float(np.abs(br.u_superficial - otw.u_superficial).max() / br.u_max))
        v.check(d <= 1e-12, f"OTW(beta=0) vs BR {d:.1e} (<= 1e-12)")

        cfg = TwoDomainConfig(**base, condition="bj", alpha=1e8)
        sol = two_domain_coefficients(cfg)
        gap = abs(sol.u_slip - cfg.u_darcy) / cfg.u_darcy
        v.check(gap <= 1e-6, f"BJ(alpha=1e8) slip gap {gap:.1e} U_m (<= 1e-6)")

        assert base["k"] / base["h_f"] ** 2 <= 1e-4
        bj = solve_two_domain(TwoDomainConfig(**base, condition="bj"), z)
        bjs = solve_two_domain(TwoDomainConfig(**base, condition="bjs"), z)
        free = z >= 0
        d = float(np.abs(bj.u_superficial[free] - bjs.u_superficial[free]).max() / bj.u_max)
        v.check(d <= 0.01, f"BJ vs BJS {d:.1e} U_max (<= 1e-2)")

        peaks = [solve_two_domain(TwoDomainConfig(**base, condition="bj", alpha=a), z).u_max
                 for a in (0.1, 1.0, 5.0)]
        v.check(peaks[0] > peaks[1] > peaks[2], "U_max decreasing in alpha")
        wide = dict(base, k=1e-2)
        peaks = [solve_two_domain(TwoDomainConfig(**wide, condition="br", J=J), z).u_max
                 for J in (0.5, 1.0, 2.5, 5.0)]
        v.check(all(a > b for a, b in zip(peaks, peaks[1:])), "U_max decreasing in J")


def test_6_parameter_round_trip():
    with criterion(6) as v:
        base = dict(h_f=1.0, h_p=1.0, mu=0.1, k=1e-4, G=1e-5)
        z = np.linspace(-1, 1, 2001)
        prof = solve_two_domain(TwoDomainConfig(**base, condition="bj", alpha=0.5), z)
        fit = extract_interface_params(prof, 0.0, mu=0.1, force=1e-5)
        v.check(abs(fit.alpha - 0.5) <= 1e-6, f"alpha error {abs(fit.alpha - 0.5):.1e} (<= 1e-6)")
        prof = solve_two_domain(TwoDomainConfig(**base, condition="otw", J=2.5, beta=-2.8,
                                                porosity=0.4), z)
        fit = extract_interface_params(prof, 0.0, mu=0.1, force=1e-5)
        v.check(abs(fit.beta + 2.8) <= 1e-6, f"beta error {abs(fit.beta + 2.8):.1e} (<= 1e-6)")
        A, a, B, b = 0.48423, 0.31195, -0.48236, 0.3131
        x = np.arange(-24.0, 1.0)
        ef = fit_exponentials(x, A * np.exp(a * x) + B * np.exp(b * x))
        v.check(ef.rmse <= 1e-10, f"exponential pair fit RMSE {ef.rmse:.1e} (<= 1e-10)")


@slow
def test_7_grid_convergence():
    with criterion(7) as v:
        t0 = time.perf_counter()
        base = bed_channel_pack(8, bed_height=1.0, seed=1)
        points, dist = grid_study(base, 8, (8, 16, 32), re_target=2.0, tol=1e-7)
        dt = time.perf_counter() - t0
        re = ", ".join(f"{p.reynolds:.3g}" for p in points)
        v.check(dist[1] < dist[0], f"L2 8->16 {dist[0]:.4f}, 16->32 {dist[1]:.4f} at Re_D {re}")
        v.check(dt < 1800, f"runtime {dt:.0f} s (< 1800 s)")


@slow
def test_8_reynolds_sweep():
    with criterion(8) as v:
        pack = bed_channel_pack(8, seed=0)
        geom = voxelize(pack, tuple(int(round(b)) for b in pack.box), (True, True, False))
        # simple bounce-back: the interpolated rule grows a spurious mode at Re_D = 20 here
        points = re_sweep(geom, (0.2, 2.0, 20.0), 8, 0.04, scheme="sbb")
        zpeak = [peak_position(p.profile) for p in points]
        zmax = [float(p.profile.z[p.profile.argmax]) for p in points]
        up = [porous_region_velocity(p.profile) for p in points]
        re = ", ".join(f"{p.reynolds:.3g}" for p in points)
        v.check(all(p.stats.converged for p in points), f"Re_D {re}")
        v.check(zmax[0] <= zmax[1] <= zmax[2] and zpeak[0] < zpeak[1] < zpeak[2],
                "peak z " + ", ".join(f"{z:.3f}" for z in zpeak))
        v.check(up[0] > up[1] > up[2], "bed velocity " + ", ".join(f"{u:.4f}" for u in up))


@slow
def test_9_homogenized_vs_dns(bed_dns, tmp_path):
    with criterion(9) as v:
        prof, _ = bed_dns
        path = tmp_path / "dns.csv"
        prof.to_csv(path)
        scn = parse_text(f"[scenario]\nkind = glbm_rev\n[glbm]\nprofile = {path}\ndiameter = 12\n"
                         "[run]\ntol = 1e-10\n")
        rmse = {k[5:]: val for k, val in run_scenario(scn).report.items()
                if k.startswith("rmse_")}
        text = ", ".join(f"{k} {val:.4f}" for k, val in rmse.items())
        v.check(rmse["rescaled"] < rmse["plain"] and rmse["rescaled"] < rmse["darcy"],
                f"RMSE/U_max {text}")


@slow
def test_10_bench_sanity():
    with criterion(10) as v:
        scn = parse_text("[scenario]\nkind = bench\n[fluid]\nnu = 0.1\n"
                         "[bench]\nsize = 128\ndiameter = 76\nsteps = 200\n")
        sbb, cli = run_bench(scn)
        v.check(cli.mlups >= 0.75 * sbb.mlups,
                f"CLI {cli.mlups:.2f} vs SBB {sbb.mlups:.2f} MLUPS "
                f"(slowdown {slowdown(sbb, cli):+.3f})")
        v.check(min(sbb.mlups, cli.mlups) > 1.0, f"{sbb.threads} thread(s), MLUPS > 1")


def test_11_conservation():
    with criterion(11) as v:
        rng = np.random.default_rng(11)
        flags = np.zeros((100, 100, 10), dtype=np.uint8)
        fld = LatticeField(flags, (True, True, True))
        g = (1e-5, -2e-6, 3e-6)
        params = set_relaxation_from_magic(0.1, 3 / 16, g)
        f0 = rng.uniform(-0.01, 0.01, size=(19,) + flags.shape)
        fld.f = f0
        e = E.astype(float)
        before_m = f0.reshape(19, -1).sum(axis=0)
        before_j = np.einsum("ka,kc->ac", e, f0.reshape(19, -1))
        collide(fld, params)
        f1 = fld.f.reshape(19, -1)
        dm = float(np.abs(f1.sum(axis=0) - before_m).max())
        dj = float(np.abs(np.einsum("ka,kc->ac", e, f1) - before_j
                          - np.asarray(g)[:, None]).max())
        v.check(dm <= 1e-14, f"mass change {dm:.1e} (<= 1e-14)")
        v.check(dj <= 1e-14, f"momentum - G {dj:.1e} (<= 1e-14) over {flags.size} cells")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
