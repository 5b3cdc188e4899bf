"""Pore-resolved bed flow, the homogenized model on its porosity, and interface coefficients.

Runs one sphere-bed DNS, then the three homogenized variants (porosity-scaled
viscosity, plain viscosity, Darcy force only) on the planar porosity, and
extracts the slip and stress-jump coefficients at both interface candidates.

    python scripts/dns_vs_glbm.py --diameter 12 --seed 3 --out out/dns_vs_glbm
"""
import argparse
import logging
import warnings
from pathlib import Path

from porelbm.config import parse_text
from porelbm.glbm import compare_with_dns
from porelbm.interface import (default_windows, extract_interface_params,
                               interface_position_candidates)
from porelbm.io import comparison_table, write_table
from porelbm.runner import run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--diameter", type=float, default=12.0)
    ap.add_argument("--box", default="3, 3, 4", help="box in diameters")
    ap.add_argument("--bed-height", type=float, default=1.25)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--nu", type=float, default=0.1)
    ap.add_argument("--force", type=float, default=2e-6)
    ap.add_argument("--out", default="out/dns_vs_glbm")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    scn = parse_text(f"[scenario]\nkind = sphere_pack_dns\nseed = {args.seed}\n"
                     f"[packing]\ndiameter = {args.diameter}\nbox = {args.box}\n"
                     f"bed_height = {args.bed_height}\n[fluid]\nnu = {args.nu}\n"
                     f"[drive]\nmagnitude = {args.force}\n[run]\ntol = 1e-9\n")
    dns = run_scenario(scn).profiles["profile"]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dns.to_csv(out / "dns.csv")

    z_exact, z_app = interface_position_candidates(dns)
    plateau, _, _ = default_windows(dns, z_exact)
    cmp = compare_with_dns(dns, args.diameter, args.nu, args.force, plateau)
    write_table(out / "comparison.csv", comparison_table(dns.z, {"dns": dns, **cmp.profiles}))
    for name, err in cmp.rmse.items():
        print(f"{name:>9}: RMSE/U_max {err:.4f}")
    for label, zi in (("porosity edge", z_exact), ("exponential edge", z_app)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fit = extract_interface_params(dns, zi)
        print(f"{label} z={zi:g}: alpha {fit.alpha:.4f}, beta {fit.beta:.4f}, "
              f"U_s {fit.u_slip:.4g}, k {fit.k:.4g}")


if __name__ == "__main__":
    main()
