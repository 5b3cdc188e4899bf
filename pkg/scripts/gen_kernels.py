"""Write src/porelbm/_kernels.py: D3Q19 kernels unrolled with the lattice constants inlined.

Run after changing the velocity set or the collision formulas:

    python scripts/gen_kernels.py
"""
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from porelbm.lattice import E, PAIRS, W  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "src" / "porelbm" / "_kernels.py"


def signed_sum(coeffs, names):
    terms = []
    for c, v in zip(coeffs, names):
        if c == 1:
            terms.append(f"+ {v}")
        elif c == -1:
            terms.append(f"- {v}")
    s = " ".join(terms)
    return s[2:] if s.startswith("+ ") else "-" + s[2:] if s.startswith("- ") else "0.0"


def load_moments(ind):
    out = [f"{ind}f{k} = f[{k}, c]" for k in range(19)]
    out.append(f"{ind}rho = " + " + ".join(f"f{k}" for k in range(19)))
    for a, ax in enumerate("xyz"):
        pos = [f"f{k}" for k in range(19) if E[k, a] == 1]
        neg = [f"f{k}" for k in range(19) if E[k, a] == -1]
        out.append(f"{ind}j{ax} = ({' + '.join(pos)}) - ({' + '.join(neg)})")
    return out


def relax_pairs(ind, force=("gx", "gy", "gz"), eps=None):
    out = []
    w0 = float(W[0])
    out.append(f"{ind}f[0, c] = f0 - op * (f0 - {w0!r} * (rho - uu))")
    for a, b in PAIRS:
        w = float(W[a])
        quad = "4.5 * eu * eu" if eps is None else f"4.5 * eu * eu / {eps}"
        out += [
            f"{ind}eu = {signed_sum(E[a], ('jx', 'jy', 'jz'))}",
            f"{ind}fg = {3 * w!r} * ({signed_sum(E[a], force)})",
            f"{ind}dp = op * (0.5 * (f{a} + f{b}) - {w!r} * (rho + {quad} - uu))",
            f"{ind}dm = om * (0.5 * (f{a} - f{b}) - {3 * w!r} * eu)",
            f"{ind}f[{a}, c] = f{a} - dp - dm + fg",
            f"{ind}f[{b}, c] = f{b} - dp + dm - fg",
        ]
    return out


def collide_trt():
    ind = " " * 12
    lines = [
        "@numba.njit(cache=True, parallel=True, boundscheck=False)",
        "def collide_trt(f, flags, ncells, op, om, gx, gy, gz):",
        "    nchunk = (ncells + CHUNK - 1) // CHUNK",
        "    for ch in numba.prange(nchunk):",
        "        for c in range(ch * CHUNK, min(ncells, (ch + 1) * CHUNK)):",
        "            if flags[c] != 0:",
        "                continue",
    ]
    lines += load_moments(ind)
    lines.append(f"{ind}uu = 1.5 * (jx * jx + jy * jy + jz * jz)")
    lines += relax_pairs(ind)
    return "\n".join(lines)


def collide_glbm():
    ind = " " * 12
    lines = [
        "@numba.njit(cache=True, parallel=True, boundscheck=False)",
        "def collide_glbm(f, flags, ncells, nz, op_z, om_z, eps_z, lin_z, nl_z, gx, gy, gz):",
        '    """Per-plane porous collision; lin_z = eps*nu/K, nl_z = eps*c_F/sqrt(K)."""',
        "    nchunk = (ncells + CHUNK - 1) // CHUNK",
        "    for ch in numba.prange(nchunk):",
        "        for c in range(ch * CHUNK, min(ncells, (ch + 1) * CHUNK)):",
        "            if flags[c] != 0:",
        "                continue",
        "            l = c % nz",
        "            op = op_z[l]",
        "            om = om_z[l]",
        "            eps = eps_z[l]",
    ]
    lines += load_moments(ind)
    lines += [
        f"{ind}vx = jx + 0.5 * eps * gx",
        f"{ind}vy = jy + 0.5 * eps * gy",
        f"{ind}vz = jz + 0.5 * eps * gz",
        f"{ind}c0 = 0.5 * (1.0 + 0.5 * lin_z[l])",
        f"{ind}c1 = 0.5 * nl_z[l]",
        f"{ind}vn = math.sqrt(vx * vx + vy * vy + vz * vz)",
        f"{ind}den = c0 + math.sqrt(c0 * c0 + c1 * vn)",
        f"{ind}ux = vx / den",
        f"{ind}uy = vy / den",
        f"{ind}uz = vz / den",
        f"{ind}un = math.sqrt(ux * ux + uy * uy + uz * uz)",
        f"{ind}Fx = -(lin_z[l] * ux) - nl_z[l] * un * ux + eps * gx",
        f"{ind}Fy = -(lin_z[l] * uy) - nl_z[l] * un * uy + eps * gy",
        f"{ind}Fz = -(lin_z[l] * uz) - nl_z[l] * un * uz + eps * gz",
        f"{ind}uu = 1.5 * (jx * jx + jy * jy + jz * jz) / eps",
    ]
    lines += relax_pairs(ind, force=("Fx", "Fy", "Fz"), eps="eps")
    return "\n".join(lines)


def stream_pull():
    lines = [
        "@numba.njit(cache=True, parallel=True, boundscheck=False)",
        "def stream_pull(src, dst, flags, nx, ny, nz, px, py, pz):",
        "    for i in numba.prange(nx):",
        "        im = i - 1 if i > 0 else (nx - 1 if px else -1)",
        "        ip = i + 1 if i < nx - 1 else (0 if px else -1)",
        "        for j in range(ny):",
        "            jm = j - 1 if j > 0 else (ny - 1 if py else -1)",
        "            jp = j + 1 if j < ny - 1 else (0 if py else -1)",
        "            for l in range(nz):",
        "                c = (i * ny + j) * nz + l",
        "                if flags[c] != 0:",
        "                    continue",
        "                lm = l - 1 if l > 0 else (nz - 1 if pz else -1)",
        "                lp = l + 1 if l < nz - 1 else (0 if pz else -1)",
        "                dst[0, c] = src[0, c]",
    ]
    names = {1: ("im", "jm", "lm"), 0: ("i", "j", "l"), -1: ("ip", "jp", "lp")}
    for k in range(1, 19):
        # source cell is x - e_k
        si, sj, sl = (names[int(E[k, a])][a] for a in range(3))
        guard = [v for v in (si, sj, sl) if v not in ("i", "j", "l")]
        cond = " and ".join(f"{v} >= 0" for v in guard)
        lines += [
            f"                if {cond}:",
            f"                    s = ({si} * ny + {sj}) * nz + {sl}",
            "                    if flags[s] == 0:",
            f"                        dst[{k}, c] = src[{k}, s]",
        ]
    return "\n".join(lines)


def main():
    header = [
        '"""Unrolled D3Q19 kernels. Generated by scripts/gen_kernels.py; do not edit."""',
        "import math",
        "",
        "import numba",
        "",
        "CHUNK = 4096",
        "",
        "",
    ]
    body = "\n\n\n".join([collide_trt(), collide_glbm(), stream_pull()])
    OUT.write_text("\n".join(header) + body + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
