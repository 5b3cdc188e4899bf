"""Unrolled D3Q19 kernels. Generated by scripts/gen_kernels.py; do not edit."""
import math

import numba

CHUNK = 4096

@numba.njit(cache=True, parallel=True, boundscheck=False)
def collide_trt(f, flags, ncells, op, om, gx, gy, gz):
    nchunk = (ncells + CHUNK - 1) // CHUNK
    for ch in numba.prange(nchunk):
        for c in range(ch * CHUNK, min(ncells, (ch + 1) * CHUNK)):
            if flags[c] != 0:
                continue
            f0 = f[0, c]
            f1 = f[1, c]
            f2 = f[2, c]
            f3 = f[3, c]
            f4 = f[4, c]
            f5 = f[5, c]
            f6 = f[6, c]
            f7 = f[7, c]
            f8 = f[8, c]
            f9 = f[9, c]
            f10 = f[10, c]
            f11 = f[11, c]
            f12 = f[12, c]
            f13 = f[13, c]
            f14 = f[14, c]
            f15 = f[15, c]
            f16 = f[16, c]
            f17 = f[17, c]
            f18 = f[18, c]
            rho = f0 + f1 + f2 + f3 + f4 + f5 + f6 + f7 + f8 + f9 + f10 + f11 + f12 + f13 + f14 + f15 + f16 + f17 + f18
            jx = (f1 + f7 + f9 + f11 + f13) - (f2 + f8 + f10 + f12 + f14)
            jy = (f3 + f7 + f10 + f15 + f17) - (f4 + f8 + f9 + f16 + f18)
            jz = (f5 + f11 + f14 + f15 + f18) - (f6 + f12 + f13 + f16 + f17)
            uu = 1.5 * (jx * jx + jy * jy + jz * jz)
            f[0, c] = f0 - op * (f0 - 0.3333333333333333 * (rho - uu))
            eu = jx
            fg = 0.16666666666666666 * (gx)
            dp = op * (0.5 * (f1 + f2) - 0.05555555555555555 * (rho + 4.5 * eu * eu - uu))
            dm = om * (0.5 * (f1 - f2) - 0.16666666666666666 * eu)
            f[1, c] = f1 - dp - dm + fg
            f[2, c] = f2 - dp + dm - fg
            eu = jy
            fg = 0.16666666666666666 * (gy)
            dp = op * (0.5 * (f3 + f4) - 0.05555555555555555 * (rho + 4.5 * eu * eu - uu))
            dm = om * (0.5 * (f3 - f4) - 0.16666666666666666 * eu)
            f[3, c] = f3 - dp - dm + fg
            f[4, c] = f4 - dp + dm - fg
            eu = jz
            fg = 0.16666666666666666 * (gz)
            dp = op * (0.5 * (f5 + f6) - 0.05555555555555555 * (rho + 4.5 * eu * eu - uu))
            dm = om * (0.5 * (f5 - f6) - 0.16666666666666666 * eu)
            f[5, c] = f5 - dp - dm + fg
            f[6, c] = f6 - dp + dm - fg
            eu = jx + jy
            fg = 0.08333333333333333 * (gx + gy)
            dp = op * (0.5 * (f7 + f8) - 0.027777777777777776 * (rho + 4.5 * eu * eu - uu))
            dm = om * (0.5 * (f7 - f8) - 0.08333333333333333 * eu)
            f[7, c] = f7 - dp - dm + fg
            f[8, c] = f8 - dp + dm - fg
            eu = jx - jy
            fg = 0.08333333333333333 * (gx - gy)
            dp = op * (0.5 * (f9 + f10) - 0.027777777777777776 * (rho + 4.5 * eu * eu - uu))
            dm = om * (0.5 * (f9 - f10) - 0.08333333333333333 * eu)
            f[9, c] = f9 - dp - dm + fg
            f[10, c] = f10 - dp + dm - fg
            eu = jx + jz
            fg = 0.08333333333333333 * (gx + gz)
            dp = op * (0.5 * (f11 + f12) - 0.027777777777777776 * (rho + 4.5 * eu * eu - uu))
            dm = om * (0.5 * (f11 - f12) - 0.08333333333333333 * eu)
            f[11, c] = f11 - dp - dm + fg
            f[12, c] = f12 - dp + dm - fg
            eu = jx - jz
            fg = 0.08333333333333333 * (gx - gz)
            dp = op * (0.5 * (f13 + f14) - 0.027777777777777776 * (rho + 4.5 * eu * eu - uu))
            dm = om * (0.5 * (f13 - f14) - 0.08333333333333333 * eu)
            f[13, c] = f13 - dp - dm + fg
            f[14, c] = f14 - dp + dm - fg
            eu = jy + jz
            fg = 0.08333333333333333 * (gy + gz)
            dp = op * (0.5 * (f15 + f16) - 0.027777777777777776 * (rho + 4.5 * eu * eu - uu))
            dm = om * (0.5 * (f15 - f16) - 0.08333333333333333 * eu)
            f[15, c] = f15 - dp - dm + fg
            f[16, c] = f16 - dp + dm - fg
            eu = jy - jz
            fg = 0.08333333333333333 * (gy - gz)
            dp = op * (0.5 * (f17 + f18) - 0.027777777777777776 * (rho + 4.5 * eu * eu - uu))
            dm = om * (0.5 * (f17 - f18) - 0.08333333333333333 * eu)
            f[17, c] = f17 - dp - dm + fg
            f[18, c] = f18 - dp + dm - fg


@numba.njit(cache=True, parallel=True, boundscheck=False)
def collide_glbm(f, flags, ncells, nz, op_z, om_z, eps_z, lin_z, nl_z, gx, gy, gz):
    """Per-plane porous collision; lin_z = eps*nu/K, nl_z = eps*c_F/sqrt(K)."""
    nchunk = (ncells + CHUNK - 1) // CHUNK
    for ch in numba.prange(nchunk):
        for c in range(ch * CHUNK, min(ncells, (ch + 1) * CHUNK)):
            if flags[c] != 0:
                continue
            l = c % nz
            op = op_z[l]
            om = om_z[l]
            eps = eps_z[l]
            f0 = f[0, c]
            f1 = f[1, c]
            f2 = f[2, c]
            f3 = f[3, c]
            f4 = f[4, c]
            f5 = f[5, c]
            f6 = f[6, c]
            f7 = f[7, c]
            f8 = f[8, c]
            f9 = f[9, c]
            f10 = f[10, c]
            f11 = f[11, c]
            f12 = f[12, c]
            f13 = f[13, c]
            f14 = f[14, c]
            f15 = f[15, c]
            f16 = f[16, c]
            f17 = f[17, c]
            f18 = f[18, c]
            rho = f0 + f1 + f2 + f3 + f4 + f5 + f6 + f7 + f8 + f9 + f10 + f11 + f12 + f13 + f14 + f15 + f16 + f17 + f18
            jx = (f1 + f7 + f9 + f11 + f13) - (f2 + f8 + f10 + f12 + f14)
            jy = (f3 + f7 + f10 + f15 + f17) - (f4 + f8 + f9 + f16 + f18)
            jz = (f5 + f11 + f14 + f15 + f18) - (f6 + f12 + f13 + f16 + f17)
            vx = jx + 0.5 * eps * gx
            vy = jy + 0.5 * eps * gy
            vz = jz + 0.5 * eps * gz
            c0 = 0.5 * (1.0 + 0.5 * lin_z[l])
            c1 = 0.5 * nl_z[l]
            vn = math.sqrt(vx * vx + vy * vy + vz * vz)
            den = c0 + math.sqrt(c0 * c0 + c1 * vn)
            ux = vx / den
            uy = vy / den
            uz = vz / den
            un = math.sqrt(ux * ux + uy * uy + uz * uz)
            Fx = -(lin_z[l] * ux) - nl_z[l] * un * ux + eps * gx
            Fy = -(lin_z[l] * uy) - nl_z[l] * un * uy + eps * gy
            Fz = -(lin_z[l] * uz) - nl_z[l] * un * uz + eps * gz
            uu = 1.5 * (jx * jx + jy * jy + jz * jz) / eps
            f[0, c] = f0 - op * (f0 - 0.3333333333333333 * (rho - uu))
            eu = jx
            fg = 0.16666666666666666 * (Fx)
            dp = op * (0.5 * (f1 + f2) - 0.05555555555555555 * (rho + 4.5 * eu * eu / eps - uu))
            dm = om * (0.5 * (f1 - f2) - 0.16666666666666666 * eu)
            f[1, c] = f1 - dp - dm + fg
            f[2, c] = f2 - dp + dm - fg
            eu = jy
            fg = 0.16666666666666666 * (Fy)
            dp = op * (0.5 * (f3 + f4) - 0.05555555555555555 * (rho + 4.5 * eu * eu / eps - uu))
            dm = om * (0.5 * (f3 - f4) - 0.16666666666666666 * eu)
            f[3, c] = f3 - dp - dm + fg
            f[4, c] = f4 - dp + dm - fg
            eu = jz
            fg = 0.16666666666666666 * (Fz)
            dp = op * (0.5 * (f5 + f6) - 0.05555555555555555 * (rho + 4.5 * eu * eu / eps - uu))
            dm = om * (0.5 * (f5 - f6) - 0.16666666666666666 * eu)
            f[5, c] = f5 - dp - dm + fg
            f[6, c] = f6 - dp + dm - fg
            eu = jx + jy
            fg = 0.08333333333333333 * (Fx + Fy)
            dp = op * (0.5 * (f7 + f8) - 0.027777777777777776 * (rho + 4.5 * eu * eu / eps - uu))
            dm = om * (0.5 * (f7 - f8) - 0.08333333333333333 * eu)
            f[7, c] = f7 - dp - dm + fg
            f[8, c] = f8 - dp + dm - fg
            eu = jx - jy
            fg = 0.08333333333333333 * (Fx - Fy)
            dp = op * (0.5 * (f9 + f10) - 0.027777777777777776 * (rho + 4.5 * eu * eu / eps - uu))
            dm = om * (0.5 * (f9 - f10) - 0.08333333333333333 * eu)
            f[9, c] = f9 - dp - dm + fg
            f[10, c] = f10 - dp + dm - fg
            eu = jx + jz
            fg = 0.08333333333333333 * (Fx + Fz)
            dp = op * (0.5 * (f11 + f12) - 0.027777777777777776 * (rho + 4.5 * eu * eu / eps - uu))
            dm = om * (0.5 * (f11 - f12) - 0.08333333333333333 * eu)
            f[11, c] = f11 - dp - dm + fg
            f[12, c] = f12 - dp + dm - fg
            eu = jx - jz
            fg = 0.08333333333333333 * (Fx - Fz)
            dp = op * (0.5 * (f13 + f14) - 0.027777777777777776 * (rho + 4.5 * eu * eu / eps - uu))
            dm = om * (0.5 * (f13 - f14) - 0.08333333333333333 * eu)
            f[13, c] = f13 - dp - dm + fg
            f[14, c] = f14 - dp + dm - fg
            eu = jy + jz
            fg = 0.08333333333333333 * (Fy + Fz)
            dp = op * (0.5 * (f15 + f16) - 0.027777777777777776 * (rho + 4.5 * eu * eu / eps - uu))
            dm = om * (0.5 * (f15 - f16) - 0.08333333333333333 * eu)
            f[15, c] = f15 - dp - dm + fg
            f[16, c] = f16 - dp + dm - fg
            eu = jy - jz
            fg = 0.08333333333333333 * (Fy - Fz)
            dp = op * (0.5 * (f17 + f18) - 0.027777777777777776 * (rho + 4.5 * eu * eu / eps - uu))
            dm = om * (0.5 * (f17 - f18) - 0.08333333333333333 * eu)
            f[17, c] = f17 - dp - dm + fg
            f[18, c] = f18 - dp + dm - fg


@numba.njit(cache=True, parallel=True, boundscheck=False)
def stream_pull(src, dst, flags, nx, ny, nz, px, py, pz):
    for i in numba.prange(nx):
        im = i - 1 if i > 0 else (nx - 1 if px else -1)
        ip = i + 1 if i < nx - 1 else (0 if px else -1)
        for j in range(ny):
            jm = j - 1 if j > 0 else (ny - 1 if py else -1)
            jp = j + 1 if j < ny - 1 else (0 if py else -1)
            for l in range(nz):
                c = (i * ny + j) * nz + l
                if flags[c] != 0:
                    continue
                lm = l - 1 if l > 0 else (nz - 1 if pz else -1)
                lp = l + 1 if l < nz - 1 else (0 if pz else -1)
                dst[0, c] = src[0, c]
                if im >= 0:
                    s = (im * ny + j) * nz + l
                    if flags[s] == 0:
                        dst[1, c] = src[1, s]
                if ip >= 0:
                    s = (ip * ny + j) * nz + l
                    if flags[s] == 0:
                        dst[2, c] = src[2, s]
                if jm >= 0:
                    s = (i * ny + jm) * nz + l
                    if flags[s] == 0:
                        dst[3, c] = src[3, s]
                if jp >= 0:
                    s = (i * ny + jp) * nz + l
                    if flags[s] == 0:
                        dst[4, c] = src[4, s]
                if lm >= 0:
                    s = (i * ny + j) * nz + lm
                    if flags[s] == 0:
                        dst[5, c] = src[5, s]
                if lp >= 0:
                    s = (i * ny + j) * nz + lp
                    if flags[s] == 0:
                        dst[6, c] = src[6, s]
                if im >= 0 and jm >= 0:
                    s = (im * ny + jm) * nz + l
                    if flags[s] == 0:
                        dst[7, c] = src[7, s]
                if ip >= 0 and jp >= 0:
                    s = (ip * ny + jp) * nz + l
                    if flags[s] == 0:
                        dst[8, c] = src[8, s]
                if im >= 0 and jp >= 0:
                    s = (im * ny + jp) * nz + l
                    if flags[s] == 0:
                        dst[9, c] = src[9, s]
                if ip >= 0 and jm >= 0:
                    s = (ip * ny + jm) * nz + l
                    if flags[s] == 0:
                        dst[10, c] = src[10, s]
                if im >= 0 and lm >= 0:
                    s = (im * ny + j) * nz + lm
                    if flags[s] == 0:
                        dst[11, c] = src[11, s]
                if ip >= 0 and lp >= 0:
                    s = (ip * ny + j) * nz + lp
                    if flags[s] == 0:
                        dst[12, c] = src[12, s]
                if im >= 0 and lp >= 0:
                    s = (im * ny + j) * nz + lp
                    if flags[s] == 0:
                        dst[13, c] = src[13, s]
                if ip >= 0 and lm >= 0:
                    s = (ip * ny + j) * nz + lm
                    if flags[s] == 0:
                        dst[14, c] = src[14, s]
                if jm >= 0 and lm >= 0:
                    s = (i * ny + jm) * nz + lm
                    if flags[s] == 0:
                        dst[15, c] = src[15, s]
                if jp >= 0 and lp >= 0:
                    s = (i * ny + jp) * nz + lp
                    if flags[s] == 0:
                        dst[16, c] = src[16, s]
                if jm >= 0 and lp >= 0:
                    s = (i * ny + jm) * nz + lp
                    if flags[s] == 0:
                        dst[17, c] = src[17, s]
                if jp >= 0 and lm >= 0:
                    s = (i * ny + jp) * nz + lm
                    if flags[s] == 0:
                        dst[18, c] = src[18, s]
