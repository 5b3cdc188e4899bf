"""Random sphere packings, voxelization, link distances and porosity profiles.

Packings are built by sequential deposition: each sphere is dropped at a
random horizontal position and rolls over the spheres below it until it is
supported by the bottom plate or by three spheres whose contact normals
hold it against gravity.  The horizontal axes are periodic.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from .boundaries import Q_CLAMP, LinkSet, find_links
from .lattice import E, FLUID, SOLID, WALL

log = logging.getLogger(__name__)

PLATE = -1
CONTACT_TOL = 1e-6


class PackingError(RuntimeError):
    def __init__(self, message, achieved_height):
        super().__init__(f"{message} (achieved fill height {achieved_height:.3f})")
        self.achieved_height = achieved_height


@dataclass
class SpherePack:
    centers: np.ndarray
    radii: np.ndarray
    box: tuple
    bottom_plate_z: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=float).reshape(-1, 3)
        self.radii = np.asarray(self.radii, dtype=float).reshape(-1)
        self.box = tuple(float(b) for b in self.box)

    def __len__(self):
        return len(self.radii)

    def scaled(self, factor: float) -> "SpherePack":
        """Same layout with every length multiplied by ``factor``."""
        return SpherePack(self.centers * factor, self.radii * factor,
                          tuple(b * factor for b in self.box),
                          self.bottom_plate_z * factor, self.seed)

    def max_overlap(self) -> float:
        """Largest pairwise overlap relative to the smaller radius (horizontal minimum image)."""
        worst = 0.0
        lx, ly = self.box[0], self.box[1]
        for i in range(len(self) - 1):
            d = self.centers[i + 1:] - self.centers[i]
            d[:, 0] -= lx * np.round(d[:, 0] / lx)
            d[:, 1] -= ly * np.round(d[:, 1] / ly)
            dist = np.sqrt((d * d).sum(axis=1))
            rsum = self.radii[i + 1:] + self.radii[i]
            rmin = np.minimum(self.radii[i + 1:], self.radii[i])
            if len(dist):
                worst = max(worst, float(((rsum - dist) / rmin).max()))
        return worst

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", encoding="utf-8") as fh:
            fh.write("# box = " + " ".join(repr(float(b)) for b in self.box) + "\n")
            fh.write(f"# bottom_plate_z = {float(self.bottom_plate_z)!r}\n")
            fh.write(f"# seed = {self.seed}\n")
            fh.write("x,y,z,r\n")
            for c, r in zip(self.centers, self.radii):
                fh.write(",".join(repr(float(v)) for v in (*c, r)) + "\n")

    @classmethod
    def from_csv(cls, path) -> "SpherePack":
        meta = {}
        rows = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                meta[key.strip()] = val.strip()
            elif line.startswith("x"):
                continue
            else:
                rows.append([float(v) for v in line.split(",")])
        data = np.array(rows, dtype=float).reshape(-1, 4)
        seed = meta.get("seed", "None")
        return cls(data[:, :3], data[:, 3], tuple(float(v) for v in meta["box"].split()),
                   float(meta.get("bottom_plate_z", 0.0)),
                   None if seed == "None" else int(seed))


# --------------------------------------------------------------------------
# sequential deposition

class _Deposit:
    def __init__(self, box, plate_z, rng):
        self.lx, self.ly, self.lz = box
        self.plate_z = plate_z
        self.rng = rng
        self.centers = np.empty((0, 3))
        self.radii = np.empty(0)

    def _rel(self, p):
        """Minimum-image vectors from every placed centre to ``p``."""
        d = p - self.centers
        d[:, 0] -= self.lx * np.round(d[:, 0] / self.lx)
        d[:, 1] -= self.ly * np.round(d[:, 1] / self.ly)
        return d

    def _image(self, j, p):
        d = p - self.centers[j]
        d[0] -= self.lx * round(d[0] / self.lx)
        d[1] -= self.ly * round(d[1] / self.ly)
        return p - d

    def drop(self, p, r, exclude=()):
        """Fall straight down from ``p`` to the first support."""
        best_z, best = self.plate_z + r, PLATE
        if len(self.radii):
            d = self._rel(p)
            reach = self.radii + r
            dh2 = d[:, 0] ** 2 + d[:, 1] ** 2
            ok = dh2 < reach**2 * (1 - 1e-12)
            if exclude:
                ok[list(exclude)] = False
            if ok.any():
                zc = np.full(len(reach), -np.inf)
                zc[ok] = self.centers[ok, 2] + np.sqrt(reach[ok] ** 2 - dh2[ok])
                zc[zc > p[2] + 1e-9] = -np.inf
                j = int(np.argmax(zc))
                if zc[j] > best_z:
                    best_z, best = zc[j], j
        p = p.copy()
        p[2] = best_z
        return p, best

    def _gaps(self, pts, r, exclude):
        """Minimum gap to any sphere or the plate, and who, for each point."""
        gap = pts[:, 2] - r - self.plate_z
        who = np.full(len(pts), PLATE)
        if len(self.radii):
            d = pts[:, None, :] - self.centers[None, :, :]
            d[..., 0] -= self.lx * np.round(d[..., 0] / self.lx)
            d[..., 1] -= self.ly * np.round(d[..., 1] / self.ly)
            g = np.sqrt((d * d).sum(axis=2)) - (self.radii + r)[None, :]
            if exclude:
                g[:, list(exclude)] = np.inf
            j = np.argmin(g, axis=1)
            gj = g[np.arange(len(pts)), j]
            better = gj < gap
            gap = np.where(better, gj, gap)
            who = np.where(better, j, who)
        return gap, who

    def _sweep(self, path, t_end, r, exclude, n=96):
        """Follow ``path(t)`` from 0 to ``t_end``; stop at the first contact."""
        ts = np.linspace(0.0, t_end, n + 1)[1:]
        gap, who = self._gaps(path(ts), r, exclude)
        hit = np.flatnonzero(gap < 0)
        if not len(hit):
            return t_end, None
        i = hit[0]
        lo = ts[i - 1] if i > 0 else 0.0
        hi = ts[i]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            g, _ = self._gaps(path(np.array([mid])), r, exclude)
            if g[0] < 0:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-14 * max(1.0, abs(t_end)):
                break
        _, w = self._gaps(path(np.array([hi])), r, exclude)
        return lo, int(w[0])

    def roll_one(self, p, r, a):
        c = self._image(a, p)
        big_r = self.radii[a] + r
        o = p - c
        h = np.array([o[0], o[1], 0.0])
        hn = np.hypot(o[0], o[1])
        if hn < 1e-12 * big_r:
            phi = self.rng.uniform(0, 2 * np.pi)
            h = np.array([np.cos(phi), np.sin(phi), 0.0])
        else:
            h /= hn
        theta0 = math.acos(max(-1.0, min(1.0, o[2] / big_r)))
        if theta0 >= 0.5 * np.pi:
            return p, [], True

        def path(t):
            th = theta0 + t
            return c + big_r * (np.sin(th)[:, None] * h + np.cos(th)[:, None] * np.array([0, 0, 1.0]))

        t, who = self._sweep(path, 0.5 * np.pi - theta0, r, (a,))
        p_new = path(np.array([t]))[0]
        if who is None:
            # rolled off the equator: nudge outward and fall
            return p_new + 1e-9 * big_r * h, [], True
        return p_new, [a, who], False

    def _normals(self, p, contacts):
        out = []
        for j in contacts:
            if j == PLATE:
                out.append(np.array([0.0, 0.0, 1.0]))
            else:
                v = p - self._image(j, p)
                out.append(v / np.linalg.norm(v))
        return np.array(out)

    def roll_two(self, p, r, a, b):
        ca = self._image(a, p)
        cb = self._image(b, p)
        ra, rb = self.radii[a] + r, self.radii[b] + r
        d = np.linalg.norm(cb - ca)
        n = (cb - ca) / d
        s = (ra**2 - rb**2 + d * d) / (2 * d)
        m = ca + s * n
        rho = math.sqrt(max(ra * ra - s * s, 0.0))
        u = p - m
        u -= (u @ n) * n
        if rho < 1e-12 or np.linalg.norm(u) < 1e-12:
            return p, [a], False
        u /= np.linalg.norm(u)
        v = np.cross(n, u)
        if v[2] > 0:
            v = -v
        phi_end = math.atan2(-v[2], -u[2])
        if phi_end <= 1e-12:
            return m + rho * u, [a, b], True

        def path(t):
            return m + rho * (np.cos(t)[:, None] * u + np.sin(t)[:, None] * v)

        t, who = self._sweep(path, phi_end, r, (a, b))
        p_new = path(np.array([t]))[0]
        if who is None:
            return p_new, [a, b], True
        return p_new, [a, b, who], False

    @staticmethod
    def _support(normals):
        """Coefficients of gravity's reaction on the contact normals (least squares)."""
        z = np.array([0.0, 0.0, 1.0])
        coef, *_ = np.linalg.lstsq(normals.T, z, rcond=None)
        return coef

    def settle(self, p, r, max_moves=200):
        p, who = self.drop(p, r)
        contacts = [who]
        for _ in range(max_moves):
            if PLATE in contacts:
                return p
            if len(contacts) == 1:
                p, contacts, fell = self.roll_one(p, r, contacts[0])
                if fell:
                    p, who = self.drop(p, r)
                    contacts = [who]
                continue
            normals = self._normals(p, contacts)
            coef = self._support(normals)
            if len(contacts) == 2:
                # at the bottom of the two-contact circle, or a contact lifts off
                if min(coef) < -1e-12:
                    keep = int(np.argmax(coef))
                    contacts = [contacts[keep]]
                    continue
                p, contacts, at_bottom = self.roll_two(p, r, *contacts)
                if at_bottom and len(contacts) == 2:
                    coef = self._support(self._normals(p, contacts))
                    resid = np.linalg.norm(self._normals(p, contacts).T @ coef - [0, 0, 1])
                    if min(coef) >= -1e-12 and resid < 1e-8:
                        return p
                    contacts = [contacts[int(np.argmax(coef))]]
                continue
            # three contacts: stable if every reaction is compressive
            if min(coef) >= -1e-12:
                return p
            drop_i = int(np.argmin(coef))
            contacts = [c for i, c in enumerate(contacts) if i != drop_i]
        return None

    def add(self, p, r):
        self.centers = np.vstack([self.centers, p])
        self.radii = np.append(self.radii, r)


def _surface_height(dep: _Deposit, gx, gy, h=None, spheres=None):
    if h is None:
        h = np.full(gx.shape, dep.plate_z)
    if spheres is None:
        spheres = zip(dep.centers, dep.radii)
    for c, r in spheres:
        dx = gx - c[0]
        dy = gy - c[1]
        dx -= dep.lx * np.round(dx / dep.lx)
        dy -= dep.ly * np.round(dy / dep.ly)
        d2 = dx * dx + dy * dy
        inside = d2 < r * r
        h[inside] = np.maximum(h[inside], c[2] + np.sqrt(r * r - d2[inside]))
    return h


def generate_packing(box, r_mean, r_spread=0.0, target_fill_height=None, seed=0,
                     bottom_plate_z=0.0, max_spheres=None, max_rejections=50) -> SpherePack:
    """Deposit spheres until the mean bed surface reaches ``target_fill_height``.

    Radii are uniform in ``r_mean * [1 - r_spread, 1 + r_spread]``.  With
    ``max_spheres`` set the deposition also stops after that many spheres.
    """
    lx, ly, lz = (float(b) for b in box)
    if r_mean < 2:
        raise ValueError(f"r_mean must be at least 2 lattice units, got {r_mean}")
    if not 0.0 <= r_spread <= 0.5:
        raise ValueError(f"r_spread must lie in [0, 0.5], got {r_spread}")
    r_max = r_mean * (1 + r_spread)
    if min(lx, ly) <= 4 * r_max:
        raise ValueError("horizontal box extent must exceed four maximum radii")
    if target_fill_height is None and max_spheres is None:
        raise ValueError("give target_fill_height or max_spheres")
    rng = np.random.default_rng(seed)
    dep = _Deposit((lx, ly, lz), float(bottom_plate_z), rng)
    ng = 48
    gx, gy = np.meshgrid((np.arange(ng) + 0.5) * lx / ng, (np.arange(ng) + 0.5) * ly / ng,
                         indexing="ij")
    rejections = 0
    height = float(bottom_plate_z)
    surface = np.full(gx.shape, height)
    while True:
        if max_spheres is not None and len(dep.radii) >= max_spheres:
            break
        if target_fill_height is not None and height >= target_fill_height:
            break
        r = r_mean * (1 + r_spread * rng.uniform(-1.0, 1.0)) if r_spread > 0 else float(r_mean)
        start = np.array([rng.uniform(0, lx), rng.uniform(0, ly), np.inf])
        p = dep.settle(start, r)
        if p is None or p[2] + r > lz:
            rejections += 1
            if rejections > max_rejections:
                raise PackingError("too many rejected insertions", height)
            continue
        p[0] %= lx
        p[1] %= ly
        dep.add(p, r)
        surface = _surface_height(dep, gx, gy, surface, [(p, r)])
        height = float(surface.mean())
    log.info("deposited %d spheres, fill height %.2f", len(dep.radii), height)
    return SpherePack(dep.centers, dep.radii, (lx, ly, lz), float(bottom_plate_z), seed)


def bed_channel_pack(diameter, box=(3.0, 3.0, 3.0), bed_height=1.25, r_spread=0.25, seed=0,
                     offset_plate=True) -> SpherePack:
    """Sphere bed in the lower part of a wall-bounded channel.

    ``box`` and ``bed_height`` are in units of the mean diameter.  With
    ``offset_plate`` the deposition plate sits one diameter below the bottom
    wall of the fluid domain, so the bed is cut by that wall instead of
    resting on it.
    """
    d = float(diameter)
    plate = -d if offset_plate else 0.0
    lx, ly, lz = (b * d for b in box)
    return generate_packing((lx, ly, lz), d / 2.0, r_spread, target_fill_height=bed_height * d,
                            seed=seed, bottom_plate_z=plate)


def fill_height(pack: SpherePack, n=48) -> float:
    dep = _Deposit(pack.box, pack.bottom_plate_z, None)
    dep.centers, dep.radii = pack.centers, pack.radii
    lx, ly = pack.box[0], pack.box[1]
    gx, gy = np.meshgrid((np.arange(n) + 0.5) * lx / n, (np.arange(n) + 0.5) * ly / n, indexing="ij")
    return float(_surface_height(dep, gx, gy).mean())


# --------------------------------------------------------------------------
# voxelization

@dataclass
class VoxelGeometry:
    flags: np.ndarray
    links: LinkSet
    porosity: np.ndarray
    periodic: tuple
    labels: np.ndarray | None = field(default=None, repr=False)

    @property
    def dims(self):
        return self.flags.shape

    @property
    def z(self):
        return np.arange(self.flags.shape[2]) + 0.5


def _expanded_spheres(pack: SpherePack, dims, periodic):
    centers, radii = [], []
    for c, r in zip(pack.centers, pack.radii):
        shifts = [[0.0] for _ in range(3)]
        for a in range(3):
            if periodic[a]:
                if c[a] - r - 1 < 0:
                    shifts[a].append(dims[a])
                if c[a] + r + 1 > dims[a]:
                    shifts[a].append(-dims[a])
        for sx in shifts[0]:
            for sy in shifts[1]:
                for sz in shifts[2]:
                    centers.append(c + (sx, sy, sz))
                    radii.append(r)
    return np.array(centers, dtype=float).reshape(-1, 3), np.array(radii, dtype=float)


@numba.njit(cache=True)
def _paint_spheres(flags, labels, centers, radii):
    nx, ny, nz = flags.shape
    for s in range(radii.shape[0]):
        cx, cy, cz = centers[s, 0], centers[s, 1], centers[s, 2]
        r = radii[s]
        r2 = r * r
        i0 = max(0, int(math.floor(cx - r - 1)))
        i1 = min(nx, int(math.ceil(cx + r + 1)))
        j0 = max(0, int(math.floor(cy - r - 1)))
        j1 = min(ny, int(math.ceil(cy + r + 1)))
        l0 = max(0, int(math.floor(cz - r - 1)))
        l1 = min(nz, int(math.ceil(cz + r + 1)))
        for i in range(i0, i1):
            dx = i + 0.5 - cx
            for j in range(j0, j1):
                dy = j + 0.5 - cy
                for l in range(l0, l1):
                    dz = l + 0.5 - cz
                    if dx * dx + dy * dy + dz * dz <= r2:
                        flags[i, j, l] = 1
                        labels[i, j, l] = s


@numba.njit(cache=True)
def _link_q(cells, k, nb_flat, shape, flags_flat, labels_flat, centers, radii, e, plate_z):
    nx, ny, nz = shape
    out = np.empty(cells.shape[0])
    ex, ey, ez = float(e[k, 0]), float(e[k, 1]), float(e[k, 2])
    for n in range(cells.shape[0]):
        c = cells[n]
        i = c // (ny * nz)
        j = (c // nz) % ny
        l = c % nz
        px, py, pz = i + 0.5, j + 0.5, l + 0.5
        b = nb_flat[n]
        bi = b // (ny * nz)
        bj = (b // nz) % ny
        bl = b % nz
        if flags_flat[b] == 2:
            out[n] = (pz - plate_z) / (-ez) if ez < 0 else 0.5
            continue
        s = labels_flat[b]
        # undo periodic wrap between the link end point and the stored cell
        ox = (px + ex) - (bi + 0.5)
        oy = (py + ey) - (bj + 0.5)
        oz = (pz + ez) - (bl + 0.5)
        cx = centers[s, 0] + ox
        cy = centers[s, 1] + oy
        cz = centers[s, 2] + oz
        r = radii[s]
        dx, dy, dz = px - cx, py - cy, pz - cz
        a = ex * ex + ey * ey + ez * ez
        bb = 2.0 * (dx * ex + dy * ey + dz * ez)
        cc = dx * dx + dy * dy + dz * dz - r * r
        disc = bb * bb - 4.0 * a * cc
        if disc < 0.0:
            out[n] = 1.0
        else:
            out[n] = (-bb - math.sqrt(disc)) / (2.0 * a)
    return out


def voxelize(pack: SpherePack, dims, periodic=(True, True, False), clamp=Q_CLAMP) -> VoxelGeometry:
    """Cell-centre membership voxelization with exact link distances."""
    dims = tuple(int(d) for d in dims)
    flags = np.zeros(dims, dtype=np.uint8)
    labels = np.full(dims, -1, dtype=np.int64)
    centers, radii = _expanded_spheres(pack, dims, periodic)
    if len(radii):
        _paint_spheres(flags, labels, centers, radii)
    zc = np.arange(dims[2]) + 0.5
    below = zc <= pack.bottom_plate_z
    if below.any():
        flags[:, :, below] = WALL
    if not (flags == FLUID).any():
        raise ValueError("geometry has no fluid cells")
    flags_flat = flags.reshape(-1)
    labels_flat = labels.reshape(-1)
    plate = float(pack.bottom_plate_z)

    def q_of(cells, k, nb_flat):
        return _link_q(cells, k, nb_flat, dims, flags_flat, labels_flat,
                       centers if len(radii) else np.zeros((1, 3)),
                       radii if len(radii) else np.ones(1), E, plate)

    links = find_links(flags, periodic, q_of, clamp)
    eps = porosity_of(flags)
    blocked = np.flatnonzero(eps == 0)
    if len(blocked):
        log.warning("fully blocked planes at z indices %s", blocked.tolist())
    return VoxelGeometry(flags, links, eps, tuple(periodic), labels)


def porosity_of(flags) -> np.ndarray:
    fluid = flags == FLUID
    return fluid.sum(axis=(0, 1)) / float(fluid.shape[0] * fluid.shape[1])


def porosity_profile(geom: VoxelGeometry):
    from .profiles import ProfileData

    eps = porosity_of(geom.flags)
    zero = np.zeros_like(eps)
    return ProfileData(z=geom.z, u_superficial=zero, u_intrinsic=zero.copy(), epsilon=eps,
                       meta={"height": float(geom.dims[2])})


def channel_geometry(dims, periodic=(True, True, False)) -> VoxelGeometry:
    """Empty box; non-periodic axes are closed by walls on the box faces."""
    flags = np.zeros(dims, dtype=np.uint8)
    return VoxelGeometry(flags, find_links(flags, periodic), porosity_of(flags), tuple(periodic))


def sphere_in_box(n, diameter, periodic=(True, True, True), center=None) -> VoxelGeometry:
    c = np.full(3, n / 2.0) if center is None else np.asarray(center, dtype=float)
    pack = SpherePack([c], [diameter / 2.0], (n, n, n), bottom_plate_z=-1e9)
    return voxelize(pack, (n, n, n), periodic)


# --------------------------------------------------------------------------
# voxel file format

VOXEL_MAGIC = b"PORELBM-VOXEL 1\n"


def save_voxels(path, flags, periodic):
    """Write ``flags`` as an ASCII header plus one byte per cell (C order, z fastest)."""
    flags = np.ascontiguousarray(flags, dtype=np.uint8)
    nx, ny, nz = flags.shape
    header = (VOXEL_MAGIC
              + f"dims {nx} {ny} {nz}\n".encode()
              + ("periodic " + " ".join(str(int(p)) for p in periodic) + "\n").encode()
              + b"data\n")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(flags.tobytes(order="C"))


def load_voxels(path):
    with open(path, "rb") as fh:
        if fh.readline() != VOXEL_MAGIC:
            raise ValueError(f"{path}: not a voxel file")
        dims = tuple(int(v) for v in fh.readline().split()[1:])
        periodic = tuple(bool(int(v)) for v in fh.readline().split()[1:])
        if fh.readline().strip() != b"data":
            raise ValueError(f"{path}: missing data marker")
        raw = fh.read()
    flags = np.frombuffer(raw, dtype=np.uint8)
    if flags.size != np.prod(dims):
        raise ValueError(f"{path}: expected {np.prod(dims)} cells, found {flags.size}")
    if flags.max(initial=0) > WALL:
        raise ValueError(f"{path}: unknown flag value {flags.max()}")
    return flags.reshape(dims).copy(), periodic


def geometry_from_flags(flags, periodic) -> VoxelGeometry:
    """Geometry from a bare flag field; all links get q = 1/2 (staircase walls)."""
    return VoxelGeometry(flags, find_links(flags, periodic), porosity_of(flags), tuple(periodic))


__all__ = [
    "FLUID", "SOLID", "WALL", "PackingError", "SpherePack", "VoxelGeometry",
    "generate_packing", "voxelize", "porosity_profile", "channel_geometry",
    "sphere_in_box", "bed_channel_pack", "save_voxels", "load_voxels", "geometry_from_flags", "fill_height",
]
