"""Link-wise no-slip rules (simple and interpolated bounce-back) and flow drive."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numba
import numpy as np

from .lattice import CS2, E, FLUID, OPP, RHO0, W

Q_CLAMP = (0.05, 1.0)


class Scheme(str, enum.Enum):
    SBB = "sbb"
    CLI = "cli"


@dataclass(frozen=True)
class BoundaryLink:
    """One fluid-to-solid lattice link; ``cell2`` is None when the second fluid node is missing."""

    cell: tuple
    k: int
    q: float
    cell2: tuple | None = None

    def __post_init__(self):
        if not 0.0 < self.q <= 1.0:
            raise ValueError(f"q={self.q} outside (0, 1]")


def cli_coefficient(q):
    return (1.0 - 2.0 * q) / (1.0 + 2.0 * q)


def apply_sbb(f_post: np.ndarray, f_next: np.ndarray, link: BoundaryLink):
    """``f_next[bar k](x1) = f_post[k](x1)``; arrays are indexed ``[k, *cell]``."""
    k = link.k
    f_next[(OPP[k],) + tuple(link.cell)] = f_post[(k,) + tuple(link.cell)]


def apply_cli(f_post: np.ndarray, f_next: np.ndarray, link: BoundaryLink) -> bool:
    """Central linear interpolation bounce-back. Returns False when it fell back to SBB."""
    if link.cell2 is None:
        apply_sbb(f_post, f_next, link)
        return False
    k, kb = link.k, OPP[link.k]
    c = cli_coefficient(link.q)
    x1 = tuple(link.cell)
    x2 = tuple(link.cell2)
    f_next[(kb,) + x1] = c * f_post[(k,) + x2] - c * f_post[(kb,) + x1] + f_post[(k,) + x1]
    return True


class LinkSet:
    """Array-of-links form used by the solvers.

    ``cell`` and ``cell2`` are flat cell indices (``cell2 = -1`` when absent),
    ``k`` points from the fluid cell into the wall.
    """

    def __init__(self, cell, k, q, cell2, shape, wall_velocity=None):
        self.cell = np.ascontiguousarray(cell, dtype=np.int64)
        self.k = np.ascontiguousarray(k, dtype=np.int64)
        self.q = np.ascontiguousarray(q, dtype=np.float64)
        self.cell2 = np.ascontiguousarray(cell2, dtype=np.int64)
        self.shape = tuple(shape)
        n = len(self.cell)
        if not (len(self.k) == len(self.q) == len(self.cell2) == n):
            raise ValueError("link arrays differ in length")
        if n and not ((self.q > 0).all() and (self.q <= 1).all()):
            raise ValueError("q values must lie in (0, 1]")
        self.wall_term = np.zeros(n)
        if wall_velocity is not None:
            self.set_wall_velocity(wall_velocity)
        self.scheme = Scheme.SBB
        self._coef = np.zeros(n)

    def __len__(self):
        return len(self.cell)

    def set_wall_velocity(self, wall_velocity, mask=None):
        """Moving-wall correction ``-2 w_k rho0 (e_k . u_w) / c_s^2`` on the selected links."""
        uw = np.asarray(wall_velocity, dtype=float)
        term = -2.0 * W[self.k] * RHO0 * (E[self.k] @ uw) / CS2
        if mask is None:
            self.wall_term = term
        else:
            self.wall_term = np.where(mask, term, self.wall_term)

    def use(self, scheme) -> "LinkSet":
        self.scheme = Scheme(scheme)
        if self.scheme is Scheme.CLI:
            self._coef = np.where(self.cell2 >= 0, cli_coefficient(self.q), 0.0)
        else:
            self._coef = np.zeros(len(self))
        return self

    @property
    def fallback_count(self) -> int:
        """Links that degrade to SBB under CLI because the second fluid node is missing."""
        return int((self.cell2 < 0).sum())

    def apply(self, f_post, f_next):
        """Write bounce-back populations; both arrays are ``(19, >=N)`` buffers."""
        if self.scheme is Scheme.SBB:
            _apply_sbb_links(f_post, f_next, self.cell, self.k, self.wall_term, OPP)
        else:
            _apply_links(f_post, f_next, self.cell, self.k, self._coef, self.cell2,
                         self.wall_term, OPP)

    def subset(self, mask) -> "LinkSet":
        out = LinkSet(self.cell[mask], self.k[mask], self.q[mask], self.cell2[mask], self.shape)
        out.wall_term = self.wall_term[mask]
        return out.use(self.scheme)

    def links(self):
        """Iterate as :class:`BoundaryLink` objects (for inspection and tests)."""
        for c, k, q, c2 in zip(self.cell, self.k, self.q, self.cell2):
            x1 = np.unravel_index(c, self.shape)
            x2 = None if c2 < 0 else tuple(int(v) for v in np.unravel_index(c2, self.shape))
            yield BoundaryLink(tuple(int(v) for v in x1), int(k), float(q), x2)


@numba.njit(cache=True, boundscheck=False)
def _apply_links(src, dst, cell, k, coef, cell2, wall_term, opp):
    for n in range(cell.shape[0]):
        x1 = cell[n]
        kk = k[n]
        kb = opp[kk]
        c = coef[n]
        x2 = cell2[n]
        if x2 < 0:
            x2 = x1
        # coef == 0 reduces this to plain bounce-back bit for bit
        dst[kb, x1] = c * src[kk, x2] - c * src[kb, x1] + src[kk, x1] + wall_term[n]


@numba.njit(cache=True, boundscheck=False)
def _apply_sbb_links(src, dst, cell, k, wall_term, opp):
    for n in range(cell.shape[0]):
        x1 = cell[n]
        kk = k[n]
        dst[opp[kk], x1] = src[kk, x1] + wall_term[n]


def find_links(flags: np.ndarray, periodic, q_of=None, clamp=Q_CLAMP) -> LinkSet:
    """All (fluid cell, k) pairs whose neighbour along ``e_k`` is non-fluid.

    Neighbours outside the box along a non-periodic axis count as wall, with
    the wall plane on the box face (q = 1/2).  ``q_of(cells, k, nbr_flat)``
    returns q for links into in-box solid cells; default 1/2.
    """
    shape = flags.shape
    fluid = flags == FLUID
    idx = np.indices(shape)
    cells_all, ks, qs, c2s = [], [], [], []
    flat_all = np.arange(fluid.size).reshape(shape)
    for k in range(1, 19):
        nb = [idx[a] + E[k, a] for a in range(3)]
        back = [idx[a] - E[k, a] for a in range(3)]
        outside = np.zeros(shape, dtype=bool)
        back_outside = np.zeros(shape, dtype=bool)
        for a in range(3):
            if periodic[a]:
                nb[a] %= shape[a]
                back[a] %= shape[a]
            else:
                bad = (nb[a] < 0) | (nb[a] >= shape[a])
                outside |= bad
                nb[a] = np.clip(nb[a], 0, shape[a] - 1)
                bback = (back[a] < 0) | (back[a] >= shape[a])
                back_outside |= bback
                back[a] = np.clip(back[a], 0, shape[a] - 1)
        nb_fluid = fluid[tuple(nb)] & ~outside
        sel = fluid & ~nb_fluid
        if not sel.any():
            continue
        cells = flat_all[sel]
        q = np.full(cells.shape, 0.5)
        inbox = ~outside[sel]
        if q_of is not None and inbox.any():
            nb_flat = np.ravel_multi_index(tuple(n[sel][inbox] for n in nb), shape)
            q[inbox] = q_of(cells[inbox], k, nb_flat)
        q = np.clip(q, clamp[0], clamp[1])
        back_fluid = fluid[tuple(back)] & ~back_outside
        c2 = np.where(back_fluid[sel], np.ravel_multi_index(tuple(b[sel] for b in back), shape), -1)
        cells_all.append(cells)
        ks.append(np.full(cells.shape, k))
        qs.append(q)
        c2s.append(c2)
    if cells_all:
        cell = np.concatenate(cells_all)
        order = np.lexsort((np.concatenate(ks), cell))
        return LinkSet(cell[order], np.concatenate(ks)[order], np.concatenate(qs)[order],
                       np.concatenate(c2s)[order], shape)
    return LinkSet([], [], [], [], shape)


class DriveMode(str, enum.Enum):
    BODY_FORCE = "body_force"
    PRESSURE_GRADIENT_AS_FORCE = "pressure_gradient"


@dataclass(frozen=True)
class DriveSpec:
    mode: DriveMode = DriveMode.BODY_FORCE
    magnitude: tuple = (0.0, 0.0, 0.0)
    periodic_axes: tuple = (True, True, False)
    stream_axis: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", DriveMode(self.mode))
        if not np.all(np.isfinite(self.magnitude)):
            raise ValueError("drive magnitude must be finite")
        if self.mode is DriveMode.PRESSURE_GRADIENT_AS_FORCE and not self.periodic_axes[self.stream_axis]:
            raise ValueError("pressure drive needs a periodic stream-wise axis")


def resolve_drive(spec: DriveSpec, length: float | None = None) -> tuple:
    """Body force equivalent of a drive specification.

    For a pressure drive ``magnitude`` holds the pressure drop per period
    along ``stream_axis`` (component on that axis), so the force is ``dp / L``.
    """
    if spec.mode is DriveMode.BODY_FORCE:
        return tuple(float(g) for g in spec.magnitude)
    if length is None or length <= 0:
        raise ValueError(f"channel length must be positive, got {length}")
    g = [0.0, 0.0, 0.0]
    g[spec.stream_axis] = float(spec.magnitude[spec.stream_axis]) / float(length)
    return tuple(g)
