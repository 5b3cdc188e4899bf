"""D3Q19 lattice, TRT collision with body forcing, and two-buffer streaming.

Populations are stored in the fluctuation convention: ``sum(f) = delta_rho``
and ``sum(e_k f_k) = rho0 * u`` with ``rho0 = 1``.  Field arrays are laid out
structure-of-arrays, ``f[k, x, y, z]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numba
import numpy as np

from . import _kernels

FLUID, SOLID, WALL = 0, 1, 2

CS2 = 1.0 / 3.0
RHO0 = 1.0
# abort threshold on |u|, in units of the lattice speed of sound
MAX_MACH = 0.3


class NumericalInstability(RuntimeError):
    """Raised when populations become non-finite or the flow leaves the low-Mach regime."""


def _d3q19_velocities():
    e = [(0, 0, 0)]
    for axis in range(3):
        for s in (1, -1):
            v = [0, 0, 0]
            v[axis] = s
            e.append(tuple(v))
    for a, b in ((0, 1), (0, 2), (1, 2)):
        for sa, sb in ((1, 1), (-1, -1), (1, -1), (-1, 1)):
            v = [0, 0, 0]
            v[a], v[b] = sa, sb
            e.append(tuple(v))
    return np.array(e, dtype=np.int64)


@dataclass(frozen=True)
class LatticeModel:
    e: np.ndarray = dc_field(repr=False)
    w: np.ndarray = dc_field(repr=False)
    opposite: np.ndarray = dc_field(repr=False)
    weights_exact: tuple = dc_field(repr=False)
    cs2: float = CS2

    @property
    def q(self) -> int:
        return len(self.w)

    @property
    def cs(self) -> float:
        return float(np.sqrt(self.cs2))


def make_d3q19() -> LatticeModel:
    e = _d3q19_velocities()
    norm2 = (e**2).sum(axis=1)
    exact = tuple(
        Fraction(1, 3) if n == 0 else Fraction(1, 18) if n == 1 else Fraction(1, 36)
        for n in norm2
    )
    w = np.array([float(x) for x in exact])
    opposite = np.array(
        [int(np.flatnonzero((e == -e[k]).all(axis=1))[0]) for k in range(len(e))],
        dtype=np.int64,
    )
    return LatticeModel(e=e, w=w, opposite=opposite, weights_exact=exact)


D3Q19 = make_d3q19()
E = D3Q19.e
W = D3Q19.w
OPP = D3Q19.opposite
# (k, opposite) pairs with k < opposite; the rest population is handled alone
PAIRS = np.array([(k, OPP[k]) for k in range(1, 19) if k < OPP[k]], dtype=np.int64)


@dataclass(frozen=True)
class FluidParams:
    nu: float
    omega_plus: float
    omega_minus: float
    lambda_magic: float
    rho0: float = RHO0
    force: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("omega_plus", "omega_minus"):
            val = getattr(self, name)
            if not 0.0 < val < 2.0:
                raise ValueError(f"{name}={val} outside (0, 2)")
        if self.nu <= 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not np.all(np.isfinite(self.force)):
            raise ValueError("body force must be finite")

    @property
    def mu(self) -> float:
        return self.rho0 * self.nu

    def with_force(self, force) -> "FluidParams":
        return FluidParams(
            self.nu, self.omega_plus, self.omega_minus, self.lambda_magic,
            self.rho0, tuple(float(g) for g in force),
        )


def set_relaxation_from_magic(nu: float, lambda_magic: float, force=(0.0, 0.0, 0.0)) -> FluidParams:
    """Even rate from the viscosity, odd rate from the magic parameter."""
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    if lambda_magic <= 0:
        raise ValueError(f"lambda_magic must be positive, got {lambda_magic}")
    omega_plus = 1.0 / (3.0 * nu + 0.5)
    omega_minus = 1.0 / (lambda_magic / (1.0 / omega_plus - 0.5) + 0.5)
    return FluidParams(nu, omega_plus, omega_minus, lambda_magic, RHO0,
                       tuple(float(g) for g in force))


def magic_parameter(omega_plus: float, omega_minus: float) -> float:
    return (1.0 / omega_plus - 0.5) * (1.0 / omega_minus - 0.5)


# --------------------------------------------------------------------------
# single-cell reference operations (numpy)

def equilibrium(delta_rho, u, model: LatticeModel = D3Q19, rho0: float = RHO0) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    eu = model.e @ u
    uu = float(u @ u)
    return model.w * (delta_rho + rho0 * (3.0 * eu + 4.5 * eu * eu - 1.5 * uu))


def moments(f, model: LatticeModel = D3Q19, rho0: float = RHO0):
    """Zeroth and first moments ``(delta_rho, u)`` of a population vector."""
    f = np.asarray(f, dtype=float)
    return float(f.sum()), (model.e.T @ f) / rho0


def force_populations(force, model: LatticeModel = D3Q19, rho0: float = RHO0) -> np.ndarray:
    return model.w * rho0 * (model.e @ np.asarray(force, dtype=float)) / model.cs2


def trt_collide(f, params: FluidParams, model: LatticeModel = D3Q19) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    drho, u = moments(f, model, params.rho0)
    feq = equilibrium(drho, u, model, params.rho0)
    opp = model.opposite
    fp, fm = 0.5 * (f + f[opp]), 0.5 * (f - f[opp])
    ep, em = 0.5 * (feq + feq[opp]), 0.5 * (feq - feq[opp])
    out = (f - params.omega_plus * (fp - ep) - params.omega_minus * (fm - em)
           + force_populations(params.force, model, params.rho0))
    if not np.all(np.isfinite(out)):
        raise NumericalInstability("non-finite post-collision populations")
    return out


# --------------------------------------------------------------------------
# field storage

def padded_stride(ncells: int) -> int:
    """Row length for the population buffer.

    A stride that is a multiple of 4 KiB maps all 19 rows onto the same L1
    sets; shifting it by 576 bytes spreads them out.
    """
    return ncells + (72 - ncells) % 512


class LatticeField:
    """Two population buffers plus cell flags.

    ``buf`` has shape ``(19, stride)`` with the first ``N`` columns holding the
    cells in C order; ``f`` is the ``(19, nx, ny, nz)`` view onto it.
    """

    def __init__(self, flags, periodic=(True, True, True)):
        self.flags = np.ascontiguousarray(flags, dtype=np.uint8)
        if self.flags.ndim != 3:
            raise ValueError("flags must be a 3D array")
        self.periodic = tuple(bool(p) for p in periodic)
        n = self.flags.size
        stride = padded_stride(n)
        self.buf = np.zeros((19, stride))
        self.buf_next = np.zeros((19, stride))

    @property
    def dims(self):
        return self.flags.shape

    @property
    def ncells(self) -> int:
        return self.flags.size

    def _view(self, buf):
        return buf[:, : self.ncells].reshape((19,) + self.dims)

    @property
    def f(self) -> np.ndarray:
        return self._view(self.buf)

    @f.setter
    def f(self, values):
        self.f[...] = values

    @property
    def f_next(self) -> np.ndarray:
        return self._view(self.buf_next)

    @property
    def fluid(self) -> np.ndarray:
        return self.flags == FLUID

    def swap(self):
        self.buf, self.buf_next = self.buf_next, self.buf

    def fill_equilibrium(self, delta_rho=0.0, u=(0.0, 0.0, 0.0)):
        feq = equilibrium(delta_rho, u)
        self.buf[:] = 0.0
        self.f[:, self.fluid] = feq[:, None]

    def density_velocity(self, force=(0.0, 0.0, 0.0)):
        """Per-cell ``delta_rho`` and velocity with the half-force shift; zero in solids.

        ``force`` may be a 3-vector or a per-cell ``(3, nx, ny, nz)`` array.
        """
        rho = np.zeros(self.ncells)
        u = np.zeros((3, self.ncells))
        g = np.asarray(force, dtype=float)
        if g.ndim == 1:
            g = np.repeat(g[:, None], self.ncells, axis=1)
        else:
            g = np.ascontiguousarray(g.reshape(3, -1))
        _moments_field(self.buf, self.flags.reshape(-1), g, rho, u, EF)
        return rho.reshape(self.dims), u.reshape((3,) + self.dims)


EF = np.ascontiguousarray(E.astype(np.float64))


# --------------------------------------------------------------------------
# compiled kernels

@numba.njit(cache=True)
def _moments_field(f, flags, force, rho, u, e):
    for c in range(flags.shape[0]):
        if flags[c] != 0:
            continue
        r = 0.0
        jx = 0.0
        jy = 0.0
        jz = 0.0
        for k in range(19):
            fk = f[k, c]
            r += fk
            jx += e[k, 0] * fk
            jy += e[k, 1] * fk
            jz += e[k, 2] * fk
        rho[c] = r
        u[0, c] = jx + 0.5 * force[0, c]
        u[1, c] = jy + 0.5 * force[1, c]
        u[2, c] = jz + 0.5 * force[2, c]


def collide(field: LatticeField, params: FluidParams):
    """TRT collision in place on the current buffer over all fluid cells."""
    gx, gy, gz = (float(g) for g in params.force)
    _kernels.collide_trt(field.buf, field.flags.reshape(-1), field.ncells, params.omega_plus,
                         params.omega_minus, gx, gy, gz)


def stream(field: LatticeField, boundary=None) -> LatticeField:
    """Pull-stream post-collision values into the next buffer, then swap.

    ``boundary`` (anything with ``apply(src, dst)`` on the 2D buffers) writes
    the populations arriving from non-fluid neighbours before the swap.
    """
    px, py, pz = field.periodic
    nx, ny, nz = field.dims
    _kernels.stream_pull(field.buf, field.buf_next, field.flags.reshape(-1), nx, ny, nz, px, py, pz)
    if boundary is not None:
        boundary.apply(field.buf, field.buf_next)
    field.swap()
    return field


def check_stability(u: np.ndarray, f: np.ndarray | None = None):
    if f is not None and not np.isfinite(f).all():
        raise NumericalInstability("non-finite populations")
    speed = np.sqrt((u * u).sum(axis=0)).max(initial=0.0)
    if not np.isfinite(speed):
        raise NumericalInstability("non-finite velocity")
    if speed > MAX_MACH * np.sqrt(CS2):
        raise NumericalInstability(f"|u|max={speed:.4g} exceeds {MAX_MACH} c_s")
