"""REV-scale generalized lattice Boltzmann model for flow through and over porous layers.

The porosity enters the quadratic equilibrium terms, the medium acts through a
Darcy-Forchheimer drag force, and the effective viscosity sets a per-plane
even relaxation rate.  Runs use a ``(1, 1, Nz)`` lattice: the fields vary
along z only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .boundaries import find_links
from .driver import RunStats, iterate_to_steady, measure_permeability
from .lattice import D3Q19, RHO0, LatticeField, LatticeModel, NumericalInstability, stream
from .profiles import ProfileData

EPS_MIN = 1e-3


def kozeny_carman(eps, diameter):
    """``K = eps^3 d^2 / (180 (1 - eps)^2)``; infinite (no drag) where ``eps >= 1``."""
    eps = np.asarray(eps, dtype=float)
    with np.errstate(divide="ignore"):
        k = eps ** 3 * diameter ** 2 / (180.0 * (1.0 - eps) ** 2)
    return np.where(eps >= 1.0, np.inf, k)


def permeability_profile(eps, diameter, k_target=None, window=None):
    """Kozeny-Carman K(z), optionally rescaled so its mean over ``window`` equals ``k_target``.

    ``window`` is a boolean plane mask; the rescaling keeps the closure's
    shape and borrows only the level from a measured permeability.
    """
    k = kozeny_carman(eps, diameter)
    if k_target is not None:
        sel = np.ones(len(k), dtype=bool) if window is None else np.asarray(window)
        ref = k[sel]
        ref = ref[np.isfinite(ref)]
        if not len(ref):
            raise ValueError("permeability window holds no porous planes")
        k = k * (k_target / ref.mean())
    return k


@dataclass
class PorousParams:
    """Per-plane medium description for the GLBM.

    ``permeability`` uses ``inf`` where the drag is off.  With ``darcy_only``
    the equilibrium is the plain one and the force is ``-(nu/K) u + G``.
    """

    epsilon: np.ndarray
    permeability: np.ndarray
    nu: float
    nu_eff: np.ndarray | None = None
    c_F: float = 0.0
    force: tuple = (0.0, 0.0, 0.0)
    lambda_magic: float = 3.0 / 16.0
    darcy_only: bool = False

    def __post_init__(self):
        self.epsilon = np.atleast_1d(np.asarray(self.epsilon, dtype=float))
        n = len(self.epsilon)
        self.permeability = np.broadcast_to(np.asarray(self.permeability, dtype=float), (n,)).copy()
        if self.nu_eff is None:
            self.nu_eff = np.full(n, float(self.nu))
        self.nu_eff = np.broadcast_to(np.asarray(self.nu_eff, dtype=float), (n,)).copy()
        if (self.epsilon <= 0).any() or (self.epsilon > 1).any():
            raise ValueError("porosity must lie in (0, 1]")
        if (self.permeability <= 0).any():
            raise ValueError("permeability must be positive")
        if ((self.epsilon < 1) & ~np.isfinite(self.permeability)).any():
            raise ValueError("porous planes (eps < 1) need a finite permeability")
        if self.nu <= 0 or (self.nu_eff <= 0).any():
            raise ValueError("viscosities must be positive")
        if self.c_F < 0:
            raise ValueError("c_F must be non-negative")

    @classmethod
    def from_porosity(cls, eps, permeability, nu, viscosity="plain", **kw) -> "PorousParams":
        """``viscosity`` is ``"plain"`` (nu), ``"rescaled"`` (nu/eps) or a number J (J*nu in porous planes)."""
        eps = np.clip(np.asarray(eps, dtype=float), EPS_MIN, 1.0)
        if viscosity == "plain":
            nu_eff = np.full(len(eps), nu)
        elif viscosity == "rescaled":
            nu_eff = nu / eps
        else:
            nu_eff = np.where(eps < 1.0, float(viscosity) * nu, nu)
        return cls(eps, permeability, nu, nu_eff, **kw)

    @property
    def viscosity_ratio(self) -> np.ndarray:
        return self.nu_eff / self.nu

    def kernel_arrays(self):
        """Per-plane (omega+, omega-, eps, eps*nu/K, eps*c_F/sqrt(K)) for the collision kernel."""
        op = 1.0 / (3.0 * self.nu_eff + 0.5)
        om = 1.0 / (self.lambda_magic / (1.0 / op - 0.5) + 0.5)
        if ((op <= 0) | (op >= 2) | (om <= 0) | (om >= 2)).any():
            raise ValueError("relaxation rates leave (0, 2)")
        eps = np.ones_like(self.epsilon) if self.darcy_only else self.epsilon
        with np.errstate(divide="ignore"):
            inv_k = np.where(np.isfinite(self.permeability), 1.0 / self.permeability, 0.0)
        lin = eps * self.nu * inv_k
        nl = eps * self.c_F * np.sqrt(inv_k)
        return [np.ascontiguousarray(a, dtype=float) for a in (op, om, eps, lin, nl)]


def glbm_equilibrium(delta_rho, u, eps, model: LatticeModel = D3Q19, rho0: float = RHO0):
    """Equilibrium with the quadratic velocity terms divided by the porosity."""
    if eps <= 0:
        raise ValueError(f"porosity must be positive, got {eps}")
    u = np.asarray(u, dtype=float)
    eu = model.e @ u
    uu = float(u @ u)
    return model.w * (delta_rho + rho0 * (3.0 * eu + 4.5 * eu * eu / eps - 1.5 * uu / eps))


def glbm_force_and_velocity(v, eps, K, c_F, G, nu, dt=1.0):
    """Velocity from the momentum moment with half the drag taken implicitly, and the total force.

    Works on a single 3-vector or on ``(3, ...)`` arrays with broadcastable
    medium parameters.
    """
    v = np.asarray(v, dtype=float)
    g = np.asarray(G, dtype=float).reshape((3,) + (1,) * (v.ndim - 1))
    K = np.asarray(K, dtype=float)
    with np.errstate(divide="ignore"):
        inv_k = np.where(np.isfinite(K), 1.0 / K, 0.0)
    vh = v + 0.5 * dt * eps * g
    c0 = 0.5 * (1.0 + 0.5 * dt * eps * nu * inv_k)
    c1 = 0.5 * dt * eps * c_F * np.sqrt(inv_k)
    disc = c0 * c0 + c1 * np.sqrt((vh * vh).sum(axis=0))
    if np.any(disc < 0):
        raise NumericalInstability("negative discriminant in the porous velocity relation")
    u = vh / (c0 + np.sqrt(disc))
    un = np.sqrt((u * u).sum(axis=0))
    force = -(eps * nu * inv_k) * u - eps * c_F * np.sqrt(inv_k) * un * u + eps * g
    return u, force


class GLBMChannel:
    """Wall-bounded (or periodic) column of ``Nz`` cells driven by a body force or a moving lid."""

    def __init__(self, params: PorousParams, periodic_z=False, lid_velocity=None):
        self.params = params
        nz = len(params.epsilon)
        flags = np.zeros((1, 1, nz), dtype=np.uint8)
        periodic = (True, True, bool(periodic_z))
        self.field = LatticeField(flags, periodic)
        self.field.fill_equilibrium()
        self.links = find_links(flags, periodic).use("sbb")
        if lid_velocity is not None:
            top = D3Q19.e[self.links.k][:, 2] > 0
            self.links.set_wall_velocity(lid_velocity, top)
        self._arrays = params.kernel_arrays()
        self.z = np.arange(nz) + 0.5

    def step(self, n=1):
        op, om, eps, lin, nl = self._arrays
        gx, gy, gz = (float(g) for g in self.params.force)
        fld = self.field
        flags = fld.flags.reshape(-1)
        nz = fld.dims[2]
        for _ in range(n):
            _kernels.collide_glbm(fld.buf, flags, fld.ncells, nz, op, om, eps, lin, nl, gx, gy, gz)
            stream(fld, self.links)

    def velocity(self) -> np.ndarray:
        """Per-plane ``(3, Nz)`` velocity from the implicit relation."""
        p = self.params
        _, j = self.field.density_velocity((0.0, 0.0, 0.0))
        j = j.reshape(3, -1)
        op, om, eps, lin, nl = self._arrays
        g = np.asarray(p.force, dtype=float)[:, None]
        vh = j + 0.5 * eps * g
        c0 = 0.5 * (1.0 + 0.5 * lin)
        c1 = 0.5 * nl
        den = c0 + np.sqrt(c0 * c0 + c1 * np.sqrt((vh * vh).sum(axis=0)))
        return vh / den

    def profile(self, meta=None) -> ProfileData:
        u = self.velocity()[0]
        eps = self.params.epsilon
        return ProfileData(self.z.copy(), u, u / eps, eps.copy(),
                           {"height": float(len(self.z)), **(meta or {})})


def glbm_step(channel: GLBMChannel, n=1) -> GLBMChannel:
    channel.step(n)
    return channel


def run_glbm(channel: GLBMChannel, tol=1e-10, interval=1000, max_steps=500_000):
    stats = RunStats(cells=channel.field.ncells)

    def measure():
        u = channel.velocity()
        return channel.profile(), u

    prof = iterate_to_steady(channel.step, measure, tol, interval, max_steps, stats)
    if not np.isfinite(channel.field.buf).all():
        raise NumericalInstability("non-finite populations")
    prof.meta.update(steps=stats.steps, converged=int(stats.converged))
    return prof, stats


# --------------------------------------------------------------------------
# Couette flow over a porous half-channel

def couette_semi_analytic(u0, H, eps, K, nu, nu_eff, z=None) -> ProfileData:
    """Linear free-region profile over an exponentially decaying porous one (lid at y = H)."""
    if min(u0, H, eps, K, nu, nu_eff) <= 0:
        raise ValueError("all parameters must be positive")
    r = math.sqrt(nu * eps) / math.sqrt(nu_eff * K)
    a = 2.0 * u0 / (2.0 * r * K + eps * H)
    y = np.arange(int(round(H))) + 0.5 if z is None else np.asarray(z, dtype=float)
    free = y >= H / 2.0
    u = np.where(free, r * K * a + eps * a * (y - H / 2.0), r * K * a * np.exp(r * (y - H / 2.0)))
    porosity = np.where(free, 1.0, eps)
    return ProfileData(y, u, u / porosity, porosity,
                       {"height": float(H), "r": r, "a": a, "u0": u0})


@dataclass
class CouetteCase:
    H: int = 64
    eps: float = 0.4
    Da: float = 1.2e-4
    Re: float = 0.1
    nu: float = 1.0 / 6.0
    viscosity: object = "plain"
    lambda_magic: float = 3.0 / 16.0

    @property
    def u0(self) -> float:
        return self.Re * self.nu / self.H

    @property
    def K(self) -> float:
        return self.Da * self.H ** 2

    def params(self) -> PorousParams:
        z = np.arange(self.H) + 0.5
        porous = z < self.H / 2.0
        eps = np.where(porous, self.eps, 1.0)
        k = np.where(porous, self.K, np.inf)
        return PorousParams.from_porosity(eps, k, self.nu, self.viscosity,
                                          lambda_magic=self.lambda_magic)

    @property
    def nu_eff(self) -> float:
        return float(self.params().nu_eff[0])


def run_couette(case: CouetteCase, tol=1e-10, interval=1000, max_steps=500_000):
    """GLBM steady state and the semi-analytic profile for the same case."""
    ch = GLBMChannel(case.params(), lid_velocity=(case.u0, 0.0, 0.0))
    prof, stats = run_glbm(ch, tol, interval, max_steps)
    ref = couette_semi_analytic(case.u0, case.H, case.eps, case.K, case.nu, case.nu_eff, prof.z)
    return prof, ref, stats


def relative_l2(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


# --------------------------------------------------------------------------
# comparison with planar-averaged pore-scale results

VARIANTS = ("rescaled", "plain", "darcy")


@dataclass
class HomogenizedComparison:
    profiles: dict = field(default_factory=dict)
    rmse: dict = field(default_factory=dict)
    permeability: np.ndarray | None = None
    k_plateau: float = float("nan")


def compare_with_dns(dns: ProfileData, diameter, nu, force, window, variants=VARIANTS,
                     lambda_magic=3.0 / 16.0, tol=1e-10, interval=1000, max_steps=500_000):
    """Run the GLBM variants on the DNS porosity profile and score them against the DNS.

    ``window = (z0, z1)`` marks the bed interior used for the permeability
    level; RMSE is taken over all planes and divided by the DNS maximum.
    """
    k_meas = measure_permeability(dns, nu * RHO0, force, window)
    sel = dns.window(*window)
    eps = np.clip(dns.epsilon, EPS_MIN, 1.0)
    k = permeability_profile(eps, diameter, k_meas, sel)
    out = HomogenizedComparison(permeability=k, k_plateau=k_meas)
    g = (float(force), 0.0, 0.0)
    for name in variants:
        if name == "darcy":
            p = PorousParams.from_porosity(eps, k, nu, "plain", force=g,
                                           lambda_magic=lambda_magic, darcy_only=True)
        else:
            p = PorousParams.from_porosity(eps, k, nu, name, force=g, lambda_magic=lambda_magic)
        prof, _ = run_glbm(GLBMChannel(p), tol, interval, max_steps)
        prof.meta["variant"] = name
        out.profiles[name] = prof
        diff = prof.u_superficial - dns.u_superficial
        out.rmse[name] = float(np.sqrt(np.mean(diff ** 2)) / dns.u_max)
    return out
