"""Sharp-interface two-domain channel solutions and interface-parameter extraction.

Coordinates: the interface sits at z = 0 in the analytic solutions, the free
region spans ``0 <= z <= h_f`` (top wall at ``h_f``) and the porous region
``-h_p <= z <= 0`` (bottom wall at ``-h_p``).
"""
from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .profiles import ProfileData

log = logging.getLogger(__name__)


class Condition(str, enum.Enum):
    BR = "br"
    OTW = "otw"
    BJ = "bj"
    BJS = "bjs"


@dataclass(frozen=True)
class TwoDomainConfig:
    h_f: float
    h_p: float
    mu: float
    k: float
    G: float
    condition: Condition = Condition.BR
    J: float = 1.0
    alpha: float = 1.0
    beta: float = 0.0
    porosity: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "condition", Condition(self.condition))
        for name in ("h_f", "h_p", "mu", "k", "G", "J"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.condition in (Condition.BJ, Condition.BJS) and not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.porosity <= 1:
            raise ValueError(f"porosity must lie in (0, 1], got {self.porosity}")

    @property
    def mu_eff(self) -> float:
        return self.J * self.mu

    @property
    def u_darcy(self) -> float:
        return self.G * self.k / self.mu

    @property
    def decay_rate(self) -> float:
        """Brinkman decay rate ``sqrt(mu / (mu_eff k))``."""
        return math.sqrt(self.mu / (self.mu_eff * self.k))


@dataclass
class TwoDomainSolution:
    config: TwoDomainConfig
    c0: float
    c1: float
    A: float = 0.0
    B: float = 0.0

    @property
    def u_slip(self) -> float:
        return self.c0

    def free(self, z):
        c = self.config
        return self.c0 + self.c1 * z - c.G / (2 * c.mu) * z * z

    def porous(self, z):
        c = self.config
        if c.condition in (Condition.BJ, Condition.BJS):
            return np.full_like(np.asarray(z, dtype=float), c.u_darcy)
        lam = c.decay_rate
        return c.u_darcy + self.A * np.exp(lam * z) + self.B * np.exp(-lam * (z + c.h_p))

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return np.where(z >= 0, self.free(z), self.porous(np.minimum(z, 0.0)))

    def dudz_free(self) -> float:
        return self.c1

    def dudz_porous(self) -> float:
        c = self.config
        if c.condition in (Condition.BJ, Condition.BJS):
            return 0.0
        lam = c.decay_rate
        return lam * (self.A - self.B * math.exp(-lam * c.h_p))


def _solve(mat, rhs, cond):
    mat = np.asarray(mat, dtype=float)
    if not np.isfinite(mat).all() or np.linalg.cond(mat) > 1e14:
        raise np.linalg.LinAlgError(f"singular interface system for condition {cond.value}")
    return np.linalg.solve(mat, rhs)


def two_domain_coefficients(cfg: TwoDomainConfig) -> TwoDomainSolution:
    """Integration constants of the free parabola and the porous solution."""
    hf, mu, G, k = cfg.h_f, cfg.mu, cfg.G, cfg.k
    um = cfg.u_darcy
    top = G * hf * hf / (2 * mu)  # c0 + c1 hf = top
    if cfg.condition in (Condition.BJ, Condition.BJS):
        # c1 = alpha/sqrt(k) (c0 - um); BJS drops um
        s = cfg.alpha / math.sqrt(k)
        shift = um if cfg.condition is Condition.BJ else 0.0
        mat = [[1.0, hf], [s, -1.0]]
        c0, c1 = _solve(mat, [top, s * shift], cfg.condition)
        return TwoDomainSolution(cfg, float(c0), float(c1))
    lam = cfg.decay_rate
    d = math.exp(-lam * cfg.h_p)
    me = cfg.mu_eff
    # unknowns (c0, c1, A, B)
    rows = [
        [1.0, hf, 0.0, 0.0],                  # U(h_f) = 0
        [0.0, 0.0, d, 1.0],                   # U(-h_p) = 0
        [1.0, 0.0, -1.0, -d],                 # velocity continuity
        [0.0, -mu, me * lam, -me * lam * d],  # stress balance
    ]
    rhs = [top, -um, um, 0.0]
    if cfg.condition is Condition.OTW:
        rows[3][0] = -mu * cfg.beta / math.sqrt(k)
    c0, c1, A, B = _solve(rows, rhs, cfg.condition)
    return TwoDomainSolution(cfg, float(c0), float(c1), float(A), float(B))


def solve_two_domain(cfg: TwoDomainConfig, z) -> ProfileData:
    """Velocity of the two-domain model on the grid ``z`` (interface at 0)."""
    sol = two_domain_coefficients(cfg)
    z = np.asarray(z, dtype=float)
    u = sol(z)
    eps = np.where(z >= 0, 1.0, cfg.porosity)
    meta = {"condition": cfg.condition.value, "height": cfg.h_f + cfg.h_p, "u_slip": sol.u_slip,
            "u_darcy": cfg.u_darcy}
    return ProfileData(z, u, u / eps, eps, meta)


# --------------------------------------------------------------------------
# fitting

class FitError(RuntimeError):
    pass


@dataclass
class PolyFit:
    coef: tuple  # (c0, c1, c2) for U = c0 + c1 z + c2 z^2
    rmse: float
    n: int

    def __call__(self, z):
        c0, c1, c2 = self.coef
        return c0 + c1 * z + c2 * z * z

    def derivative(self, z):
        return self.coef[1] + 2 * self.coef[2] * z


@dataclass
class ExpFit:
    coef: tuple  # (A, a, B, b) for U = A exp(a z) + B exp(b z)
    rmse: float
    n: int
    converged: bool = True
    iterations: int = 0
    single: bool = False

    def __call__(self, z):
        A, a, B, b = self.coef
        return A * np.exp(a * z) + B * np.exp(b * z)

    def derivative(self, z):
        A, a, B, b = self.coef
        return a * A * np.exp(a * z) + b * B * np.exp(b * z)


def _window(profile: ProfileData, window):
    z0, z1 = window
    sel = profile.window(min(z0, z1), max(z0, z1))
    return profile.z[sel], profile.u_superficial[sel]


def fit_polynomial(z, u) -> PolyFit:
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    if len(z) < 4:
        raise FitError(f"free-side window needs at least 4 points, got {len(z)}")
    # centred and scaled basis for conditioning, converted back afterwards
    zc = z.mean()
    zs = max(np.ptp(z) / 2, 1e-300)
    t = (z - zc) / zs
    V = np.vander(t, 3, increasing=True)
    sol, _, rank, _ = np.linalg.lstsq(V, u, rcond=None)
    if rank < 3:
        raise FitError("rank-deficient free-side window")
    p = np.polynomial.Polynomial(sol, domain=[zc - zs, zc + zs], window=[-1, 1]).convert()
    c = np.zeros(3)
    c[: len(p.coef)] = p.coef
    fit = PolyFit(tuple(float(v) for v in c), 0.0, len(z))
    fit.rmse = float(np.sqrt(np.mean((V @ sol - u) ** 2)))
    return fit


def fit_free_profile(profile: ProfileData, window) -> PolyFit:
    """Least-squares parabola ``c0 + c1 z + c2 z^2`` over ``window = (z0, z1)``."""
    return fit_polynomial(*_window(profile, window))


def _lm(fun, jac, p0, max_iter=200, gtol=1e-12):
    """Levenberg-Marquardt with Marquardt scaling; returns (p, cost, converged, iterations)."""
    p = np.asarray(p0, dtype=float)
    r = fun(p)
    cost = 0.5 * float(r @ r)
    lam = 1e-3
    for it in range(1, max_iter + 1):
        J = jac(p)
        g = J.T @ r
        if np.linalg.norm(g) < gtol or cost == 0.0:
            return p, cost, True, it
        d = np.sqrt(np.maximum((J * J).sum(axis=0), 1e-300))
        improved = False
        for _ in range(30):
            aug = np.vstack([J, np.sqrt(lam) * np.diag(d)])
            rhs = np.concatenate([-r, np.zeros(len(p))])
            step = np.linalg.lstsq(aug, rhs, rcond=None)[0]
            trial = p + step
            rt = fun(trial)
            ct = 0.5 * float(rt @ rt)
            if np.isfinite(ct) and ct < cost:
                small = np.linalg.norm(step) <= 1e-15 * (np.linalg.norm(p) + 1e-15)
                p, r, cost = trial, rt, ct
                lam = max(lam / 3.0, 1e-15)
                improved = True
                if small:
                    return p, cost, True, it
                break
            lam *= 4.0
        if not improved:
            # no descent direction left at machine precision
            return p, cost, True, it
    return p, cost, False, max_iter


def _projection(s, y, rates):
    """Amplitudes, residual ``Phi c - y`` and Kaufman Jacobian for fixed rates."""
    with np.errstate(over="ignore"):
        phi = np.exp(np.outer(s, rates))
    if not np.isfinite(phi).all():
        # rejected by the damping loop
        return np.zeros(len(rates)), np.full(len(s), np.inf), None
    q = _orth(phi)
    c = np.linalg.lstsq(phi, y, rcond=None)[0]
    res = phi @ c - y
    dphi = (s[:, None] * phi) * c[None, :]
    jac = dphi - q @ (q.T @ dphi)
    return c, res, jac


def _orth(phi):
    """Orthonormal basis of the column space (drops numerically dependent columns)."""
    q, r = np.linalg.qr(phi)
    keep = np.abs(np.diag(r)) > 1e-13 * np.abs(r).max(initial=1.0)
    return q[:, keep]


def _fit_rates(s, y, rates0, max_iter, gtol):
    def fun(th):
        return _projection(s, y, th)[1]

    def jac(th):
        return _projection(s, y, th)[2]

    th, cost, conv, it = _lm(fun, jac, rates0, max_iter, gtol)
    c = _projection(s, y, th)[0]
    return th, c, cost, conv, it


def fit_exponentials(z, u, max_iter=200, gtol=1e-12) -> ExpFit:
    """``U = A e^{az} + B e^{bz}`` by variable projection and Levenberg-Marquardt.

    For fixed rates the amplitudes follow from linear least squares, so the
    damped Gauss-Newton iteration runs over the rates only, from several
    starting pairs on a grid (scaled coordinate, window mapped to [-1, 0]).
    A single exponential is preferred when it fits as well.
    """
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    if len(z) < 6:
        raise FitError(f"porous-side window needs at least 6 points, got {len(z)}")
    z_ref = z.max()
    L = max(np.ptp(z), 1e-300)
    s = (z - z_ref) / L
    scale = max(np.abs(u).max(), 1e-300)
    y = u / scale

    grid = np.array([-8.0, -2.0, 0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
    starts1 = sorted(grid, key=lambda a: float((_projection(s, y, [a])[1] ** 2).sum()))
    pairs = [(a, b) for i, a in enumerate(grid) for b in list(grid[:i]) + [a * 1.01 + 1e-3]]
    starts2 = sorted(pairs, key=lambda ab: float((_projection(s, y, list(ab))[1] ** 2).sum()))

    best1 = min((_fit_rates(s, y, [a], max_iter, gtol) for a in starts1[:3]), key=lambda t: t[2])
    best2 = min((_fit_rates(s, y, list(ab), max_iter, gtol) for ab in starts2[:6]),
                key=lambda t: t[2])
    n = len(z)
    tiny = (1e-14) ** 2 * n
    if best1[2] <= best2[2] * (1 + 1e-9) + tiny:
        (a,), (A,), cost, conv, it = best1
        B, b, single = 0.0, a, True
    else:
        (a, b), (A, B), cost, conv, it = best2
        single = False
    # back to physical units: A e^{a (z - z_ref)/L} = (A e^{-a z_ref / L}) e^{(a/L) z}
    aa, bb = a / L, b / L
    AA = A * scale * math.exp(-aa * z_ref)
    BB = B * scale * math.exp(-bb * z_ref)
    rmse = math.sqrt(2 * cost / n) * scale
    if not conv:
        warnings.warn("exponential fit did not converge; returning best-so-far parameters",
                      stacklevel=2)
    return ExpFit((float(AA), float(aa), float(BB), float(bb)), rmse, n, conv, it, single)


def fit_porous_profile(profile: ProfileData, window) -> ExpFit:
    """Two-exponential least-squares fit over ``window = (z0, z1)``."""
    return fit_exponentials(*_window(profile, window))


# --------------------------------------------------------------------------
# interface parameters

@dataclass
class InterfaceFit:
    interface_z: float
    u_slip: float
    u_darcy: float
    dudz_free: float
    dudz_porous: float
    k: float
    alpha: float
    beta: float
    mu: float
    mu_eff: float
    eps_mean: float
    rmse_free: float
    rmse_porous: float
    free_window: tuple
    porous_window: tuple
    plateau_window: tuple

    def as_dict(self) -> dict:
        return asdict(self)


def _medium_from_meta(profile, mu, force):
    if mu is None:
        if "nu" not in profile.meta:
            raise ValueError("viscosity not given and not recorded in the profile")
        mu = float(profile.meta["nu"])
    if force is None:
        if "G" not in profile.meta:
            raise ValueError("drive not given and not recorded in the profile")
        force = float(profile.meta["G"])
    return float(mu), float(force)


def default_windows(profile: ProfileData, interface_z):
    """Plateau, porous-side and free-side windows around ``interface_z``.

    Plateau: middle third of the region below the interface.  Porous side:
    from the interface down to where U falls to three times the plateau value.
    Free side: from the interface to 80% of the way to the velocity maximum.
    """
    z = profile.z
    u = profile.u_superficial
    below = z < interface_z
    if below.sum() < 3:
        raise ValueError(f"no porous region below z = {interface_z}")
    z_bot = z[below].min()
    depth = interface_z - z_bot
    plateau = (z_bot + depth / 3.0, z_bot + 2.0 * depth / 3.0)
    um = profile.window_mean(*plateau)
    idx = np.flatnonzero(below)[::-1]
    low = z[idx[-1]]
    for n, i in enumerate(idx):
        if u[i] <= 3.0 * um:
            # keep enough planes for the four-parameter fit
            low = z[idx[max(n, min(5, len(idx) - 1))]]
            break
    porous = (low, interface_z)
    above = z >= interface_z
    if not above.any():
        raise ValueError(f"no free region above z = {interface_z}")
    z_peak = z[np.argmax(np.where(above, u, -np.inf))]
    free = (interface_z, interface_z + 0.8 * (z_peak - interface_z))
    if profile.window(*free).sum() < 4:
        # thin free layer: run up to the peak
        free = (interface_z, float(z_peak))
    return tuple(map(float, plateau)), tuple(map(float, porous)), tuple(map(float, free))


def extract_interface_params(profile: ProfileData, interface_z: float, mu=None, force=None,
                             mu_eff=None, plateau_window=None, porous_window=None,
                             free_window=None) -> InterfaceFit:
    """Slip coefficient (Beavers-Joseph) and stress-jump coefficient from one profile.

    ``mu`` and ``force`` default to the ``nu`` and ``G`` recorded in the
    profile metadata (unit density); ``mu_eff`` defaults to ``mu / eps_mean``
    with ``eps_mean`` averaged over the porous-side window.
    """
    mu, force = _medium_from_meta(profile, mu, force)
    pw, qw, fw = default_windows(profile, interface_z)
    plateau_window = plateau_window or pw
    porous_window = porous_window or qw
    free_window = free_window or fw
    sel = profile.window(*plateau_window)
    um = profile.window_mean(*plateau_window)
    k = mu * um / force
    if not k > 0:
        raise FitError(f"non-positive permeability {k:.3g} from the plateau window")
    free = fit_free_profile(profile, free_window)
    porous = fit_porous_profile(profile, porous_window)
    us = float(free(interface_z))
    d_plus = float(free.derivative(interface_z))
    d_minus = float(porous.derivative(interface_z))
    inside = profile.window(*porous_window) & (profile.z < interface_z)
    if not inside.any():
        inside = profile.window(*porous_window)
    eps_mean = float(profile.epsilon[inside].mean())
    if mu_eff is None:
        mu_eff = mu / eps_mean
    noise = float(profile.u_superficial[sel].std())
    if abs(us) < 10 * noise:
        warnings.warn(f"slip velocity {us:.3g} is within 10x the plateau noise {noise:.3g}",
                      stacklevel=2)
    rk = math.sqrt(k)
    alpha = rk * d_plus / (us - um) if us != um else math.inf
    beta = rk * (mu_eff * d_minus - mu * d_plus) / (mu * us) if us != 0 else math.nan
    return InterfaceFit(float(interface_z), us, um, d_plus, d_minus, k, alpha, beta, mu, mu_eff,
                        eps_mean, free.rmse, porous.rmse, tuple(free_window),
                        tuple(porous_window), tuple(plateau_window))


def interface_position_candidates(profile: ProfileData, eps_tol=1e-3, min_points=6):
    """(z_exact, z_apparent) for a profile carrying both porosity and velocity.

    ``z_exact`` is the lower face of the plane from which the porosity stays
    within ``eps_tol`` of one.  ``z_apparent`` is the upper face of the last
    plane an exponential fit can absorb: the fit window starts where the
    velocity is three times its deep value and grows upward while its RMSE
    stays below twice that of the initial ``min_points`` window.
    """
    z = profile.z
    u = profile.u_superficial
    eps = profile.epsilon
    if len(z) < 2:
        raise ValueError("profile too short")
    dz = z[1] - z[0]
    porous = np.flatnonzero(eps < 1.0 - eps_tol)
    if not len(porous):
        raise ValueError("profile has no porous region")
    top = porous.max()
    if top == len(z) - 1:
        raise ValueError("porosity never reaches one; z_exact undefined")
    z_exact = float(z[top + 1] - dz / 2)
    deep = float(np.median(u[: top + 1]))
    i0 = 0
    for i in range(top, -1, -1):
        if u[i] <= 3.0 * deep:
            i0 = i
            break
    i0 = max(0, min(i0, top + 1 - min_points))
    base = fit_exponentials(z[i0:i0 + min_points], u[i0:i0 + min_points])
    limit = 2.0 * max(base.rmse, 1e-10 * np.abs(u).max())
    last = i0 + min_points - 1
    for j in range(i0 + min_points, len(z)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fit = fit_exponentials(z[i0:j + 1], u[i0:j + 1])
        if fit.rmse > limit:
            break
        last = j
    z_apparent = float(z[last] + dz / 2)
    return z_exact, z_apparent
