"""Liouville variable and the Airy-type approximate mode solutions.

With s = 1/2 + k alpha the mode equation becomes w'' + tanh(r) w' = k^2 f w + O(1),
f = (omega^2 + alpha^2 cosh^2 r)/cosh^2 r, and the change of variable
(2/3) zeta^{3/2} = phi(alpha, r) maps it to an Airy equation up to O(1/k).  The
approximate solutions below drop the O(1/k) correction and are compared with the
exact hypergeometric modes through the Poisson coefficient a_k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modes import Funnel, ModeContext, poisson_coeff_arrays
from .phase import _check_sector, gamma_arrays, phi0, phi_arrays
from .specfun import airy_ai

SQRT_PI = math.sqrt(math.pi)
_SECTOR = (-2 * np.pi / 3, np.pi / 3)
_SLACK = 1e-9


class BranchContinuityError(ArithmeticError):
    def __init__(self, message, r_interval=None):
        super().__init__(message)
        self.r_interval = r_interval


@dataclass(frozen=True)
class UniformEval:
    zeta: complex
    prefactor_f: complex
    w0_approx: complex
    w1_approx: complex


def _zeta_principal(phi):
    """((3/2) phi)^{2/3} with arg phi taken in (-5pi/4, 3pi/4].

    On the admissible sector arg phi lies in [-pi, pi/2]; values near +pi are -pi up to rounding
    (negative real phi), which is sent to arg zeta = -2pi/3.
    """
    phi = np.asarray(phi, dtype=complex)
    ang = np.angle(phi)
    ang = np.where(ang > 0.75 * np.pi, ang - 2 * np.pi, ang)
    mag = np.abs(1.5 * phi) ** (2 / 3)
    return mag * np.exp(2j * ang / 3)


def _branch_jumps(z, nz):
    """Flags consecutive samples of a zeta path that switch cube-root branch.

    A switch is a step of size ~ sqrt(3)|zeta| out of line with its neighbours; a smooth pass
    close to zeta = 0 also turns the phase quickly but with even steps.
    """
    both = nz[1:] & nz[:-1]
    jump = np.abs(np.angle(z[1:] / np.where(z[:-1] == 0, 1, z[:-1])))
    step = np.abs(np.diff(z))
    if step.size > 1:
        nb = np.maximum(np.r_[step[1], step[:-1]], np.r_[step[1:], step[-2]])
    else:
        nb = np.zeros_like(step)
    return both & (jump > np.pi / 3) & (step > 3 * nb)


def liouville_zeta(alpha: complex, omega: float, r: float, n_check: int = 64) -> complex:
    """zeta(alpha, r) with (2/3) zeta^{3/2} = phi and arg zeta in [-2pi/3, pi/3].

    The branch is checked for continuity along [0, r] (and the sector confinement),
    raising BranchContinuityError otherwise.
    """
    _check_sector(alpha)
    rs = np.linspace(0.0, r, n_check + 1) if r != 0 else np.array([0.0])
    z = _zeta_principal(phi_arrays(np.full(rs.shape, complex(alpha)), omega, rs, check=False))
    ang = np.angle(z)
    # phi carries ~1e-16 relative rounding, so below ~1e-8 the phase of zeta = phi^(2/3) is noise
    nz = np.abs(z) > 1e-8 * max(1.0, float(np.max(np.abs(z))))
    bad = nz & ((ang < _SECTOR[0] - _SLACK) | (ang > _SECTOR[1] + _SLACK))
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise BranchContinuityError("arg zeta leaves [-2pi/3, pi/3]", (float(rs[max(i - 1, 0)]), float(rs[i])))
    sharp = _branch_jumps(z, nz)
    if np.any(sharp):
        i = int(np.flatnonzero(sharp)[0])
        raise BranchContinuityError("zeta branch jumps", (float(rs[i]), float(rs[i + 1])))
    return complex(z[-1])


def zeta_arrays(alpha, omega, r):
    """Vectorised zeta on the principal sector (no continuity scan)."""
    return _zeta_principal(phi_arrays(alpha, omega, r, check=False))


def _radicand(alpha, omega, r):
    return omega ** 2 + np.asarray(alpha) ** 2 * np.cosh(r) ** 2


def w_sigma_arrays(sigma: int, k: int, alpha, omega: float, r):
    """2 sqrt(pi) e^{i pi sigma/6} k^{1/6} zeta^{1/4} R^{-1/4} Ai(k^{2/3} e^{2 pi i sigma/3} zeta), R = omega^2 + alpha^2 cosh^2 r."""
    if sigma not in (0, 1):
        raise ValueError("sigma must be 0 or 1")
    if k < 1:
        raise ValueError("k must be at least 1")
    alpha, r = np.broadcast_arrays(np.asarray(alpha, dtype=complex), np.asarray(r, dtype=float))
    z = zeta_arrays(alpha, omega, r)
    R = _radicand(alpha, omega, r)
    arg = k ** (2 / 3) * np.exp(2j * np.pi * sigma / 3) * z
    ai = airy_ai(arg)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = z ** 0.25 * R ** -0.25
    # at the turning point zeta and R vanish together; use the limit from a nearby point
    tp = (np.abs(z) < 1e-12) | ~np.isfinite(ratio)
    if np.any(tp):
        rr = r[tp] + 1e-6
        ratio[tp] = zeta_arrays(alpha[tp], omega, rr) ** 0.25 * _radicand(alpha[tp], omega, rr) ** -0.25
    return 2 * SQRT_PI * np.exp(1j * np.pi * sigma / 6) * k ** (1 / 6) * ratio * ai


def w_sigma_approx(sigma: int, ctx: ModeContext, fun: Funnel, r: float) -> complex:
    _check_sector(ctx.alpha)
    liouville_zeta(ctx.alpha, fun.omega, r)
    return complex(w_sigma_arrays(sigma, ctx.k, ctx.alpha, fun.omega, r))


def uniform_eval(ctx: ModeContext, fun: Funnel, r: float) -> UniformEval:
    a = ctx.alpha
    z = liouville_zeta(a, fun.omega, r)
    f = _radicand(a, fun.omega, r) / math.cosh(r) ** 2
    return UniformEval(z, complex(f), w_sigma_approx(0, ctx, fun, r), w_sigma_approx(1, ctx, fun, r))


def asymptotic_form(sigma: int, k: int, alpha, omega: float, r):
    """R^{-1/4} exp((-1)^{sigma+1} k phi): the large-|k alpha| form of w_sigma."""
    sgn = -1.0 if sigma == 0 else 1.0
    return _radicand(alpha, omega, r) ** -0.25 * np.exp(sgn * k * phi_arrays(alpha, omega, r, check=False))


def a_k_reconstruction(k: int, alpha: complex, omega: float, r):
    """(1/(2k w0(0))) alpha^{-1/2} e^{-k(phi0+gamma)} [w0(0) w1(r) - w1(0) w0(r)]."""
    r = np.asarray(r, dtype=float)
    w00 = complex(w_sigma_arrays(0, k, alpha, omega, 0.0))
    w10 = complex(w_sigma_arrays(1, k, alpha, omega, 0.0))
    w0 = w_sigma_arrays(0, k, alpha, omega, r)
    w1 = w_sigma_arrays(1, k, alpha, omega, r)
    pre = alpha ** -0.5 * np.exp(-k * (complex(phi0(alpha, omega)) + complex(gamma_arrays(alpha, omega))))
    return pre / (2 * k * w00) * (w00 * w1 - w10 * w0)


@dataclass(frozen=True)
class UniformCase:
    k: int
    alpha: complex
    k_alpha: float
    max_rel_error: float
    n_points: int


@dataclass(frozen=True)
class UniformReport:
    cases: tuple
    slope: float
    intercept: float


def uniform_error_report(fun: Funnel, k_list, alpha_list, r_range=(0.5, 3.0), n_r: int = 26,
                         zeta_min: float = 0.1) -> UniformReport:
    """Max relative error of the Airy reconstruction of a_k against the exact modes, per (k, alpha),
    and the least-squares slope of log(error) against log|k alpha| (needs at least two cases)."""
    rs = np.linspace(r_range[0], r_range[1], n_r)
    cases = []
    for k in k_list:
        for alpha in alpha_list:
            alpha = complex(alpha)
            keep = np.abs(zeta_arrays(np.full(rs.shape, alpha), fun.omega, rs)) >= zeta_min
            r = rs[keep]
            if r.size == 0:
                raise ValueError(f"no r points away from the turning point for k = {k}, alpha = {alpha}")
            exact = poisson_coeff_arrays(0.5 + k * alpha, k, fun.omega, r)
            approx = a_k_reconstruction(k, alpha, fun.omega, r)
            err = float(np.max(np.abs(approx / exact - 1)))
            cases.append(UniformCase(int(k), alpha, float(abs(k * alpha)), err, int(r.size)))
    if len(cases) >= 2:
        x = np.log([c.k_alpha for c in cases])
        y = np.log([c.max_rel_error for c in cases])
        slope, intercept = np.polyfit(x, y, 1)
    else:
        slope, intercept = math.nan, math.nan
    return UniformReport(tuple(cases), float(slope), float(intercept))
