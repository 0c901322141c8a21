"""Phase functions of the funnel mode equation and the integrands I and H.

phi(alpha, r) is the integral of sqrt(f) dr from the upper turning point, where
f = (w^2 + alpha^2 cosh^2 r)/cosh^2 r, so phi(alpha, r) - phi0(alpha) = int_0^r sqrt(f).
I is defined as 2 Re phi; the obstacle integrand H is evaluated directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class PhaseDomainError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseEval:
    phi: complex
    phi0: complex
    gamma: complex
    I_value: float
    turning_radicand: complex


@dataclass(frozen=True)
class ObstaclePhaseEval:
    H_value: float


_ARG_SLACK = 1e-12


def _check_sector(alpha):
    a = np.asarray(alpha, dtype=complex)
    nz = a != 0
    ang = np.angle(a[nz])
    if np.any(ang < -_ARG_SLACK) or np.any(ang > np.pi / 2 + _ARG_SLACK):
        raise PhaseDomainError("arg(alpha) must lie in [0, pi/2]")


def _phi0(alpha, omega):
    return -0.5 * np.pi * (1j * alpha + omega)


def phi0(alpha, omega):
    return _phi0(np.asarray(alpha, dtype=complex), omega)


def _phi_pos(alpha, omega, r):
    """phi for r >= 0, arrays broadcast; alpha = i omega handled by its limit."""
    sh, ch = np.sinh(r), np.cosh(r)
    rad = omega ** 2 + alpha ** 2 * ch ** 2
    R = np.sqrt(rad)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = alpha * np.log((alpha * sh + R) / np.sqrt(omega ** 2 + alpha ** 2))
        t2 = 0.5j * omega * np.log((R - 1j * omega * sh) / (R + 1j * omega * sh))
        out = t1 + t2 + _phi0(alpha, omega)
    special = np.abs(alpha - 1j * omega) < 1e-14 * max(1.0, omega)
    if np.any(special):
        out = np.where(special, 1j * omega * np.log(ch), out)
    # t1 is 0 * log(...) at alpha = 0
    out = np.where(alpha == 0, t2 + _phi0(alpha, omega), out)
    return out


def phi_arrays(alpha, omega, r, check=True):
    alpha = np.asarray(alpha, dtype=complex)
    r = np.asarray(r, dtype=float)
    if check:
        _check_sector(alpha)
    alpha, r = np.broadcast_arrays(alpha, r)
    val = _phi_pos(alpha, omega, np.abs(r))
    # phi - phi0 is odd in r
    return np.where(r < 0, 2 * _phi0(alpha, omega) - val, val)


def gamma_arrays(alpha, omega):
    alpha = np.asarray(alpha, dtype=complex)
    if np.any(np.abs(alpha - 1j * omega) < 1e-14) or np.any(np.abs(alpha + 1j * omega) < 1e-14):
        raise PhaseDomainError("gamma(alpha) has a branch point at alpha = +-i omega")
    return (alpha * np.log(2 * alpha / np.sqrt(omega ** 2 + alpha ** 2))
            + 0.5j * omega * np.log((alpha - 1j * omega) / (alpha + 1j * omega)))


def gamma_factor(alpha: complex, omega: float) -> complex:
    if alpha == 0:
        raise PhaseDomainError("gamma(alpha) requires alpha != 0")
    return complex(gamma_arrays(alpha, omega))


def phase_phi(alpha: complex, omega: float, r: float) -> PhaseEval:
    p = complex(phi_arrays(alpha, omega, r))
    p0 = complex(_phi0(complex(alpha), omega))
    try:
        g = gamma_factor(alpha, omega)
    except PhaseDomainError:
        g = complex("nan+nanj")
    return PhaseEval(p, p0, g, 2 * p.real, omega ** 2 + complex(alpha) ** 2 * math.cosh(r) ** 2)


def I_arrays(alpha, ell, r, check=True):
    omega = 2 * np.pi / ell
    return 2 * phi_arrays(alpha, omega, r, check=check).real


def I_eval(alpha: complex, ell: float, r: float) -> float:
    return float(I_arrays(alpha, ell, r))


def I_literal(alpha, ell, r):
    """The closed form with +omega*arg(u), kept to document the sign of the arg term."""
    omega = 2 * np.pi / ell
    alpha = np.asarray(alpha, dtype=complex)
    sh, ch = np.sinh(r), np.cosh(r)
    R = np.sqrt(omega ** 2 + alpha ** 2 * ch ** 2)
    t1 = (2 * alpha * np.log((alpha * sh + R) / np.sqrt(omega ** 2 + alpha ** 2))).real
    u = (R - 1j * omega * sh) / (R + 1j * omega * sh)
    return t1 + omega * np.angle(u) + np.pi * (alpha.imag - omega)


def H_arrays(alpha, r, check=True):
    alpha = np.asarray(alpha, dtype=complex)
    if check:
        _check_sector(alpha)
        if np.any(np.abs(alpha - 1) < 1e-8):
            raise PhaseDomainError("H has a branch point at alpha = 1")
    sh, ch = np.sinh(r), np.cosh(r)
    Q = np.sqrt(1 + alpha ** 2 * sh ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (2 * alpha * np.log((alpha * ch + Q) / np.sqrt(alpha ** 2 - 1))).real
        t1 = np.where(alpha == 0, 0.0, t1)
        t2 = np.log(np.abs((ch - Q) / (ch + Q)))
    return t1 + t2


def H_eval(alpha: complex, r: float) -> float:
    if not r > 0:
        raise PhaseDomainError("H requires r > 0")
    return float(H_arrays(alpha, r))


def kappa_eval(theta: float, ell: float, r: float, tol: float = 1e-10) -> float:
    """kappa(theta, r) = 2 int_0^inf [I(x e^{i theta}, ell, r)]_+ / x^3 dx - ell sin^2(theta) / 2."""
    from .constants import inner_positive_integral
    if not 0 <= theta <= np.pi / 2 + 1e-15:
        raise PhaseDomainError("theta must lie in [0, pi/2]")
    val, _ = inner_positive_integral(lambda x: I_arrays(x * np.exp(1j * theta), ell, r, check=False), tol=tol)
    return 2 * val - 0.5 * ell * math.sin(theta) ** 2


def zero_curve(theta, ell, r, x_lo=1e-8, x_hi=1e8):
    """rho(theta): the x > 0 where Re phi(x e^{i theta}, r) = 0, by bracketing and bisection."""
    from scipy.optimize import brentq
    f = lambda x: I_arrays(x * np.exp(1j * theta), ell, r, check=False)
    xs = np.geomspace(x_lo, x_hi, 400)
    v = f(xs)
    sc = np.flatnonzero(np.sign(v[:-1]) != np.sign(v[1:]))
    if sc.size == 0:
        return np.inf
    i = sc[0]
    return brentq(lambda x: float(f(x)), xs[i], xs[i + 1], xtol=1e-14, rtol=1e-14)
