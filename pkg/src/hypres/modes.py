"""Fourier-mode solutions of the funnel equation and the mode scattering elements.

The k-th mode equation is

    -w'' - tanh(r) w' + [k^2 w^2 / cosh^2 r - s(1-s)] w = 0,      w = 2 pi / ell,

with even and odd solutions w+ and w- normalised by w+(0) = 1/sqrt(pi),
w-'(0) = 2/sqrt(pi).  Everything is symmetric under k -> -k, so only |k| is used.
Gamma quotients are formed in log space; hypergeometric values carry a separate
log-scale so that large radii and large |s| do not overflow intermediate steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp

from .specfun import (DEFAULT_OPTIONS, EvalOptions, PoleError, _mp_reg_2f1_value, hyp2f1_reg_scaled,
                      log_gamma, rgamma)

SQRT_PI = math.sqrt(math.pi)
R_MAX = 30.0


class Model(str, Enum):
    standard_funnel = "standard_funnel"
    truncated_funnel = "truncated_funnel"
    extended_funnel = "extended_funnel"
    hyperbolic_plane = "hyperbolic_plane"


@dataclass(frozen=True)
class Funnel:
    ell: float
    r0: float = 0.0
    omega: float = field(init=False)

    def __post_init__(self):
        if not self.ell > 0:
            raise ValueError("funnel length must be positive")
        object.__setattr__(self, "omega", 2 * math.pi / self.ell)

    @property
    def model(self) -> Model:
        if self.r0 > 0:
            return Model.truncated_funnel
        if self.r0 < 0:
            return Model.extended_funnel
        return Model.standard_funnel


@dataclass(frozen=True)
class ModeContext:
    k: int
    s: complex

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("mode index must be non-negative (k -> -k symmetry)")

    @property
    def alpha(self) -> complex:
        if self.k == 0:
            raise ValueError("alpha is undefined for k = 0")
        return (self.s - 0.5) / self.k

    @classmethod
    def from_alpha(cls, k: int, alpha: complex) -> "ModeContext":
        return cls(k, 0.5 + k * alpha)


@dataclass(frozen=True)
class ModeBasisEval:
    w_plus: complex
    w_minus: complex
    dw_plus: complex
    dw_minus: complex

    def wronskian(self) -> complex:
        return self.w_plus * self.dw_minus - self.dw_plus * self.w_minus


@dataclass(frozen=True)
class ScatteringElement:
    value: complex
    model: Model


# ---------------------------------------------------------------- Gamma pieces

def _arr(x):
    return np.asarray(x, dtype=complex)


def log_beta(s, k, omega):
    """log beta_k(s) = -log Gamma((s+ikw)/2) - log Gamma((s-ikw)/2)."""
    s = _arr(s)
    ik = 1j * abs(k) * omega
    return -log_gamma((s + ik) / 2) - log_gamma((s - ik) / 2)


def beta(s, k, omega):
    s = _arr(s)
    ik = 1j * abs(k) * omega
    return rgamma((s + ik) / 2) * rgamma((s - ik) / 2)


def q_ratio(s, k, omega):
    """beta_k(s) / beta_k(1+s)."""
    s = _arr(s)
    ik = 1j * abs(k) * omega
    return np.exp(log_gamma((1 + s + ik) / 2) + log_gamma((1 + s - ik) / 2)
                  - log_gamma((s + ik) / 2) - log_gamma((s - ik) / 2))


def _check_pole(mask, what, s):
    if np.any(mask):
        loc = complex(np.asarray(s)[mask].ravel()[0]) if np.ndim(s) else complex(s)
        raise PoleError(f"{what} at s = {loc}", location=loc)


def _near_int_nonpos(z, tol=1e-12):
    z = np.asarray(z)
    n = np.round(z.real)
    return (n <= 0) & (np.abs(z - n) < tol)


# ---------------------------------------------------------------- mode basis

def basis_scaled(s, k, omega, r, opts: EvalOptions = DEFAULT_OPTIONS, derivs: bool = True):
    """Scaled w+, w-, dw+/dr, dw-/dr: actual values are exp(L) times the returned ones.

    With derivs=False only (L, w+, w-) is returned.
    """
    s = _arr(s)
    r = np.asarray(r, dtype=float)
    s, r = np.broadcast_arrays(s, r)
    if np.any(np.abs(r) > R_MAX):
        raise OverflowError(f"|r| must not exceed {R_MAX}")
    ik = 1j * abs(k) * omega
    sh, ch = np.sinh(r), np.cosh(r)
    z = -sh * sh
    ap, bp = (s + ik) / 2, (1 - s + ik) / 2
    am, bm = (1 + s + ik) / 2, (2 - s + ik) / 2
    if derivs:
        A = np.stack([ap, ap + 1, am, am + 1])
        B = np.stack([bp, bp + 1, bm, bm + 1])
        C = np.stack([np.full(s.shape, 0.5), np.full(s.shape, 1.5), np.full(s.shape, 1.5), np.full(s.shape, 2.5)])
    else:
        A, B = np.stack([ap, am]), np.stack([bp, bm])
        C = np.stack([np.full(s.shape, 0.5), np.full(s.shape, 1.5)])
    Ls, Vs = hyp2f1_reg_scaled(A, B, C, np.broadcast_to(z, A.shape), opts)
    L = Ls.max(axis=0)
    F = Vs * np.exp(Ls - L)
    logch = np.log(ch)
    phase = np.exp(ik * logch)
    th = np.tanh(r)
    wp = phase * F[0]
    if not derivs:
        return L, wp, sh * phase * F[1]
    dwp = ik * th * wp + phase * ap * bp * F[1] * (-2 * sh * ch)
    wm = sh * phase * F[2]
    dwm = (ch + ik * sh * th) * phase * F[2] + sh * phase * am * bm * F[3] * (-2 * sh * ch)
    return L, wp, wm, dwp, dwm


def _unscale(L, *vals):
    if np.any(L > 700):
        raise OverflowError("mode function exceeds double range")
    e = np.exp(L)
    return tuple(v * e for v in vals)


def mode_basis_arrays(s, k, omega, r):
    L, wp, wm, dwp, dwm = basis_scaled(s, k, omega, r)
    return _unscale(L, wp, wm, dwp, dwm)


def mode_basis(ctx: ModeContext, fun: Funnel, r: float) -> ModeBasisEval:
    wp, wm, dwp, dwm = mode_basis_arrays(ctx.s, ctx.k, fun.omega, r)
    return ModeBasisEval(complex(wp), complex(wm), complex(dwp), complex(dwm))


# ---------------------------------------------------------------- f_k and g_k

def log_recessive_reg(s, k, omega, r, opts: EvalOptions = DEFAULT_OPTIONS):
    """log-scale and value of Freg((1+s+ikw)/2, (s+ikw)/2; 1/2+s; -1/sinh^2 r), r > 0.

    This entire function of s vanishes exactly at the truncated-funnel mode resonances.
    """
    s = _arr(s)
    ik = 1j * abs(k) * omega
    z = -1.0 / np.sinh(r) ** 2
    L, V = hyp2f1_reg_scaled((1 + s + ik) / 2, (s + ik) / 2, 0.5 + s, z, opts)
    return L, V


def truncated_target(s, k, omega, r0, opts: EvalOptions = DEFAULT_OPTIONS):
    """(coth r0)^{ikw} Freg(...; -1/sinh^2 r0), scaled; real on the real s axis."""
    L, V = log_recessive_reg(s, k, omega, r0, opts)
    ik = 1j * abs(k) * omega
    return L, V * np.exp(ik * math.log(1.0 / math.tanh(r0)))


def log_f_k(s, k, omega, r, opts: EvalOptions = DEFAULT_OPTIONS):
    """log f_k(s;r) for r > 0 from the single-hypergeometric recessive representation.

    f_k(s;r) = Gamma(s-1/2)/pi (sinh r)^{-s-ikw} (cosh r)^{ikw} Freg((1+s+ikw)/2, (s+ikw)/2; 1/2+s; -1/sinh^2 r)
    """
    s = _arr(s)
    _check_pole(_near_int_nonpos(s - 0.5), "f_k has a pole", s)
    ik = 1j * abs(k) * omega
    L, V = log_recessive_reg(s, k, omega, r, opts)
    with np.errstate(divide="ignore"):
        logV = np.log(V)
    return (log_gamma(s - 0.5) - math.log(math.pi) + (-s - ik) * np.log(np.sinh(r))
            + ik * np.log(np.cosh(r)) + L + logV)


def _bracket(s, k, omega, r, sign):
    """Scaled Gamma(s-1/2)[beta_k(1+s) w+ + sign beta_k(s) w-]."""
    s = _arr(s)
    _check_pole(_near_int_nonpos(s - 0.5), "f_k/g_k has a pole", s)
    L, wp, wm, _, _ = basis_scaled(s, k, omega, r)
    ik = 1j * abs(k) * omega
    a1, a2 = (1 + s + ik) / 2, (1 + s - ik) / 2
    b1, b2 = (s + ik) / 2, (s - ik) / 2
    lg = log_gamma(s - 0.5)
    t1 = np.where(_near_int_nonpos(a1) | _near_int_nonpos(a2), 0.0,
                  np.exp(lg - _safe_lg(a1) - _safe_lg(a2)))
    t2 = np.where(_near_int_nonpos(b1) | _near_int_nonpos(b2), 0.0,
                  np.exp(lg - _safe_lg(b1) - _safe_lg(b2)))
    return L, t1 * wp + sign * t2 * wm


def _safe_lg(z):
    z = np.asarray(z, dtype=complex)
    bad = _near_int_nonpos(z)
    return log_gamma(np.where(bad, 1.0, z))


def f_k_from_basis(s, k, omega, r):
    """f_k through the even/odd basis combination (used for negative r and as a cross-check)."""
    L, V = _bracket(s, k, omega, r, -1.0)
    return _unscale(L, V)[0]


def f_k_eval(ctx: ModeContext, fun: Funnel, r: float) -> complex:
    if r > 0:
        return complex(np.exp(log_f_k(ctx.s, ctx.k, fun.omega, r)))
    return complex(f_k_from_basis(ctx.s, ctx.k, fun.omega, r))


def g_k_arrays(s, k, omega, r):
    L, V = _bracket(s, k, omega, r, +1.0)
    return _unscale(L, V)[0]


def g_k_eval(ctx: ModeContext, fun: Funnel, r: float) -> complex:
    return complex(g_k_arrays(ctx.s, ctx.k, fun.omega, r))


def extended_target(s, k, omega, r, opts: EvalOptions = DEFAULT_OPTIONS):
    """Scaled entire function beta_k(1+s) w+ + beta_k(s) w- at r = |r0|.

    Its zeros are the extended-funnel resonances of mode k.
    """
    s = _arr(s)
    L, wp, wm = basis_scaled(s, k, omega, abs(r), opts, derivs=False)
    return L, beta(1 + s, k, omega) * wp + beta(s, k, omega) * wm


def extended_target_mp(s, k, omega, r, dps: int = 50):
    """log of beta_k(1+s) w+ + beta_k(s) w- in multiprecision (the two terms cancel near zeros)."""
    out = []
    with mp.workdps(dps):
        ik = mp.mpc(0, abs(k) * omega)
        rr = mp.mpf(abs(r))
        sh, ch = mp.sinh(rr), mp.cosh(rr)
        z = -sh * sh
        for sv in np.atleast_1d(np.asarray(s, dtype=complex)).ravel():
            sv = mp.mpc(sv)
            ph = mp.power(ch, ik)
            wp = ph * _mp_reg_2f1_value((sv + ik) / 2, (1 - sv + ik) / 2, mp.mpf(0.5), z, dps, 20000)
            wm = sh * ph * _mp_reg_2f1_value((1 + sv + ik) / 2, (2 - sv + ik) / 2, mp.mpf(1.5), z, dps, 20000)
            bet = lambda x: mp.rgamma((x + ik) / 2) * mp.rgamma((x - ik) / 2)
            v = bet(1 + sv) * wp + bet(sv) * wm
            out.append(complex(mp.log(v)) if v != 0 else complex(-np.inf))
    return np.array(out, dtype=complex).reshape(np.shape(s))


def log_extended_target(s, k, omega, r, opts: EvalOptions = DEFAULT_OPTIONS, cancel_tol: float | None = None):
    """log(beta_k(1+s) w+ + beta_k(s) w-) at |r|; elements losing more than the accepted
    accuracy to cancellation between the two terms are recomputed in multiprecision."""
    s, k = np.broadcast_arrays(_arr(s), np.asarray(k))
    shape = s.shape
    s, k = s.ravel(), k.ravel()
    L, wp, wm = basis_scaled(s, k, omega, abs(r), opts, derivs=False)
    t1 = beta(1 + s, k, omega) * wp
    t2 = beta(s, k, omega) * wm
    T = t1 + t2
    tol = cancel_tol if cancel_tol is not None else (opts.fallback_tol or opts.rel_tol)
    with np.errstate(divide="ignore", invalid="ignore"):
        canc = (np.abs(t1) + np.abs(t2)) / np.abs(T)
        out = L + np.log(T)
    bad = ~np.isfinite(out) | ~(canc * 4 * np.finfo(float).eps <= tol)
    for i in np.flatnonzero(bad):
        c = canc[i] if np.isfinite(canc[i]) else 1e40
        dps = int(30 + max(0.0, math.log10(max(c, 1.0))))
        out[i] = extended_target_mp(s[i], int(k[i]), omega, r, min(dps, 400))
    return out.reshape(shape)


def log_c_k(s, k, omega):
    """log c_k(s) with c_k = 1/((2s-1) Gamma(s-1/2) beta_k(1+s)).

    This normalisation gives (2s-1) a_k ~ rho^{1-s} + [S_F]_k rho^s as r -> infinity.
    """
    s = _arr(s)
    ik = 1j * abs(k) * omega
    a1, a2 = (1 + s + ik) / 2, (1 + s - ik) / 2
    _check_pole(_near_int_nonpos(a1) | _near_int_nonpos(a2), "c_k has a pole", s)
    with np.errstate(divide="ignore"):
        lr = np.log(rgamma(s - 0.5) / (2 * s - 1))
    return lr + log_gamma(a1) + log_gamma(a2)


def poisson_coeff_arrays(s, k, omega, r, opts: EvalOptions = DEFAULT_OPTIONS):
    s = _arr(s)
    L, wp, wm = basis_scaled(s, k, omega, r, opts, derivs=False)
    lc = log_c_k(s, k, omega)
    with np.errstate(divide="ignore"):
        lw = np.log(wm) + L
    out = np.exp(lc + lw)
    return np.where(wm == 0, 0.0, out)


def poisson_coeff_recessive(s, k, omega, r, opts: EvalOptions = DEFAULT_OPTIONS, return_cond: bool = False):
    """a_k(s;r) for r > 0 from the two recessive solutions f_k(s), f_k(1-s).

    w- = pi^2 [beta_k(2-s) f_k(s)/Gamma(s-1/2) - beta_k(1+s) f_k(1-s)/Gamma(1/2-s)] / cos(pi s),
    the determinant of the change of basis reducing to -cos(pi s)/pi^2 by reflection.
    This stays well conditioned where the even/odd hypergeometric series cancel badly
    (moderate k); for large k the two terms cancel instead, which return_cond reports.
    """
    s = _arr(s)
    r = np.asarray(r, dtype=float)
    s, r = np.broadcast_arrays(s, r)
    if np.any(r <= 0):
        raise ValueError("recessive representation needs r > 0")
    t1 = log_beta(2 - s, k, omega) + log_f_k(s, k, omega, r, opts) - log_gamma(s - 0.5)
    t2 = log_beta(1 + s, k, omega) + log_f_k(1 - s, k, omega, r, opts) - log_gamma(0.5 - s)
    m = np.maximum(t1.real, t2.real)
    diff = np.exp(t1 - m) - np.exp(t2 - m)
    with np.errstate(divide="ignore"):
        lw = 2 * math.log(math.pi) + m + np.log(diff) - np.log(np.cos(np.pi * s))
    out = np.exp(lw + log_c_k(s, k, omega))
    if return_cond:
        with np.errstate(divide="ignore"):
            return out, 1.0 / np.abs(diff)
    return out


def poisson_coeff_ak(ctx: ModeContext, fun: Funnel, r: float) -> complex:
    if r < 0:
        raise ValueError("poisson_coeff_ak requires r >= 0")
    return complex(poisson_coeff_arrays(ctx.s, ctx.k, fun.omega, r))


# ---------------------------------------------------------------- scattering elements

def log_s_funnel(s, k, omega):
    s = _arr(s)
    ik = 1j * abs(k) * omega
    num = [0.5 - s, (1 + s + ik) / 2, (1 + s - ik) / 2]
    den = [s - 0.5, (2 - s + ik) / 2, (2 - s - ik) / 2]
    for z in num:
        _check_pole(_near_int_nonpos(z), "standard funnel element has a pole", s)
    for z in den:
        _check_pole(_near_int_nonpos(z), "standard funnel element has a zero", s)
    return sum(log_gamma(z) for z in num) - sum(log_gamma(z) for z in den)


def s_funnel_arrays(s, k, omega):
    return np.exp(log_s_funnel(s, k, omega))


def s_funnel(s: complex, k: int, omega: float) -> ScatteringElement:
    return ScatteringElement(complex(s_funnel_arrays(s, k, omega)), Model.standard_funnel)


def log_ratio_truncated(s, k, omega, r0, opts: EvalOptions = DEFAULT_OPTIONS):
    """log([S_trunc(s)]_k / [S_F(s)]_k) from the recessive representation (not principal)."""
    s = _arr(s)
    L1, V1 = log_recessive_reg(1 - s, k, omega, r0, opts)
    L0, V0 = log_recessive_reg(s, k, omega, r0, opts)
    _check_pole(V0 == 0, "truncated element has a pole", s)
    return ((2 * s - 1) * math.log(math.sinh(r0)) + (L1 - L0) + np.log(V1 / V0)
            + log_beta(1 + s, k, omega) - log_beta(2 - s, k, omega))


def s_truncated_arrays(s, k, omega, r0):
    return np.exp(log_s_funnel(s, k, omega) + log_ratio_truncated(s, k, omega, r0))


def s_truncated(s: complex, k: int, fun: Funnel) -> ScatteringElement:
    if not fun.r0 > 0:
        raise ValueError("truncated funnel requires r0 > 0")
    return ScatteringElement(complex(s_truncated_arrays(s, k, fun.omega, fun.r0)), Model.truncated_funnel)


def ratio_extended(s, k, omega, r, opts: EvalOptions = DEFAULT_OPTIONS):
    """[S_ext(s)]_k / [S_F(s)]_k = beta_k(1+s) T(1-s) / (beta_k(2-s) T(s)), T the extended target.

    Equivalent to (w+ + q(1-s) w-)/(w+ + q(s) w-) at |r0|, but cancellation in T is
    detected and repaired.
    """
    s = _arr(s)
    lt0 = log_extended_target(s, k, omega, r, opts)
    lt1 = log_extended_target(1 - s, k, omega, r, opts)
    _check_pole(~np.isfinite(lt0), "extended element has a pole", s)
    ik = 1j * abs(k) * omega
    for z in ((1 + s + ik) / 2, (1 + s - ik) / 2, (2 - s + ik) / 2, (2 - s - ik) / 2):
        _check_pole(_near_int_nonpos(z), "beta factor vanishes", s)
    return np.exp(log_beta(1 + s, k, omega) - log_beta(2 - s, k, omega) + lt1 - lt0)


def s_extended_arrays(s, k, omega, r0):
    return s_funnel_arrays(s, k, omega) * ratio_extended(s, k, omega, r0)


def s_extended(s: complex, k: int, fun: Funnel) -> ScatteringElement:
    if not fun.r0 < 0:
        raise ValueError("extended funnel requires r0 < 0")
    return ScatteringElement(complex(s_extended_arrays(s, k, fun.omega, fun.r0)), Model.extended_funnel)


def log_s_plane(s, k):
    s = _arr(s)
    k = abs(k)
    num = [0.5 - s, s + k]
    den = [s - 0.5, 1 - s + k]
    for z in num:
        _check_pole(_near_int_nonpos(z), "plane element has a pole", s)
    for z in den:
        _check_pole(_near_int_nonpos(z), "plane element has a zero", s)
    return (1 - 2 * s) * math.log(2.0) + sum(log_gamma(z) for z in num) - sum(log_gamma(z) for z in den)


def s_plane(s: complex, k: int) -> ScatteringElement:
    return ScatteringElement(complex(np.exp(log_s_plane(s, k))), Model.hyperbolic_plane)


# ---------------------------------------------------------------- ODE oracle

def ode_reference(ctx: ModeContext, fun: Funnel, r: float, init: ModeBasisEval | None = None,
                  rtol: float = 1e-12) -> ModeBasisEval:
    """Integrate the mode equation from r = 0 (DOP853) for both basis solutions."""
    if abs(r) > 10:
        raise ValueError("ode_reference supports |r| <= 10")
    if init is None:
        init = ModeBasisEval(1 / SQRT_PI, 0j, 0j, 2 / SQRT_PI)
    if r == 0:
        return init
    s, kw2 = ctx.s, (ctx.k * fun.omega) ** 2
    lam = s * (1 - s)

    def rhs(t, y):
        th, c2 = math.tanh(t), math.cosh(t) ** 2
        pot = kw2 / c2 - lam
        return np.array([y[1], -th * y[1] + pot * y[0], y[3], -th * y[3] + pot * y[2]])

    y0 = np.array([init.w_plus, init.dw_plus, init.w_minus, init.dw_minus], dtype=complex)
    sol = solve_ivp(rhs, (0.0, r), y0, method="DOP853", rtol=rtol, atol=1e-14 * max(1.0, abs(y0).max()))
    if not sol.success:
        raise ArithmeticError(f"ODE integration failed: {sol.message}")
    y = sol.y[:, -1]
    return ModeBasisEval(complex(y[0]), complex(y[2]), complex(y[1]), complex(y[3]))
