"""Complex special functions: log-Gamma, the regularized Gauss function F/Gamma(c), Airy Ai.

Everything here is vectorized over numpy arrays.  The hypergeometric routine
measures its own cancellation and recomputes badly conditioned elements with
the same algorithm in multiprecision arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

EPS = np.finfo(float).eps


class SpecialFunctionError(ArithmeticError):
    """Base class for special-function failures."""


class PoleError(SpecialFunctionError):
    def __init__(self, message: str, location=None):
        super().__init__(message)
        self.location = location


class ConvergenceError(SpecialFunctionError):
    pass


class DegenerateCaseError(SpecialFunctionError):
    pass


class AiryOverflowError(SpecialFunctionError, OverflowError):
    pass


@dataclass(frozen=True)
class EvalOptions:
    abs_tol: float = 1e-300
    rel_tol: float = 1e-13
    max_terms: int = 6000
    # elements whose estimated error exceeds rel_tol get recomputed in multiprecision
    mp_fallback: bool = True
    # accepted rounding error for the fallback test; None means rel_tol
    fallback_tol: float | None = None

    def __post_init__(self):
        if self.rel_tol < 8 * EPS:
            raise ValueError("rel_tol must be at least 8 machine epsilons")
        if self.abs_tol <= 0 or self.max_terms <= 0:
            raise ValueError("abs_tol and max_terms must be positive")


DEFAULT_OPTIONS = EvalOptions()


def _as_complex(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return complex(arr) if scalar else arr


# ---------------------------------------------------------------- trig helpers

def sinpi_real(x):
    """sin(pi x) for real x with exact zeros at the integers."""
    x = np.fmod(np.asarray(x, dtype=float), 2.0)
    n = np.round(2.0 * x)
    d = x - 0.5 * n
    q = np.mod(n, 4).astype(int)
    s, c = np.sin(np.pi * d), np.cos(np.pi * d)
    return np.choose(q, [s, c, -s, -c])


def cospi_real(x):
    x = np.fmod(np.asarray(x, dtype=float), 2.0)
    n = np.round(2.0 * x)
    d = x - 0.5 * n
    q = np.mod(n, 4).astype(int)
    s, c = np.sin(np.pi * d), np.cos(np.pi * d)
    return np.choose(q, [c, -s, -c, s])


def sinpi(z):
    z, scalar = _as_complex(z)
    x, y = z.real, z.imag
    out = np.empty(z.shape, dtype=complex)
    # components set separately so that signed zeros survive on the real axis
    with np.errstate(over="ignore", invalid="ignore"):
        out.real = sinpi_real(x) * np.cosh(np.pi * y)
        out.imag = cospi_real(x) * np.sinh(np.pi * y)
    return _out(out, scalar)


def log_sinpi(z):
    """Principal log of sin(pi z), safe for large |Im z|."""
    z, scalar = _as_complex(z)
    out = np.empty(z.shape, dtype=complex)
    y = z.imag
    small = np.abs(y) < 1.0
    with np.errstate(divide="ignore"):
        out[small] = np.log(sinpi(z[small]))
    big = ~small
    if np.any(big):
        zb = z[big]
        sgn = np.sign(zb.imag)
        w = np.where(sgn > 0, zb, np.conj(zb))
        xr = np.fmod(w.real, 2.0)
        # sin(pi w) = (i/2) e^{-i pi w} (1 - e^{2 pi i w}) for Im w > 0
        e2 = np.exp(-2.0 * np.pi * w.imag) * (cospi_real(2 * xr) + 1j * sinpi_real(2 * xr))
        tail = np.log1p(-e2)
        re = np.pi * w.imag - math.log(2.0) + tail.real
        im = np.pi / 2 - np.pi * xr + tail.imag
        im = np.mod(im + np.pi, 2 * np.pi) - np.pi
        im = np.where(im == -np.pi, np.pi, im)
        val = re + 1j * im
        out[big] = np.where(sgn > 0, val, np.conj(val))
    return _out(out, scalar)


# ---------------------------------------------------------------- log Gamma

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
_LOG_PI = math.log(math.pi)
# B_{2n} / (2n (2n-1)), n = 1..10
_STIRLING = np.array([
    1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360,
    1 / 156, -3617 / 122400, 43867 / 244188, -174611 / 125400,
])


def _lg_stirling(z):
    w = 1.0 / z
    w2 = w * w
    acc = np.zeros_like(z)
    for coef in _STIRLING[::-1]:
        acc = acc * w2 + coef
    return (z - 0.5) * np.log(z) - z + _LOG_SQRT_2PI + acc * w


def _lg_right(z):
    """log Gamma for Re z >= 0 (not at 0), by upward shift to Re z >= 10."""
    shift = np.maximum(0, np.ceil(10.0 - z.real)).astype(int)
    acc = np.zeros_like(z)
    zz = z.copy()
    for j in range(int(shift.max(initial=0))):
        m = shift > j
        acc[m] += np.log(zz[m])
        zz[m] += 1.0
    return _lg_stirling(zz) - acc


def _pole_mask(z, tol=1e-12):
    n = np.round(z.real)
    return (n <= 0) & (np.abs(z - n) < tol)


def log_gamma(z):
    """Principal branch of log Gamma(z) (branch cut along the negative real axis)."""
    z, scalar = _as_complex(z)
    if np.any(_pole_mask(z)):
        raise PoleError("log_gamma evaluated at a pole", location=z[_pole_mask(z)].ravel()[0])
    out = np.empty(z.shape, dtype=complex)
    refl = z.real < 0
    right = ~refl
    out[right] = _lg_right(z[right])
    if np.any(refl):
        zr = z[refl]
        corr = np.copysign(2 * np.pi, zr.imag) * np.floor(0.5 * zr.real + 0.25)
        out[refl] = _LOG_PI + 1j * corr - log_sinpi(zr) - _lg_right(1.0 - zr)
    return _out(out, scalar)


def rgamma(z):
    """1/Gamma(z), entire; exact zeros at the non-positive integers."""
    z, scalar = _as_complex(z)
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0.5
    out[right] = np.exp(-_lg_right(z[right]))
    left = ~right
    if np.any(left):
        zl = z[left]
        zero = (zl.imag == 0) & (zl.real == np.round(zl.real))
        val = np.zeros(zl.shape, dtype=complex)
        nz = ~zero
        val[nz] = np.exp(log_sinpi(zl[nz]) + _lg_right(1.0 - zl[nz]) - _LOG_PI)
        out[left] = val
    return _out(out, scalar)


# ---------------------------------------------------------------- 2F1

def _series(a, b, c, x, opts):
    """Regularized Maclaurin series sum_n (a)_n (b)_n x^n / (n! Gamma(c+n)).

    Returns the sum and the cancellation factor sum|t_n| / |sum|.
    Elements with c a non-positive integer must be excluded by the caller.
    """
    n_el = a.size
    if n_el == 0:
        return np.zeros(0, dtype=complex), np.ones(0)
    S = np.zeros(n_el, dtype=complex)
    absum = np.zeros(n_el)
    t = rgamma(c)
    S_act = t.copy()
    abs_act = np.abs(t)
    idx = np.arange(n_el)
    aa, bb, cc, xx = a.copy(), b.copy(), c.copy(), x.copy()
    cmag = np.abs(cc)
    xabs = np.abs(xx)
    tol = opts.rel_tol * 0.01
    for n in range(opts.max_terms):
        ratio = (aa + n) * (bb + n) * xx / ((n + 1) * (cc + n))
        t = t * ratio
        S_act = S_act + t
        abs_act = abs_act + np.abs(t)
        rho = np.maximum(np.abs((aa + n + 1) * (bb + n + 1) / ((n + 2) * (cc + n + 1))) * xabs, xabs)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.abs(t) * rho / (1.0 - rho)
        done = (n + 1 > cmag + 1) & (rho < 1.0) & (tail <= np.maximum(tol * np.abs(S_act), opts.abs_tol))
        done |= (t == 0) & (n + 1 > cmag + np.abs(aa) + np.abs(bb) + 1)
        if np.any(done):
            S[idx[done]] = S_act[done]
            absum[idx[done]] = abs_act[done]
            keep = ~done
            idx, t, S_act, abs_act = idx[keep], t[keep], S_act[keep], abs_act[keep]
            aa, bb, cc, xx, cmag, xabs = aa[keep], bb[keep], cc[keep], xx[keep], cmag[keep], xabs[keep]
            if idx.size == 0:
                break
    else:
        raise ConvergenceError(f"hypergeometric series did not converge in {opts.max_terms} terms")
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(np.abs(S) > 0, absum / np.abs(S), np.where(absum > 0, np.inf, 1.0))
    return S, cond


def _series_general(a, b, c, x, opts):
    """Regularized series that also handles c in {0, -1, -2, ...}."""
    cint = (c.imag == 0) & (c.real <= 0) & (c.real == np.round(c.real))
    S = np.empty(a.shape, dtype=complex)
    cond = np.empty(a.shape)
    reg = ~cint
    if np.any(reg):
        S[reg], cond[reg] = _series(a[reg], b[reg], c[reg], x[reg], opts)
    if np.any(cint):
        # F(a,b;-m;x)/Gamma(-m) = (a)_{m+1} (b)_{m+1} x^{m+1} Freg(a+m+1, b+m+1; m+2; x)
        ai, bi, ci, xi = a[cint], b[cint], c[cint], x[cint]
        m = np.round(-ci.real)
        pref = np.ones(ai.shape, dtype=complex)
        for j in range(int(m.max()) + 1):
            act = j <= m
            pref[act] *= (ai[act] + j) * (bi[act] + j) * xi[act] / (j + 1)
        val, cnd = _series(ai + m + 1, bi + m + 1, (m + 2).astype(complex), xi, opts)
        S[cint] = pref * val
        cond[cint] = cnd
    return S, cond


_DEGEN_TOL = 1e-4
_DIRECT_XMAX = 0.99
_DIRECT_PMAX = 600.0
_DEGEN_H = 8e-3


def _connection(a, b, c, y, logy, opts):
    """Regularized 2F1 at x = 1 - y via the z -> 1-z formula, in scaled form.

    Returns (L, V, cond) with value = exp(L) * V.
    """
    d = c - a - b
    yy = y.astype(complex)
    T1, c1 = _series_general(a, b, 1.0 - d, yy, opts)
    T2, c2 = _series_general(c - a, c - b, 1.0 + d, yy, opts)
    g1 = rgamma(c - a) * rgamma(c - b)
    g2 = rgamma(a) * rgamma(b)
    # exp(log(pi/sin(pi d))) kept separate to avoid overflow of y^d
    L2 = d * logy
    L2r = L2.real
    A1 = g1 * T1
    A2 = g2 * T2 * np.exp(1j * L2.imag)
    Lm = np.maximum(0.0, L2r)
    V = A1 * np.exp(-Lm) - A2 * np.exp(L2r - Lm)
    mag = np.abs(A1) * c1 * np.exp(-Lm) + np.abs(A2) * c2 * np.exp(L2r - Lm)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(np.abs(V) > 0, mag / np.abs(V), np.inf)
    V = V * (np.pi / sinpi(d))
    return Lm, V, cond


def _unit_interval(a, b, c, x, y, logy, opts):
    """Regularized 2F1 for 0 <= x < 1 given y = 1 - x accurately.  Scaled output."""
    L = np.zeros(a.shape)
    V = np.empty(a.shape, dtype=complex)
    cond = np.ones(a.shape)
    near = x > 0.9
    far = ~near
    if np.any(far):
        V[far], cond[far] = _series_general(a[far], b[far], c[far], x[far].astype(complex), opts)
    if np.any(near):
        an, bn, cn, yn, ly, xn = a[near], b[near], c[near], y[near], logy[near], x[near]
        d = cn - an - bn
        deg = np.abs(d - np.round(d.real)) < _DEGEN_TOL
        Ln = np.zeros(an.shape)
        Vn = np.empty(an.shape, dtype=complex)
        cn_ = np.empty(an.shape)
        ok = ~deg
        if np.any(ok):
            Ln[ok], Vn[ok], cn_[ok] = _connection(an[ok], bn[ok], cn[ok], yn[ok], ly[ok], opts)
        if np.any(deg):
            Ln[deg], Vn[deg], cn_[deg] = _degenerate(an[deg], bn[deg], cn[deg], yn[deg], ly[deg], opts)
        # the connection formula can cancel badly (large parameters); the direct series
        # still converges for x <= 0.99 and may be well conditioned there
        retry = ~(cn_ * EPS * 4 <= opts.rel_tol) & (xn <= _DIRECT_XMAX)
        retry &= np.abs(an) + np.abs(bn) + np.abs(cn) < _DIRECT_PMAX
        if np.any(retry):
            Sd, cd = _series_general(an[retry], bn[retry], cn[retry], xn[retry].astype(complex), opts)
            better = cd < cn_[retry]
            idx = np.flatnonzero(retry)[better]
            Ln[idx], Vn[idx], cn_[idx] = 0.0, Sd[better], cd[better]
        L[near], V[near], cond[near] = Ln, Vn, cn_
    return L, V, cond


def _degenerate(a, b, c, y, logy, opts):
    """Integer c-a-b: symmetric perturbation of c with two Richardson levels."""
    levels = []
    conds = []
    for h in (_DEGEN_H, _DEGEN_H / 2, _DEGEN_H / 4):
        Lp, Vp, cp = _connection(a, b, c + h, y, logy, opts)
        Lq, Vq, cq = _connection(a, b, c - h, y, logy, opts)
        Lm = np.maximum(Lp, Lq)
        levels.append((Lm, 0.5 * (Vp * np.exp(Lp - Lm) + Vq * np.exp(Lq - Lm))))
        conds.append(np.maximum(cp, cq))
    Lm = np.max([lv[0] for lv in levels], axis=0)
    E = [lv[1] * np.exp(lv[0] - Lm) for lv in levels]
    R1 = [(4 * E[1] - E[0]) / 3, (4 * E[2] - E[1]) / 3]
    R2 = (16 * R1[1] - R1[0]) / 15
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.abs(R2 - R1[1]) / np.abs(R2)
    # express the extrapolation error as an equivalent cancellation factor
    cond = np.maximum(conds[-1], err / EPS)
    return Lm, R2, cond


def _scaled_reg_2f1(a, b, c, z, opts):
    """Regularized 2F1 for real z <= 0 (arrays of equal shape).  Returns (L, V, cond)."""
    L = np.zeros(a.shape)
    V = np.empty(a.shape, dtype=complex)
    cond = np.ones(a.shape)
    direct = z >= -0.5
    if np.any(direct):
        V[direct], cond[direct] = _series_general(a[direct], b[direct], c[direct],
                                                  z[direct].astype(complex), opts)
    pf = ~direct
    if np.any(pf):
        ap, bp, cp, zp = a[pf], b[pf], c[pf], z[pf]
        y = 1.0 / (1.0 - zp)
        x = -zp * y
        logy = -np.log1p(-zp)
        # F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1))
        Lu, Vu, cu = _unit_interval(ap, cp - bp, cp, x, y, logy, opts)
        Lp = ap * logy
        L[pf] = Lu + Lp.real
        V[pf] = Vu * np.exp(1j * Lp.imag)
        cond[pf] = cu
    return L, V, cond


# multiprecision twin of the same algorithm, used only for badly conditioned elements

def _mp_series(a, b, c, x, tol, max_terms):
    if c.imag == 0 and c.real <= 0 and c.real == int(c.real):
        m = int(-c.real)
        pref = mp.mpf(1)
        for j in range(m + 1):
            pref *= (a + j) * (b + j) * x / (j + 1)
        return pref * _mp_series(a + m + 1, b + m + 1, mp.mpf(m + 2), x, tol, max_terms)
    t = mp.rgamma(c)
    S = t
    cm = abs(c)
    for n in range(max_terms):
        t = t * (a + n) * (b + n) * x / ((n + 1) * (c + n))
        S += t
        if n + 1 > cm + 1 and abs(t) <= tol * abs(S) and abs(x) * abs((a + n + 1) * (b + n + 1)) < abs((n + 2) * (c + n + 1)):
            if abs(t) * 1e3 <= tol * abs(S) or abs(x) < 0.95:
                return S
    raise ConvergenceError("multiprecision hypergeometric series did not converge")


def _mp_connection(a, b, c, y, tol, max_terms):
    d = c - a - b
    T1 = _mp_series(a, b, 1 - d, y, tol, max_terms)
    T2 = _mp_series(c - a, c - b, 1 + d, y, tol, max_terms)
    return (mp.pi / mp.sin(mp.pi * d)) * (mp.rgamma(c - a) * mp.rgamma(c - b) * T1
                                          - mp.power(y, d) * mp.rgamma(a) * mp.rgamma(b) * T2)


def _mp_reg_2f1(a, b, c, z, dps, max_terms=20000):
    """Scaled (L, V) from the multiprecision evaluation."""
    with mp.workdps(dps):
        v = _mp_reg_2f1_value(a, b, c, z, dps, max_terms)
        if v == 0:
            return 0.0, 0j
        m = abs(v)
        return float(mp.log(m)), complex(v / m)


def _mp_reg_2f1_value(a, b, c, z, dps, max_terms):
    a, b, c, z = mp.mpc(a), mp.mpc(b), mp.mpc(c), mp.mpf(z)
    tol = mp.mpf(10) ** (-(dps - 5))
    if z >= -0.5:
        return _mp_series(a, b, c, z, tol, max_terms)
    y = 1 / (1 - z)
    x = -z * y
    A, B, C = a, c - b, c
    pref = mp.power(y, a)
    if x <= 0.9:
        return pref * _mp_series(A, B, C, x, tol, max_terms)
    d = C - A - B
    if abs(d - mp.nint(d.real)) < _DEGEN_TOL:
        h = mp.mpf(10) ** (-(dps // 4))
        v = 0.5 * (_mp_connection(A, B, C + h, y, tol, max_terms)
                   + _mp_connection(A, B, C - h, y, tol, max_terms))
        return pref * v
    return pref * _mp_connection(A, B, C, y, tol, max_terms)


def hyp2f1_reg_scaled(a, b, c, z, opts: EvalOptions = DEFAULT_OPTIONS):
    """Regularized 2F1(a,b;c;z) for real z <= 0 as (L, V) with value exp(L)*V.

    The split keeps large Pfaff prefactors representable.
    """
    a, b, c = (np.asarray(v, dtype=complex) for v in (a, b, c))
    z = np.asarray(z, dtype=float)
    if np.any(z > 0):
        raise ValueError("hyp2f1_reg supports real z <= 0 only")
    a, b, c, z = np.broadcast_arrays(a, b, c, z)
    shape = a.shape
    a, b, c, z = (np.ascontiguousarray(v).ravel() for v in (a, b, c, z))
    with np.errstate(over="ignore", invalid="ignore"):
        L, V, cond = _scaled_reg_2f1(a, b, c, z, opts)
    ftol = opts.rel_tol if opts.fallback_tol is None else opts.fallback_tol
    bad = ~np.isfinite(V) | ~np.isfinite(cond) | (cond * EPS * 4 > ftol)
    if opts.mp_fallback and np.any(bad):
        for i in np.flatnonzero(bad):
            cnd = cond[i] if np.isfinite(cond[i]) and cond[i] > 1 else 1e30
            dps = int(25 + math.log10(cnd))
            L[i], V[i] = _mp_reg_2f1(a[i], b[i], c[i], z[i], min(dps, 400))
    return L.reshape(shape), V.reshape(shape)


def hyp2f1_reg(a, b, c, z, opts: EvalOptions = DEFAULT_OPTIONS):
    """Regularized Gauss function F(a,b;c;z)/Gamma(c) for real z <= 0."""
    scalar = all(np.ndim(v) == 0 for v in (a, b, c, z))
    L, V = hyp2f1_reg_scaled(a, b, c, z, opts)
    with np.errstate(over="ignore"):
        out = np.exp(L) * V
    return complex(out) if scalar else out


# ---------------------------------------------------------------- Airy

_AI0 = 0.355028053887817239260  # 3^{-2/3}/Gamma(2/3)
_AIP0 = 0.258819403792806798405  # 3^{-1/3}/Gamma(1/3)
_R_SERIES = 3.0
_R_ASYM = 10.0


def _ai_maclaurin(z):
    z3 = z ** 3
    f, g = 1.0 + 0j, z
    fd, gd = 0j, 1.0 + 0j
    tf, tg = 1.0 + 0j, z
    k = 0
    while True:
        tf = tf * z3 / ((3 * k + 2) * (3 * k + 3))
        tg = tg * z3 / ((3 * k + 3) * (3 * k + 4))
        k += 1
        f += tf
        g += tg
        fd += 3 * k * tf / z if z != 0 else 0
        gd += (3 * k + 1) * tg / z if z != 0 else 0
        if abs(tf) + abs(tg) < 1e-18 * (abs(f) + abs(g)) and k > 3:
            break
    return _AI0 * f - _AIP0 * g, _AI0 * fd - _AIP0 * gd


def _u_coeffs(n):
    u = [1.0]
    for k in range(1, n):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1)))
    v = [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(n)]
    return u, v


_U, _V = _u_coeffs(40)


def _asym_sum(coefs, zeta, start=0, stride=1):
    s = 0j
    prev = np.inf
    k = start
    sign = 1.0
    while k < len(coefs):
        term = sign * coefs[k] / zeta ** k
        if abs(term) > prev:
            break
        s += term
        prev = abs(term)
        if prev < 1e-17 * abs(s):
            break
        k += stride
        sign = -sign
    return s


def _ai_asym(z):
    if abs(np.angle(z)) <= 2 * np.pi / 3:
        zeta = 2.0 / 3.0 * z ** 1.5
        if zeta.real < -700:
            raise AiryOverflowError(f"Ai({z}) exceeds double range")
        e = np.exp(-zeta) / (2 * np.sqrt(np.pi))
        q = z ** 0.25
        return e / q * _asym_sum(_U, zeta), -q * e * _asym_sum(_V, zeta)
    w = -z
    xi = 2.0 / 3.0 * w ** 1.5
    if abs(xi.imag) > 700:
        raise AiryOverflowError(f"Ai({z}) exceeds double range")
    q = w ** 0.25
    c, s = np.cos(xi - np.pi / 4), np.sin(xi - np.pi / 4)
    P = _asym_pair(_U, xi, 0)
    Q = _asym_pair(_U, xi, 1)
    Pv = _asym_pair(_V, xi, 0)
    Qv = _asym_pair(_V, xi, 1)
    ai = (c * P + s * Q) / (np.sqrt(np.pi) * q)
    aip = q / np.sqrt(np.pi) * (s * Pv - c * Qv)
    return ai, aip


def _asym_pair(coefs, xi, parity):
    s = 0j
    prev = np.inf
    for j, k in enumerate(range(parity, len(coefs), 2)):
        term = (-1) ** j * coefs[k] / xi ** k
        if abs(term) > prev:
            break
        s += term
        prev = abs(term)
        if prev < 1e-17 * max(abs(s), 1e-300):
            break
    return s


def _taylor_march(z0, y, yp, z1, hmax=0.4):
    """Integrate y'' = z y along the segment z0 -> z1 by local Taylor series."""
    n_steps = max(1, int(math.ceil(abs(z1 - z0) / hmax)))
    h = (z1 - z0) / n_steps
    z = z0
    for _ in range(n_steps):
        a0, a1 = y, yp
        val = a0 + a1 * h
        der = a1
        hp = h
        n = 0
        coeffs = [a0, a1]
        while True:
            a2 = (z * coeffs[n] + (coeffs[n - 1] if n >= 1 else 0)) / ((n + 1) * (n + 2))
            coeffs.append(a2)
            der += (n + 2) * a2 * hp
            hp = hp * h
            val += a2 * hp
            n += 1
            if n > 6 and abs(a2 * hp) < 1e-18 * abs(val) and abs(coeffs[-2] * hp / h) < 1e-17 * abs(val):
                break
            if n > 200:
                break
        y, yp = val, der
        z = z + h
    return y, yp


def _airy_scalar(z: complex):
    r = abs(z)
    if r <= _R_SERIES:
        return _ai_maclaurin(z)
    if r >= _R_ASYM:
        return _ai_asym(z)
    th = np.angle(z)
    u = np.exp(1j * th)
    if abs(th) <= np.pi / 3:
        # Ai is recessive outward: integrate inward from the asymptotic circle
        z0 = _R_ASYM * u
        y, yp = _ai_asym(z0)
    else:
        z0 = _R_SERIES * u
        y, yp = _ai_maclaurin(z0)
    return _taylor_march(z0, y, yp, z)


def airy(z):
    """Ai(z) and Ai'(z) for complex z."""
    z, scalar = _as_complex(z)
    flat = z.ravel()
    ai = np.empty(flat.shape, dtype=complex)
    aip = np.empty(flat.shape, dtype=complex)
    for i, zi in enumerate(flat):
        ai[i], aip[i] = _airy_scalar(complex(zi))
    if scalar:
        return complex(ai[0]), complex(aip[0])
    return ai.reshape(z.shape), aip.reshape(z.shape)


def airy_ai(z):
    return airy(z)[0]
