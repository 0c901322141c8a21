"""Relative scattering determinant, scattering phase, window singular values and the
counting identity that ties them to the resonance counts.

tau(s) is the product over Fourier modes of [S_model(s)]_k / [S_F(s)]_k (modes +k and -k
contribute equally), so log|tau| is a sum of per-mode log-moduli.  On the critical line each
ratio is unimodular and equals 1 at s = 1/2, which gives the phase sigma(xi) as minus the
sum of continuously tracked per-mode arguments divided by 2 pi.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad, simpson

from .constants import _adaptive_gl, _gl
from .modes import Funnel, Model, log_ratio_truncated, poisson_coeff_arrays, ratio_extended
from .resonances import background_lattice, counting_functions, resonance_set, rho_min
from .specfun import ConvergenceError, EvalOptions, PoleError

# per-element accuracy ~1e-10 while keeping multiprecision fallbacks rare
SCAT_OPTIONS = EvalOptions(fallback_tol=1e-8)


class NearSingularityError(ArithmeticError):
    def __init__(self, message, k=None, s=None):
        super().__init__(message)
        self.k = k
        self.s = s


class BranchTrackingError(ArithmeticError):
    pass


@dataclass(frozen=True)
class DetSample:
    a: float
    theta: float
    log_abs_tau: float


@dataclass(frozen=True)
class PhaseSample:
    xi: float
    sigma: float


@dataclass(frozen=True)
class Window:
    base: float
    eta: float

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ValueError("window width eta must lie in (0, 1]")

    @property
    def r_points(self):
        return tuple(self.base + j * self.eta for j in (1, 2, 3))


@dataclass(frozen=True)
class KPolicy:
    """Mode truncation: K = ceil(factor |s - 1/2| / rho_min), extended until the tail is below abs_tol."""
    factor: float = 2.0
    abs_tol: float = 1e-10
    block: int = 8
    k_cap: int = 4000


DEFAULT_K = KPolicy()


@functools.lru_cache(maxsize=64)
def _rho(ell, r0):
    return rho_min(ell, r0)


def _log_ratio(s, k, fun: Funnel, opts):
    """Principal complex log of the per-mode ratio for arrays s, k."""
    if fun.model == Model.truncated_funnel:
        v = log_ratio_truncated(s, k, fun.omega, fun.r0, opts)
        return v.real + 1j * _wrap(v.imag)
    if fun.model == Model.extended_funnel:
        with np.errstate(divide="ignore"):
            return np.log(ratio_extended(s, k, fun.omega, fun.r0, opts))
    return np.zeros(np.broadcast(np.asarray(s), np.asarray(k)).shape, dtype=complex)


def _mode_logs(s, fun, policy, opts):
    """Per-mode log ratios for k = 0..K at one s, with the tail-monitored K."""
    if fun.model == Model.standard_funnel:
        return np.zeros(1, dtype=complex)
    K = max(1, math.ceil(policy.factor * abs(s - 0.5) / _rho(fun.ell, fun.r0)))
    ks = np.arange(K + 1)
    while True:
        try:
            vals = _log_ratio(np.full(ks.shape, complex(s)), ks, fun, opts)
        except PoleError as e:
            raise NearSingularityError(f"s = {s} is at a pole of a mode ratio", s=s) from e
        except ConvergenceError as e:
            # at s = 1/2 + m the lower parameter of the regularized 2F1 is a non-positive integer
            m = round(s.real - 0.5)
            if m >= 0 and abs(s - (0.5 + m)) < 1e-12 * max(1.0, abs(s)):
                raise NearSingularityError(f"s = {s} is a degenerate point 1/2 + {m} of the mode elements", s=s) from e
            raise
        bad = ~np.isfinite(vals)
        if bad.any():
            k = int(ks[np.flatnonzero(bad)[0]])
            raise NearSingularityError(f"mode {k} ratio is singular at s = {s}", k=k, s=s)
        if abs(vals[-1]) <= policy.abs_tol / 10:
            return vals
        if ks[-1] >= policy.k_cap:
            raise NearSingularityError(f"mode sum tail not below tolerance by k = {policy.k_cap}", s=s)
        ks = np.arange(ks[-1] + 1 + policy.block)
    # unreachable


def _weights(n):
    w = np.full(n, 2.0)
    w[0] = 1.0
    return w


def log_tau(s: complex, fun: Funnel, policy: KPolicy = DEFAULT_K, opts: EvalOptions = SCAT_OPTIONS,
            min_distance: float = 1e-8) -> float:
    """log|tau(s)| = log|ratio_0| + 2 sum_{k>=1} log|ratio_k|."""
    s = complex(s)
    vals = _mode_logs(s, fun, policy, opts)
    terms = vals.real
    _check_distance(s, vals, fun, opts, min_distance)
    return float(np.dot(_weights(len(terms)), terms))


def _check_distance(s, vals, fun, opts, min_distance, threshold=5.0):
    """Distance to a simple zero (pole) s0 of a mode ratio from |R| / |R'| (resp. with 1/R).

    R (or 1/R) is close to linear near s0, so a central difference is accurate even when the
    step straddles s0.  Only modes with a large |log|R|| can be that close.
    """
    terms = vals.real
    cand = np.flatnonzero(np.abs(terms) > threshold)
    if cand.size == 0:
        return
    h = 0.1 * min_distance * max(1.0, abs(s))
    ks = np.concatenate([cand, cand])
    pts = np.concatenate([np.full(cand.size, s + h), np.full(cand.size, s - h)])
    with np.errstate(all="ignore"):
        try:
            g = _log_ratio(pts, ks, fun, opts).reshape(2, cand.size)
        except PoleError as e:
            raise NearSingularityError(f"s = {s} is within {min_distance} of a mode pole", s=s) from e
        sign = np.where(terms[cand] < 0, 1.0, -1.0)
        g0 = sign * vals[cand]
        e = np.exp(sign * g - g0.real)             # R / |R(s)|, or 1/R scaled the same way
        deriv = np.abs(e[0] - e[1]) / (2 * h)
        dist = np.where(np.isfinite(deriv) & (deriv > 0), 1.0 / deriv, 0.0)
    if np.any(dist < min_distance):
        k = int(cand[np.argmin(dist)])
        raise NearSingularityError(f"s = {s} is within {min_distance} of a zero or pole of mode {k}", k=k, s=s)


def det_samples(a: float, thetas, fun: Funnel, policy: KPolicy = DEFAULT_K) -> list[DetSample]:
    return [DetSample(float(a), float(th), log_tau(0.5 + a * np.exp(1j * th), fun, policy)) for th in thetas]


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def sigma_phase(xi_max: float, fun: Funnel, step: float = 0.25, min_step: float = 1e-7,
                policy: KPolicy = DEFAULT_K, opts: EvalOptions = SCAT_OPTIONS,
                symmetric: bool = False) -> list[PhaseSample]:
    """sigma(xi) = (i/2pi) log tau(1/2 + i xi) on a grid of spacing `step` in [0, xi_max].

    Each mode argument is tracked from xi = 0, where every ratio equals 1; a step is
    halved while any mode argument would jump by more than pi/2.  Modes enter the sum
    once the tail monitor asks for them; before that their argument is negligible.
    With symmetric=True the samples at -xi (sigma odd) are included.
    """
    if not 0 <= xi_max <= 200:
        raise ValueError("xi_max must lie in [0, 200]")
    if not step > 0:
        raise ValueError("step must be positive")
    phases = np.zeros(1)
    out = [PhaseSample(0.0, 0.0)]
    xi = 0.0
    targets = list(np.arange(1, int(math.floor(xi_max / step + 1e-9)) + 1) * step)
    if targets and xi_max - targets[-1] > 1e-12:
        targets.append(xi_max)
    elif not targets and xi_max > 0:
        targets = [xi_max]
    for target in targets:
        h = target - xi
        while xi < target - 1e-15:
            x1 = min(target, xi + h)
            vals = _mode_logs(0.5 + 1j * x1, fun, policy, opts)
            if len(vals) > len(phases):
                phases = np.concatenate([phases, np.zeros(len(vals) - len(phases))])
            ang = np.zeros(len(phases))
            ang[:len(vals)] = vals.imag
            d = _wrap(ang - phases)
            if np.max(np.abs(d)) > np.pi / 2:
                h /= 2
                if h < min_step:
                    raise BranchTrackingError(f"phase step underflow near xi = {xi}")
                continue
            phases = phases + d
            xi = x1
        sig = -float(np.dot(_weights(len(phases)), phases)) / (2 * np.pi)
        out.append(PhaseSample(float(target), sig))
    if symmetric:
        neg = [PhaseSample(-p.xi, -p.sigma) for p in reversed(out[1:])]
        out = neg + out
    return out


def fit_sigma_quadratic(samples, xi_lo: float = 20.0, xi_hi: float = 60.0):
    """Least-squares fit sigma = A xi^2 + B xi over [xi_lo, xi_hi]; returns (A, B)."""
    x = np.array([p.xi for p in samples if xi_lo <= p.xi <= xi_hi])
    y = np.array([p.sigma for p in samples if xi_lo <= p.xi <= xi_hi])
    M = np.stack([x ** 2, x], axis=1)
    (A, B), *_ = np.linalg.lstsq(M, y, rcond=None)
    return float(A), float(B)


# ---------------------------------------------------------------- window singular values

def _norm_sq(s, k, omega, r_lo, r_hi, rel_tol, opts=SCAT_OPTIONS):
    """int_{r_lo}^{r_hi} |a_k(s;r)|^2 cosh r dr by adaptive Gauss-Legendre, rescaled by the endpoint size."""
    f = lambda r: np.abs(poisson_coeff_arrays(s, k, omega, r, opts)) ** 2 * np.cosh(r)
    ends = f(np.array([r_lo, 0.5 * (r_lo + r_hi), r_hi]))
    scale = float(np.max(ends))
    if scale == 0:
        return 0.0
    if not math.isfinite(scale):
        raise ArithmeticError("Poisson coefficient overflow in window norm")
    g = lambda r: f(r) / scale
    coarse = _gl(g, r_lo, r_hi, 24)
    v, err = _adaptive_gl(g, r_lo, r_hi, rel_tol * 0.1 * max(abs(coarse), 1e-300))
    if not err <= rel_tol * abs(v) + 1e-300:
        raise ArithmeticError(f"window quadrature error {err:.3g} above tolerance")
    return float(v) * scale


def lambda_k(s: complex, k: int, fun: Funnel, win: Window, rel_tol: float = 1e-8) -> float:
    """|2s-1| ||a_k(1-s)||_{[r1,r2]} ||a_k(s)||_{[r2,r3]} in L^2(cosh r dr)."""
    r1, r2, r3 = win.r_points
    s = complex(s)
    n1 = _norm_sq(1 - s, k, fun.omega, r1, r2, rel_tol)
    n2 = _norm_sq(s, k, fun.omega, r2, r3, rel_tol)
    return abs(2 * s - 1) * math.sqrt(n1) * math.sqrt(n2)


def log_det_window(s: complex, fun: Funnel, win: Window, tol: float = 1e-8, k_cap: int = 2000) -> float:
    """sum_k log(1 + lambda_k(s)) over all modes (+-k counted twice).

    Past K = |s - 1/2|/rho_min the terms decay geometrically; the sum stops once the
    geometric tail estimate drops below tol * max(1, sum).
    """
    total = math.log1p(lambda_k(s, 0, fun, win))
    prev = None
    k_min = abs(s - 0.5) / _rho(fun.ell, win.base)
    for k in range(1, k_cap + 1):
        t = math.log1p(lambda_k(s, k, fun, win))
        total += 2 * t
        if prev is not None and k > k_min and 0 <= t < prev:
            q = t / prev
            if 2 * t * q / (1 - q) <= tol * max(1.0, total):
                return total
        prev = t
    raise ArithmeticError("window determinant tail did not converge")


def _int_exp(c, x, y):
    """int_x^y e^{c r} dr, continuous through c = 0."""
    if c == 0:
        return y - x
    return math.exp(c * x) * math.expm1(c * (y - x)) / c


def cusp_mu1(s: complex, b: float, eta: float) -> float:
    """Sole singular value of the rank-one cusp window operator."""
    s = complex(s)
    c = 2 * s.real - 1
    j1 = _int_exp(c, b + eta, b + 2 * eta)
    j2 = _int_exp(c, b + 2 * eta, b + 3 * eta)
    d = abs(2 * s - 1)
    if d == 0:
        return math.inf
    return math.sqrt(j1) * math.sqrt(j2) / d


# ---------------------------------------------------------------- counting identity

@dataclass(frozen=True)
class CountingReport:
    a: float
    lhs: float
    rhs: float
    defect: float
    sigma_term: float
    arc_term: float
    sliver_bound: float


def _background(fun: Funnel, a):
    return background_lattice(Model.standard_funnel, a, fun.ell)


def _sigma_integral(a, fun, t0=0.1, step=0.05, policy=DEFAULT_K):
    samples = sigma_phase(a, fun, step=step, policy=policy)
    x = np.array([p.xi for p in samples])
    y = np.array([p.sigma for p in samples])
    m = x >= t0 - 1e-12
    if not np.isclose(x[m][0], t0):
        x = np.concatenate([[t0], x[m]])
        y = np.concatenate([[np.interp(t0, [p.xi for p in samples], [p.sigma for p in samples])], y[m]])
    else:
        x, y = x[m], y[m]
    return float(simpson(y / x, x=x))


def _arc_integral(a, fun, policy=DEFAULT_K, eps=1.0):
    """(2/pi) int_0^{pi/2 - eps/a^2} log|tau(1/2 + a e^{i theta})| d theta and a bound for the sliver."""
    top = np.pi / 2 - eps / a ** 2
    g = lambda th: log_tau(0.5 + a * np.exp(1j * th), fun, policy)
    pts = np.linspace(0, top, 9)
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for lo, hi in zip(pts[:-1], pts[1:]):
            v, _ = quad(g, lo, hi, epsabs=1e-6, epsrel=1e-8, limit=200)
            total += v
    # |log tau| on the omitted sliver: it tends to 0 on the critical line
    sliver = (eps / a ** 2) * abs(g(top))
    return 2 / np.pi * total, 2 / np.pi * sliver


def verify_counting_identity(a: float, fun: Funnel, rset=None, sigma_step: float = 0.05,
                             policy: KPolicy = DEFAULT_K, workers=None, arc_eps: float = 1.0) -> CountingReport:
    """lhs = Ntilde_P(a) - Ntilde_0(a); rhs = 4 int_{0.1}^a sigma/t dt + arc term; defect = lhs - rhs.

    The arc integral stops at theta = pi/2 - arc_eps/a^2; for a near 1 the default cutoff drops
    most of the arc, and sliver_bound estimates the omitted piece.
    """
    if rset is None:
        rset = resonance_set(fun, a, workers=workers)
    elif rset.radius < a:
        raise ValueError("resonance set does not reach the requested radius")
    lhs = counting_functions(rset).Ntilde(a) - counting_functions(_background(fun, a)).Ntilde(a)
    st = 4 * _sigma_integral(a, fun, step=sigma_step, policy=policy)
    arc, sliver = _arc_integral(a, fun, policy, arc_eps)
    rhs = st + arc
    return CountingReport(float(a), float(lhs), float(rhs), float(lhs - rhs), st, arc, sliver)
