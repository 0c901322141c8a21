"""Positive-part quadrature and the geometric resonance-counting constants.

The double integral  int_0^{pi/2} int_0^inf [F(x e^{i theta})]_+ x^{-3} dx dtheta  is computed
after the substitution u = 1/x, which turns the slowly decaying x-tail into the
smooth finite-interval integrand [F(e^{i theta}/u)]_+ u on [0, 1/rho(theta)].
For each theta the support boundary is located by a scan plus Brent refinement and
each positive piece is integrated by nested Gauss-Legendre rules; theta is handled
by adaptive Gauss-Kronrod.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .phase import H_arrays, I_arrays


class QuadratureError(ArithmeticError):
    def __init__(self, message, achieved_error=None):
        super().__init__(message)
        self.achieved_error = achieved_error


class EndKind(str, Enum):
    funnel = "funnel"
    planar = "planar"
    cusp = "cusp"


@dataclass(frozen=True)
class EndDescriptor:
    kind: EndKind
    ell: float = 2 * math.pi
    b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", EndKind(self.kind))
        if self.kind == EndKind.funnel and not self.ell > 0:
            raise ValueError("funnel end needs ell > 0")


@dataclass(frozen=True)
class SurfaceDescriptor:
    euler_characteristic: int
    core_volume: float
    ends: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    theta_panels: int = 8


DEFAULT_SPEC = QuadratureSpec()

_GL = {n: np.polynomial.legendre.leggauss(n) for n in (24, 48)}


def _gl(f, a, b, n):
    x, w = _GL[n]
    h = 0.5 * (b - a)
    return h * np.dot(w, f(a + h * (x + 1)))


def _adaptive_gl(f, a, b, tol, depth=0):
    q1 = _gl(f, a, b, 24)
    q2 = _gl(f, a, b, 48)
    err = abs(q2 - q1)
    if err <= tol or depth > 30 or b - a < 1e-13:
        return q2, err
    m = 0.5 * (a + b)
    l, el = _adaptive_gl(f, a, m, tol / 2, depth + 1)
    r, er = _adaptive_gl(f, m, b, tol / 2, depth + 1)
    return l + r, el + er


def _support_intervals(f, x_lo=1e-4, x_hi=1e4, n=321):
    """Intervals of x on which f > 0, refined at sign changes; the last may extend to infinity."""
    xs = np.geomspace(x_lo, x_hi, n)
    v = np.asarray(f(xs), dtype=float)
    if not np.all(np.isfinite(v)):
        bad = ~np.isfinite(v)
        xs, v = xs[~bad], v[~bad]
    scale = max(1.0, float(np.max(np.abs(v))))
    pos = v > 1e-12 * scale
    if pos[0]:
        raise QuadratureError("integrand is positive near x = 0; support must stay away from the origin")
    if not pos.any():
        return []
    out = []
    i = 0
    m = len(xs)
    g = lambda x: float(f(np.array([x]))[0])
    while i < m:
        if not pos[i]:
            i += 1
            continue
        j = i
        while j + 1 < m and pos[j + 1]:
            j += 1
        lo = _refine(g, xs[i - 1], xs[i])
        hi = math.inf if j == m - 1 else _refine(g, xs[j], xs[j + 1])
        out.append((lo, hi))
        i = j + 1
    return out


def _refine(g, a, b):
    fa, fb = g(a), g(b)
    if not (np.isfinite(fa) and np.isfinite(fb)) or fa * fb > 0:
        return a if abs(fa) < abs(fb) else b
    return brentq(g, a, b, xtol=1e-14, rtol=1e-15)


def inner_positive_integral(f: Callable, tol: float = 1e-11):
    """int_0^inf [f(x)]_+ / x^3 dx for vectorized real f; returns (value, error estimate)."""
    total, err = 0.0, 0.0
    for lo, hi in _support_intervals(f):
        u_lo = 0.0 if math.isinf(hi) else 1.0 / hi
        u_hi = 1.0 / lo
        h = lambda u: np.maximum(f(1.0 / u), 0.0) * u
        q, e = _adaptive_gl(h, u_lo, u_hi, tol)
        total += q
        err += e
    return total, err


def quad_positive_part(integrand: Callable, spec: QuadratureSpec = DEFAULT_SPEC, breakpoints=()):
    """int_0^{pi/2} int_0^inf [integrand(x, theta)]_+ / x^3 dx dtheta -> (value, error estimate)."""
    inner_tol = spec.abs_tol * 0.01

    def g(theta):
        return inner_positive_integral(lambda x: integrand(x, theta), tol=inner_tol)[0]

    pts = sorted({float(p) for p in breakpoints if 0 < p < np.pi / 2})
    edges = np.concatenate([[0.0], pts, [np.pi / 2]])
    nodes = [0.0]
    for a, b in zip(edges[:-1], edges[1:]):
        seg = list(np.linspace(a, b, spec.theta_panels + 1)[1:])
        if b == np.pi / 2:
            # doubled density next to theta = pi/2
            seg.insert(-1, 0.5 * (seg[-2] + seg[-1]) if len(seg) > 1 else 0.5 * (a + b))
        nodes.extend(seg)
    nodes = np.array(sorted(set(nodes)))
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for c, d in zip(nodes[:-1], nodes[1:]):
            v, e = quad(g, c, d, epsabs=spec.abs_tol / len(nodes), epsrel=spec.rel_tol, limit=200)
            total += v
            err += e
    tol = max(spec.abs_tol, spec.rel_tol * abs(total)) * 10
    if err > tol:
        raise QuadratureError(f"quadrature error {err:.3g} exceeds tolerance {tol:.3g}", achieved_error=err)
    return total, err


def _funnel_integrand(ell, r0):
    return lambda x, th: I_arrays(x * np.exp(1j * th), ell, r0, check=False)


def _obstacle_integrand(r0):
    return lambda x, th: H_arrays(x * np.exp(1j * th), r0, check=False)


def _funnel_breaks(r0):
    # for r0 < 0 the large-x slope 2 r0 cos(theta) + pi sin(theta) changes sign here
    return (math.atan(-2 * r0 / math.pi),) if r0 < 0 else ()


def A_funnel_with_error(ell: float, r0: float, spec: QuadratureSpec = DEFAULT_SPEC):
    if not ell > 0:
        raise ValueError("ell must be positive")
    q, e = quad_positive_part(_funnel_integrand(ell, r0), spec, _funnel_breaks(r0))
    return -ell / (2 * math.pi) * math.sinh(r0) + 4 / math.pi * q, 4 / math.pi * e


def A_funnel(ell: float, r0: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return A_funnel_with_error(ell, r0, spec)[0]


def A_obstacle_with_error(r0: float, spec: QuadratureSpec = DEFAULT_SPEC):
    if r0 == 0:
        return 1.0, 0.0
    if not r0 > 0:
        raise ValueError("obstacle radius must be positive")
    q, e = quad_positive_part(_obstacle_integrand(r0), spec)
    return 2 - math.cosh(r0) + 4 / math.pi * q, 4 / math.pi * e


def A_obstacle(r0: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return A_obstacle_with_error(r0, spec)[0]


def B_end_with_error(end: EndDescriptor, spec: QuadratureSpec = DEFAULT_SPEC):
    if end.kind == EndKind.cusp:
        raise ValueError("cusps carry no B constant")
    if end.kind == EndKind.funnel:
        q, e = quad_positive_part(_funnel_integrand(end.ell, end.b), spec, _funnel_breaks(end.b))
        return 4 / math.pi * q - end.ell / 4, 4 / math.pi * e
    if end.b == 0:
        return 0.0, 0.0
    q, e = quad_positive_part(_obstacle_integrand(end.b), spec)
    return 4 / math.pi * q, 4 / math.pi * e


def B_end(end: EndDescriptor, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return B_end_with_error(end, spec)[0]


def zero_volume(end: EndDescriptor) -> float:
    if end.kind == EndKind.cusp:
        raise ValueError("cusp 0-volume is part of the core volume")
    if end.kind == EndKind.planar:
        return -2 * math.pi * math.cosh(end.b)
    return -end.ell * math.sinh(end.b)


def upper_bound_surface(surf: SurfaceDescriptor, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    total = surf.core_volume / (2 * math.pi)
    for end in surf.ends:
        if end.kind == EndKind.funnel:
            total += A_funnel(end.ell, end.b, spec)
        elif end.kind == EndKind.planar:
            total += A_obstacle(end.b, spec)
    return total


def hyperbolic_bound(euler_characteristic: int, funnel_lengths) -> float:
    """|chi| + sum ell_j / 4: the closed form for a hyperbolic surface with geodesic funnel boundaries."""
    return abs(euler_characteristic) + sum(funnel_lengths) / 4


# ---------------------------------------------------------------- Monte Carlo oracle

def _support_radius(integrand, n_theta=65):
    """Smallest x at which the integrand is positive, over a theta grid (for the sampling box)."""
    x_min = math.inf
    for th in np.linspace(1e-3, np.pi / 2, n_theta):
        iv = _support_intervals(lambda x: integrand(x, th))
        if iv:
            x_min = min(x_min, iv[0][0])
    return x_min


def monte_carlo_positive_part(integrand: Callable, n_samples: int = 10_000_000, seed: int = 12345,
                              chunk: int = 1_000_000):
    """Plain Monte-Carlo estimate of the positive-part double integral -> (mean, standard error)."""
    x_min = _support_radius(integrand)
    if math.isinf(x_min):
        return 0.0, 0.0
    u_max = 1.5 / x_min
    rng = np.random.default_rng(seed)
    area = u_max * np.pi / 2
    s1 = s2 = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        u = rng.uniform(0, u_max, m)
        th = rng.uniform(0, np.pi / 2, m)
        with np.errstate(all="ignore"):
            v = np.maximum(integrand(1.0 / u, th), 0.0) * u
        v = np.where(np.isfinite(v), v, 0.0)
        s1 += v.sum()
        s2 += (v * v).sum()
        done += m
    mean = s1 / n_samples
    var = s2 / n_samples - mean ** 2
    return area * mean, area * math.sqrt(max(var, 0.0) / n_samples)


def A_funnel_monte_carlo(ell, r0, n_samples=10_000_000, seed=12345):
    q, se = monte_carlo_positive_part(_funnel_integrand(ell, r0), n_samples, seed)
    return -ell / (2 * math.pi) * math.sinh(r0) + 4 / math.pi * q, 4 / math.pi * se


def A_obstacle_monte_carlo(r0, n_samples=10_000_000, seed=12345):
    q, se = monte_carlo_positive_part(_obstacle_integrand(r0), n_samples, seed)
    return 2 - math.cosh(r0) + 4 / math.pi * q, 4 / math.pi * se
