"""Background resonance lattices, mode-by-mode resonance root finding and counting functions.

Zeros of an entire mode function G are located with the argument principle on a grid of
cells.  Every cell edge is sampled adaptively until consecutive log G increments are small,
so the winding number of each cell is exact; cells containing more than one zero are
subdivided, and each isolated zero is polished by Newton's method started from the first
argument-principle moment of its cell.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .modes import Funnel, Model, extended_target_mp, log_extended_target, truncated_target
from .phase import zero_curve
from .specfun import DEFAULT_OPTIONS, EvalOptions

# loose enough that only badly cancelling points go to multiprecision
ROOT_OPTIONS = EvalOptions(fallback_tol=1e-7)
# accepted relative error of the extended-funnel target on contour edges
EXTENDED_CANCEL_TOL = 1e-4
# edge subdivision budget (segments per edge); exceeding it means log G is numerically noisy
_MAX_SEGMENTS = 4096


class RootFindingError(ArithmeticError):
    pass


class ContourError(RootFindingError):
    """A cell edge passes (numerically) through a zero."""


class CountMismatchError(RootFindingError):
    def __init__(self, message, winding=None, found=None):
        super().__init__(message)
        self.winding = winding
        self.found = found


class OutOfRangeError(ValueError):
    pass


@dataclass(frozen=True)
class ResonanceEntry:
    s: complex
    multiplicity: int
    mode: int  # originating |k|; -1 for background aggregates

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be positive")


@dataclass(frozen=True)
class SearchRegion:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    grid_step: float = 1.0

    def __post_init__(self):
        if not (self.re_max > self.re_min and self.im_max > self.im_min and self.grid_step > 0):
            raise ValueError("empty search region or non-positive grid step")


@dataclass
class ResonanceSet:
    entries: list
    radius: float
    model: str
    # members lying within 1e-4 of s = 1/2 - m (kept in entries, listed for inspection)
    near_half_integer: list = field(default_factory=list)
    # coincidences between different modes that were merged
    flagged: list = field(default_factory=list)
    k_max: int | None = None

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def points(self) -> np.ndarray:
        return np.array([e.s for e in self.entries], dtype=complex)

    def multiplicities(self) -> np.ndarray:
        return np.array([e.multiplicity for e in self.entries], dtype=int)

    def total(self) -> int:
        return int(self.multiplicities().sum()) if self.entries else 0


# ---------------------------------------------------------------- background lattices

def background_lattice(model, radius: float, ell: float | None = None) -> ResonanceSet:
    """Resonances of the standard funnel (needs ell) or of the hyperbolic plane within |s-1/2| <= radius."""
    if radius < 1:
        raise ValueError("radius must be at least 1")
    model = Model(model)
    out = []
    if model == Model.standard_funnel:
        if ell is None or not ell > 0:
            raise ValueError("standard funnel lattice needs ell > 0")
        omega = 2 * math.pi / ell
        n = 0
        while 1.5 + 2 * n <= radius:
            x = 1.5 + 2 * n
            kmax = int(math.floor(math.sqrt(max(radius ** 2 - x ** 2, 0.0)) / omega))
            for k in range(-kmax, kmax + 1):
                if x ** 2 + (k * omega) ** 2 <= radius ** 2:
                    out.append(ResonanceEntry(complex(-1 - 2 * n, k * omega), 2, -1))
            n += 1
    elif model == Model.hyperbolic_plane:
        n = 0
        while n + 0.5 <= radius:
            out.append(ResonanceEntry(complex(-n, 0.0), 2 * n + 1, -1))
            n += 1
    else:
        raise ValueError(f"no background lattice for {model.value}")
    out.sort(key=lambda e: (abs(e.s - 0.5), e.s.imag))
    return ResonanceSet(out, float(radius), model.value)


# ---------------------------------------------------------------- mode targets

def mode_target(fun: Funnel, k: int, opts: EvalOptions = ROOT_OPTIONS) -> Callable:
    """Vectorized s -> log G_k(s) for the entire function whose zeros are the mode-k resonances."""
    if fun.r0 > 0:
        def logg(s):
            L, V = truncated_target(np.asarray(s, dtype=complex), k, fun.omega, fun.r0, opts)
            with np.errstate(divide="ignore", invalid="ignore"):
                return L + np.log(V)
    elif fun.r0 < 0:
        # the two basis terms cancel by up to ~1e14 for Re s << 0; the winding count needs only a
        # few correct digits, so multiprecision is used only past EXTENDED_CANCEL_TOL
        def logg(s):
            return log_extended_target(np.asarray(s, dtype=complex), k, fun.omega, fun.r0, opts,
                                       cancel_tol=EXTENDED_CANCEL_TOL)
    else:
        raise ValueError("the standard funnel has the explicit background lattice")
    return logg


def precise_target(fun: Funnel, k: int) -> Callable:
    """log G_k evaluated so that cancellation near zeros does not limit the result."""
    if fun.r0 > 0:
        return mode_target(fun, k, DEFAULT_OPTIONS)
    return lambda s: extended_target_mp(s, k, fun.omega, fun.r0)


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


# ---------------------------------------------------------------- argument principle on edges

_MAX_DIM = 1e-10      # relative length below which an edge segment counts as hitting a zero
_DARG = np.pi / 3
_DCURV = 0.25


def _edge_data(logf, P, Q, lP, lQ, min_len):
    """Total complex log increment and first moment along straight edges P -> Q.

    Returns (delta, moment, ok); moment approximates int s dlog G.
    """
    ne = P.size
    delta = np.zeros(ne, dtype=complex)
    moment = np.zeros(ne, dtype=complex)
    ok = np.isfinite(lP) & np.isfinite(lQ)
    eid = np.flatnonzero(ok)
    p, q, lp, lq = P[ok], Q[ok], lP[ok], lQ[ok]
    while eid.size:
        if eid.size > _MAX_SEGMENTS * max(ne, 16):
            raise ContourError("edge subdivision did not converge; log G is numerically noisy")
        m = 0.5 * (p + q)
        lm = logf(m)
        d1 = lm - lp
        d2 = lq - lm
        d1 = d1.real + 1j * _wrap(d1.imag)
        d2 = d2.real + 1j * _wrap(d2.imag)
        fin = np.isfinite(lm)
        good = fin & (np.abs(d1.imag) < _DARG) & (np.abs(d2.imag) < _DARG) & (np.abs(d2 - d1) < _DCURV)
        if np.any(good):
            g = good
            np.add.at(delta, eid[g], d1[g] + d2[g])
            np.add.at(moment, eid[g], 0.5 * (p[g] + m[g]) * d1[g] + 0.5 * (m[g] + q[g]) * d2[g])
        bad = ~good
        short = np.abs(q - p) < min_len
        dead = bad & (short | ~fin)
        if np.any(dead):
            ok[eid[dead]] = False
        split = bad & ~dead & ok[eid]
        if not np.any(split):
            break
        eid = np.concatenate([eid[split], eid[split]])
        p, q, lp, lq, m_, lm_ = p[split], q[split], lp[split], lq[split], m[split], lm[split]
        p, q, lp, lq = (np.concatenate([p, m_]), np.concatenate([m_, q]),
                        np.concatenate([lp, lm_]), np.concatenate([lm_, lq]))
    return delta, moment, ok


@dataclass
class _Grid:
    xs: np.ndarray
    ys: np.ndarray
    winding: np.ndarray   # (nx, ny) integer windings
    moment: np.ndarray    # (nx, ny) first moments / (2 pi i)
    ok: bool


def _grid_windings(logf, x0, x1, y0, y1, nx, ny, shift=0.0, keep=None):
    """Cell windings on an nx x ny grid whose interior lines are shifted by `shift` cells."""
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    if shift:
        xs[1:-1] += shift * (x1 - x0) / nx
        ys[1:-1] += shift * (y1 - y0) / ny
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = X + 1j * Y
    if keep is None:
        keep = np.ones((nx, ny), dtype=bool)
    # nodes and edges touched by kept cells
    hmask = np.zeros((nx, ny + 1), dtype=bool)
    vmask = np.zeros((nx + 1, ny), dtype=bool)
    hmask[:, :-1] |= keep
    hmask[:, 1:] |= keep
    vmask[:-1, :] |= keep
    vmask[1:, :] |= keep
    nmask = np.zeros((nx + 1, ny + 1), dtype=bool)
    nmask[:-1, :] |= hmask
    nmask[1:, :] |= hmask
    lZ = np.full(Z.shape, np.nan + 0j)
    lZ[nmask] = logf(Z[nmask])
    scale = max(x1 - x0, y1 - y0)
    min_len = _MAX_DIM * max(scale, 1.0)

    hi, hj = np.nonzero(hmask)
    dh, mh, okh = _edge_data(logf, Z[hi, hj], Z[hi + 1, hj], lZ[hi, hj], lZ[hi + 1, hj], min_len)
    vi, vj = np.nonzero(vmask)
    dv, mv, okv = _edge_data(logf, Z[vi, vj], Z[vi, vj + 1], lZ[vi, vj], lZ[vi, vj + 1], min_len)
    if not (okh.all() and okv.all()):
        return _Grid(xs, ys, None, None, False)
    H = np.zeros((nx, ny + 1), dtype=complex)
    HM = np.zeros((nx, ny + 1), dtype=complex)
    V = np.zeros((nx + 1, ny), dtype=complex)
    VM = np.zeros((nx + 1, ny), dtype=complex)
    H[hi, hj], HM[hi, hj] = dh, mh
    V[vi, vj], VM[vi, vj] = dv, mv
    tot = H[:, :-1] + V[1:, :] - H[:, 1:] - V[:-1, :]
    mom = HM[:, :-1] + VM[1:, :] - HM[:, 1:] - VM[:-1, :]
    w = tot.imag / (2 * np.pi)
    wi = np.rint(w).astype(int)
    if np.any(np.abs(w - wi)[keep] > 1e-3):
        return _Grid(xs, ys, None, None, False)
    wi[~keep] = 0
    return _Grid(xs, ys, wi, mom / (2j * np.pi), True)


def _robust_grid(logf, x0, x1, y0, y1, nx, ny, keep=None, retries=5, pad_outer=False):
    """Grid windings, retried with shifted interior lines (and, if allowed, an enlarged box)."""
    h = max((x1 - x0) / nx, (y1 - y0) / ny)
    for attempt in range(retries + 1):
        shift = 0.0 if attempt == 0 else 0.173 * attempt * (-1) ** attempt
        pad = 0.1 * attempt * h if pad_outer else 0.0
        g = _grid_windings(logf, x0 - pad, x1 + pad, y0 - pad, y1 + pad, nx, ny, shift, keep)
        if g.ok:
            return g
    raise ContourError(f"contour passes through a zero in [{x0}, {x1}] x [{y0}, {y1}] after {retries} perturbations")


# ---------------------------------------------------------------- Newton polish

def _newton(logf, z, cell_scale, mult=1, maxit=60, precise=None):
    """Newton iteration on G via its log-derivative; returns (z, converged).

    After the double-precision phase stalls, up to six steps use `precise` for log G(z)
    (the derivative keeps coming from logf, which only needs modest relative accuracy).
    """
    h = 1e-3 * min(1.0, cell_scale)
    tol = 1e-12 * max(1.0, abs(z))
    offs = np.array([h, -h, 0.5 * h, -0.5 * h], dtype=complex)

    def step_at(z, l0):
        lr = logf(z + offs)
        if not np.all(np.isfinite(lr)):
            return None
        if not np.isfinite(l0):
            return 0j        # exact zero of the computed function
        ref = lr[0].real
        e = np.exp(lr - ref)
        d1 = (e[0] - e[1]) / (2 * h)
        d2 = (e[2] - e[3]) / h
        deriv = (4 * d2 - d1) / 3          # G' exp(-ref), Richardson-extrapolated
        return mult * np.exp(l0 - ref) / deriv

    last = math.inf
    for _ in range(maxit):
        st = step_at(z, logf(np.array([z]))[0])
        if st is None:
            return z, False
        z = z - st
        if abs(st) <= tol:
            break
        if abs(st) > 10 * cell_scale:
            return z, False
        if abs(st) > 0.5 * last and abs(st) < 1e-6 * max(1.0, abs(z)):
            break                          # stalled at the double-precision noise level
        last = abs(st)
    else:
        return z, False
    if precise is None:
        return z, abs(st) <= 1e-10
    for _ in range(6):
        st = step_at(z, precise(np.array([z]))[0])
        if st is None:
            return z, False
        z = z - st
        if abs(st) <= tol:
            break
    return z, abs(st) <= 1e-10


def _in_cell(z, x0, x1, y0, y1, slack):
    return x0 - slack <= z.real <= x1 + slack and y0 - slack <= z.imag <= y1 + slack


def _resolve_cell(logf, x0, x1, y0, y1, n, center, depth=0, max_depth=14, precise=None):
    """Isolate and polish the n zeros (with multiplicity) inside one cell."""
    size = max(x1 - x0, y1 - y0)
    slack = 1e-9 * max(1.0, abs(center))
    if n == 1 or depth >= max_depth:
        z, conv = _newton(logf, complex(center), size, mult=n, precise=precise)
        if conv and _in_cell(z, x0, x1, y0, y1, slack):
            return [(z, n)]
        if n == 1 and depth >= max_depth:
            raise RootFindingError(f"Newton failed near {center}")
        if depth >= max_depth:
            return [(complex(center), n)]
    g = _robust_grid(logf, x0, x1, y0, y1, 2, 2)
    if g.winding.sum() != n:
        raise CountMismatchError(f"sub-cell windings {g.winding.sum()} != {n}", n, int(g.winding.sum()))
    out = []
    for i in range(2):
        for j in range(2):
            m = int(g.winding[i, j])
            if m:
                out += _resolve_cell(logf, g.xs[i], g.xs[i + 1], g.ys[j], g.ys[j + 1], m,
                                     g.moment[i, j] / m, depth + 1, max_depth, precise)
    return out


# ---------------------------------------------------------------- mode zeros

def _half_integer_close(z, tol=1e-4):
    # s = 1/2 - m (m = 0, 1, 2, ...)
    m = np.round(0.5 - z.real)
    return m >= 0 and abs(z - (0.5 - m)) < tol


def _search(logf, region: SearchRegion, keep_fn=None, precise=None):
    nx = max(1, int(math.ceil((region.re_max - region.re_min) / region.grid_step)))
    ny = max(1, int(math.ceil((region.im_max - region.im_min) / region.grid_step)))
    keep = None
    if keep_fn is not None:
        xs = np.linspace(region.re_min, region.re_max, nx + 1)
        ys = np.linspace(region.im_min, region.im_max, ny + 1)
        keep = keep_fn(xs, ys)
    g = _robust_grid(logf, region.re_min, region.re_max, region.im_min, region.im_max, nx, ny, keep,
                     pad_outer=True)
    total = int(g.winding.sum())
    zeros = []
    for i, j in zip(*np.nonzero(g.winding)):
        n = int(g.winding[i, j])
        if n < 0:
            raise RootFindingError("negative winding: the target function has a pole in the region")
        zeros += _resolve_cell(logf, g.xs[i], g.xs[i + 1], g.ys[j], g.ys[j + 1], n, g.moment[i, j] / n,
                               precise=precise)
    found = sum(m for _, m in zeros)
    if found != total:
        raise CountMismatchError(f"refined zeros {found} != winding total {total}", total, found)
    return zeros, total


def find_mode_zeros(fun: Funnel, k: int, region: SearchRegion, opts: EvalOptions = ROOT_OPTIONS,
                    keep_fn=None) -> list:
    """Zeros of the mode-k resonance function of a truncated (r0 > 0) or extended (r0 < 0) funnel.

    Every zero inside the region is returned, sorted by (Im s, Re s); the count is certified by
    the argument principle.  The target is entire, so zeros next to half-integers are kept.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    logf = mode_target(fun, k, opts)
    zeros, _ = _search(logf, region, keep_fn, precise_target(fun, k))
    entries = []
    tol = 1e-9
    for z, m in sorted(zeros, key=lambda t: (t[0].imag, t[0].real)):
        if abs(z.imag) <= tol * max(1.0, abs(z)):
            z = complex(z.real, 0.0)
        # a perturbed (enlarged) box may have picked up zeros just outside the region
        if not _in_cell(z, region.re_min, region.re_max, region.im_min, region.im_max, tol):
            continue
        entries.append(ResonanceEntry(complex(z), int(m), int(k)))
    return entries


# ---------------------------------------------------------------- resonance sets

def rho_min(ell: float, r: float, n_theta: int = 24) -> float:
    """min over theta in [0, pi/2) of the Re phi = 0 curve radius, by a scan plus golden section."""
    from scipy.optimize import minimize_scalar
    f = lambda th: zero_curve(th, ell, r)
    ths = np.linspace(0.0, 0.5 * np.pi - 1e-3, n_theta)
    vals = np.array([f(t) for t in ths])
    i = int(np.argmin(vals))
    lo, hi = ths[max(i - 1, 0)], ths[min(i + 1, n_theta - 1)]
    if hi <= lo:
        return float(vals[i])
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-8})
    return float(min(res.fun, vals.min()))


def _workers():
    try:
        return max(1, int(os.environ.get("HYPRES_THREADS", "1")))
    except ValueError:
        return 1


def _mode_job(args):
    fun, k, region, radius = args
    c = 0.5

    def keep_fn(xs, ys):
        # drop cells lying entirely outside the disk |s - 1/2| <= radius
        dx = np.maximum(np.maximum(xs[:-1] - c, 0), c - xs[1:])
        dy = np.maximum(np.maximum(ys[:-1], 0), -ys[1:])
        return (dx[:, None] ** 2 + dy[None, :] ** 2) <= (radius + region.grid_step) ** 2

    return find_mode_zeros(fun, k, region, keep_fn=keep_fn)


def resonance_set(fun: Funnel, radius: float, grid_step: float = 1.0, k_max: int | None = None,
                  workers: int | None = None) -> ResonanceSet:
    """All resonances of a truncated or extended funnel with |s - 1/2| <= radius."""
    if radius > 60:
        raise ValueError("radius above the supported budget of 60")
    if fun.r0 == 0:
        return background_lattice(Model.standard_funnel, radius, fun.ell)
    if k_max is None:
        k_max = int(math.ceil(radius / rho_min(fun.ell, abs(fun.r0))))
    # the bottom edge sits slightly below the real axis, at a non-grid-aligned offset
    region = SearchRegion(0.5 - radius, 0.5, -0.37 * grid_step, radius, grid_step)
    jobs = [(fun, k, region, radius) for k in range(k_max + 1)]
    workers = _workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_mode_job, jobs))
    else:
        results = [_mode_job(j) for j in jobs]

    raw = []
    for k, entries in enumerate(results):
        mult = 1 if k == 0 else 2          # modes k and -k coincide
        for e in entries:
            if e.s.imag < 0 or abs(e.s - 0.5) > radius:
                continue
            raw.append(ResonanceEntry(e.s, e.multiplicity * mult, k))
            if e.s.imag > 0:
                raw.append(ResonanceEntry(e.s.conjugate(), e.multiplicity * mult, k))
    raw.sort(key=lambda e: (e.mode, e.s.imag, e.s.real))
    merged, flagged = [], []
    for e in raw:
        hit = next((i for i, f in enumerate(merged) if abs(f.s - e.s) < 1e-8), None)
        if hit is None:
            merged.append(e)
        else:
            f = merged[hit]
            flagged.append((f, e))
            merged[hit] = ResonanceEntry(f.s, f.multiplicity + e.multiplicity, min(f.mode, e.mode))
    near = [e for e in merged if _half_integer_close(e.s)]
    return ResonanceSet(merged, float(radius), fun.model.value, near, flagged, k_max)


# ---------------------------------------------------------------- counting functions

@dataclass
class CountingFunctions:
    radii: np.ndarray          # sorted |s - 1/2|
    mult: np.ndarray           # matching multiplicities
    limit: float               # largest radius the set is complete to

    def _check(self, t):
        if t > self.limit * (1 + 1e-12):
            raise OutOfRangeError(f"query {t} beyond the completeness radius {self.limit}")

    def N(self, t: float) -> int:
        self._check(t)
        i = np.searchsorted(self.radii, t, side="right")
        return int(self.mult[:i].sum())

    def Ntilde(self, a: float) -> float:
        """int_0^a 2 N(t)/t dt, integrated exactly over the staircase."""
        self._check(a)
        if a <= 0:
            return 0.0
        i = np.searchsorted(self.radii, a, side="right")
        r, m = self.radii[:i], self.mult[:i]
        return float(np.sum(2 * m * np.log(a / r)))


def counting_functions(rset: ResonanceSet) -> CountingFunctions:
    if len(rset) == 0:
        return CountingFunctions(np.zeros(0), np.zeros(0, dtype=int), rset.radius)
    r = np.abs(rset.points() - 0.5)
    order = np.argsort(r, kind="stable")
    return CountingFunctions(r[order], rset.multiplicities()[order], rset.radius)
